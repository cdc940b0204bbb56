"""Exact symbolic summation: creative telescoping, boundary repair and guessing."""

from .algebra import MPoly, PoleError, RatFun, VarTable, default_table, parse_ratfun
from .hyperterm import HyperTerm, eval_term, parse_term
from .ore import OreAlgebra, OrePoly, parse_operator
from .telescoping import CTResult, gosper, multisum_ct, verify_ct, zeilberger

__version__ = "0.1.0"

__all__ = [
    "MPoly", "PoleError", "RatFun", "VarTable", "default_table", "parse_ratfun",
    "HyperTerm", "eval_term", "parse_term", "OreAlgebra", "OrePoly", "parse_operator",
    "CTResult", "gosper", "multisum_ct", "verify_ct", "zeilberger",
]
