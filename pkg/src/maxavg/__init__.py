"""maxavg: exponent-region calculus, discrete multilinear maximal averages,
and tile/tree/forest combinatorics with an empirical inequality harness."""

__version__ = "0.1.0"

from .regions import (  # noqa: F401
    AveragingMatrix,
    ExponentTuple,
    MembershipVerdict,
    complexity,
    complexity_region_contains,
    dual_exponent,
    extend_matrix,
    hull_contains,
    is_independence_set,
    nondegeneracy_rank,
    region_contains,
    vertex_set,
)
from .signals import Signal, lp_norm, weak_lp  # noqa: F401
