"""Numerical verification of the BC_n elliptic summation formula.

Submodules: ``kernel`` (theta functions, elliptic gamma), ``summation``
(parameter sets, lattice sums, closed product), ``invariants`` (the
fundamental W_n-invariants), ``jackson`` (expectation values and contiguity
relations), ``suite`` and ``cli`` (seeded sweeps and reports).
"""
from .errors import (
    ConfigError,
    DomainError,
    EllsumError,
    GenericityFailure,
    NearPole,
    ObservableSingular,
    RangeError,
    TruncationFailure,
)
from .invariants import InvariantParams, WnElement, apply_wn, e_explicit, e_recursive, e_table, reference_point
from .kernel import (
    DEFAULT_PRECISION,
    Nome,
    Precision,
    elliptic_gamma,
    elliptic_pochhammer,
    qpochhammer_inf,
    theta,
    theta_factorial,
)
from .summation import (
    Balancing,
    ParameterSet,
    base_point,
    lhs_sum,
    phi_shift_ratio,
    rhs_product,
    simplex_iter,
    solve_constraints,
    summand,
)

__version__ = "0.1.0"
