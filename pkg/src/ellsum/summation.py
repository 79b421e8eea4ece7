"""Parameter sets, the truncated lattice and both sides of the BC_n summation.

The weight function of the lattice sum contains fractional powers
``z**(1/2 - alpha_m)`` and is never evaluated on its own.  Everything is
expressed through ratios between lattice points, where only integer powers
survive: the literal summand of the identity, the closed multi-step ratio and
the one-step shift ratio along a single axis.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .errors import DomainError, GenericityFailure, NearPole, RangeError
from .kernel import DEFAULT_PRECISION, Nome, Precision, ScaledProduct, mul_theta_factorial, theta, theta_pm

Point = tuple  # tuple of nonzero complex numbers
LatticeIndex = tuple  # tuple of ints

FLAG_RTOL = 1e-12


class Balancing(enum.Enum):
    SUM_Q = "sum_q"  # a1...a6 t^(2n-2) = q
    INV_ONE = "inv_one"  # a1...a6 t^(2n-2) = 1
    NONE = "none"


def _relclose(x, y, rtol=FLAG_RTOL):
    return abs(x - y) <= rtol * max(abs(x), abs(y))


@dataclass(frozen=True)
class ParameterSet:
    """Six parameters ``a``, ``t``, the nome, rank ``n`` and truncation level ``N``.

    A declared ``balancing`` other than ``NONE`` is verified on construction
    to relative accuracy 1e-12.
    """

    a: tuple
    t: complex
    nome: Nome
    n: int
    N: int
    balancing: Balancing = Balancing.NONE

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))
        if len(self.a) != 6:
            raise ValueError(f"need six parameters a_1..a_6, got {len(self.a)}")
        if any(x == 0 for x in self.a) or self.t == 0:
            raise DomainError("parameters a_m and t must be nonzero")
        if self.n < 1 or self.N < 0:
            raise ValueError(f"need n >= 1 and N >= 0, got n={self.n}, N={self.N}")
        if self.balancing is not Balancing.NONE and self.balancing_value() is not self.balancing:
            raise ValueError(
                f"declared balancing {self.balancing.value} does not hold: "
                f"a1...a6 t^(2n-2) = {self.balancing_product()}"
            )

    @property
    def p(self):
        return self.nome.p

    @property
    def q(self):
        return self.nome.q

    def balancing_product(self) -> complex:
        return math.prod(self.a) * self.t ** (2 * self.n - 2)

    def balancing_value(self) -> Balancing:
        """Recompute which balancing condition the parameters satisfy."""
        prod = self.balancing_product()
        if _relclose(prod, self.q):
            return Balancing.SUM_Q
        if _relclose(prod, 1):
            return Balancing.INV_ONE
        return Balancing.NONE

    @property
    def truncation_satisfied(self) -> bool:
        """Whether ``a1 a6 t^(n-1) = q^(-N)`` holds to relative 1e-12."""
        return _relclose(self.a[0] * self.a[5] * self.t ** (self.n - 1), self.q ** (-self.N))

    def with_a(self, a: Sequence[complex], N: int | None = None) -> "ParameterSet":
        """Copy with new parameters ``a``; balancing is reclassified."""
        new = replace(self, a=tuple(a), N=self.N if N is None else N, balancing=Balancing.NONE)
        return replace(new, balancing=new.balancing_value())


def base_point(ps: ParameterSet) -> Point:
    """The base point ``(a1, a1 t, ..., a1 t^(n-1))`` of the lattice."""
    a1, t = ps.a[0], ps.t
    return tuple(a1 * t**i for i in range(ps.n))


def lattice_point(ps: ParameterSet, nu: LatticeIndex, z: Point | None = None) -> Point:
    z = base_point(ps) if z is None else z
    q = ps.q
    return tuple(zi * q**k for zi, k in zip(z, nu))


def in_simplex(nu: LatticeIndex, N: int) -> bool:
    """``0 <= nu_1 <= ... <= nu_n <= N``."""
    return nu[0] >= 0 and nu[-1] <= N and all(x <= y for x, y in zip(nu, nu[1:]))


def simplex_iter(n: int, N: int) -> Iterator[LatticeIndex]:
    """Weakly increasing ``nu`` with entries in ``0..N``, in lexicographic order.

    >>> list(simplex_iter(2, 1))
    [(0, 0), (0, 1), (1, 1)]
    """
    if n < 1 or N < 0:
        raise RangeError(f"need n >= 1 and N >= 0, got n={n}, N={N}")
    return itertools.combinations_with_replacement(range(N + 1), n)


def accumulate(terms, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Sum in the given order, or exactly rounded per component if ``prec.compensated``."""
    if prec.compensated:
        terms = list(terms)
        return complex(math.fsum(x.real for x in terms), math.fsum(x.imag for x in terms))
    total = 0j
    for x in terms:
        total += x
    return total


def _guard(den, prec, what):
    if abs(den) < prec.pole_guard:
        raise NearPole(f"denominator {what} = {den}")
    return den


def _den_theta(z, p, prec):
    return _guard(theta(z, p, prec), prec, f"theta({z})")


def _theta_part(ps: ParameterSet, z: Point, nu: LatticeIndex, prec: Precision) -> complex:
    """All theta factors of the multi-step ratio, without the integer power prefactor."""
    p, q, t, nome = ps.p, ps.q, ps.t, ps.nome
    n = ps.n
    acc = ScaledProduct()
    for i in range(n):
        zi2 = z[i] * z[i]
        acc *= theta(q ** (2 * nu[i]) * zi2, p, prec)
        acc /= _den_theta(zi2, p, prec)
    for j in range(n):
        for k in range(j + 1, n):
            ratio, prod = z[k] / z[j], z[j] * z[k]
            acc *= theta(q ** (nu[k] - nu[j]) * ratio, p, prec)
            acc *= theta(q ** (nu[k] + nu[j]) * prod, p, prec)
            acc /= _den_theta(ratio, p, prec)
            acc /= _den_theta(prod, p, prec)
    for i in range(n):
        for am in ps.a:
            mul_theta_factorial(acc, am * z[i], nu[i], nome, prec)
            mul_theta_factorial(acc, q / am * z[i], nu[i], nome, prec, inverse=True)
    for j in range(n):
        for k in range(j + 1, n):
            ratio, prod = z[k] / z[j], z[j] * z[k]
            dk, sk = nu[k] - nu[j], nu[j] + nu[k]
            mul_theta_factorial(acc, t * ratio, dk, nome, prec)
            mul_theta_factorial(acc, t * prod, sk, nome, prec)
            mul_theta_factorial(acc, q / t * ratio, dk, nome, prec, inverse=True)
            mul_theta_factorial(acc, q / t * prod, sk, nome, prec, inverse=True)
    return acc.value()


def summand(ps: ParameterSet, nu: LatticeIndex, xi: Point | None = None,
            prec: Precision = DEFAULT_PRECISION) -> complex:
    """The ``nu``-th term of the left-hand side, evaluated at ``xi``.

    Uses the printed prefactor ``prod_i (q t^(2(n-i)))^nu_i``, which equals the
    lattice weight ratio only when ``a1...a6 t^(2n-2) = q``.  ``nu`` is expected
    to lie in the simplex.
    """
    xi = base_point(ps) if xi is None else xi
    q, t, n = ps.q, ps.t, ps.n
    pre = 1 + 0j
    for i in range(n):
        pre *= (q * t ** (2 * (n - 1 - i))) ** nu[i]
    return pre * _theta_part(ps, xi, nu, prec)


def phi_ratio_closed(ps: ParameterSet, z: Point, nu: LatticeIndex,
                     prec: Precision = DEFAULT_PRECISION) -> complex:
    """Closed form of ``Phi(q^nu z) / Phi(z)`` for weakly increasing ``nu``.

    Holds for any parameters, balanced or not.  The six ``q^(1/2)/a_m`` powers
    are merged into ``(q^3 / (a1...a6))^nu_i``.
    """
    q, t, n = ps.q, ps.t, ps.n
    c = q**3 / math.prod(ps.a)
    pre = 1 + 0j
    for i in range(n):
        # q^-nu_i from the z_i^2 block, (q t^-2 q^-1)^nu_k once per j < k
        pre *= (c / q) ** nu[i] * (t ** (-2)) ** (i * nu[i])
    return pre * _theta_part(ps, z, nu, prec)


def lhs_sum(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Left-hand side: the sum of ``summand`` over the ordered simplex."""
    if not ps.truncation_satisfied:
        raise ValueError("lhs_sum needs the truncation condition a1 a6 t^(n-1) = q^(-N)")
    xi = base_point(ps)
    return accumulate((summand(ps, nu, xi, prec) for nu in simplex_iter(ps.n, ps.N)), prec)


def _closed_product(ps, num_args, den_args, prec):
    acc = ScaledProduct()
    for x in num_args:
        mul_theta_factorial(acc, x, ps.N, ps.nome, prec)
    for x in den_args:
        mul_theta_factorial(acc, x, ps.N, ps.nome, prec, inverse=True)
    return acc.value()


def rhs_product(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Closed-form right-hand side of the summation formula."""
    a1, a2, a3, a4 = ps.a[:4]
    t, q, n = ps.t, ps.q, ps.n
    num, den = [], []
    for i in range(1, n + 1):
        num.append(q * a1 * a1 * t ** (n + i - 2))
        num += [q / (aj * ak) * t ** (1 - i) for aj, ak in ((a2, a3), (a2, a4), (a3, a4))]
        den.append(q / (a1 * a2 * a3 * a4) * t ** (2 - n - i))
        den += [q / am * a1 * t ** (i - 1) for am in (a2, a3, a4)]
    return _closed_product(ps, num, den, prec)


def rhs_product_alt(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """The same product in the form reached by the contiguity recursion.

    Uses ``a5 a6`` in place of ``q / (a1 a2 a3 a4 t^(2n-2))``, so it agrees
    with ``rhs_product`` only under ``a1...a6 t^(2n-2) = q``.
    """
    a1, a2, a3, a4, a5, a6 = ps.a
    t, q, n = ps.t, ps.q, ps.n
    num, den = [], []
    for i in range(1, n + 1):
        num.append(q * a1 * a1 * t ** (n + i - 2))
        num += [q / (aj * ak) * t ** (i - n) for aj, ak in ((a2, a3), (a2, a4), (a3, a4))]
        den.append(a5 * a6 * t ** (n - i))
        den += [q / am * a1 * t ** (n - i) for am in (a2, a3, a4)]
    return _closed_product(ps, num, den, prec)


def _shift_ratio_parts(ps: ParameterSet, z: Point, i: int, prec: Precision):
    """Numerator and denominator of ``T_{q,z_i} Phi(z) / Phi(z)`` as ``ScaledProduct``s."""
    p, q, t = ps.p, ps.q, ps.t
    zi = z[i]
    num = ScaledProduct(q * q / math.prod(ps.a) * theta(q * q * zi * zi, p, prec))
    den = ScaledProduct(theta(zi * zi, p, prec))
    for am in ps.a:
        num *= theta(am * zi, p, prec)
        den *= theta(q / am * zi, p, prec)
    for k, zk in enumerate(z):
        if k == i:
            continue
        num *= theta_pm(t * zi, zk, p, prec)
        num *= theta_pm(1 / (q * zi), zk, p, prec)
        den *= theta_pm(t / (q * zi), zk, p, prec)
        den *= theta_pm(zi, zk, p, prec)
    return num, den


def _scaled_quotient(num, den, prec, what):
    if den.below(prec.pole_guard):
        raise NearPole(f"denominator {what} = {den.value()}")
    return num.ratio(den)


def phi_shift_ratio(ps: ParameterSet, z: Point, i: int, prec: Precision = DEFAULT_PRECISION) -> complex:
    """One-step ratio ``Phi(z with z_i -> q z_i) / Phi(z)`` along axis ``i`` (0-based)."""
    if not 0 <= i < ps.n:
        raise RangeError(f"axis {i} out of range for n = {ps.n}")
    num, den = _shift_ratio_parts(ps, z, i, prec)
    return _scaled_quotient(num, den, prec, "shift ratio")


def phi_ratio_path(ps: ParameterSet, z: Point, nu: LatticeIndex,
                   prec: Precision = DEFAULT_PRECISION) -> complex:
    """``Phi(q^nu z) / Phi(z)`` by multiplying one-step ratios along a lattice path.

    Axes are moved from the last to the first, one unit step at a time.  A
    downward step multiplies by the inverted ratio, computed directly as
    denominator over numerator so that a pole of the forward ratio yields an
    exact zero.  Starting from ``z = xi`` this path stays inside the simplex
    for every ``nu`` in it, and for a ``nu`` just outside it leaves with a
    single vanishing step.
    """
    q = ps.q
    cur = list(z)
    val = 1 + 0j
    for i in reversed(range(ps.n)):
        steps = nu[i]
        while steps > 0:
            num, den = _shift_ratio_parts(ps, tuple(cur), i, prec)
            val *= _scaled_quotient(num, den, prec, "shift ratio")
            cur[i] *= q
            steps -= 1
        while steps < 0:
            cur[i] /= q
            num, den = _shift_ratio_parts(ps, tuple(cur), i, prec)
            val *= _scaled_quotient(den, num, prec, "inverse shift ratio")
            steps += 1
    return val


def check_genericity(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> None:
    """Reject degenerate parameter sets.

    Checks ``t != 1``, ``a1 != a2``, every theta denominator of the right-hand
    side, of the summand on the lattice and of the interpolation normalizers
    built from ``(a1, a2)``.

    Raises
    ------
    GenericityFailure
    """
    from .invariants import InvariantParams

    a1, a2 = ps.a[0], ps.a[1]
    if abs(ps.t - 1) < 1e-8:
        raise GenericityFailure("t = 1 is degenerate")
    if abs(a1 - a2) <= 1e-8 * abs(a1):
        raise GenericityFailure("a1 = a2 is degenerate")
    try:
        rhs_product(ps, prec)
        xi = base_point(ps)
        for nu in simplex_iter(ps.n, ps.N):
            summand(ps, nu, xi, prec)
        InvariantParams(a1, a2, ps.t, ps.p, ps.n, prec=prec)
    except NearPole as exc:
        raise GenericityFailure(str(exc)) from exc


def solve_constraints(a_free: Sequence[complex], t: complex, nome: Nome, n: int, N: int,
                      mode: Balancing = Balancing.SUM_Q,
                      prec: Precision = DEFAULT_PRECISION) -> ParameterSet:
    """Complete free parameters to a set satisfying truncation and balancing.

    ``a6 = q^(-N) / (a1 t^(n-1))``; then ``a5`` is fixed by the balancing mode.
    For ``SUM_Q`` and ``INV_ONE`` pass ``a1..a4``; for ``NONE`` pass
    ``a1..a5``.

    >>> ps = solve_constraints([0.8, 1.1, 0.9, 1.2], 0.6, Nome(0.1, 0.3), 2, 1)
    >>> abs(ps.a[5] - 0.3**-1 / (0.8 * 0.6)) < 1e-12
    True
    """
    a_free = [complex(x) for x in a_free]
    q = nome.q
    expected = 5 if mode is Balancing.NONE else 4
    if len(a_free) != expected:
        raise ValueError(f"mode {mode.value} takes {expected} free parameters, got {len(a_free)}")
    a1 = a_free[0]
    a6 = q ** (-N) / (a1 * t ** (n - 1))
    if mode is Balancing.NONE:
        a5 = a_free[4]
    else:
        target = q if mode is Balancing.SUM_Q else 1
        a5 = target / (math.prod(a_free[:4]) * a6 * t ** (2 * n - 2))
    ps = ParameterSet((*a_free[:4], a5, a6), t, nome, n, N, mode)
    check_genericity(ps, prec)
    return ps
