"""Expectation values over the truncated lattice and the contiguity relations.

``<phi>`` denotes ``sum_nu phi(q^nu xi) w(nu)`` with ``w(nu)`` the weight ratio
``Phi(q^nu xi) / Phi(xi)``, which is supported on the ordered simplex.  For
parameters with ``a1...a6 t^(2n-2) = q``, ``w`` is the summand of the main
identity and ``<1>`` is its left-hand side.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ObservableSingular, RangeError
from .invariants import InvariantParams, e_table, reference_point
from .kernel import DEFAULT_PRECISION, Precision, ScaledProduct, mul_theta_factorial, theta, theta_pm
from .summation import (
    Balancing,
    ParameterSet,
    _scaled_quotient,
    accumulate,
    base_point,
    in_simplex,
    lattice_point,
    phi_ratio_closed,
    phi_ratio_path,
    phi_shift_ratio,
    rhs_product,
    simplex_iter,
)


ROUNDING_RTOL = 1e-12


@dataclass(frozen=True)
class Observable:
    """A function of a lattice point, with a label for reports."""

    func: Callable[[tuple], complex]
    label: str = "phi"

    def __call__(self, z):
        return self.func(z)


ONE = Observable(lambda z: 1 + 0j, "1")


@dataclass(frozen=True)
class Residual:
    """Outcome of a numerical identity check.

    ``residual`` is ``|lhs - rhs| / scale``.
    """

    residual: float
    lhs: complex
    rhs: complex
    scale: float


def _residual(lhs, rhs, scale=None):
    if scale is None:
        scale = max(abs(lhs), abs(rhs))
    if scale == 0:
        return Residual(0.0, lhs, rhs, 0.0)
    return Residual(abs(lhs - rhs) / scale, lhs, rhs, scale)


def lattice_weights(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> list:
    """``[(nu, q^nu xi, w(nu)) for nu in the simplex]`` in lexicographic order."""
    if not ps.truncation_satisfied:
        raise ValueError("expectation values need a1 a6 t^(n-1) = q^(-N)")
    xi = base_point(ps)
    return [(nu, lattice_point(ps, nu, xi), phi_ratio_closed(ps, xi, nu, prec))
            for nu in simplex_iter(ps.n, ps.N)]


def _value(phi, z):
    val = phi(z)
    if not cmath.isfinite(val):
        raise ObservableSingular(f"{getattr(phi, 'label', 'phi')} = {val} at {z}")
    return val


def expectation_terms(ps: ParameterSet, phi: Callable, prec: Precision = DEFAULT_PRECISION,
                      weights: list | None = None) -> list:
    weights = lattice_weights(ps, prec) if weights is None else weights
    return [_value(phi, z) * w for _, z, w in weights]


def expectation(ps: ParameterSet, phi: Callable, prec: Precision = DEFAULT_PRECISION,
                weights: list | None = None) -> complex:
    """``<phi>``; pass precomputed ``weights`` to reuse them across observables."""
    return accumulate(expectation_terms(ps, phi, prec, weights), prec)


def jackson_integral(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """``J = <1>`` for arbitrary (not necessarily balanced) parameters."""
    return expectation(ps, ONE, prec)


def _invert_axis(z, i):
    return tuple(1 / x if k == i else x for k, x in enumerate(z))


def _shift_axis(z, i, factor):
    return tuple(x * factor if k == i else x for k, x in enumerate(z))


def f_plus(ps: ParameterSet, z: Sequence[complex], i: int, prec: Precision = DEFAULT_PRECISION) -> complex:
    """``F_i^+(z) = prod_m theta(a_m z_i) / (z_i^2 theta(z_i^2)) * prod_{j!=i} theta(t z_i z_j^{+-1}) / theta(z_i z_j^{+-1})``."""
    if not 0 <= i < len(z):
        raise RangeError(f"axis {i} out of range")
    p, t = ps.p, ps.t
    zi = z[i]
    num = ScaledProduct()
    for am in ps.a:
        num *= theta(am * zi, p, prec)
    den = ScaledProduct(zi * zi * theta(zi * zi, p, prec))
    for j, zj in enumerate(z):
        if j != i:
            num *= theta_pm(t * zi, zj, p, prec)
            den *= theta_pm(zi, zj, p, prec)
    return _scaled_quotient(num, den, prec, "F^+")


def f_minus(ps: ParameterSet, z: Sequence[complex], i: int, prec: Precision = DEFAULT_PRECISION) -> complex:
    """``F_i^-(z)``: ``F_i^+`` with ``z_i`` inverted."""
    return f_plus(ps, _invert_axis(z, i), i, prec)


def nabla(ps: ParameterSet, phi: Callable, i: int, prec: Precision = DEFAULT_PRECISION) -> Observable:
    """``z -> phi(z) - R_i(z) phi(z with z_i -> q z_i)`` with ``R_i`` the one-step weight ratio."""
    q = ps.q

    def func(z):
        return phi(z) - phi_shift_ratio(ps, z, i, prec) * phi(_shift_axis(z, i, q))

    return Observable(func, f"nabla_{i}({getattr(phi, 'label', 'phi')})")


def nabla_expectation(ps: ParameterSet, phi: Callable, i: int,
                      prec: Precision = DEFAULT_PRECISION, weights: list | None = None) -> Residual:
    """``<nabla_i phi>`` over the whole lattice, compared with 0.

    On the simplex the one-step ratio is evaluated explicitly.  Points just
    below the simplex along axis ``i`` carry zero weight but the ratio has a
    pole there; their contribution is the finite limit
    ``-phi(q^(nu+e_i) xi) w(nu+e_i)``.

    ``scale`` is the sum of term moduli.  When truncation makes every term
    vanish (all of them below ``ROUNDING_RTOL`` times ``sum |w| max |phi|``)
    that sum is pure rounding and the latter quantity is used instead.
    """
    weights = lattice_weights(ps, prec) if weights is None else weights
    q = ps.q
    inside = {nu for nu, _, _ in weights}
    terms = []
    peak = 0.0
    for nu, z, w in weights:
        here, there = _value(phi, z), _value(phi, _shift_axis(z, i, q))
        peak = max(peak, abs(here), abs(there))
        terms.append(here * w)
        terms.append(-phi_shift_ratio(ps, z, i, prec) * w * there)
        below = tuple(x - 1 if k == i else x for k, x in enumerate(nu))
        if below not in inside:
            terms.append(-here * w)
    total = accumulate(terms, prec)
    scale = sum(abs(x) for x in terms)
    natural = peak * sum(abs(w) for _, _, w in weights)
    if scale < ROUNDING_RTOL * natural:
        scale = natural
    return _residual(total, 0j, scale)


def phi_i(ps: ParameterSet, ip: InvariantParams, r: int, i: int,
          prec: Precision = DEFAULT_PRECISION) -> Observable:
    """``F_i^-(z) E_{r-1}^{(n-1)}(z without z_i)``, whose nabla_i sum is ``h_r``."""
    ip_low = ip.with_n(ps.n - 1)

    def func(z):
        rest = z[:i] + z[i + 1:]
        return f_minus(ps, z, i, prec) * e_table(ip_low, rest, prec)[r - 1]

    return Observable(func, f"phi_{i}[r={r}]")


def h_r(ps: ParameterSet, ip: InvariantParams, r: int, z: Sequence[complex],
        prec: Precision = DEFAULT_PRECISION) -> complex:
    """``sum_i (F_i^-(z) + F_i^+(z)) E_{r-1}^{(n-1)}(z without z_i)`` for ``1 <= r <= n``."""
    n = ps.n
    if not 1 <= r <= n:
        raise RangeError(f"r = {r} outside 1..{n}")
    ip_low = ip.with_n(n - 1)
    total = 0j
    for i in range(n):
        rest = tuple(z[:i]) + tuple(z[i + 1:])
        total += (f_minus(ps, z, i, prec) + f_plus(ps, z, i, prec)) * e_table(ip_low, rest, prec)[r - 1]
    return total


def h_r_expectation(ps: ParameterSet, ip: InvariantParams, r: int,
                    prec: Precision = DEFAULT_PRECISION, weights: list | None = None) -> Residual:
    """``<h_r>`` compared with 0, relative to the largest single ``F_i^{+-} E w`` piece.

    At ``N = 0`` every piece vanishes identically at the single point ``xi``,
    so the residual is absolute there (``sum |w| = 1``).
    """
    n = ps.n
    if not 1 <= r <= n:
        raise RangeError(f"r = {r} outside 1..{n}")
    weights = lattice_weights(ps, prec) if weights is None else weights
    ip_low = ip.with_n(n - 1)
    pieces = []
    for _, z, w in weights:
        for i in range(n):
            e = e_table(ip_low, z[:i] + z[i + 1:], prec)[r - 1]
            pieces.append(f_minus(ps, z, i, prec) * e * w)
            pieces.append(f_plus(ps, z, i, prec) * e * w)
    if ps.N == 0:
        scale = sum(abs(w) for _, _, w in weights)
    else:
        scale = max(abs(x) for x in pieces)
    return _residual(accumulate(pieces, prec), 0j, scale)


def anchor_params(ps: ParameterSet, anchors: tuple = (0, 1),
                  prec: Precision = DEFAULT_PRECISION) -> tuple:
    """``InvariantParams`` built from ``(a[anchors[0]], a[anchors[1]])`` and the other four ``a``."""
    x, y = anchors
    if x == y or not (0 <= x < 6 and 0 <= y < 6):
        raise RangeError(f"anchors must be two distinct indices in 0..5, got {anchors}")
    others = [am for k, am in enumerate(ps.a) if k not in anchors]
    return InvariantParams(ps.a[x], ps.a[y], ps.t, ps.p, ps.n, prec), others


@dataclass(frozen=True)
class TwoTermCoefficients:
    """Closed-form coefficients of the two-term relation.

    ``h_r = c_rr E_r + c_rr1 E_{r-1}``, hence ``<E_r> = -c_r <E_{r-1}>`` with
    ``c_r = c_rr1 / c_rr``.  ``c_r`` is ``None`` when its closed form has a
    vanishing denominator (``N = 0``, ``r = n``, where ``c_rr = 0``).
    """

    c_r: complex | None
    c_rr: complex
    c_rr1: complex


def _singular(factors, prec):
    return any(abs(f) < prec.pole_guard for f in factors)


def two_term_coefficients(ps: ParameterSet, r: int, anchors: tuple = (0, 1),
                          prec: Precision = DEFAULT_PRECISION) -> TwoTermCoefficients:
    ip, others = anchor_params(ps, anchors, prec)
    b1, b2, t, p, n = ip.a1, ip.a2, ps.t, ps.p, ps.n
    th = lambda x: theta(x, p, prec)  # noqa: E731
    num = [th(t ** (n - r + 1)), th(b2 / b1 * t ** (n - r + 1)), th(b1 / b2 * t ** (2 * r - n))]
    den = [th(t**r), th(b2 / b1 * t ** (n - 2 * r + 2)), th(b1 / b2 * t**r)]
    num += [th(am * b2 * t ** (n - r)) for am in others]
    den += [th(am * b1 * t ** (r - 1)) for am in others]
    c_r = None
    if not _singular(den, prec):
        c_r = (b1 * b1 * t ** (2 * (r - 1)) * math.prod(num)) / (b2 * b2 * t ** (2 * (n - r)) * math.prod(den))
    c_rr = th(t**r) * th(b1 * b2 * t ** (n - 1)) * th(b1 / b2 * t**r)
    c_rr /= (b1 * t ** (r - 1)) ** 2 * th(t) * th(b1 / b2 * t ** (2 * r - n))
    c_rr *= math.prod(th(am * b1 * t ** (r - 1)) for am in others)
    c_rr1 = th(t ** (n - r + 1)) * th(b1 * b2 * t ** (n - 1)) * th(b2 / b1 * t ** (n - r + 1))
    c_rr1 /= (b2 * t ** (n - r)) ** 2 * th(t) * th(b2 / b1 * t ** (n - 2 * r + 2))
    c_rr1 *= math.prod(th(am * b2 * t ** (n - r)) for am in others)
    return TwoTermCoefficients(c_r, c_rr, c_rr1)


def expansion_coefficients(ps: ParameterSet, r: int, anchors: tuple = (0, 1),
                           prec: Precision = DEFAULT_PRECISION) -> tuple:
    """``(F_r^+(zeta^(r)), F_n^+(zeta^(r-1)))``, the interpolation values of ``h_r``."""
    ip, _ = anchor_params(ps, anchors, prec)
    n = ps.n
    return (f_plus(ps, reference_point(ip, r), r - 1, prec),
            f_plus(ps, reference_point(ip, r - 1), n - 1, prec))


def _require_inv_one(ps):
    if ps.balancing_value() is not Balancing.INV_ONE:
        raise ValueError("this relation needs a1...a6 t^(2n-2) = 1")


def _cleared(x, num, y, den):
    """Residual of ``x den = y num``, relative to ``max(|x|,|y|) max(|num|,|den|)``."""
    lhs, rhs = x * den, y * num
    return _residual(lhs, rhs, max(abs(x), abs(y)) * max(abs(num), abs(den)))


def _invariant_expectations(ps, ip, weights, prec, with_scale=False):
    tables = [e_table(ip, z, prec, w) for _, z, w in weights]
    means = [accumulate((tab[s] for tab in tables), prec) for s in range(ps.n + 1)]
    if not with_scale:
        return means
    # natural size of an invariant expectation: sum_nu |w| max_s |E_s|
    size = sum(max(abs(x) for x in tab) for tab in tables)
    return means, size


def two_term_check(ps: ParameterSet, r: int, anchors: tuple = (0, 1),
                   prec: Precision = DEFAULT_PRECISION, weights: list | None = None) -> Residual:
    """``<E_r> = -c_r <E_{r-1}>``; scale is ``max(|<E_r>|, |<E_{r-1}>|)``.

    When ``c_r`` is singular the cleared form ``c_rr <E_r> = -c_rr1 <E_{r-1}>``
    is checked instead.  For ``N = 0`` and ``r < n`` both expectations are
    ``E_s(zeta^(n)) = 0`` and the scale is ``sum_nu |w| max_s |E_s|`` instead.
    """
    _require_inv_one(ps)
    if not 1 <= r <= ps.n:
        raise RangeError(f"r = {r} outside 1..{ps.n}")
    ip, _ = anchor_params(ps, anchors, prec)
    weights = lattice_weights(ps, prec) if weights is None else weights
    means, size = _invariant_expectations(ps, ip, weights, prec, with_scale=True)
    e_r, e_r1 = means[r], means[r - 1]
    c = two_term_coefficients(ps, r, anchors, prec)
    if c.c_r is None:
        return _cleared(e_r, -c.c_rr1, e_r1, c.c_rr)
    scale = size if ps.N == 0 and r < ps.n else max(abs(e_r), abs(e_r1))
    return _residual(e_r, -c.c_r * e_r1, scale)


def en_e0_factor(ps: ParameterSet, anchors: tuple = (0, 1), prec: Precision = DEFAULT_PRECISION) -> tuple:
    """Numerator, denominator and theta factors of the denominator of the ``<E_n>``/``<E_0>`` product."""
    ip, others = anchor_params(ps, anchors, prec)
    b1, b2, t, p = ip.a1, ip.a2, ps.t, ps.p
    num, den = [], []
    scalar = 1 + 0j
    for i in range(1, ps.n + 1):
        ti = t ** (i - 1)
        scalar *= (b1 / b2) ** 3
        num.append(theta(b2 / b1 * ti, p, prec))
        den.append(theta(b1 / b2 * ti, p, prec))
        num += [theta(am * b2 * ti, p, prec) for am in others]
        den += [theta(am * b1 * ti, p, prec) for am in others]
    return scalar * math.prod(num), math.prod(den), den


def en_e0_check(ps: ParameterSet, anchors: tuple = (0, 1), prec: Precision = DEFAULT_PRECISION,
                weights: list | None = None) -> Residual:
    """``<E_n> = <E_0> * num / den``; cleared of ``den`` when it vanishes (``N = 0``)."""
    _require_inv_one(ps)
    ip, _ = anchor_params(ps, anchors, prec)
    weights = lattice_weights(ps, prec) if weights is None else weights
    means = _invariant_expectations(ps, ip, weights, prec)
    num, den, factors = en_e0_factor(ps, anchors, prec)
    if _singular(factors, prec):
        return _cleared(means[ps.n], num, means[0], den)
    return _residual(means[ps.n], means[0] * num / den)


def shift_a56(ps: ParameterSet, k5: int, k6: int) -> ParameterSet:
    """Parameters with ``a5 -> q^k5 a5``, ``a6 -> q^k6 a6`` and truncation level ``N - k6``."""
    q = ps.q
    a = list(ps.a)
    a[4] *= q**k5
    a[5] *= q**k6
    if ps.N - k6 < 0:
        raise RangeError(f"shifting a6 by q^{k6} leaves no lattice at N = {ps.N}")
    return ps.with_a(a, N=ps.N - k6)


def recursion_step_factor(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Factor ``f`` with ``J(a5, a6) = J(a5/q, q a6) f`` when ``a1...a6 t^(2n-2) = q``."""
    a1, a2, a3, a4, a5, a6 = ps.a
    t, q, p = ps.t, ps.q, ps.p
    val = 1 + 0j
    for i in range(1, ps.n + 1):
        ti = t ** (i - 1)
        val *= theta(a1 / a6 * ti, p, prec) / theta(a5 / (q * a1 * ti), p, prec)
        for am in (a2, a3, a4):
            val *= theta(am * a5 / q * ti, p, prec) / theta(1 / (am * a6 * ti), p, prec)
    return val


def recursion_closed_product(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> complex:
    """The ``N``-fold product of step factors written with theta factorials."""
    a1, a2, a3, a4, a5, a6 = ps.a
    t, q, N, nome = ps.t, ps.q, ps.N, ps.nome
    acc = ScaledProduct()
    for i in range(1, ps.n + 1):
        ti = t ** (i - 1)
        mul_theta_factorial(acc, q ** (1 - N) / a6 * a1 * ti, N, nome, prec)
        mul_theta_factorial(acc, q ** (-N) * a5 / (a1 * ti), N, nome, prec, inverse=True)
        for am in (a2, a3, a4):
            mul_theta_factorial(acc, q ** (-N) * am * a5 * ti, N, nome, prec)
            mul_theta_factorial(acc, q ** (1 - N) / (am * a6 * ti), N, nome, prec, inverse=True)
    return acc.value()


@dataclass(frozen=True)
class RecursionReport:
    """Residuals of the contiguity recursion in ``(a5, a6)``.

    step: one step against two direct lattice sums of sizes ``N`` and ``N-1``.
    telescope: product of all ``N`` step factors against ``rhs_product``.
    closed: theta-factorial form of that product against ``rhs_product``.
    endpoint: ``|J(q^-N a5, q^N a6) - 1|``.
    """

    step: Residual
    telescope: Residual
    closed: Residual
    endpoint: float


def j_recursion_check(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> RecursionReport:
    if ps.balancing_value() is not Balancing.SUM_Q:
        raise ValueError("the recursion in (a5, a6) needs a1...a6 t^(2n-2) = q")
    if ps.N < 1:
        raise RangeError("the recursion needs N >= 1")
    shifted = shift_a56(ps, -1, 1)
    step = _residual(jackson_integral(ps, prec),
                     jackson_integral(shifted, prec) * recursion_step_factor(ps, prec))
    product = 1 + 0j
    cur = ps
    for _ in range(ps.N):
        product *= recursion_step_factor(cur, prec)
        cur = shift_a56(cur, -1, 1)
    endpoint = abs(jackson_integral(cur, prec) - 1)
    rhs = rhs_product(ps, prec)
    return RecursionReport(step, _residual(product, rhs), _residual(recursion_closed_product(ps, prec), rhs),
                           endpoint)


def _theta_weighted(ps, weights, b, prec):
    """``sum_nu w(nu) prod_i theta(b z_i^{+-1})`` with ``w`` folded into the running product."""
    terms = []
    for _, z, w in weights:
        acc = ScaledProduct(w)
        for zi in z:
            acc *= theta_pm(b, zi, p=ps.p, prec=prec)
        terms.append(acc.value())
    return accumulate(terms, prec)


def a6_shift_identity(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> tuple:
    """``J(a5, q a6)`` against the theta-weighted ``<.>`` and against ``<E_n(a5, a6)>``.

    Needs ``N >= 1``.  Returns two residuals.  Both observables carry
    ``theta(a6 z_n)``, which is ``theta(q^(nu_n - N)) = 0`` on the top layer
    ``nu_n = N``; those points are dropped rather than summed as rounding noise
    times the largest weights.
    """
    if ps.N < 1:
        raise RangeError("the a6 shift needs N >= 1")
    p, t, n = ps.p, ps.t, ps.n
    a1, a5, a6 = ps.a[0], ps.a[4], ps.a[5]
    lhs = jackson_integral(shift_a56(ps, 0, 1), prec)
    weights = [item for item in lattice_weights(ps, prec) if item[0][-1] < ps.N]
    norm = math.prod(theta_pm(a6, a1 * t**i, p, prec) for i in range(n))
    weighted = _theta_weighted(ps, weights, a6, prec) / norm
    ip, _ = anchor_params(ps, (4, 5), prec)
    e_n = _invariant_expectations(ps, ip, weights, prec)[n]
    factor = math.prod(theta_pm(a6, a5 * t**i, p, prec) for i in range(n)) / norm
    return _residual(lhs, weighted), _residual(lhs, e_n * factor)


def a5_shift_identity(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> tuple:
    """``J(q a5, a6)`` against the theta-weighted ``<.>`` and against ``<E_0(a5, a6)>``."""
    p, t, n = ps.p, ps.t, ps.n
    a1, a5, a6 = ps.a[0], ps.a[4], ps.a[5]
    lhs = jackson_integral(shift_a56(ps, 1, 0), prec)
    weights = lattice_weights(ps, prec)
    norm = math.prod(theta_pm(a5, a1 * t**i, p, prec) for i in range(n))
    weighted = _theta_weighted(ps, weights, a5, prec) / norm
    ip, _ = anchor_params(ps, (4, 5), prec)
    e_0 = _invariant_expectations(ps, ip, weights, prec)[0]
    factor = math.prod(theta_pm(a5, a6 * t**i, p, prec) for i in range(n)) / norm
    return _residual(lhs, weighted), _residual(lhs, e_0 * factor)


def support_check(ps: ParameterSet, prec: Precision = DEFAULT_PRECISION) -> float:
    """Largest ``|w(nu)|`` over indices one step outside the simplex, relative to the
    largest in-simplex weight.  Outside weights are built by path telescoping."""
    xi = base_point(ps)
    n, N = ps.n, ps.N
    inside = [abs(phi_ratio_path(ps, xi, nu, prec)) for nu in simplex_iter(n, N)]
    worst = 0.0
    for nu in adjacent_outside(n, N):
        worst = max(worst, abs(phi_ratio_path(ps, xi, nu, prec)))
    return worst / max(inside)


def adjacent_outside(n: int, N: int) -> list:
    """Indices outside the simplex that differ from a simplex point by one unit step."""
    seen = set()
    out = []
    for nu in simplex_iter(n, N):
        for i in range(n):
            for d in (-1, 1):
                mu = tuple(x + d if k == i else x for k, x in enumerate(nu))
                if not in_simplex(mu, N) and mu not in seen:
                    seen.add(mu)
                    out.append(mu)
    return out
