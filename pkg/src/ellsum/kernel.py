"""Theta functions, theta shifted factorials and the elliptic gamma function.

All routines take plain Python numbers and use only ``+ - * /`` and ``abs``,
so any complex type with those operations (``mpmath.mpc`` for instance) can be
passed through unchanged.  Infinite products are truncated by a geometric tail
bound and accumulated left to right over increasing index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NearPole, TruncationFailure


@dataclass(frozen=True)
class Precision:
    """Truncation and guard settings.

    eps_trunc : target relative truncation error of an infinite product.
    max_terms : hard cap on the number of factors of a single product.
    pole_guard : smallest modulus a theta value may have in a denominator.
    compensated : accumulate lattice sums with exactly rounded (fsum) addition.
    """

    eps_trunc: float = 1e-14
    max_terms: int = 10_000
    pole_guard: float = 1e-12
    compensated: bool = False

    def __post_init__(self):
        if not self.eps_trunc > 0:
            raise ValueError("eps_trunc must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        if self.pole_guard < 0:
            raise ValueError("pole_guard must be nonnegative")


DEFAULT_PRECISION = Precision()


@dataclass(frozen=True)
class Nome:
    """The pair (p, q): elliptic nome ``p`` and shift base ``q``."""

    p: complex
    q: complex

    def __post_init__(self):
        if abs(self.p) >= 1:
            raise DomainError(f"|p| must be < 1, got |p| = {abs(self.p)}")
        if self.q == 0:
            raise DomainError("q must be nonzero")


class ScaledProduct:
    """Running product kept as ``m * 2**e`` with ``|m|`` near 1.

    Theta values on a wide lattice span hundreds of decades although the
    ratios built from them are moderate; rescaling by exact powers of two
    after every factor keeps such products free of overflow and underflow
    without touching the rounding.
    """

    __slots__ = ("m", "e")

    def __init__(self, x=1 + 0j):
        self.m = x
        self.e = 0
        self._normalize()

    def _normalize(self):
        a = abs(self.m)
        if a == 0 or not math.isfinite(a):
            return
        ex = math.frexp(a)[1]
        if ex:
            self.m = _pow2_scale(self.m, -ex)
            self.e += ex

    def __imul__(self, x):
        self.m = self.m * x
        self._normalize()
        return self

    def __itruediv__(self, x):
        self.m = self.m / x
        self._normalize()
        return self

    def below(self, bound: float) -> bool:
        """``|value| < bound`` without forming the value."""
        a = abs(self.m)
        if a == 0:
            return True
        return math.log2(a) + self.e < math.log2(bound) if bound > 0 else False

    def ratio(self, other: "ScaledProduct"):
        return _pow2_scale(self.m / other.m, self.e - other.e)

    def value(self):
        return _pow2_scale(self.m, self.e)


def _pow2_scale(x, k):
    # x * 2**k in at most a few exact steps; overflow gives inf, underflow 0
    while k > 1000:
        x = x * 2.0**1000
        k -= 1000
    while k < -1000:
        x = x * 2.0**-1000
        k += 1000
    return x * 2.0**k


def _check_nome(p):
    if abs(p) >= 1:
        raise DomainError(f"|p| must be < 1, got |p| = {abs(p)}")


def qpochhammer_inf(z: complex, p: complex, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Infinite q-Pochhammer symbol ``(z; p)_inf = prod_{i>=0} (1 - p**i z)``.

    The product stops after factor ``M`` once ``|p**(M+1) z| / (1 - |p|)``,
    which bounds the logarithm of the neglected tail, drops below
    ``prec.eps_trunc``.

    Raises
    ------
    DomainError
        If ``|p| >= 1``.
    TruncationFailure
        If more than ``prec.max_terms`` factors would be needed.
    """
    _check_nome(p)
    inv_gap = 1.0 / (1.0 - abs(p))
    result = 1 + 0 * z
    term = z
    for _ in range(prec.max_terms):
        result *= 1 - term
        term *= p
        if abs(term) * inv_gap < prec.eps_trunc:
            return result
    raise TruncationFailure(
        f"(z;p)_inf with |z|={abs(z):.3g}, |p|={abs(p):.3g} needs more than "
        f"{prec.max_terms} factors"
    )


def theta(z: complex, p: complex, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Multiplicative theta function ``theta(z; p) = (z; p)_inf (p/z; p)_inf``.

    ``theta(z; 0) = 1 - z``.  Zeros are exactly the points ``z in p**Z``.
    """
    if z == 0:
        raise DomainError("theta(z; p) is undefined at z = 0")
    return qpochhammer_inf(z, p, prec) * qpochhammer_inf(p / z, p, prec)


def theta_pm(a: complex, w: complex, p: complex, prec: Precision = DEFAULT_PRECISION) -> complex:
    """``theta(a w^{+-1}; p)``, i.e. the product ``theta(a w; p) theta(a / w; p)``."""
    return theta(a * w, p, prec) * theta(a / w, p, prec)


def theta_factorial(z: complex, k: int, nome: Nome, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Theta shifted factorial ``theta(z; p; q)_k`` for any integer ``k``.

    For ``k >= 0`` this is ``theta(z) theta(qz) ... theta(q**(k-1) z)``.
    Negative indices use ``theta(z; p; q)_{-k} = 1 / theta(q**(-k) z; p; q)_k``,
    the only extension for which ``(.)_{k+1} = (.)_k theta(q**k z)`` holds
    for every integer ``k``.

    Raises
    ------
    NearPole
        If ``k < 0`` and one of the inverted theta factors has modulus below
        ``prec.pole_guard``.
    """
    acc = ScaledProduct(1 + 0 * z)
    mul_theta_factorial(acc, z, k, nome, prec)
    return acc.value()


def mul_theta_factorial(acc: ScaledProduct, z: complex, k: int, nome: Nome,
                        prec: Precision = DEFAULT_PRECISION, inverse: bool = False) -> ScaledProduct:
    """Multiply ``acc`` by ``theta(z; p; q)_k`` (or divide if ``inverse``), one factor at a time.

    Every theta factor that ends up in a denominator is checked against
    ``prec.pole_guard`` and raises ``NearPole`` if smaller.
    """
    p, q = nome.p, nome.q
    if k >= 0:
        w, count, divide = z, k, inverse
    else:
        w, count, divide = z, -k, not inverse
        for _ in range(count):
            w /= q
    for _ in range(count):
        factor = theta(w, p, prec)
        if divide:
            if abs(factor) < prec.pole_guard:
                raise NearPole(f"theta({w}) = {factor} in a denominator factorial")
            acc /= factor
        else:
            acc *= factor
        w *= q
    return acc


def elliptic_pochhammer(z: complex, p: complex, q: complex, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Double product ``(z; p, q)_inf = prod_{i,j>=0} (1 - p**i q**j z)``.

    Rows ``(p**i z; q)_inf`` are added while ``|p**i z| / ((1-|p|)(1-|q|))``,
    the bound on the logarithm of all remaining rows, is at least ``eps_trunc``.
    """
    _check_nome(p)
    _check_nome(q)
    inv_gap = 1.0 / ((1.0 - abs(p)) * (1.0 - abs(q)))
    result = 1 + 0 * z
    w = z
    for _ in range(prec.max_terms):
        result *= qpochhammer_inf(w, q, prec)
        w *= p
        if abs(w) * inv_gap < prec.eps_trunc:
            return result
    raise TruncationFailure(
        f"(z;p,q)_inf with |p|={abs(p):.3g}, |q|={abs(q):.3g} needs more than "
        f"{prec.max_terms} rows"
    )


def elliptic_gamma(z: complex, nome: Nome, prec: Precision = DEFAULT_PRECISION) -> complex:
    """Ruijsenaars elliptic gamma ``Gamma(z; p, q) = (pq/z; p, q)_inf / (z; p, q)_inf``.

    Satisfies ``Gamma(qz) / Gamma(z) = theta(z; p)``; for ``p = 0`` it reduces
    to ``1 / (z; q)_inf``.

    Raises
    ------
    DomainError
        If ``z = 0`` or ``|p|, |q| >= 1``.
    NearPole
        If ``|(z; p, q)_inf| < prec.pole_guard``.
    """
    p, q = nome.p, nome.q
    if abs(q) >= 1:
        raise DomainError(f"elliptic gamma needs |q| < 1, got |q| = {abs(q)}")
    if z == 0:
        raise DomainError("elliptic gamma is undefined at z = 0")
    den = elliptic_pochhammer(z, p, q, prec)
    if abs(den) < prec.pole_guard:
        raise NearPole(f"(z;p,q)_inf = {den} at z = {z}")
    return elliptic_pochhammer(p * q / z, p, q, prec) / den
