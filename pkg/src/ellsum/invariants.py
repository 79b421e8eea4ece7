"""Fundamental W_n-invariants E_r(a1, a2; z) and their reference points.

``E_r`` is available both as the explicit sum over complementary index sets
and through the one-variable-at-a-time recursion; the two are independent
constructions and serve as oracles for each other.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import GenericityFailure, NearPole, RangeError
from .kernel import DEFAULT_PRECISION, Precision, theta_pm

COLLISION_RTOL = 1e-10


@dataclass(frozen=True)
class InvariantParams:
    """Anchors ``(a1, a2)``, ratio ``t``, nome ``p`` and number of variables ``n``.

    Construction fails with ``GenericityFailure`` when ``a1/a2`` is (nearly) a
    power ``t^j`` with ``|j| <= n`` or when a normalizing theta value falls
    below ``prec.pole_guard``.  ``n = 0`` is allowed and gives ``E_0 = 1``.
    """

    a1: complex
    a2: complex
    t: complex
    p: complex
    n: int
    prec: Precision = field(default=DEFAULT_PRECISION, compare=False, repr=False)

    def __post_init__(self):
        if self.a1 == 0 or self.a2 == 0 or self.t == 0:
            raise GenericityFailure("anchors and t must be nonzero")
        if self.n < 0:
            raise RangeError(f"n must be >= 0, got {self.n}")
        ratio = self.a1 / self.a2
        for j in range(-self.n, self.n + 1):
            if abs(ratio - self.t**j) <= COLLISION_RTOL * abs(ratio):
                raise GenericityFailure(f"a1/a2 = t^{j} collides")
        for a, b in ((self.a2, self.a1), (self.a1, self.a2)):
            for i in range(1, self.n + 1):
                for k in range(1, i + 1):
                    val = theta_pm(a * self.t ** (i - k), b * self.t ** (k - 1), self.p, self.prec)
                    if abs(val) < self.prec.pole_guard:
                        raise GenericityFailure(f"normalizer theta = {val} at (i, k) = ({i}, {k})")

    def with_n(self, n: int) -> "InvariantParams":
        return InvariantParams(self.a1, self.a2, self.t, self.p, n, self.prec)


@dataclass(frozen=True)
class WnElement:
    """Signed permutation: ``z'_i = z_{sigma^-1(i)} ** signs[i]``.

    ``permutation[i]`` is ``sigma(i)`` (0-based).
    """

    permutation: tuple
    signs: tuple

    def __post_init__(self):
        n = len(self.permutation)
        if sorted(self.permutation) != list(range(n)):
            raise ValueError(f"{self.permutation} is not a permutation of 0..{n - 1}")
        if len(self.signs) != n or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be a vector of +-1 matching the permutation")

    @classmethod
    def identity(cls, n: int) -> "WnElement":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def random(cls, n: int, rng) -> "WnElement":
        """Uniform element drawn from a ``numpy.random.Generator``."""
        perm = tuple(int(x) for x in rng.permutation(n))
        signs = tuple(int(s) for s in rng.choice([-1, 1], size=n))
        return cls(perm, signs)


def apply_wn(w: WnElement, z: Sequence[complex]) -> tuple:
    inverse = [0] * len(z)
    for i, s in enumerate(w.permutation):
        inverse[s] = i
    return tuple(z[inverse[i]] ** w.signs[i] for i in range(len(z)))


def reference_point(ip: InvariantParams, s: int) -> tuple:
    """``(a1, a1 t, ..., a1 t^(s-1), a2, a2 t, ..., a2 t^(n-s-1))``."""
    if not 0 <= s <= ip.n:
        raise RangeError(f"reference index s = {s} outside 0..{ip.n}")
    return tuple(ip.a1 * ip.t**k for k in range(s)) + tuple(ip.a2 * ip.t**k for k in range(ip.n - s))


def _norm(a, b, p, prec):
    val = theta_pm(a, b, p, prec)
    if abs(val) < prec.pole_guard:
        raise NearPole(f"normalizer theta = {val}")
    return val


def _check_args(ip, r, z):
    if len(z) != ip.n:
        raise ValueError(f"point has {len(z)} coordinates, expected {ip.n}")
    if not 0 <= r <= ip.n:
        raise RangeError(f"r = {r} outside 0..{ip.n}")


def e_explicit(ip: InvariantParams, r: int, z: Sequence[complex],
               prec: Precision = DEFAULT_PRECISION) -> complex:
    """``E_r(z)`` as the sum over all splittings of ``{1..n}`` into ``I`` (size r) and ``J``.

    Each splitting contributes
    ``prod_k theta(a2 t^(i_k-k) z_{i_k}^{+-1}) / theta(a2 t^(i_k-k) (a1 t^(k-1))^{+-1})``
    times the same expression for ``J`` with ``a1`` and ``a2`` exchanged.
    """
    _check_args(ip, r, z)
    a1, a2, t, p, n = ip.a1, ip.a2, ip.t, ip.p, ip.n
    total = 0j
    for I in itertools.combinations(range(1, n + 1), r):
        J = [j for j in range(1, n + 1) if j not in I]
        term = 1 + 0j
        for k, i in enumerate(I, start=1):
            c = a2 * t ** (i - k)
            term *= theta_pm(c, z[i - 1], p, prec) / _norm(c, a1 * t ** (k - 1), p, prec)
        for l, j in enumerate(J, start=1):
            c = a1 * t ** (j - l)
            term *= theta_pm(c, z[j - 1], p, prec) / _norm(c, a2 * t ** (l - 1), p, prec)
        total += term
    return total


def e_table(ip: InvariantParams, z: Sequence[complex], prec: Precision = DEFAULT_PRECISION,
            scale: complex = 1 + 0j) -> list:
    """``[E_0^{(n)}(z), ..., E_n^{(n)}(z)]`` by the recursion in the last variable.

    Row ``m`` holds ``E_s^{(m)}(z_1..z_m)``; each row is built from the previous
    one, so the cost is quadratic in ``n``.  The recursion is linear in its
    starting row, so ``scale`` returns ``scale * E_s`` and lets a tiny lattice
    weight absorb values that would overflow on their own.
    """
    if len(z) != ip.n:
        raise ValueError(f"point has {len(z)} coordinates, expected {ip.n}")
    a1, a2, t, p = ip.a1, ip.a2, ip.t, ip.p
    row = [scale]
    for m in range(1, ip.n + 1):
        zm = z[m - 1]
        new = []
        for s in range(m + 1):
            val = 0j
            if s >= 1:
                c = a2 * t ** (m - s)
                val += row[s - 1] * theta_pm(c, zm, p, prec) / _norm(c, a1 * t ** (s - 1), p, prec)
            if s <= m - 1:
                c = a1 * t**s
                val += row[s] * theta_pm(c, zm, p, prec) / _norm(c, a2 * t ** (m - s - 1), p, prec)
            new.append(val)
        row = new
    return row


def e_recursive(ip: InvariantParams, r: int, z: Sequence[complex],
                prec: Precision = DEFAULT_PRECISION) -> complex:
    """``E_r(z)`` through the recursion; see ``e_table``."""
    _check_args(ip, r, z)
    return e_table(ip, z, prec)[r]
