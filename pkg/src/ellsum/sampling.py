"""Seeded random draws of generic constrained parameter sets."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import GenericityFailure
from .kernel import DEFAULT_PRECISION, Nome, Precision
from .summation import Balancing, ParameterSet, solve_constraints

A_MODULUS = (0.7, 1.4)
T_MODULUS = (0.4, 0.8)
NOME_MODULUS = (0.05, 0.3)
MAX_RETRIES = 50


def cell_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one grid cell, a pure function of ``(seed, key)``."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def random_complex(rng: np.random.Generator, lo: float, hi: float) -> complex:
    """Modulus uniform in ``[lo, hi]``, argument uniform on the circle."""
    r = rng.uniform(lo, hi)
    return complex(r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))


def random_point(rng: np.random.Generator, n: int, lo: float = 0.6, hi: float = 1.6) -> tuple:
    return tuple(random_complex(rng, lo, hi) for _ in range(n))


def draw_parameter_set(rng: np.random.Generator, n: int, N: int,
                       mode: Balancing = Balancing.SUM_Q, *, p_zero: bool = False,
                       prec: Precision = DEFAULT_PRECISION,
                       retries: int = MAX_RETRIES) -> ParameterSet:
    """Sample ``a1..a4, t, p, q`` and solve for ``a5, a6``.

    Degenerate draws are resampled; ``GenericityFailure`` is raised after
    ``retries`` failed attempts.  ``p_zero`` forces ``p = 0`` (the
    basic-hypergeometric limit) without altering the rest of the stream.
    """
    last = None
    for _ in range(retries):
        a_free = [random_complex(rng, *A_MODULUS) for _ in range(4)]
        t = random_complex(rng, *T_MODULUS)
        p = random_complex(rng, *NOME_MODULUS)
        q = random_complex(rng, *NOME_MODULUS)
        if p_zero:
            p = 0j
        free = a_free if mode is not Balancing.NONE else a_free + [random_complex(rng, *A_MODULUS)]
        try:
            return solve_constraints(free, t, Nome(p, q), n, N, mode, prec)
        except GenericityFailure as exc:
            last = exc
    raise GenericityFailure(f"no generic draw in {retries} attempts (n={n}, N={N}): {last}")
