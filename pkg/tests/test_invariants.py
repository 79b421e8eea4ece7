import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellsum.errors import GenericityFailure, RangeError
from ellsum.invariants import (
    InvariantParams,
    WnElement,
    apply_wn,
    e_explicit,
    e_recursive,
    e_table,
    reference_point,
)
from ellsum.kernel import theta_pm
from ellsum.sampling import cell_rng, random_complex, random_point
from oracles import mp_e_explicit

mp.mp.dps = 30

A1, A2, T, P = 0.9 + 0.4j, -0.7 + 0.8j, 0.55 - 0.2j, 0.12 + 0.1j


def rel(x, y):
    return abs(x - y) / max(abs(x), abs(y))


def params(n):
    return InvariantParams(A1, A2, T, P, n)


def points(n, count, key=0):
    rng = cell_rng(3, key, n)
    return [random_point(rng, n) for _ in range(count)]


def test_reference_points():
    ip = params(3)
    assert reference_point(ip, 0) == (A2, A2 * T, A2 * T**2)
    assert reference_point(ip, 2) == (A1, A1 * T, A2)
    assert reference_point(ip, 3) == (A1, A1 * T, A1 * T**2)
    with pytest.raises(RangeError):
        reference_point(ip, 4)


def test_empty_invariant_is_one():
    ip = params(0)
    assert e_table(ip, ()) == [1]
    assert e_explicit(ip, 0, ()) == 1


def test_e0_closed_form():
    ip = params(3)
    for z in points(3, 3):
        want = math.prod(theta_pm(A1, z[j], P) / theta_pm(A1, A2 * T**j, P) for j in range(3))
        assert rel(e_explicit(ip, 0, z), want) < 1e-13


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_interpolation(n):
    ip = params(n)
    for s in range(n + 1):
        tab = e_table(ip, reference_point(ip, s))
        for r in range(n + 1):
            want = 1.0 if r == s else 0.0
            assert abs(tab[r] - want) < 1e-12
            assert abs(e_explicit(ip, r, reference_point(ip, s)) - want) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_explicit_recursive_and_mpmath_agree(n):
    ip = params(n)
    for z in points(n, 2):
        for r in range(n + 1):
            ref = complex(mp_e_explicit(A1, A2, T, P, r, z))
            assert rel(e_explicit(ip, r, z), ref) < 1e-12
            assert rel(e_recursive(ip, r, z), ref) < 1e-12


def test_table_scale_is_linear():
    ip = params(3)
    z = points(3, 1)[0]
    plain = e_table(ip, z)
    scaled = e_table(ip, z, scale=1e-200)
    assert all(rel(a * 1e-200, b) < 1e-15 for a, b in zip(plain, scaled))


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_wn_invariance(n, key):
    rng = cell_rng(11, key)
    ip = params(n)
    z = random_point(rng, n)
    w = WnElement.random(n, rng)
    for a, b in zip(e_table(ip, apply_wn(w, z)), e_table(ip, z)):
        assert rel(a, b) < 1e-11


def test_quasi_periodicity():
    ip = params(2)
    for z in points(2, 3):
        for i in range(2):
            zp = tuple(x * P if k == i else x for k, x in enumerate(z))
            for a, b in zip(e_table(ip, zp), e_table(ip, z)):
                assert rel(a, b / (P * z[i] ** 2)) < 1e-11


def test_basis_recovers_invariant_theta_product():
    # prod_i theta(b z_i^{+-1}) lies in the span; its coordinates are its values at the reference points
    n, b = 3, 1.1 - 0.3j
    ip = params(n)
    g = lambda z: math.prod(theta_pm(b, x, P) for x in z)
    coords = [g(reference_point(ip, s)) for s in range(n + 1)]
    for z in points(n, 3):
        recon = sum(c * e for c, e in zip(coords, e_table(ip, z)))
        assert rel(recon, g(z)) < 1e-11


def test_apply_wn_examples():
    z = (2.0, 3.0, 5.0)
    assert apply_wn(WnElement.identity(3), z) == z
    assert apply_wn(WnElement((1, 2, 0), (1, 1, 1)), z) == (5.0, 2.0, 3.0)
    assert apply_wn(WnElement((0, 1, 2), (1, -1, 1)), z) == (2.0, 1 / 3.0, 5.0)


def test_wn_element_validation():
    with pytest.raises(ValueError):
        WnElement((0, 0), (1, 1))
    with pytest.raises(ValueError):
        WnElement((0, 1), (1, 2))


def test_wn_random_is_seeded():
    a = WnElement.random(4, cell_rng(5, 1))
    b = WnElement.random(4, cell_rng(5, 1))
    assert a == b


def test_anchor_collisions_rejected():
    with pytest.raises(GenericityFailure):
        InvariantParams(A2 * T**2, A2, T, P, 2)
    with pytest.raises(GenericityFailure):
        InvariantParams(A1, A1, T, P, 1)
    with pytest.raises(GenericityFailure):
        InvariantParams(0, A2, T, P, 1)
    # |j| > n is not a collision
    InvariantParams(A2 * T**3, A2, T, P, 2)


def test_argument_checks():
    ip = params(2)
    with pytest.raises(ValueError):
        e_explicit(ip, 0, (1.0,))
    with pytest.raises(RangeError):
        e_recursive(ip, 3, (1.0, 1.2))


def test_random_complex_modulus_range():
    rng = cell_rng(0)
    for _ in range(50):
        assert 0.7 <= abs(random_complex(rng, 0.7, 1.4)) <= 1.4


def test_basis_recovers_random_combination():
    n = 3
    ip = params(n)
    rng = cell_rng(9, 9)
    coeffs = [complex(*rng.normal(size=2)) for _ in range(n + 1)]
    f = lambda z: sum(c * e for c, e in zip(coeffs, e_table(ip, z)))
    for s in range(n + 1):
        assert abs(f(reference_point(ip, s)) - coeffs[s]) < 1e-12 * max(map(abs, coeffs))
