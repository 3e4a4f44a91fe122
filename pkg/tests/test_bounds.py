import math

import pytest
from hypothesis import given, strategies as st

from anosov_tangent.bounds import (
    eulerian,
    eulerian_poly,
    order_bound,
    radius_estimate,
    radius_for,
    sc_majorant,
)
from anosov_tangent.errors import TooLarge

PHI = (1 + math.sqrt(5)) / 2


def test_eulerian_known_rows():
    assert [eulerian(4, k) for k in range(4)] == [1, 11, 11, 1]
    assert [eulerian(5, k) for k in range(5)] == [1, 26, 66, 26, 1]
    assert eulerian(0, 0) == 1


@pytest.mark.parametrize("r", range(0, 9))
def test_eulerian_row_sums(r):
    assert sum(eulerian(r, k) for k in range(r + 1)) == math.factorial(r)


@pytest.mark.parametrize("r", range(1, 12))
def test_eulerian_symmetry(r):
    assert all(eulerian(r, k) == eulerian(r, r - 1 - k) for k in range(r))


def test_eulerian_guards():
    with pytest.raises(TooLarge):
        eulerian(21, 3)
    with pytest.raises(ValueError):
        eulerian(-1, 0)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_polylog_identity(r):
    # x A_r(x) / (1-x)^(r+1) = sum_{n>=1} n^r x^n
    x = 0.3
    lhs = x * eulerian_poly(r, x) / (1 - x) ** (r + 1)
    assert lhs == pytest.approx(math.fsum(n**r * x**n for n in range(1, 400)), rel=1e-13)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_sc_majorant_dominates_direct_sum(r):
    x = PHI**-2
    direct = math.fsum(n**r * x**n for n in range(1, 201)) ** r
    maj = sc_majorant(r, PHI, 1.0)
    assert maj >= direct * (1 - 1e-10)
    assert maj == pytest.approx(direct, rel=1e-10)


def test_sc_majorant_r1_value():
    # x / (1 - x)^2 with x = phi^-2 equals 1 exactly in real arithmetic
    assert sc_majorant(1, PHI, 1.0) == pytest.approx(1.0, abs=1e-14)


@given(st.integers(0, 6), st.floats(1.1, 10), st.floats(0, 100))
def test_sc_majorant_scales_with_M(r, lam, M):
    assert sc_majorant(r, lam, M) == pytest.approx(M * sc_majorant(r, lam, 1.0), rel=1e-12)


def test_sc_majorant_rejects_bad_input():
    with pytest.raises(ValueError):
        sc_majorant(1, 0.9, 1.0)
    with pytest.raises(ValueError):
        sc_majorant(1, 2.0, -1.0)


def test_order_bound_grows():
    b = [order_bound(k, 2, 1.0, PHI) for k in range(1, 6)]
    assert all(x < y for x, y in zip(b, b[1:]))
    assert order_bound(3, 2, 0.0, PHI) == 0.0


def test_radius_is_min_root():
    est = radius_estimate(2, 1.0, PHI, 5)
    expected = min(order_bound(k, 2, 1.0, PHI) ** (-1 / k) for k in range(1, 6))
    assert est.radius == pytest.approx(expected, rel=1e-14)
    assert len(est.per_order_bound) == 5
    assert not est.unbounded


def test_radius_zero_function_is_unbounded(auto, zero):
    est = radius_estimate(1, 0.0, PHI)
    assert est.unbounded
    assert est.to_json()["radius"] == "unbounded"
    assert math.isinf(radius_for(zero, auto))


def test_radius_for_uses_grid_sup(auto, f1):
    est = radius_estimate(f1.degree_bound, f1.grid_sup(auto), PHI)
    assert radius_for(f1, auto) == est.radius
