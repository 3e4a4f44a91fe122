import math

import numpy as np
import pytest

from anosov_tangent.conjugacy import NodeValueContext, conjugacy_point
from anosov_tangent.errors import NoConvergence, ZeroDenominator
from anosov_tangent.oracle import (
    chord_slope,
    fd_manifold_slope,
    manifold_membership_check,
    richardson,
    stable_direction,
)
from anosov_tangent.torus import PerturbedMap, TorusPoint

from conftest import random_points

PSI = TorusPoint(0.7, 2.1)
TS = (1e-3, 5e-4, 2.5e-4)


def test_unperturbed_direction(auto, f2):
    r = stable_direction(PerturbedMap(auto, f2, 0.0), PSI)
    assert np.allclose(r.direction, auto.vec(-1), atol=1e-14)
    assert abs(r.slope) < 1e-14
    assert r.multiplier == pytest.approx(auto.lambda_minus, abs=1e-14)


def test_zero_function_direction(auto, zero):
    r = stable_direction(PerturbedMap(auto, zero, 0.02), PSI)
    assert abs(r.slope) < 1e-14


@pytest.mark.parametrize("psi", random_points(5, 5))
def test_invariance_residual(auto, f2, psi):
    r = stable_direction(PerturbedMap(auto, f2, 0.02), psi)
    assert r.residual < 1e-8
    assert abs(r.multiplier) < 1.0


def test_more_iterations_same_direction(auto, f2):
    pmap = PerturbedMap(auto, f2, 0.02)
    a = stable_direction(pmap, PSI, 40).direction
    b = stable_direction(pmap, PSI, 80).direction
    assert np.linalg.norm(a - b) < 1e-10


def test_no_convergence_when_short(auto, f2):
    with pytest.raises(NoConvergence):
        stable_direction(PerturbedMap(auto, f2, 0.02), PSI, 10)


def test_too_few_iterations(auto, f2):
    with pytest.raises(ValueError):
        stable_direction(PerturbedMap(auto, f2, 0.02), PSI, 9)


def test_richardson_exact_on_lines():
    ts = [4e-3, 2e-3, 1e-3]
    value, err = richardson(ts, [3.0 - 7.0 * t for t in ts])
    assert value == pytest.approx(3.0, abs=1e-13)
    assert err < 1e-12


def test_fd_slope_unperturbed(auto, f2):
    assert fd_manifold_slope(PerturbedMap(auto, f2, 0.0), PSI, TS).slope == 0.0


def test_fd_slope_rejects_bad_t_list(auto, f2):
    with pytest.raises(ValueError):
        fd_manifold_slope(PerturbedMap(auto, f2, 0.01), PSI, (1e-3, 2e-3, 5e-4))


def test_chord_zero_step(auto, f2):
    with pytest.raises(ZeroDenominator):
        chord_slope(PerturbedMap(auto, f2, 0.01), PSI, 0.0)


@pytest.mark.parametrize("psi", random_points(3, 8))
def test_fd_slope_matches_oracle(auto, f1, psi):
    pmap = PerturbedMap(auto, f1, 0.02)
    fd = fd_manifold_slope(pmap, psi, TS)
    H = conjugacy_point(NodeValueContext(auto, f1, psi, 60), 0.02, 5)
    assert abs(fd.slope - stable_direction(pmap, H).slope) <= 1e-6


def test_membership_unperturbed(auto, f2):
    t = 1e-3
    rep = manifold_membership_check(PerturbedMap(auto, f2, 0.0), PSI, t, 20)
    expected = [t * abs(auto.lambda_minus) ** n for n in range(21)]
    assert np.allclose(rep.distances, expected, rtol=1e-6, atol=1e-15)
    assert rep.rate == pytest.approx(abs(auto.lambda_minus), abs=1e-6)


def test_membership_zero_step(auto, f2):
    rep = manifold_membership_check(PerturbedMap(auto, f2, 0.02), PSI, 0.0, 10)
    assert all(d == 0.0 for d in rep.distances)
    assert math.isnan(rep.rate)


def test_membership_perturbed_rate(auto, f1):
    rep = manifold_membership_check(PerturbedMap(auto, f1, 0.02), PSI, 1e-3, 40)
    assert abs(rep.rate - abs(auto.lambda_minus)) < 0.05
    assert rep.fit_steps >= 5


def test_membership_step_limit(auto, f2):
    with pytest.raises(ValueError):
        manifold_membership_check(PerturbedMap(auto, f2, 0.02), PSI, 1e-3, 61)
