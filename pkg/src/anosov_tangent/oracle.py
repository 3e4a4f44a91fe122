"""Series-independent ground truth for the stable direction of the perturbed map."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conjugacy import NodeValueContext, h_eps
from .errors import NoConvergence, SingularJacobian, ZeroDenominator
from .torus import PerturbedMap, TorusPoint, apply_perturbed, jacobian_perturbed

DIRECTION_TOL = 1e-10
FD_ORDER = 5
FD_PMAX = 60


@dataclass(frozen=True)
class OracleResult:
    direction: np.ndarray
    slope: float
    iterations: int
    residual: float
    multiplier: float = float("nan")

    def to_json(self, psi: TorusPoint, eps: float) -> dict:
        return {"psi": [psi.theta1, psi.theta2], "eps": eps, "slope_oracle": self.slope,
                "residual": self.residual, "iters": self.iterations,
                "multiplier": self.multiplier}


def _orbit(pmap: PerturbedMap, psi: TorusPoint, n: int) -> list[TorusPoint]:
    pts = [psi]
    for _ in range(n):
        pts.append(apply_perturbed(pmap, pts[-1]))
    return pts


def _pull_back(pmap: PerturbedMap, orbit: list[TorusPoint], start: np.ndarray) -> np.ndarray:
    u = start / np.linalg.norm(start)
    for x in reversed(orbit[:-1]):
        J = jacobian_perturbed(pmap, x)
        if abs(np.linalg.det(J)) < 1e-12:
            raise SingularJacobian(f"singular Jacobian at {x}")
        u = np.linalg.solve(J, u)
        u /= np.linalg.norm(u)
    return u


def _starts(pmap: PerturbedMap) -> tuple[np.ndarray, np.ndarray]:
    """Two generic start vectors, neither close to the unstable eigendirection."""
    first = np.array([1.0, 1.0]) / math.sqrt(2.0)
    other = np.array([1.0, -1.0]) / math.sqrt(2.0)
    vp = pmap.base.vec(1)
    if abs(first[0] * vp[1] - first[1] * vp[0]) < 0.2:
        first, other = other, pmap.base.vec(-1)
    elif abs(other[0] * vp[1] - other[1] * vp[0]) < 0.2:
        other = pmap.base.vec(-1)
    return first, other


def _direction(pmap: PerturbedMap, psi: TorusPoint, n_iters: int) -> np.ndarray:
    orbit = _orbit(pmap, psi, n_iters)
    a, b = _starts(pmap)
    u = _pull_back(pmap, orbit, a)
    w = _pull_back(pmap, orbit, b)
    change = min(np.linalg.norm(u - w), np.linalg.norm(u + w))
    if change > DIRECTION_TOL:
        raise NoConvergence(f"pull-back directions differ by {change:.3g} after {n_iters} steps")
    return u


def eigen_slope(pmap: PerturbedMap, u: np.ndarray) -> float:
    c = pmap.base.to_eigen(u)
    if c[1] == 0.0:
        raise ZeroDenominator("direction has no v_- component")
    return float(c[0] / c[1])


def stable_direction(pmap: PerturbedMap, psi: TorusPoint, n_iters: int = 40) -> OracleResult:
    """Stable direction at ``psi`` by pulling a vector back along the forward orbit."""
    if n_iters < 10:
        raise ValueError("n_iters >= 10")
    u = _direction(pmap, psi, n_iters)
    # orient so the v_- component is positive
    if pmap.base.to_eigen(u)[1] < 0:
        u = -u
    image = _direction(pmap, apply_perturbed(pmap, psi), n_iters)
    if pmap.base.to_eigen(image)[1] < 0:
        image = -image
    mapped = jacobian_perturbed(pmap, psi) @ u
    mu = float(mapped @ image)
    residual = float(np.linalg.norm(mapped - mu * image))
    return OracleResult(u, eigen_slope(pmap, u), n_iters, residual, mu)


def _displacement(pmap: PerturbedMap, psi: TorusPoint, K: int, pmax: int) -> np.ndarray:
    ctx = NodeValueContext(pmap.base, pmap.f, psi, pmax, max(K, 1))
    return h_eps(ctx, pmap.eps, K)


def chord_slope(pmap: PerturbedMap, psi: TorusPoint, t: float,
                K: int = FD_ORDER, pmax: int = FD_PMAX) -> float:
    """``V_+ / V_-`` for the chord from ``H(psi)`` to ``H(psi + t v_-)``."""
    if t == 0.0:
        raise ZeroDenominator("t = 0")
    moved = psi.shifted(t * pmap.base.vec(-1))
    d = (_displacement(pmap, moved, K, pmax) - _displacement(pmap, psi, K, pmax)) / t
    vp, vm = d[0], 1.0 + d[1]
    if abs(vm) < 1e-12:
        raise ZeroDenominator(f"V_- vanishes at t = {t}")
    return float(vp / vm)


@dataclass(frozen=True)
class FDSlope:
    slope: float
    error: float
    t_list: tuple[float, ...]
    chord_slopes: tuple[float, ...]


def richardson(ts: list[float], ys: list[float]) -> tuple[float, float]:
    """Linear extrapolation from the two smallest ``t``; error vs the 3-point quadratic."""
    order = sorted(range(len(ts)), key=lambda i: ts[i])
    (t1, y1), (t2, y2), (t3, y3) = [(ts[i], ys[i]) for i in order[:3]]
    two = (y1 * t2 - y2 * t1) / (t2 - t1)
    three = (y1 * t2 * t3 / ((t1 - t2) * (t1 - t3))
             + y2 * t1 * t3 / ((t2 - t1) * (t2 - t3))
             + y3 * t1 * t2 / ((t3 - t1) * (t3 - t2)))
    return two, abs(two - three)


def fd_manifold_slope(pmap: PerturbedMap, psi: TorusPoint, t_list,
                      K: int = FD_ORDER, pmax: int = FD_PMAX) -> FDSlope:
    ts = [float(t) for t in t_list]
    if len(ts) < 3 or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_list needs at least 3 strictly decreasing values")
    if pmap.eps == 0.0 or pmap.f.is_zero():
        return FDSlope(0.0, 0.0, tuple(ts), tuple(0.0 for _ in ts))
    ys = [chord_slope(pmap, psi, t, K, pmax) for t in ts]
    value, err = richardson(ts, ys)
    return FDSlope(value, err, tuple(ts), tuple(ys))


@dataclass(frozen=True)
class MembershipReport:
    distances: tuple[float, ...]
    rate: float
    fit_steps: int

    def to_json(self) -> dict:
        return {"distances": list(self.distances), "rate": self.rate, "fit_steps": self.fit_steps}


def manifold_membership_check(pmap: PerturbedMap, psi: TorusPoint, t: float, n_steps: int,
                              K: int = FD_ORDER, pmax: int = FD_PMAX) -> MembershipReport:
    """Iterate ``H(psi + t v_-)`` and ``H(psi)`` together and fit the decay of their distance.

    The fit runs over the initial stretch where the distance keeps shrinking;
    past that the truncation error of ``H`` starts to grow along ``v_+``.
    """
    if not 0 < n_steps <= 60:
        raise ValueError("1 <= n_steps <= 60")
    base = pmap.base
    moved = psi.shifted(t * base.vec(-1))
    y = moved.shifted(base.from_eigen(_displacement(pmap, moved, K, pmax)))
    z = psi.shifted(base.from_eigen(_displacement(pmap, psi, K, pmax)))
    dist = [y.distance(z)]
    for _ in range(n_steps):
        y, z = apply_perturbed(pmap, y), apply_perturbed(pmap, z)
        dist.append(y.distance(z))
    if dist[0] == 0.0:
        return MembershipReport(tuple(dist), float("nan"), 0)
    end = 1
    while end < len(dist) and 0.0 < dist[end] < dist[end - 1]:
        end += 1
    # drop the last few points before the turn, where the error floor bends the curve
    use = max(2, end - 3) if end > 5 else end
    n = np.arange(use)
    slope = np.polyfit(n, np.log(np.array(dist[:use])), 1)[0] if use >= 2 else float("nan")
    return MembershipReport(tuple(dist), float(math.exp(slope)), use)
