"""Eulerian numbers, the polylogarithm majorant and the radius estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import TooLarge

MAX_EULERIAN_ROW = 20
DEFAULT_RADIUS_ORDERS = 5


@lru_cache(maxsize=None)
def _eulerian(r: int, k: int) -> int:
    if r == 0:
        return 1 if k == 0 else 0
    if k < 0 or k > r:
        return 0
    return (k + 1) * _eulerian(r - 1, k) + (r - k) * _eulerian(r - 1, k - 1)


def eulerian(r: int, k: int) -> int:
    """Number of permutations of ``r`` letters with exactly ``k`` descents."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if r > MAX_EULERIAN_ROW:
        raise TooLarge(f"r = {r} > {MAX_EULERIAN_ROW}")
    return _eulerian(r, k)


def eulerian_poly(r: int, x: float) -> float:
    return math.fsum(eulerian(r, k) * x**k for k in range(r + 1))


def sc_majorant(r: int, lambda_plus: float, M: float) -> float:
    """``M x^r A_r(x)^r / (1 - x)^(r (r + 1))`` with ``x = lambda_plus^-2``.

    Each factor ``x A_r(x) / (1 - x)^(r+1)`` is ``sum_{n>=1} n^r x^n``.
    """
    if abs(lambda_plus) <= 1:
        raise ValueError("need |lambda_plus| > 1")
    if M < 0 or r < 0:
        raise ValueError("need M >= 0 and r >= 0")
    if M == 0:
        return 0.0
    x = lambda_plus**-2
    return M * x**r * eulerian_poly(r, x) ** r / (1.0 - x) ** (r * (r + 1))


def order_bound(k: int, N: int, F: float, lambda_plus: float) -> float:
    if k < 1:
        raise ValueError("k >= 1")
    if F == 0:
        return 0.0
    return ((2 * N) ** k * F**k * (2 * N + 1) ** k * 2**k * 2 ** (2 * k) * k
            * sc_majorant(k, lambda_plus, 1.0))


@dataclass(frozen=True)
class RadiusEstimate:
    per_order_bound: list[float]
    radius: float
    params: dict = field(default_factory=dict)

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.radius)

    def to_json(self) -> dict:
        return {
            "N": self.params["N"],
            "F": self.params["F"],
            "lambda_plus": self.params["lambda_plus"],
            "per_order": [{"k": k + 1, "B_k": b} for k, b in enumerate(self.per_order_bound)],
            "radius": "unbounded" if self.unbounded else self.radius,
        }


def radius_estimate(N: int, F: float, lambda_plus: float,
                    k_max: int = DEFAULT_RADIUS_ORDERS) -> RadiusEstimate:
    """Root-test radius ``min_k B_k^(-1/k)`` over ``1 <= k <= k_max``."""
    if not 1 <= k_max <= MAX_EULERIAN_ROW:
        raise TooLarge(f"k_max = {k_max}")
    bounds = [order_bound(k, N, F, lambda_plus) for k in range(1, k_max + 1)]
    if F == 0:
        radius = math.inf
    else:
        radius = min(b ** (-1.0 / k) for k, b in enumerate(bounds, start=1))
    return RadiusEstimate(bounds, radius, {"N": N, "F": F, "lambda_plus": lambda_plus})


def radius_for(f, auto, k_max: int = DEFAULT_RADIUS_ORDERS) -> float:
    """Radius estimate for a perturbation, using the 256x256 grid sup-norm."""
    if f.is_zero():
        return math.inf
    return radius_estimate(f.degree_bound, f.grid_sup(auto), abs(auto.lambda_plus), k_max).radius
