"""Reduced per-order slope coefficients and the tangent direction of W^s."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bounds import radius_for
from .conjugacy import NodeValueContext
from .errors import RadiusExceeded, TooLarge
from .summation import csum
from .torus import TorusPoint, s0_pow_apply
from .trees import RESTRICT_MODES, HalfLabeledKey

DEFAULT_RESTRICT = "stem-minus-only"
# each distinct labeled tree counted once, with 1/s! at a node of s children
TREE_CONVENTION = "distinct-trees, 1/s! per node"


def _mode(restrict_mode: str) -> str:
    if restrict_mode not in RESTRICT_MODES:
        raise ValueError(f"unknown restrict mode {restrict_mode!r}")
    return restrict_mode


def val_E(ctx: NodeValueContext, key: HalfLabeledKey,
          restrict_mode: str = DEFAULT_RESTRICT) -> tuple[float, float]:
    """Sum over the reduced labelings of one half-labeled class, with tail bound."""
    if key.top_sign < 0:
        raise ValueError("val_E needs a class with top sign +")
    return ctx.sums.val_E(key, _mode(restrict_mode))


def val_qn0(ctx: NodeValueContext, n: int, restrict_mode: str = DEFAULT_RESTRICT):
    """``(value, tail_bound, per_class)`` for the order-``n`` reduced coefficient."""
    if n > ctx.max_order:
        raise TooLarge(f"order {n} > max_order {ctx.max_order}")
    return ctx.sums.val_qn0(n, _mode(restrict_mode))


@dataclass(frozen=True)
class CancellationReport:
    lhs: float
    rhs: float
    abs_diff: float


def order2_cancellation_check(ctx: NodeValueContext) -> CancellationReport:
    """Compare the product of the two first-order derivative series with the
    divergent tail of the order-2 derivative series after re-indexing.

    Both are truncated to ``0 <= a <= pmax`` and ``-pmax <= b <= -1`` in the
    product's indexing.
    """
    auto, f, psi, P = ctx.auto, ctx.f, ctx.psi, ctx.pmax
    lp, lm = auto.lambda_plus, auto.lambda_minus
    pts = np.array([s0_pow_apply(auto, q, psi).as_array() for q in range(-P, P + 1)])
    dfp = f.evaluate(auto, 1, [-1], pts)
    dfm = f.evaluate(auto, -1, [-1], pts)
    at = lambda arr, q: arr[q + P]  # noqa: E731
    lhs, rhs = [], []
    for a in range(0, P + 1):
        for b in range(-1, -P - 1, -1):
            lhs.append(-lp ** (-(a + 1)) * lm ** (a - 1) * at(dfp, a) * at(dfm, b))
        for b in range(-a - 1, -a - P - 1, -1):
            rhs.append(-lp ** (-(a + 1)) * lm ** abs(b + 1) * lm ** (a + b)
                       * at(dfp, a) * at(dfm, a + b))
    l, r = csum(lhs), csum(rhs)
    return CancellationReport(l, r, abs(l - r))


@dataclass(frozen=True)
class SlopeReport:
    psi: TorusPoint
    eps: float
    K: int
    pmax: int
    restrict_mode: str
    per_order: list[tuple[int, float, float]]
    slope: float
    tangent_vector: np.ndarray
    forced: bool = False
    per_class: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {
            "psi": [self.psi.theta1, self.psi.theta2],
            "eps": self.eps,
            "K": self.K,
            "pmax": self.pmax,
            "restrict_mode": self.restrict_mode,
            "per_order": [{"k": k, "value": v, "tail_bound": t} for k, v, t in self.per_order],
            "slope": self.slope,
            "tangent": [float(x) for x in self.tangent_vector],
            "forced": self.forced,
            "tree_convention": TREE_CONVENTION,
        }


def tangent_from_slope(auto, s: float) -> np.ndarray:
    v = s * auto.vec(1) + auto.vec(-1)
    return v / np.linalg.norm(v)


def slope(ctx: NodeValueContext, eps: float, K: int,
          restrict_mode: str = DEFAULT_RESTRICT, force: bool = False) -> SlopeReport:
    """``v_eps(psi) = sum_k eps^k Val[q_k(0)]`` and the unit tangent it defines."""
    radius = radius_for(ctx.f, ctx.auto)
    forced = False
    if abs(eps) >= radius and eps != 0.0:
        if not force:
            raise RadiusExceeded(f"|eps| = {abs(eps)} >= radius estimate {radius:.3g}")
        forced = True
        warnings.warn(f"eps beyond radius estimate {radius:.3g}", RuntimeWarning, stacklevel=2)
    per_order, per_class, terms = [], {}, []
    for k in range(1, K + 1):
        value, tail, classes = val_qn0(ctx, k, restrict_mode)
        per_order.append((k, value, tail))
        per_class[k] = classes
        terms.append(eps**k * value)
    s = csum(terms) if eps != 0.0 else 0.0
    if not math.isfinite(s):
        raise TooLarge("non-finite slope")
    return SlopeReport(ctx.psi, eps, K, ctx.pmax, restrict_mode, per_order, s,
                       tangent_from_slope(ctx.auto, s), forced, per_class)
