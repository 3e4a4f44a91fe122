"""Tree values and the order-by-order conjugacy expansion.

Two evaluation routes are provided:

* ``node_val`` / ``tree_val`` evaluate a single labeled tree literally, one
  node at a time. They are slow and only used for small label cutoffs.
* :class:`TreeSums` sums a whole family of labelings at once. A node's
  contribution depends on its ancestors only through the integer shift
  ``q`` at which its g-function is evaluated, so the sum over labelings is a
  bottom-up dynamic program over arrays indexed by ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import TooLarge
from .summation import ArrayAccumulator, csum
from .torus import (
    HyperbolicAuto,
    MAX_POWER,
    TorusPoint,
    TrigPoly,
    s0_pow_apply,
    wrap_array,
)
from .trees import (
    HalfLabeledKey,
    LabeledTree,
    Path,
    enumerate_sign_derivative,
    enumerate_signed_trees,
    node_paths,
)

K_MAX = 5
# relative allowance for floating-point rounding in the reported tail bounds
ROUNDING = 64 * 2.0**-52


@dataclass(frozen=True)
class SeriesTerm:
    order: int
    alpha: int
    value: float
    tail_bound: float


def orbit_points(auto: HyperbolicAuto, psi: TorusPoint, window: int) -> np.ndarray:
    """Points ``S0^q psi`` for ``q = -window .. window`` as a (2 window + 1, 2) array.

    Exact integer powers are used up to the overflow guard; further points
    continue the orbit one step at a time.
    """
    out = np.empty((2 * window + 1, 2))
    inner = min(window, MAX_POWER)
    for q in range(-inner, inner + 1):
        out[q + window] = s0_pow_apply(auto, q, psi).as_array()
    fwd = auto.matrix
    bwd = np.array(auto.inverse, dtype=float)
    for q in range(inner + 1, window + 1):
        out[q + window] = wrap_array(fwd @ out[q - 1 + window])
        out[-q + window] = wrap_array(bwd @ out[-q + 1 + window])
    return out


@dataclass
class NodeValueContext:
    """Everything a node value depends on besides the tree itself."""

    auto: HyperbolicAuto
    f: TrigPoly
    psi: TorusPoint
    pmax: int = 40
    max_order: int = K_MAX
    _sums: "TreeSums | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.pmax < 1:
            raise ValueError("pmax >= 1")

    @property
    def sums(self) -> "TreeSums":
        if self._sums is None:
            self._sums = TreeSums(self.auto, self.f, self.psi, self.pmax, self.max_order)
        return self._sums

    def at(self, psi: TorusPoint) -> "NodeValueContext":
        return NodeValueContext(self.auto, self.f, psi, self.pmax, self.max_order)


def lambda_factor(auto: HyperbolicAuto, sign: int, p: int) -> float:
    """``lambda_alpha^(-|p+1| alpha)``."""
    if sign > 0:
        return auto.lambda_plus ** (-abs(p + 1))
    return auto.lambda_minus ** abs(p + 1)


def node_val(ctx: NodeValueContext, t: LabeledTree, v: Path, deriv: bool = False) -> float:
    """Value of node ``v``; with ``deriv`` it is the node's ``d_-`` derivative."""
    alpha = t.sign(v)
    kids = t.child_signs(v)
    q = t.q(v)
    c = alpha / math.factorial(len(kids))
    lam = lambda_factor(ctx.auto, alpha, t.label(v))
    point = s0_pow_apply(ctx.auto, q, ctx.psi).as_array()
    derivs = kids + [-1] if deriv else kids
    g = float(ctx.f.evaluate(ctx.auto, alpha, derivs, point)[0])
    if deriv:
        lam *= ctx.auto.lambda_minus ** q
    return c * lam * g


def tree_val(ctx: NodeValueContext, t: LabeledTree, deriv: Path | None = None) -> float:
    return math.prod(node_val(ctx, t, v, v == deriv) for v in t.paths)


def _split_signs(shape, signs: tuple[int, ...]):
    """Preorder sign blocks of each child subtree."""
    blocks, pos = [], 1
    for child in shape:
        n = len(node_paths(child))
        blocks.append(signs[pos:pos + n])
        pos += n
    return blocks


class TreeSums:
    """Labeling sums for one base point, via a dynamic program over ``q``."""

    def __init__(self, auto: HyperbolicAuto, f: TrigPoly, psi: TorusPoint,
                 pmax: int, max_order: int = K_MAX):
        self.auto, self.f, self.psi = auto, f, psi
        self.pmax = pmax
        self.max_order = max_order
        self.window = max_order * pmax
        self._exp: np.ndarray | None = None
        self._g: dict = {}
        self._h: dict = {}
        self._val: dict = {}
        self._sup: dict = {}
        self._memo: dict = {}
        self._fkey = function_key(f)

    # -- g-contributions on the orbit
    def _exp_table(self) -> np.ndarray:
        if self._exp is None:
            pts = orbit_points(self.auto, self.psi, self.window)
            self._exp = np.exp(1j * (pts @ self.f.freqs.T))
        return self._exp

    def g_on_orbit(self, alpha: int, derivs: Sequence[int]) -> np.ndarray:
        key = (alpha, sum(1 for d in derivs if d > 0), sum(1 for d in derivs if d < 0))
        out = self._g.get(key)
        if out is None:
            if self.f.is_zero():
                out = np.zeros(2 * self.window + 1)
            else:
                w = self.f._weights(self.auto, alpha, derivs)
                out = (self._exp_table() @ w).real
            self._g[key] = out
        return out

    def sup(self, alpha: int, derivs: Sequence[int]) -> float:
        key = (alpha, sum(1 for d in derivs if d > 0), sum(1 for d in derivs if d < 0))
        if key not in self._sup:
            self._sup[key] = self.f.sup_bound(self.auto, alpha, derivs)
        return self._sup[key]

    # -- the dynamic program
    def _dp(self, shape, signs, deriv: Path | None, mode: str | None,
            P: int, M: int, gfun, absolute: bool) -> float:
        lp = abs(self.auto.lambda_plus) if absolute else self.auto.lambda_plus
        lm = abs(self.auto.lambda_minus) if absolute else self.auto.lambda_minus
        q = np.arange(-M, M + 1)
        size = 2 * M + 1
        # subtrees recur across trees of one order; share their W arrays
        memo = self._memo.setdefault((mode, P, M, gfun.__name__, absolute), {})

        def node(sh, sg, d):
            key = (sh, sg, d)
            if key in memo:
                return memo[key]
            alpha = sg[0]
            blocks = _split_signs(sh, sg)
            kids = [b[0] for b in blocks]
            on_stem = d is not None
            is_d = d == ()
            g = gfun(alpha, kids + [-1] if is_d else kids, size, M)
            if is_d:
                power = np.where(q >= 0, lm ** np.maximum(q, 0), 0.0) if mode else lm ** q.astype(float)
                g = g * power
            c = (1.0 if absolute else alpha) / math.factorial(len(sh))
            u = c * g
            for j, (child, block) in enumerate(zip(sh, blocks)):
                cd = d[1:] if (d and d[0] == j) else None
                u = u * node(child, block, cd)
            restricted = alpha < 0 and (mode == "all-minus" or (mode == "stem-minus-only" and on_stem))
            acc = ArrayAccumulator(size)
            if alpha > 0:
                for p in range(0, P + 1):
                    acc.add(lp ** (-(p + 1)) * u[p:], slice(0, size - p))
            elif not restricted:
                for jj in range(1, P + 1):
                    acc.add(lm ** (jj - 1) * u[:size - jj], slice(jj, size))
            else:
                for jj in range(1, M + 1):
                    acc.add(lm ** (jj - 1) * u[M:size - jj], slice(M + jj, size))
            w = acc.value()
            memo[key] = w
            return w

        return float(node(shape, signs, deriv)[M])

    def _g_fun(self, alpha, derivs, size, M):
        g = self.g_on_orbit(alpha, derivs)
        return g[self.window - M:self.window + M + 1]

    def _sup_fun(self, alpha, derivs, size, M):
        return np.full(size, self.sup(alpha, derivs))

    def tree_sum(self, tree: LabeledTree, deriv: Path | None = None,
                 mode: str | None = None) -> float:
        """Sum of tree values over all labelings of the signed tree ``tree``.

        ``mode=None`` uses the symmetric cutoff; otherwise the reduced ranges
        of the given restriction mode apply (``deriv`` required).
        """
        M = tree.size * self.pmax
        if M > self.window:
            raise TooLarge(f"tree with {tree.size} nodes exceeds max_order {self.max_order}")
        return self._dp(tree.shape, tree.signs, deriv, mode, self.pmax, M, self._g_fun, False)

    def majorant(self, tree: LabeledTree, deriv: Path | None, mode: str | None, P: int) -> float:
        """Same sum with every factor replaced by its absolute bound (independent of psi)."""
        key = (self.auto.m, self._fkey, tree.shape, tree.signs, deriv, mode, P)
        out = _MAJORANTS.get(key)
        if out is None:
            M = tree.size * P
            out = self._dp(tree.shape, tree.signs, deriv, mode, P, M, self._sup_fun, True)
            _MAJORANTS[key] = out
        return out

    # -- conjugacy terms
    def _h_tail(self, tree: LabeledTree) -> float:
        lp, lm = abs(self.auto.lambda_plus), abs(self.auto.lambda_minus)
        full = trunc = 1.0
        for v in tree.paths:
            alpha = tree.sign(v)
            kids = tree.child_signs(v)
            m = self.sup(alpha, kids) / math.factorial(len(kids))
            if alpha > 0:
                r, n = 1.0 / lp, self.pmax + 1
                s_full = r / (1 - r)
                s_trunc = r * (1 - r**n) / (1 - r)
            else:
                r, n = lm, self.pmax
                s_full = 1.0 / (1 - r)
                s_trunc = (1 - r**n) / (1 - r)
            full *= m * s_full
            trunc *= m * s_trunc
        return max(full - trunc, 0.0) + ROUNDING * full

    def h_k(self, k: int, alpha: int) -> SeriesTerm:
        if k > self.max_order:
            raise TooLarge(f"order {k} > max_order {self.max_order}")
        key = (k, alpha)
        if key not in self._h:
            values, tails = [], []
            for tree in enumerate_signed_trees(k, alpha):
                values.append(self.tree_sum(tree))
                tails.append(self._h_tail(tree))
            self._h[key] = SeriesTerm(k, alpha, csum(values), csum(tails))
        return self._h[key]

    # -- reduced derivative sums
    def val_E(self, key: HalfLabeledKey, mode: str) -> tuple[float, float]:
        ck = (key, mode)
        if ck not in self._val:
            tree = key.tree()
            if key.top_sign < 0:
                self._val[ck] = (0.0, 0.0)
            else:
                value = self.tree_sum(tree, key.deriv, mode)
                m1 = self.majorant(tree, key.deriv, mode, self.pmax)
                m2 = self.majorant(tree, key.deriv, mode, 2 * self.pmax)
                self._val[ck] = (value, 2.0 * max(m2 - m1, 0.0) + ROUNDING * m2)
        return self._val[ck]

    def val_qn0(self, n: int, mode: str) -> tuple[float, float, dict]:
        per_class = {}
        for key in enumerate_sign_derivative(n, 1):
            per_class[key] = self.val_E(key, mode)
        value = csum(v for v, _ in per_class.values())
        tail = csum(t for _, t in per_class.values())
        return value, tail, per_class


_CACHE: dict = {}
_MAJORANTS: dict = {}


def function_key(f: TrigPoly) -> tuple:
    """Hashable identity of a trigonometric polynomial's coefficients."""
    return (f.degree_bound,) + tuple((n, tuple(complex(x) for x in c)) for n, c in f.coeffs.items())


def h_k(ctx: NodeValueContext, k: int, alpha: int) -> SeriesTerm:
    """Order-``k`` conjugacy term ``h^(k)_alpha(psi)`` with its truncation bound."""
    if k < 1:
        raise ValueError("k >= 1")
    if k > ctx.max_order:
        raise TooLarge(f"order {k} > max_order {ctx.max_order}")
    key = (ctx.psi.key(), k, alpha, ctx.pmax, function_key(ctx.f), ctx.auto.m)
    term = _CACHE.get(key)
    if term is None:
        term = ctx.sums.h_k(k, alpha)
        if len(_CACHE) > 100_000:
            _CACHE.clear()
        _CACHE[key] = term
    return term


def h_eps(ctx: NodeValueContext, eps: float, K: int) -> np.ndarray:
    """Displacement ``sum_k eps^k (h^(k)_+, h^(k)_-)`` in the eigenbasis."""
    if eps == 0.0 or ctx.f.is_zero():
        return np.zeros(2)
    plus = [eps**k * h_k(ctx, k, 1).value for k in range(1, K + 1)]
    minus = [eps**k * h_k(ctx, k, -1).value for k in range(1, K + 1)]
    return np.array([csum(plus), csum(minus)])


def conjugacy_point(ctx: NodeValueContext, eps: float, K: int) -> TorusPoint:
    """``H_eps(psi)`` truncated at order ``K``."""
    d = ctx.auto.from_eigen(h_eps(ctx, eps, K))
    return ctx.psi.shifted(d)
