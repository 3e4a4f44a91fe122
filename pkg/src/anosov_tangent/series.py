"""Truncated power series in eps, Cauchy-product inversion and q_n(t)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .conjugacy import NodeValueContext, h_k
from .errors import BadNormalization, ZeroStep
from .summation import csum

MAX_PARTITION_N = 20


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients ``c_0 .. c_N`` of a series in eps."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))
        if not self.coeffs:
            raise ValueError("empty series")

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> float:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.N, other.N)
        return PowerSeries([csum(self[i] * other[k - i] for i in range(k + 1))
                            for k in range(n + 1)])

    def evaluate(self, eps: float) -> float:
        return csum(c * eps**k for k, c in enumerate(self.coeffs))


def _check(a: PowerSeries, b: PowerSeries) -> int:
    if b[0] != 1.0:
        raise BadNormalization(f"b_0 = {b[0]}, expected 1")
    if len(a) != len(b):
        raise ValueError("series lengths differ")
    return a.N


def cauchy_invert_recursive(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """``q`` with ``b q = a``, from ``q_n = a_n - sum_{d<n} q_d b_{n-d}``.

    The ``a_0`` slot is ignored and ``q_0 = 0``.
    """
    N = _check(a, b)
    q = [0.0] * (N + 1)
    for n in range(1, N + 1):
        q[n] = csum([a[n]] + [-q[d] * b[n - d] for d in range(1, n)])
    return PowerSeries(q)


@lru_cache(maxsize=None)
def ordered_partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """Compositions of ``n`` into positive parts, by first-part splitting."""
    if n > MAX_PARTITION_N:
        raise ValueError(f"n = {n} > {MAX_PARTITION_N}")
    if n == 0:
        return ((),)
    return tuple((m,) + rest for m in range(1, n + 1) for rest in ordered_partitions(n - m))


def cauchy_invert_explicit(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Closed form ``q_n = a_n + sum_k a_k sum_parts (-1)^s b_m1 ... b_ms``."""
    N = _check(a, b)
    q = [0.0] * (N + 1)
    for n in range(1, N + 1):
        terms = [a[n]]
        for k in range(1, n):
            for parts in ordered_partitions(n - k):
                prod = a[k] * (-1) ** len(parts)
                for m in parts:
                    prod *= b[m]
                terms.append(prod)
        q[n] = csum(terms)
    return PowerSeries(q)


def v_components(ctx: NodeValueContext, t: float, K: int) -> tuple[PowerSeries, PowerSeries]:
    """eps-coefficients of the chord ``(H(psi + t v_-) - H(psi)) / t`` in the eigenbasis."""
    if t == 0.0:
        raise ZeroStep("t must be nonzero")
    moved = ctx.at(ctx.psi.shifted(t * ctx.auto.vec(-1)))
    plus, minus = [0.0], [1.0]
    for k in range(1, K + 1):
        plus.append((h_k(moved, k, 1).value - h_k(ctx, k, 1).value) / t)
        minus.append((h_k(moved, k, -1).value - h_k(ctx, k, -1).value) / t)
    return PowerSeries(plus), PowerSeries(minus)


def q_n_t(ctx: NodeValueContext, n: int, t: float, explicit: bool = False) -> float:
    """Order-``n`` coefficient of the chord slope ``V_+ / V_-``."""
    if n < 1:
        raise ValueError("n >= 1")
    vp, vm = v_components(ctx, t, n)
    inv = cauchy_invert_explicit if explicit else cauchy_invert_recursive
    return inv(vp, vm)[n]
