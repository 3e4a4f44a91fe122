"""Compensated (Neumaier) accumulation, scalar and elementwise.

Scalar sums go through :func:`math.fsum`, which is exactly rounded and
therefore independent of the order of its inputs. The array accumulator is
used inside the dynamic programs, where each output entry is a long sum of
shifted slices.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


def csum(values: Iterable[float]) -> float:
    return math.fsum(values)


class ArrayAccumulator:
    """Elementwise Neumaier summation of equally shaped arrays."""

    def __init__(self, shape, dtype=float):
        self.total = np.zeros(shape, dtype=dtype)
        self.comp = np.zeros(shape, dtype=dtype)

    def add(self, x: np.ndarray, where: slice | None = None) -> None:
        if where is None:
            s, c = self.total, self.comp
        else:
            s, c = self.total[where], self.comp[where]
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c += np.where(big, (s - t) + x, (x - t) + s)
        s[...] = t

    def value(self) -> np.ndarray:
        return self.total + self.comp


def merge_partials(partials: Iterable[float]) -> float:
    """Merge per-worker partial sums in the order given."""
    return math.fsum(partials)
