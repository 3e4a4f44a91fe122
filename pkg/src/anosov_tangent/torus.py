"""Torus, hyperbolic automorphism, trigonometric perturbation, perturbed map.

Signs are carried as the integers ``+1`` / ``-1`` throughout the package;
``"+"`` / ``"-"`` strings only appear at the I/O boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ExponentOverflow,
    NonOrthogonalEigenbasis,
    NotHyperbolic,
    NotUnimodular,
    RealityViolation,
)

TWO_PI = 2.0 * math.pi
INT128_MAX = 2**127 - 1
MAX_POWER = 64
EIGEN_TOL = 1e-12


def wrap_angle(x: float) -> float:
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


def wrap_array(x: np.ndarray) -> np.ndarray:
    r = np.mod(x, TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


def wrap_diff(d: float) -> float:
    """Map an angle difference into (-pi, pi]."""
    r = wrap_angle(d + math.pi) - math.pi
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class TorusPoint:
    theta1: float
    theta2: float

    def __post_init__(self):
        object.__setattr__(self, "theta1", wrap_angle(float(self.theta1)))
        object.__setattr__(self, "theta2", wrap_angle(float(self.theta2)))

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "TorusPoint":
        return cls(float(v[0]), float(v[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2])

    def shifted(self, d: Sequence[float]) -> "TorusPoint":
        return TorusPoint(self.theta1 + d[0], self.theta2 + d[1])

    def displacement_to(self, other: "TorusPoint") -> np.ndarray:
        """Shortest lift of ``other - self``."""
        return np.array([wrap_diff(other.theta1 - self.theta1),
                         wrap_diff(other.theta2 - self.theta2)])

    def distance(self, other: "TorusPoint") -> float:
        return float(np.hypot(*self.displacement_to(other)))

    def key(self) -> tuple[str, str]:
        """Exact bit-pattern key for caches."""
        return (self.theta1.hex(), self.theta2.hex())


IntMatrix = tuple[tuple[int, int], tuple[int, int]]


def _as_int_matrix(m) -> IntMatrix:
    a = [[int(m[i][j]) for j in range(2)] for i in range(2)]
    for i in range(2):
        for j in range(2):
            if a[i][j] != m[i][j]:
                raise ValueError("matrix entries must be integers")
    return ((a[0][0], a[0][1]), (a[1][0], a[1][1]))


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    out = tuple(
        tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2))
        for i in range(2)
    )
    if any(abs(x) > INT128_MAX for row in out for x in row):
        raise ExponentOverflow("integer matrix power exceeds 128-bit range")
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class HyperbolicAuto:
    m: IntMatrix
    lambda_plus: float
    lambda_minus: float
    v_plus: tuple[float, float]
    v_minus: tuple[float, float]
    det: int
    _pow_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.m, dtype=float)

    @property
    def inverse(self) -> IntMatrix:
        (a, b), (c, d) = self.m
        s = self.det  # inverse of a unimodular matrix is det * adj
        return ((s * d, -s * b), (-s * c, s * a))

    def lam(self, sign: int) -> float:
        return self.lambda_plus if sign > 0 else self.lambda_minus

    def vec(self, sign: int) -> np.ndarray:
        return np.array(self.v_plus if sign > 0 else self.v_minus)

    @property
    def basis(self) -> np.ndarray:
        """Columns v+, v-."""
        return np.column_stack([self.v_plus, self.v_minus])

    def int_power(self, p: int) -> IntMatrix:
        if abs(p) > MAX_POWER:
            raise ExponentOverflow(f"|p| = {abs(p)} exceeds the guard {MAX_POWER}")
        cached = self._pow_cache.get(p)
        if cached is not None:
            return cached
        base = self.m if p >= 0 else self.inverse
        e = abs(p)
        result: IntMatrix = ((1, 0), (0, 1))
        while e:
            if e & 1:
                result = _matmul(result, base)
            e >>= 1
            if e:
                base = _matmul(base, base)
        self._pow_cache[p] = result
        return result

    def to_eigen(self, x: Sequence[float]) -> np.ndarray:
        """Components (x . v+, x . v-) of a standard-basis vector."""
        return self.basis.T @ np.asarray(x, dtype=float)

    def from_eigen(self, c: Sequence[float]) -> np.ndarray:
        return self.basis @ np.asarray(c, dtype=float)


def _orient(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def _eigvec(m: IntMatrix, lam: float) -> np.ndarray:
    (a, b), (c, d) = m
    cands = [np.array([b, lam - a], float), np.array([lam - d, c], float)]
    return _orient(max(cands, key=np.linalg.norm))


def eigen_decompose(m) -> HyperbolicAuto:
    m = _as_int_matrix(m)
    (a, b), (c, d) = m
    det = a * d - b * c
    if abs(det) != 1:
        raise NotUnimodular(f"det = {det}")
    tr = a + d
    disc = tr * tr - 4 * det
    if disc <= 0:
        raise NotHyperbolic("complex or repeated eigenvalues")
    root = math.sqrt(disc)
    big = (tr + root) / 2 if tr >= 0 else (tr - root) / 2
    small = det / big
    if abs(big) <= 1 or abs(small) >= 1:
        raise NotHyperbolic(f"eigenvalues {big}, {small}")
    vp, vm = _eigvec(m, big), _eigvec(m, small)
    if abs(float(vp @ vm)) > EIGEN_TOL:
        raise NonOrthogonalEigenbasis(f"v+ . v- = {float(vp @ vm):.3e}")
    mf = np.array(m, dtype=float)
    for lam, v in ((big, vp), (small, vm)):
        res = np.linalg.norm(mf @ v - lam * v)
        if res > EIGEN_TOL:
            raise NotHyperbolic(f"eigen residual {res:.3e}")
    return HyperbolicAuto(m, big, small, tuple(vp), tuple(vm), det)


FIBONACCI = ((1, 1), (1, 0))


def s0_pow_apply(auto: HyperbolicAuto, p: int, psi: TorusPoint) -> TorusPoint:
    """``S0^p psi mod 2 pi`` using the exact integer power of the matrix."""
    if p == 0:
        return psi
    (a, b), (c, d) = auto.int_power(p)
    x, y = psi.theta1, psi.theta2
    return TorusPoint(a * x + b * y, c * x + d * y)


class TrigPoly:
    """Vector-valued real trigonometric polynomial on the torus.

    ``coeffs`` maps an integer frequency ``n`` to the complex 2-vector
    ``c_n`` (standard-basis output components); the function is
    ``f(x) = sum_n c_n exp(i n.x)``.
    """

    def __init__(self, coeffs: Mapping[tuple[int, int], Sequence[complex]],
                 degree_bound: int | None = None, tol: float = 1e-12):
        items = sorted((tuple(int(k) for k in n), np.asarray(c, dtype=complex))
                       for n, c in coeffs.items())
        self.coeffs = {n: c for n, c in items}
        norms = [math.hypot(*n) for n in self.coeffs]
        if degree_bound is None:
            degree_bound = int(math.floor(max(norms, default=0.0))) + 1
        if degree_bound < 1:
            raise ValueError("degree bound must be positive")
        bad = [n for n, r in zip(self.coeffs, norms) if r >= degree_bound]
        if bad:
            raise ValueError(f"frequencies {bad} violate |n| < {degree_bound}")
        self.degree_bound = int(degree_bound)
        scale = max((float(np.abs(c).max()) for c in self.coeffs.values()), default=0.0)
        for n, c in self.coeffs.items():
            partner = self.coeffs.get((-n[0], -n[1]))
            if partner is None:
                if np.abs(c).max() > tol * max(scale, 1.0):
                    raise RealityViolation(f"missing conjugate partner of {n}")
                continue
            if np.abs(partner - np.conj(c)).max() > tol * max(scale, 1.0):
                raise RealityViolation(f"c_{(-n[0], -n[1])} != conj(c_{n})")
        if self.coeffs:
            self.freqs = np.array(list(self.coeffs), dtype=float)
            self.amps = np.array(list(self.coeffs.values()))
        else:
            self.freqs = np.zeros((0, 2))
            self.amps = np.zeros((0, 2), dtype=complex)

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls({}, degree_bound=1)

    @classmethod
    def from_records(cls, records: Iterable[Mapping], degree_bound: int | None = None) -> "TrigPoly":
        coeffs = {}
        for r in records:
            n = tuple(int(k) for k in r["n"])
            re = r.get("re", [0.0, 0.0])
            im = r.get("im", [0.0, 0.0])
            if n in coeffs:
                raise ValueError(f"duplicate frequency {n}")
            coeffs[n] = [complex(re[0], im[0]), complex(re[1], im[1])]
        return cls(coeffs, degree_bound)

    def to_records(self) -> list[dict]:
        return [{"n": list(n), "re": [c[0].real, c[1].real], "im": [c[0].imag, c[1].imag]}
                for n, c in self.coeffs.items()]

    def is_zero(self) -> bool:
        return not self.coeffs or float(np.abs(self.amps).max()) == 0.0

    def scaled(self, s: float) -> "TrigPoly":
        return TrigPoly({n: s * c for n, c in self.coeffs.items()}, self.degree_bound)

    def _weights(self, auto: HyperbolicAuto, alpha: int, derivs: Sequence[int]) -> np.ndarray:
        w = self.amps @ auto.vec(alpha)
        for beta in derivs:
            w = w * (1j * (self.freqs @ auto.vec(beta)))
        return w

    def evaluate(self, auto: HyperbolicAuto, alpha: int, derivs: Sequence[int],
                 points: np.ndarray) -> np.ndarray:
        """``(prod_j d_{derivs[j]}) f_alpha`` at an (m, 2) array of angles."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.coeffs:
            return np.zeros(len(points))
        w = self._weights(auto, alpha, derivs)
        z = np.exp(1j * (points @ self.freqs.T)) @ w
        mag = float(np.abs(w).sum())
        if mag and float(np.abs(z.imag).max()) > 1e-10 * mag:
            raise RealityViolation("imaginary residue in trigonometric evaluation")
        return z.real

    def sup_bound(self, auto: HyperbolicAuto, alpha: int, derivs: Sequence[int]) -> float:
        """l1 bound on ``sup |(prod d) f_alpha|`` from the coefficients."""
        if not self.coeffs:
            return 0.0
        return float(np.abs(self._weights(auto, alpha, derivs)).sum())

    def value(self, psi: TorusPoint) -> np.ndarray:
        """Standard-basis value ``f(psi)``."""
        if not self.coeffs:
            return np.zeros(2)
        e = np.exp(1j * (self.freqs @ psi.as_array()))
        return (e @ self.amps).real

    def grid_sup(self, auto: HyperbolicAuto, size: int = 256) -> float:
        """max over both components of |f_alpha| on a uniform grid."""
        if not self.coeffs:
            return 0.0
        g = np.arange(size) * (TWO_PI / size)
        x, y = np.meshgrid(g, g, indexing="ij")
        pts = np.column_stack([x.ravel(), y.ravel()])
        return max(float(np.abs(self.evaluate(auto, a, [], pts)).max()) for a in (1, -1))


def trig_eval(f: TrigPoly, auto: HyperbolicAuto, alpha: int, derivs: Sequence[int],
              psi: TorusPoint) -> float:
    if len(derivs) > 32:
        raise ValueError("at most 32 derivatives")
    return float(f.evaluate(auto, alpha, derivs, psi.as_array())[0])


@dataclass(frozen=True)
class PerturbedMap:
    base: HyperbolicAuto
    f: TrigPoly
    eps: float
    radius: float = field(init=False, repr=False, compare=False)
    radius_warning: bool = field(init=False, compare=False)

    def __post_init__(self):
        from .bounds import radius_for  # bounds depends on this module

        radius = radius_for(self.f, self.base)
        object.__setattr__(self, "radius", radius)
        flag = abs(self.eps) >= radius
        object.__setattr__(self, "radius_warning", flag)
        if flag:
            warnings.warn(f"|eps| = {abs(self.eps)} is outside the estimated radius {radius:.3g}",
                          RuntimeWarning, stacklevel=3)


def apply_perturbed(pmap: PerturbedMap, psi: TorusPoint) -> TorusPoint:
    s = s0_pow_apply(pmap.base, 1, psi)
    if pmap.eps == 0.0:
        return s
    fx = pmap.f.value(psi)
    return TorusPoint(s.theta1 - pmap.eps * fx[0], s.theta2 - pmap.eps * fx[1])


def derivative_matrix(f: TrigPoly, auto: HyperbolicAuto, psi: TorusPoint) -> np.ndarray:
    """Standard-basis Jacobian of ``f`` assembled from directional derivatives."""
    out = np.zeros((2, 2))
    for a in (1, -1):
        for b in (1, -1):
            d = trig_eval(f, auto, a, [b], psi)
            out += d * np.outer(auto.vec(a), auto.vec(b))
    return out


def jacobian_perturbed(pmap: PerturbedMap, psi: TorusPoint) -> np.ndarray:
    s0 = pmap.base.matrix
    if pmap.eps == 0.0 or pmap.f.is_zero():
        return s0
    return s0 - pmap.eps * derivative_matrix(pmap.f, pmap.base, psi)
