"""Run configuration: JSON file plus command-line overrides, validated up front."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .torus import FIBONACCI, HyperbolicAuto, TorusPoint, TrigPoly, eigen_decompose


class CoeffRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: tuple[int, int]
    re: tuple[float, float] = (0.0, 0.0)
    im: tuple[float, float] = (0.0, 0.0)


class PsiGrid(BaseModel):
    """Uniform ``n1 x n2`` grid of base points on ``[0, 2 pi)^2``."""

    model_config = ConfigDict(extra="forbid")

    grid: tuple[int, int]

    @field_validator("grid")
    @classmethod
    def _positive(cls, v):
        if min(v) < 1 or v[0] * v[1] > 100_000:
            raise ValueError("grid sizes must be positive with at most 1e5 points")
        return v


class PsiRandom(BaseModel):
    """``random`` points drawn uniformly with the run seed."""

    model_config = ConfigDict(extra="forbid")

    random: int = Field(ge=1, le=100_000)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    matrix: tuple[tuple[int, int], tuple[int, int]] = FIBONACCI
    coeffs: list[CoeffRecord] = Field(default_factory=list)
    degree_bound: Optional[int] = Field(default=None, ge=1)
    eps: Union[float, list[float]] = 0.02
    psi: Union[tuple[float, float], PsiGrid, PsiRandom] = (0.0, 0.0)
    K: int = Field(default=3, ge=1, le=5)
    pmax: int = Field(default=40, ge=1, le=200)
    t_list: list[float] = Field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    restrict_mode: Literal["all-minus", "stem-minus-only"] = "stem-minus-only"
    seed: int = 0
    out_dir: Optional[str] = None
    force: bool = False
    n_iters: int = Field(default=40, ge=10, le=2000)
    oracle_K: int = Field(default=5, ge=1, le=5)
    oracle_pmax: int = Field(default=60, ge=1, le=200)
    oracle_t_list: list[float] = Field(default_factory=lambda: [1e-3, 5e-4, 2.5e-4])

    @field_validator("eps")
    @classmethod
    def _finite_eps(cls, v):
        vals = v if isinstance(v, list) else [v]
        if not vals or not all(math.isfinite(x) for x in vals):
            raise ValueError("eps must be finite (and a non-empty list if a sweep)")
        return v

    @field_validator("t_list", "oracle_t_list")
    @classmethod
    def _nonzero_t(cls, v):
        if not v or any(t == 0.0 or not math.isfinite(t) for t in v):
            raise ValueError("t values must be finite and nonzero")
        return v

    @model_validator(mode="after")
    def _build(self):
        # fail on bad matrices and coefficients before any computation starts
        self.auto()
        self.trig_poly()
        return self

    def auto(self) -> HyperbolicAuto:
        return eigen_decompose(self.matrix)

    def trig_poly(self) -> TrigPoly:
        return TrigPoly.from_records([r.model_dump() for r in self.coeffs], self.degree_bound)

    def eps_list(self) -> list[float]:
        return list(self.eps) if isinstance(self.eps, list) else [self.eps]

    def points(self) -> list[TorusPoint]:
        if isinstance(self.psi, PsiGrid):
            n1, n2 = self.psi.grid
            return [TorusPoint(2 * math.pi * i / n1, 2 * math.pi * j / n2)
                    for i in range(n1) for j in range(n2)]
        if isinstance(self.psi, PsiRandom):
            rng = np.random.default_rng(self.seed)
            xy = rng.uniform(0.0, 2 * math.pi, size=(self.psi.random, 2))
            return [TorusPoint(float(a), float(b)) for a, b in xy]
        return [TorusPoint(*self.psi)]


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (if given), apply non-None ``overrides`` and validate."""
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    return RunConfig.model_validate(data)


def config_schema() -> dict:
    return RunConfig.model_json_schema()
