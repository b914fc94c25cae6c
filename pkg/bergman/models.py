"""Serializable records: distribution curves, sweep tables, fits, run configs and manifests."""

import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from .config import settings

# --- Distribution functions ---


class DistributionSample(BaseModel):
    """Model for one point t -> mu{|f| > t} of a distribution function."""
    t: float
    measure: float
    error: float = 0.0


class DistributionCurve(BaseModel):
    """Model for a sampled distribution function with its estimator."""
    samples: List[DistributionSample]
    estimator: str
    domain: str
    volume: float
    seed: Optional[int] = None
    count: Optional[int] = None

    @model_validator(mode="after")
    def _check_shape(self):
        ts = [s.t for s in self.samples]
        if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t values must be positive and strictly increasing")
        for s in self.samples:
            if s.measure < 0 or s.measure > self.volume * (1 + 1e-9) + s.error:
                raise ValueError(f"measure {s.measure} outside [0, {self.volume}] at t={s.t}")
        for a, b in zip(self.samples, self.samples[1:]):
            if b.measure > a.measure + 2 * (a.error + b.error) + 1e-12 * self.volume:
                raise ValueError(f"measure increases between t={a.t} and t={b.t}")
        return self

    @property
    def t(self) -> List[float]:
        return [s.t for s in self.samples]

    @property
    def measures(self) -> List[float]:
        return [s.measure for s in self.samples]

    @property
    def errors(self) -> List[float]:
        return [s.error for s in self.samples]


# --- Norms ---


class NormResult(BaseModel):
    """Model for a norm or quasinorm value with its diagnostics."""
    value: float
    error: float = 0.0
    flag: str = ""
    argmax: Optional[float] = None
    evaluations: List[Tuple[float, float]] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flag


# --- Sweeps ---


class SweepRow(BaseModel):
    """Model for one row of a weak-type experiment."""
    param: float
    lam: float
    measure: float
    norm: float
    ratio: float
    flag: str = ""
    label: str = ""
    kind: str = "weak"


class FitSummary(BaseModel):
    """Model for a least-squares growth fit of a sweep's ratio column."""
    x: str
    y: str
    slope: float
    intercept: float
    r_squared: float
    residual_rms: float
    points: int
    tail_slope: Optional[float] = None


class SweepResult(BaseModel):
    """Response model for a counterexample sweep or bound check."""
    experiment: str
    family: str
    q: float = 1.0
    rows: List[SweepRow]
    fits: Dict[str, FitSummary] = Field(default_factory=dict)
    summary: Dict[str, float] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @property
    def ratios(self) -> List[float]:
        return [r.ratio for r in self.rows]

    @property
    def flagged(self) -> List[SweepRow]:
        return [r for r in self.rows if r.flag]

    def valid_rows(self, label: Optional[str] = None) -> List[SweepRow]:
        return [
            r for r in self.rows
            if not r.flag and math.isfinite(r.ratio) and (label is None or r.label == label)
        ]


# --- Runs ---


class RunConfig(BaseModel):
    """Request model for one CLI run; also the source of the config hash."""
    command: str
    domain: Optional[str] = None
    family: Optional[str] = None
    weight: Optional[str] = None
    function: Optional[str] = None
    kind: Optional[str] = None
    method: str = "series"
    z: Optional[str] = None
    w: Optional[str] = None
    lam: List[float] = Field(default_factory=list)
    s: List[float] = Field(default_factory=list)
    p: List[float] = Field(default_factory=list)
    eps: List[float] = Field(default_factory=list)
    x: List[float] = Field(default_factory=list)
    t: List[float] = Field(default_factory=list)
    k: int = 1
    q: Optional[float] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    j: int = 1
    estimator: str = "analytic"
    truncation: int = Field(default_factory=lambda: settings.truncation)
    radial_order: int = Field(default_factory=lambda: settings.radial_order)
    angular_order: int = Field(default_factory=lambda: settings.angular_order)
    samples: int = Field(default_factory=lambda: settings.mc_samples)
    seed: int = Field(default_factory=lambda: settings.seed)
    output: Optional[str] = None
    format: str = "csv"

    @model_validator(mode="after")
    def _check_grids(self):
        for name in ("lam", "s", "p", "eps", "x", "t"):
            grid = getattr(self, name)
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"grid {name} must be strictly increasing")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.truncation < 0 or self.radial_order < 1 or self.angular_order < 1 or self.samples < 1:
            raise ValueError("truncation, quadrature orders and sample count must be positive")
        return self


class RunManifest(BaseModel):
    """Response model written next to every result file."""
    command: str
    config: RunConfig
    config_sha256: str
    version: str
    output: str
    flagged_rows: int = 0
    timings: Dict[str, float] = Field(default_factory=dict)
