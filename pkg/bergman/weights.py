"""
Carleson tents, Bekolle-Bonami constants and the weight families used in the
weighted estimates, including the iterated-logarithm weights.

All weights here are radial. Tent integrals use the exact angular extent of
the tent at each radius, so only one-dimensional quadrature is involved.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .config import settings
from .errors import DomainError
from .geometry import DIVERGENCE_GROWTH, DIVERGENCE_STEPS, lens_area, radial_rule
from .norms import WeightSpec
from .parallel import parallel_map

logger = logging.getLogger(__name__)

# Decades of origin panels in the centre-zero tent at refinement level 0.
BASE_ORIGIN_PANELS = 4
DEFAULT_RADII = (0.0, 0.5, 0.9, 0.99, 0.999)
DEFAULT_PHASES = 8
TENT_ORDER = 32
# Upper limit in u = log(1 - log r); exp(u) stays finite.
LOG_RADIAL_CAP = 700.0


@dataclass(frozen=True)
class TentSpec:
    center: complex

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not abs(self.center) < 1:
            raise DomainError(f"tent center {self.center} is not in the unit disc")

    @property
    def height(self) -> float:
        return 1.0 - abs(self.center)


def tent_contains(tent: TentSpec, w) -> np.ndarray:
    """Membership in T_z = {w : |1 - conj(w) z/|z|| < 1 - |z|}; the tent over 0 is the disc."""
    w = np.asarray(w, dtype=complex)
    inside = np.abs(w) < 1
    if tent.center == 0:
        return inside
    zeta = tent.center / abs(tent.center)
    return inside & (np.abs(1 - np.conj(w) * zeta) < tent.height)


def tent_volume(tent: TentSpec) -> float:
    if tent.center == 0:
        return math.pi
    return float(lens_area(1.0, 1.0, tent.height))


def default_centers(radii: Sequence[float] = DEFAULT_RADII, phases: int = DEFAULT_PHASES) -> List[complex]:
    centers = []
    for r in radii:
        if r == 0:
            centers.append(0j)
            continue
        centers.extend(r * np.exp(2j * math.pi * k / phases) for k in range(phases))
    return centers


# --- weights ---


def radial_weight(
    profile: Callable[[np.ndarray], np.ndarray],
    label: str,
    coordinate: int = 0,
    radial_power: Optional[float] = None,
    log_slow: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> WeightSpec:
    """WeightSpec from a profile of r = |z_k|, optionally split as r^radial_power exp(log_slow(-log r))."""

    def evaluate(pts):
        return profile(np.abs(pts[:, coordinate]))

    return WeightSpec(evaluate, label, True, profile, radial_power, log_slow)


def power_weight(gamma: float, coordinate: int = 0) -> WeightSpec:
    """|z_k| ** gamma."""
    name = f"|z{coordinate + 1}|^{gamma:g}"
    return radial_weight(lambda r: r ** gamma, name, coordinate, gamma, np.zeros_like)


def log_power_weight(gamma: float, eps: float, coordinate: int = 0) -> WeightSpec:
    """|z_k| ** gamma * (-log|z_k| + 1) ** eps."""
    name = f"|z{coordinate + 1}|^{gamma:g}(-log|z{coordinate + 1}|+1)^{eps:g}"
    return radial_weight(
        lambda r: r ** gamma * (1.0 - np.log(r)) ** eps,
        name,
        coordinate,
        gamma,
        lambda t: eps * np.log1p(t),
    )


def iterated_log_weight(j: int, alpha: float, exponent: float = -1.0 / 3.0, coordinate: int = 0) -> WeightSpec:
    """f_{alpha,j}(z_k) ** exponent."""
    spec = IteratedLogWeight(j, alpha)
    return radial_weight(
        lambda r: spec.profile(r) ** exponent,
        f"f_{{{alpha:g},{j}}}^{exponent:g}",
        coordinate,
        -2.0 * exponent,
        lambda t: exponent * spec.log_slow(t),
    )


def hartogs_iterated_weight(j: int, alpha: float) -> WeightSpec:
    """(|z2|^2 f_{alpha,j}(z2)) ** (-1/3) on the Hartogs triangle."""
    spec = IteratedLogWeight(j, alpha)
    return radial_weight(
        lambda r: np.exp(-spec.log_slow(-np.log(r)) / 3.0),
        f"(|z2|^2 f_{{{alpha:g},{j}}})^(-1/3)",
        1,
        0.0,
        lambda t: -spec.log_slow(t) / 3.0,
    )


# --- iterated logarithms ---


def _h_values(j: int, t: np.ndarray) -> List[np.ndarray]:
    """h_1, ..., h_j as functions of t = -log|z|."""
    hs = [1.0 + t]
    for _ in range(1, j):
        hs.append(np.log(hs[-1] + 1.0) + 1.0)
    return hs


@dataclass(frozen=True)
class IteratedLogWeight:
    """f_{alpha,j}(z) = |z|^-2 h_j^alpha prod_{k<j} h_k^-1, integrable on the disc iff alpha < -1."""
    j: int
    alpha: float

    def __post_init__(self):
        if self.j < 1:
            raise DomainError(f"j must be at least 1, got {self.j}")
        if not self.alpha < -1:
            raise DomainError(f"f_(alpha,j) is integrable only for alpha < -1, got {self.alpha}")

    def log_slow(self, t: np.ndarray) -> np.ndarray:
        """log(|z|^2 f_(alpha,j)) at t = -log|z|."""
        hs = _h_values(self.j, np.asarray(t, dtype=float))
        return self.alpha * np.log(hs[-1]) - sum((np.log(h) for h in hs[:-1]), np.zeros_like(hs[0]))

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.exp(self.log_slow(-np.log(r))) / r ** 2


def iterated_log_eval(w: IteratedLogWeight, z: complex) -> float:
    r = abs(z)
    if r == 0:
        raise DomainError("f_(alpha,j) has a pole at the origin")
    if r > 1:
        raise DomainError(f"|z| = {r} lies outside the closed disc")
    return float(w.profile(np.array([r]))[0])


def h_values(j: int, z: complex) -> List[float]:
    r = abs(z)
    if r == 0 or r > 1:
        raise DomainError(f"h_j needs 0 < |z| <= 1, got {r}")
    return [float(h) for h in _h_values(j, np.array(-math.log(r)))]


def iterated_log_integral(w: IteratedLogWeight) -> float:
    """int_D f_(alpha,j) dV, integrated in u = log(1 - log|z|)."""

    def integrand(u: float) -> float:
        t = math.expm1(u)
        hs = _h_values(w.j, np.array(t))
        # the factor 1/h_1 cancels against dt = h_1 du
        return float(hs[-1] ** w.alpha / np.prod(hs[1:-1]) if w.j > 1 else hs[0] ** (w.alpha + 1))

    value, _ = quad(integrand, 0.0, math.inf, limit=500, epsabs=0.0, epsrel=1e-12)
    return 2 * math.pi * value


# --- Bekolle-Bonami constants ---


@dataclass(frozen=True)
class CenterRatio:
    center: complex
    ratio: float
    diverged: bool
    change: float


@dataclass(frozen=True)
class BBResult:
    value: float
    center: complex
    diverged: bool
    change: float
    rows: Tuple[CenterRatio, ...]
    label: str
    p: float

    @property
    def converged(self) -> bool:
        return not self.diverged and self.change < 0.01


def _grows(estimates: Sequence[float]) -> bool:
    if not np.isfinite(estimates[-1]):
        return True
    if len(estimates) <= DIVERGENCE_STEPS:
        return False
    tail = estimates[-(DIVERGENCE_STEPS + 1):]
    return all(b >= DIVERGENCE_GROWTH * a > 0 for a, b in zip(tail[:-1], tail[1:]))


def _disc_integral(weight: WeightSpec, power: float, level: int, order: int) -> float:
    """int over |w| < 1, cut at 4 * 4^level decades from the origin, of weight^power."""
    decades = BASE_ORIGIN_PANELS * 4 ** level
    if weight.log_slow is not None:
        return _log_radial_integral(weight, power, math.log1p(decades * math.log(10.0)))
    nodes, weights = radial_rule(order, origin_levels=decades)
    return 2 * math.pi * math.fsum(weights * weight.profile(nodes) ** power)


def _log_radial_integral(weight: WeightSpec, power: float, upper: float = LOG_RADIAL_CAP) -> float:
    """2 pi int_0^T w(e^-t)^power e^-2t dt in u = log(1 + t), for u up to ``upper``."""
    rate = power * weight.radial_power + 2.0
    if abs(rate) < 1e-12:
        rate = 0.0

    def integrand(u: float) -> float:
        t = math.expm1(u)
        with np.errstate(over="ignore"):
            return float(np.exp(-rate * t + power * float(weight.log_slow(np.array(t))) + u))

    upper = min(upper, LOG_RADIAL_CAP)
    breaks = [b for b in (1.0, 3.0, 10.0, 30.0, 100.0) if b < upper]
    value, _ = quad(integrand, 0.0, upper, points=breaks or None, limit=500, epsabs=0.0, epsrel=1e-11)
    return 2 * math.pi * value


def _tent_integral(weight: WeightSpec, power: float, tent: TentSpec, level: int, order: int) -> float:
    """int over T_z of weight^power, with r = 1 - h + h v^2 and the exact angular extent."""
    h = tent.height
    panels = 2 ** level
    x, wts = roots_legendre(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = np.diff(edges) / 2
    v = ((edges[:-1] + edges[1:]) / 2)[:, None] + half[:, None] * x[None, :]
    wv = (half[:, None] * wts[None, :]).ravel()
    v = v.ravel()
    r = 1.0 - h + h * v ** 2
    cos_half = np.clip((1.0 + r ** 2 - h ** 2) / (2 * r), -1.0, 1.0)
    width = 2 * np.arccos(cos_half)
    integrand = weight.profile(r) ** power * width * r * 2 * h * v
    return math.fsum(wv * integrand)


def _center_sequence(weight: WeightSpec, power: float, tent: TentSpec, levels: int, order: int) -> List[float]:
    if tent.center == 0:
        return [_disc_integral(weight, power, level, order) for level in range(levels + 1)]
    return [_tent_integral(weight, power, tent, level, order) for level in range(levels + 1)]


def _center_ratio(weight: WeightSpec, p: float, center: complex, levels: int, order: int) -> CenterRatio:
    tent = TentSpec(center)
    dual = -1.0 / (p - 1.0)
    primal_seq = _center_sequence(weight, 1.0, tent, levels, order)
    dual_seq = _center_sequence(weight, dual, tent, levels, order)
    if _grows(primal_seq) or _grows(dual_seq):
        logger.warning("tent integral of %s diverges at center %s", weight.label, center)
        return CenterRatio(center, math.inf, True, math.inf)
    primal, dual_value = primal_seq[-1], dual_seq[-1]
    change = 0.0
    if levels > 0:
        change = max(
            abs(primal_seq[-1] - primal_seq[-2]) / primal_seq[-1],
            abs(dual_seq[-1] - dual_seq[-2]) / dual_seq[-1],
        )
    if tent.center == 0 and weight.log_slow is not None:
        # the whole disc, once the truncated sequence has stopped growing
        primal = _log_radial_integral(weight, 1.0)
        dual_value = _log_radial_integral(weight, dual)
    vol = tent_volume(tent)
    ratio = (primal / vol) * (dual_value / vol) ** (p - 1)
    return CenterRatio(center, ratio, False, change)


def bb_constant(
    weight: WeightSpec,
    p: float,
    center_grid: Optional[Sequence[complex]] = None,
    order: int = TENT_ORDER,
    levels: Optional[int] = None,
) -> BBResult:
    """
    B_p(mu): the largest product of tent averages of mu and mu^(-1/(p-1)),
    the latter raised to p - 1, over the center grid.
    """
    if p <= 1:
        raise DomainError(f"B_p needs p > 1, got {p}")
    if weight.profile is None:
        raise DomainError(f"B_p needs a radial profile for {weight.label}")
    centers = default_centers() if center_grid is None else list(center_grid)
    if not centers:
        raise DomainError("center grid is empty")
    levels = settings.refinement_levels if levels is None else levels
    rows = tuple(parallel_map(lambda c: _center_ratio(weight, p, c, levels, order), centers))
    divergent = [row for row in rows if row.diverged]
    if divergent:
        first = divergent[0]
        return BBResult(math.inf, first.center, True, math.inf, rows, weight.label, p)
    best = max(rows, key=lambda row: row.ratio)
    change = max(row.change for row in rows)
    return BBResult(best.ratio, best.center, False, change, rows, weight.label, p)


def bb_constant_iterated(
    j: int,
    alpha: float,
    center_grid: Optional[Sequence[complex]] = None,
    order: int = TENT_ORDER,
    levels: Optional[int] = None,
) -> BBResult:
    """B_{4/3} of f_(alpha,j) ** (-1/3)."""
    IteratedLogWeight(j, alpha)
    return bb_constant(iterated_log_weight(j, alpha), 4.0 / 3.0, center_grid, order, levels)
