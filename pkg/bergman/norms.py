"""
Norms and quasinorms: weighted L^p, distribution functions, weak L^p,
Lorentz L^{p,1} and Orlicz L^p (log+ L)^k.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .config import settings
from .errors import DomainError, NonFiniteValueError
from .functions import FunctionHandle, LaurentMonomial, ModulusProfile, ModulusSamples, integrand
from .geometry import (
    SAMPLE_CHUNK,
    DomainKind,
    DomainSpec,
    QuadratureRule,
    coordinate_ball_measure,
    evaluate_finite,
    integrate,
    integrate_refined,
    quadrature_rule,
    sample,
    volume,
)
from .models import DistributionCurve, DistributionSample, NormResult
from .parallel import parallel_map

logger = logging.getLogger(__name__)

# Relative gap below which an interior grid value ties the maximum.
TIE_TOLERANCE = 1e-9


class Estimator(str, Enum):
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """
    A positive weight w(z); ``radial`` means it depends only on the coordinate moduli.

    One-coordinate radial weights also carry ``profile`` (r -> w) and, when
    known, the split w = r^radial_power * exp(log_slow(-log r)) used for
    integrals reaching down to the origin.
    """
    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str
    radial: bool = True
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    radial_power: Optional[float] = None
    log_slow: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(pts), dtype=float)

    def validate(self, domain: DomainSpec, rule: Optional[QuadratureRule] = None) -> "WeightSpec":
        """Reject weights that are non-positive at the nodes or whose integral diverges."""
        rule = rule or quadrature_rule(domain)
        nodes = rule.radial_tensor()[0] if self.radial else rule.nodes
        values = self(nodes)
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DomainError(f"weight {self.label} is not positive and finite on {domain}")
        handle = FunctionHandle(lambda pts: self(pts).astype(complex), domain.dimension, radial=self.radial)
        if integrate_refined(handle, rule).diverged:
            raise DomainError(f"weight {self.label} is not integrable on {domain}")
        return self


@dataclass(frozen=True)
class OrliczSpec:
    p: float
    k: float = 0.0

    def __post_init__(self):
        if self.p < 1 or self.k < 0:
            raise DomainError(f"Orlicz space needs p >= 1 and k >= 0, got p={self.p}, k={self.k}")

    @property
    def label(self) -> str:
        return f"L^{self.p:g}(log+L)^{self.k:g}"


def default_rule(domain: DomainSpec, f: FunctionHandle) -> QuadratureRule:
    return quadrature_rule(domain, singularity=f.singularity)


# --- modulus samples ---


def modulus_samples(f: FunctionHandle, domain: DomainSpec, rule: Optional[QuadratureRule] = None) -> ModulusSamples:
    """Values of |f| and weights integrating any functional of |f| over the domain."""
    rule = rule or default_rule(domain, f)
    if f.modulus_samples is not None:
        return f.modulus_samples(rule)
    if (
        f.factors is not None
        and domain.kind == DomainKind.POLYDISC
        and all(g.radial_modulus or g.modulus_samples is not None for g in f.factors)
    ):
        parts = [modulus_samples(g, DomainSpec.disc(), rule.factor(k)) for k, g in enumerate(f.factors)]
        values, weights = parts[0].values, parts[0].weights
        for part in parts[1:]:
            values = np.multiply.outer(values, part.values).ravel()
            weights = np.multiply.outer(weights, part.weights).ravel()
        return ModulusSamples(values, weights)
    nodes, weights = rule.radial_tensor() if f.radial_modulus else (rule.nodes, rule.weights)
    return ModulusSamples(np.abs(evaluate_finite(f, nodes)), weights)


def _fsum(values: np.ndarray) -> float:
    return math.fsum(np.asarray(values, dtype=float))


def _divergence_flag(f: FunctionHandle, transform, weight, rule: QuadratureRule) -> str:
    if not any(rule.origin_levels):
        return ""
    h = integrand(f, transform, weight)
    if not h.radial:
        return ""
    return "divergent" if integrate_refined(h, rule).diverged else ""


def lp_norm(
    f: FunctionHandle,
    domain: DomainSpec,
    p: float,
    weight: Optional[WeightSpec] = None,
    rule: Optional[QuadratureRule] = None,
    check_divergence: bool = True,
) -> NormResult:
    """(int |f|^p w dV)^(1/p) with an error estimate from the coarsened rule."""
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    rule = rule or default_rule(domain, f)

    def transform(v):
        return v ** p

    try:
        if weight is None:
            fine = modulus_samples(f, domain, rule)
            coarse = modulus_samples(f, domain, rule.coarsened())
            total = _fsum(fine.weights * transform(fine.values))
            error = abs(total - _fsum(coarse.weights * transform(coarse.values)))
        else:
            result = integrate(integrand(f, transform, weight), rule)
            total, error = result.value.real, result.error
        flag = _divergence_flag(f, transform, weight, rule) if check_divergence else ""
    except NonFiniteValueError as e:
        logger.warning("L^%g norm of %s hit a non-finite value: %s", p, f.label, e)
        return NormResult(value=math.inf, error=math.inf, flag="non-finite")
    if flag:
        logger.warning("L^%g norm of %s diverges under refinement", p, f.label)
        return NormResult(value=math.inf, error=math.inf, flag=flag)
    value = total ** (1.0 / p)
    return NormResult(value=value, error=value * error / (p * total) if total > 0 else error)


# --- distribution functions ---


def _profile_measure(domain: DomainSpec, profile: ModulusProfile, t: np.ndarray) -> np.ndarray:
    c, g, k = profile.scale, profile.power, profile.coordinate
    vol = volume(domain)
    if c == 0:
        return np.zeros_like(t)
    if g == 0:
        return np.where(c > t, vol, 0.0)
    rho = (t / c) ** (1.0 / g)
    inside = coordinate_ball_measure(domain, k, rho)
    return inside if g < 0 else vol - inside


def _hartogs_monomial_measure(mono: LaurentMonomial, t: np.ndarray) -> np.ndarray:
    a, b = mono.exponents
    if a < 0 or a + b != -1:
        raise DomainError(f"no closed-form distribution for z^{mono.exponents} on the Hartogs triangle")
    c = abs(complex(mono.coefficient))
    ratio = c / t
    if a == 0:
        return math.pi ** 2 / 2 * np.minimum(1.0, ratio) ** 4
    r_star = np.minimum(1.0, (t / c) ** (1.0 / a))
    inner = 2 * math.pi * ratio ** 4 * r_star ** (4 * a + 2) / (4 * a + 2)
    return math.pi / 2 * (inner + math.pi * (1.0 - r_star ** 2))


def analytic_measure(f: FunctionHandle, domain: DomainSpec, t: Sequence[float]) -> np.ndarray:
    """Closed-form mu{|f| > t} from the handle's metadata."""
    t = np.asarray(t, dtype=float)
    if f.distribution is not None:
        return np.asarray(f.distribution(t), dtype=float)
    if f.profile is not None:
        return _profile_measure(domain, f.profile, t)
    if f.monomial is not None and domain.is_hartogs:
        return _hartogs_monomial_measure(f.monomial, t)
    raise DomainError(f"no closed-form distribution for {f.label} on {domain}")


def _grid_axes(rule: QuadratureRule, radial_only: bool) -> List[Tuple[int, bool]]:
    """(coordinate, is_angular) for each axis of the node grid."""
    axes = []
    for k in range(rule.domain.dimension):
        axes.append((k, False))
        if not radial_only:
            axes.append((k, True))
    return axes


def _boundary_mask(indicator: np.ndarray, axes: List[Tuple[int, bool]]) -> np.ndarray:
    mask = np.zeros(indicator.shape, dtype=bool)
    for axis, (_, angular) in enumerate(axes):
        if angular:
            mask |= indicator != np.roll(indicator, 1, axis=axis)
            mask |= indicator != np.roll(indicator, -1, axis=axis)
        else:
            change = np.diff(indicator.astype(np.int8), axis=axis) != 0
            pad_lo = [(0, 0)] * indicator.ndim
            pad_hi = [(0, 0)] * indicator.ndim
            pad_lo[axis] = (1, 0)
            pad_hi[axis] = (0, 1)
            mask |= np.pad(change, pad_lo) | np.pad(change, pad_hi)
    return mask


def _subcell_fractions(f, rule: QuadratureRule, radial_only: bool, flat: np.ndarray, shape, t: float) -> np.ndarray:
    """Fraction of each marked cell where |f| > t, from 2 radial x 2 angular sub-points per coordinate."""
    axes = _grid_axes(rule, radial_only)
    grid_index = np.unravel_index(flat, shape)
    step = math.pi / rule.angular_count
    options = []
    for k in range(rule.domain.dimension):
        radii = rule.radial[k][0]
        edges = np.concatenate([[0.0], (radii[:-1] + radii[1:]) / 2, [1.0]])
        ir = grid_index[axes.index((k, False))]
        lo, hi = edges[ir], edges[ir + 1]
        sub_r = [lo + (hi - lo) * 0.25, lo + (hi - lo) * 0.75]
        if radial_only:
            theta = np.zeros(len(flat))
            sub_t = [theta]
        else:
            theta = rule.angles[grid_index[axes.index((k, True))]]
            sub_t = [theta - step / 2, theta + step / 2]
        options.append([(r, th) for r in sub_r for th in sub_t])
    combos = list(itertools.product(*options))
    coords = np.stack([np.stack([r * np.exp(1j * th) for r, th in combo], axis=1) for combo in combos], axis=1)
    weights = np.stack([np.prod([r for r, _ in combo], axis=0) for combo in combos], axis=1)
    if rule.domain.is_hartogs:
        u, z2 = coords[..., 0], coords[..., 1]
        coords = np.stack([u * z2, z2], axis=-1)
        weights = weights * np.abs(z2) ** 2
    values = np.abs(f.evaluator(coords.reshape(-1, rule.domain.dimension))).reshape(weights.shape)
    return (weights * (values > t)).sum(axis=1) / weights.sum(axis=1)


def _quadrature_measures(f: FunctionHandle, rule: QuadratureRule, t: np.ndarray) -> np.ndarray:
    radial_only = f.radial_modulus
    nodes, weights = rule.radial_tensor() if radial_only else (rule.nodes, rule.weights)
    mod = np.abs(evaluate_finite(f, nodes))
    if radial_only:
        shape = tuple(len(r) for r, _ in rule.radial)
    else:
        shape = tuple(x for r, _ in rule.radial for x in (len(r), rule.angular_count))
    axes = _grid_axes(rule, radial_only)
    out = []
    for level in t:
        indicator = (mod > level).reshape(shape)
        fraction = indicator.astype(float).ravel()
        flat = np.flatnonzero(_boundary_mask(indicator, axes).ravel())
        if len(flat):
            fraction[flat] = _subcell_fractions(f, rule, radial_only, flat, shape, level)
        out.append(_fsum(weights * fraction))
    # sub-cell fractions can break monotonicity at the last digit
    return np.minimum.accumulate(np.array(out))


def _monte_carlo_measures(f: FunctionHandle, domain: DomainSpec, t: np.ndarray, count: int, seed: int):
    cloud = sample(domain, count, seed)
    chunks = [cloud.points[i:i + SAMPLE_CHUNK] for i in range(0, count, SAMPLE_CHUNK)]
    values = np.sort(np.concatenate(parallel_map(lambda pts: np.abs(f.evaluator(pts)), chunks)))
    above = count - np.searchsorted(values, t, side="right")
    frac = above / count
    vol = volume(domain)
    return vol * frac, vol * np.sqrt(frac * (1 - frac) / count)


def distribution(
    f: FunctionHandle,
    domain: DomainSpec,
    t_grid: Sequence[float],
    estimator: Estimator = Estimator.QUADRATURE,
    rule: Optional[QuadratureRule] = None,
    seed: Optional[int] = None,
    count: Optional[int] = None,
) -> DistributionCurve:
    """mu{|f| > t} for each t of an increasing positive grid."""
    estimator = Estimator(estimator)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise DomainError("t grid must be positive and strictly increasing")
    seed_used = count_used = None
    if estimator == Estimator.ANALYTIC:
        measures, errors = analytic_measure(f, domain, t), np.zeros_like(t)
    elif estimator == Estimator.MONTE_CARLO:
        seed_used = settings.seed if seed is None else seed
        count_used = settings.mc_samples if count is None else count
        measures, errors = _monte_carlo_measures(f, domain, t, count_used, seed_used)
    else:
        rule = rule or default_rule(domain, f)
        measures = _quadrature_measures(f, rule, t)
        errors = np.abs(measures - _quadrature_measures(f, rule.coarsened(), t))
    vol = volume(domain)
    return DistributionCurve(
        samples=[
            DistributionSample(t=float(a), measure=float(min(max(m, 0.0), vol)), error=float(e))
            for a, m, e in zip(t, measures, errors)
        ],
        estimator=estimator.value,
        domain=str(domain),
        volume=vol,
        seed=seed_used,
        count=count_used,
    )


# --- quasinorms built on distribution functions ---


def weak_lp_quasinorm(
    f: FunctionHandle,
    domain: DomainSpec,
    p: float,
    lam_grid: Sequence[float],
    estimator: Estimator = Estimator.ANALYTIC,
    **kwargs,
) -> NormResult:
    """max over the grid of lam * mu{|f| > lam}^(1/p), flagged when the max sits on a grid edge."""
    lam = np.asarray(lam_grid, dtype=float)
    if len(lam) < 2 or lam.min() <= 0 or math.log10(lam.max() / lam.min()) < 3 - 1e-12:
        raise DomainError("the lambda grid must span at least three decades")
    curve = distribution(f, domain, lam, estimator, **kwargs)
    values = lam * np.asarray(curve.measures) ** (1.0 / p)
    i = int(np.argmax(values))
    best = float(values[i])
    interior_tie = np.any(values[1:-1] >= best * (1 - TIE_TOLERANCE)) if best > 0 else True
    flag = ""
    if i in (0, len(lam) - 1) and not interior_tie:
        flag = "grid-edge"
        logger.warning("weak L^%g maximum of %s at grid edge lambda=%g", p, f.label, lam[i])
    return NormResult(value=best, argmax=float(lam[i]), flag=flag)


def _power_law_integral(t: np.ndarray, g: np.ndarray, head: float) -> Tuple[float, str]:
    """Integral over (0, inf) of a sampled nonnegative g: exact on power-law pieces, fitted tail."""
    pieces = [head]
    for i in range(len(t) - 1):
        a, b = g[i], g[i + 1]
        ratio = t[i + 1] / t[i]
        if a > 0 and b > 0:
            k = math.log(b / a) / math.log(ratio)
            if abs(k + 1) < 1e-12:
                pieces.append(a * t[i] * math.log(ratio))
            else:
                pieces.append(a * t[i] * (ratio ** (k + 1) - 1) / (k + 1))
        else:
            pieces.append(0.5 * (a + b) * (t[i + 1] - t[i]))
    if g[-1] == 0:
        return math.fsum(pieces), ""
    sel = (t >= t[-1] / 10) & (g > 0)
    if sel.sum() < 2:
        return math.inf, "tail-unresolved"
    slope = linregress(np.log(t[sel]), np.log(g[sel])).slope
    if slope >= -1:
        return math.inf, "divergent-tail"
    return math.fsum(pieces) + g[-1] * t[-1] / (-slope - 1), ""


def cavalieri_integral(curve: DistributionCurve, p: float) -> NormResult:
    """p * int t^(p-1) mu(t) dt, which equals int |f|^p dV."""
    t = np.asarray(curve.t)
    mu = np.asarray(curve.measures)
    value, flag = _power_law_integral(t, p * t ** (p - 1) * mu, mu[0] * t[0] ** p)
    return NormResult(value=value, flag=flag)


def lorentz_p1_norm(
    f: FunctionHandle,
    domain: DomainSpec,
    p: float,
    t_grid: Optional[Sequence[float]] = None,
    estimator: Estimator = Estimator.ANALYTIC,
    **kwargs,
) -> NormResult:
    """int_0^inf mu{|f| > t}^(1/p) dt."""
    if p <= 1:
        raise DomainError(f"Lorentz L^(p,1) needs p > 1, got {p}")
    t = np.geomspace(1e-8, 1e8, 1601) if t_grid is None else np.asarray(t_grid, dtype=float)
    curve = distribution(f, domain, t, estimator, **kwargs)
    g = np.asarray(curve.measures) ** (1.0 / p)
    value, flag = _power_law_integral(t, g, g[0] * t[0])
    if flag:
        logger.warning("Lorentz norm of %s: %s", f.label, flag)
    return NormResult(value=value, flag=flag)


def ratio_from_measure(lam: float, measure: float, input_norm: float, q: float) -> float:
    return lam ** q * measure / input_norm ** q


def weak_type_ratio(
    image: FunctionHandle,
    domain_out: DomainSpec,
    input_norm: float,
    p: float,
    q: float,
    lam: float,
    estimator: Estimator = Estimator.ANALYTIC,
    **kwargs,
) -> float:
    """lam^q mu{|image| > lam} / ||f||_p^q."""
    if input_norm <= 0 or lam <= 0:
        raise DomainError("input norm and lambda must be positive")
    measure = distribution(image, domain_out, [lam], estimator, **kwargs).measures[0]
    return ratio_from_measure(lam, measure, input_norm, q)


# --- Orlicz ---


def _log_plus(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, 1.0))


def log_moment(
    f: FunctionHandle, domain: DomainSpec, k: float, rule: Optional[QuadratureRule] = None
) -> float:
    """int |f| (log+ |f|)^k dV."""
    s = modulus_samples(f, domain, rule)
    return _fsum(s.weights * s.values * _log_plus(s.values) ** k)


def luxemburg_root(
    phi: Callable[[float], float],
    guess: float,
    tol: float = 1e-12,
    k: float = 0.0,
    max_steps: int = 400,
) -> NormResult:
    """
    Solve phi(lam) = 1 for a decreasing modular phi by geometric bracketing and bisection.

    The bracket starts at [guess / e^k, e * guess]. Every evaluation is
    recorded as (lam, phi(lam)).
    """
    evaluations: List[Tuple[float, float]] = []

    def ev(lam: float) -> float:
        value = float(phi(lam))
        evaluations.append((lam, value))
        return value

    lo, hi = guess / math.exp(k), guess * math.e
    steps = 0
    while ev(lo) < 1.0:
        lo /= math.e
        steps += 1
        if steps > max_steps or lo == 0.0:
            logger.warning("modular stays below 1 down to lambda=%g", lo)
            return NormResult(value=lo, flag="bracket", evaluations=evaluations)
    while ev(hi) > 1.0:
        hi *= math.e
        steps += 1
        if steps > max_steps or not math.isfinite(hi):
            logger.warning("modular stays above 1 up to lambda=%g", hi)
            return NormResult(value=hi, flag="bracket", evaluations=evaluations)
    while hi - lo > tol * hi:
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if ev(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)
    return NormResult(value=value, error=hi - lo, evaluations=evaluations)


def orlicz_norm(
    f: FunctionHandle,
    domain: DomainSpec,
    spec: OrliczSpec,
    tol: float = 1e-12,
    rule: Optional[QuadratureRule] = None,
) -> NormResult:
    """Luxemburg norm in L^p (log+ L)^k: the lam with int |f/lam|^p (log+ |f/lam|)^k dV = 1."""
    s = modulus_samples(f, domain, rule)
    v, w = s.values, s.weights
    if not np.any(v > 0):
        return NormResult(value=0.0, flag="zero")
    p, k = spec.p, spec.k
    lp_value = _fsum(w * v ** p) ** (1.0 / p)
    if k == 0:
        return NormResult(value=lp_value)
    if not math.isfinite(_fsum(w * v ** p * _log_plus(v) ** k)):
        raise NonFiniteValueError("modular", math.inf)

    def phi(lam: float) -> float:
        x = v / lam
        return _fsum(w * x ** p * _log_plus(x) ** k)

    result = luxemburg_root(phi, lp_value, tol=tol, k=k)
    if result.flag:
        logger.warning("%s norm of %s: %s", spec.label, f.label, result.flag)
    return result
