"""
Experiment drivers: counterexample sweeps and weak-type bound checks.

Each driver returns a SweepResult whose rows hold lam, the superlevel
measure of the projected function, the input norm and the ratio
lam^q mu{|P f| > lam} / ||f||^q. Growth is summarized by least-squares fits.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress
from tqdm import tqdm

from .errors import DomainError
from .families import (
    FOUR_THIRDS,
    CounterexampleFamily,
    Coupling,
    FamilyKind,
    HartogsWeight,
    bidisc_superlevel_measure,
    disc_superlevel_measure,
    family_handle,
    family_norm_power,
    hartogs_orlicz_modular,
    image_family_handle,
    lambda_from_s,
    projection_constant,
)
from .functions import FunctionHandle, constant, laurent_polynomial, modulus_power
from .geometry import BIDISC, HARTOGS_TRIANGLE, UNIT_DISC
from .models import FitSummary, SweepResult, SweepRow
from .norms import (
    Estimator,
    OrliczSpec,
    analytic_measure,
    distribution,
    lp_norm,
    luxemburg_root,
    orlicz_norm,
    ratio_from_measure,
)
from .parallel import parallel_map
from .projector import image_handle, project_series
from .weights import hartogs_iterated_weight

logger = logging.getLogger(__name__)

DEFAULT_S = tuple(1.0 - 2.0 ** -m for m in range(3, 11))
DEFAULT_WEAK43_LAMBDA = tuple(np.geomspace(1e2, 1e6, 17))
DEFAULT_EXP_LAMBDA = tuple(np.geomspace(1e3, 1e6, 13))
DEFAULT_BOUND_LAMBDA = tuple(np.geomspace(1.0, 1e3, 13))
# Relative Monte Carlo standard error above which a measure counts as unresolved.
MC_RELATIVE_ERROR = 0.1


# --- helpers ---


def _increasing(values: Optional[Iterable[float]], default: Sequence[float], name: str) -> List[float]:
    grid = [float(v) for v in (default if values is None else values)]
    if not grid:
        raise DomainError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"{name} grid must be strictly increasing")
    return grid


def _require_decades(grid: Sequence[float], decades: float, name: str) -> None:
    if min(grid) <= 0 or math.log10(max(grid) / min(grid)) < decades - 1e-12:
        raise DomainError(f"{name} grid must span at least {decades:g} decades")


def _rows(fn, items: Sequence, desc: str, progress: bool) -> list:
    return parallel_map(fn, tqdm(items, desc=desc, disable=not progress))


def _row(param, lam, measure, norm, q, label="", flag="", kind="weak") -> SweepRow:
    if norm > 0 and math.isfinite(norm):
        ratio = ratio_from_measure(lam, measure, norm, q)
    else:
        ratio = math.nan
        flag = flag or "norm"
    return SweepRow(param=param, lam=lam, measure=measure, norm=norm, ratio=ratio, flag=flag, label=label, kind=kind)


def fit_growth(
    x: Sequence[float],
    y: Sequence[float],
    x_name: str,
    y_name: str,
    log_x: bool = False,
    log_y: bool = False,
) -> FitSummary:
    """
    Least-squares line through (x, y), optionally in log coordinates.

    ``tail_slope`` refits over the upper half of the x range measured in log
    scale (when x is positive), where asymptotic rates settle.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise DomainError("a fit needs at least two points")
    xs = np.log(x) if log_x else x
    ys = np.log(y) if log_y else y
    fit = linregress(xs, ys)
    residual = ys - (fit.intercept + fit.slope * xs)
    scale = np.log(x) if np.all(x > 0) else xs
    upper = scale >= 0.5 * (scale.min() + scale.max())
    tail = float(linregress(xs[upper], ys[upper]).slope) if upper.sum() >= 2 else None
    return FitSummary(
        x=x_name,
        y=y_name,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        points=len(x),
        tail_slope=tail,
    )


def _loglog_fit(rows: List[SweepRow], x_name: str = "lambda") -> Optional[FitSummary]:
    usable = [r for r in rows if not r.flag and r.ratio > 0 and math.isfinite(r.ratio)]
    if len(usable) < 2:
        return None
    return fit_growth([r.param for r in usable], [r.ratio for r in usable], x_name, "ratio", True, True)


def _warn_flags(result: SweepResult) -> SweepResult:
    for row in result.flagged:
        logger.warning("%s: row %s=%g flagged %s", result.experiment, row.label or "param", row.param, row.flag)
    return result


def _strictly_increasing(values: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


# --- weak-(1,1) on the bidisc and its one-variable contrast ---


def weak11_failure_sweep(
    s_list: Optional[Iterable[float]] = None,
    estimator: Estimator = Estimator.ANALYTIC,
    count: Optional[int] = None,
    seed: Optional[int] = None,
    progress: bool = False,
) -> SweepResult:
    """lam mu{|P f_s| > lam} / ||f_s||_1 along lam = (1 - s)^-2 / 16."""
    estimator = Estimator(estimator)
    s_values = _increasing(s_list, DEFAULT_S, "s")
    if any(not 0 < s < 1 for s in s_values):
        raise DomainError("s values must lie in (0, 1)")

    def row(s: float) -> SweepRow:
        family = CounterexampleFamily.fs_bidisc(s)
        lam = lambda_from_s(s)
        norm = lp_norm(family_handle(family), BIDISC, 1.0)
        flag = norm.flag
        if estimator == Estimator.ANALYTIC:
            measure, error = bidisc_superlevel_measure(s, lam)
            if error > 1e-6 * max(measure, 1e-300):
                flag = flag or "unconverged"
        else:
            curve = distribution(image_family_handle(family), BIDISC, [lam], estimator, seed=seed, count=count)
            measure, error = curve.measures[0], curve.errors[0]
            if measure <= 0 or error > MC_RELATIVE_ERROR * measure:
                flag = flag or "unconverged"
        return _row(s, lam, measure, norm.value, 1.0, label=family.label, flag=flag)

    rows = _rows(row, s_values, "weak11", progress)
    valid = [r for r in rows if not r.flag]
    fits = {}
    if len(valid) >= 2:
        fits["ratio"] = fit_growth(
            [math.log(1.0 / (1.0 - r.param)) for r in valid], [r.ratio for r in valid], "log(1/(1-s))", "ratio",
        )
    monotone = _strictly_increasing([r.ratio for r in valid])
    if not monotone:
        logger.warning("weak11 ratios are not strictly increasing")
    return _warn_flags(SweepResult(
        experiment="weak11",
        family=FamilyKind.FS_BIDISC.value,
        q=1.0,
        rows=rows,
        fits=fits,
        summary={"monotone": float(monotone), "max_ratio": max((r.ratio for r in valid), default=math.nan)},
        notes=[f"estimator={estimator.value}", "lambda = (1-s)^-2/16"],
    ))


def disc_weak11_sweep(s_list: Optional[Iterable[float]] = None, progress: bool = False) -> SweepResult:
    """The one-variable contrast: F_s on the disc keeps a bounded weak-(1,1) ratio."""
    s_values = _increasing(s_list, DEFAULT_S, "s")
    if any(not 0 < s < 1 for s in s_values):
        raise DomainError("s values must lie in (0, 1)")

    def row(s: float) -> SweepRow:
        family = CounterexampleFamily.fs_disc(s)
        lam = lambda_from_s(s)
        norm = lp_norm(family_handle(family), UNIT_DISC, 1.0)
        return _row(s, lam, disc_superlevel_measure(s, lam), norm.value, 1.0, label=family.label, flag=norm.flag)

    rows = _rows(row, s_values, "weak11-disc", progress)
    valid = [r for r in rows if not r.flag]
    fits = {}
    if len(valid) >= 2:
        fits["ratio"] = fit_growth(
            [math.log(1.0 / (1.0 - r.param)) for r in valid], [r.ratio for r in valid], "log(1/(1-s))", "ratio",
        )
    return _warn_flags(SweepResult(
        experiment="weak11-disc",
        family=FamilyKind.FS_DISC.value,
        q=1.0,
        rows=rows,
        fits=fits,
        summary={"max_ratio": max((r.ratio for r in valid), default=math.nan)},
    ))


# --- weak-(4/3, 4/3) on the Hartogs triangle ---


def _fp_row(family: CounterexampleFamily, lam: float, norm_q: float, flag: str = "") -> SweepRow:
    """Weak-(4/3, 4/3) row for P f_p = c / z2 from the exact distribution."""
    c = projection_constant(family).value
    if c / lam >= 1.0:
        flag = flag or "threshold"
    measure = float(analytic_measure(image_family_handle(family), HARTOGS_TRIANGLE, [lam])[0])
    norm = norm_q ** 0.75 if math.isfinite(norm_q) else math.inf
    return _row(lam, lam, measure, norm, FOUR_THIRDS, label=family.label, flag=flag)


def weak43_failure_sweep(
    lam_list: Optional[Iterable[float]] = None,
    p: Optional[float] = None,
    progress: bool = False,
) -> SweepResult:
    """
    lam^(4/3) mu{|P f_p| > lam} / ||f_p||_{4/3}^(4/3) with p = 4/3 + lam^(-9/10),
    or at a fixed ``p`` when one is given.
    """
    lam_values = _increasing(lam_list, DEFAULT_WEAK43_LAMBDA, "lambda")
    if p is None:
        _require_decades(lam_values, 4, "lambda")

    def row(lam: float) -> SweepRow:
        if p is None:
            family = CounterexampleFamily.coupled(FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_POWER, lam)
        else:
            family = CounterexampleFamily.fp_hartogs(p)
        return _fp_row(family, lam, family_norm_power(family))

    rows = _rows(row, lam_values, "weak43", progress)
    fits = {}
    fit = _loglog_fit(rows)
    if fit is not None:
        fits["ratio"] = fit
    sample = CounterexampleFamily.fp_hartogs(p) if p is not None else CounterexampleFamily.coupled(
        FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_POWER, lam_values[0]
    )
    constant_ = projection_constant(sample)
    return _warn_flags(SweepResult(
        experiment="weak43",
        family=FamilyKind.FP_HARTOGS.value,
        q=FOUR_THIRDS,
        rows=rows,
        fits=fits,
        summary={
            "constant_over_quoted": constant_.value / constant_.quoted_value,
            "coupled": float(p is None),
        },
        notes=["p = 4/3 + lambda^(-9/10)" if p is None else f"p = {p:g}"],
    ))


def orlicz_weight_failure_sweep(
    lam_list: Optional[Iterable[float]] = None,
    eps: float = 1.0 / 3.0,
    progress: bool = False,
) -> SweepResult:
    """
    The logarithmic family against the weight (-log|z2| + 1)^eps with
    p = 4/3 + exp(-lam^(9/10)); the weighted norm comes from E1.
    """
    lam_values = _increasing(lam_list, DEFAULT_EXP_LAMBDA, "lambda")
    _require_decades(lam_values, 3, "lambda")
    weight = HartogsWeight("log", eps)

    def row(lam: float) -> SweepRow:
        family = CounterexampleFamily.coupled(FamilyKind.FP_LOG_HARTOGS, Coupling.P_FROM_LAMBDA_EXP, lam)
        return _fp_row(family, lam, family_norm_power(family, FOUR_THIRDS, weight))

    rows = _rows(row, lam_values, "orlicz-weight", progress)
    fits = {}
    fit = _loglog_fit(rows)
    if fit is not None:
        fits["ratio"] = fit
    valid = [r for r in rows if not r.flag]
    if len(valid) >= 2:
        # log(1/(3p - 4)) = lam^0.9 - log 3
        fits["norm_growth"] = fit_growth(
            [r.lam ** 0.9 - math.log(3.0) for r in valid],
            [r.norm ** FOUR_THIRDS for r in valid],
            "log(1/(3p-4))", "norm^(4/3)",
        )
    return _warn_flags(SweepResult(
        experiment="orlicz-weight",
        family=FamilyKind.FP_LOG_HARTOGS.value,
        q=FOUR_THIRDS,
        rows=rows,
        fits=fits,
        notes=[f"weight (-log|z2|+1)^{eps:g}", "p = 4/3 + exp(-lambda^(9/10))"],
    ))


def compare_log_weight_norm(p: float = 1.5, eps: float = 1.0 / 3.0, rule=None) -> Tuple[float, float]:
    """||f_p||^(4/3) against (-log|z2| + 1)^eps: (E1 formula, quadrature)."""
    family = CounterexampleFamily.fp_log_hartogs(p)
    weight = HartogsWeight("log", eps)
    formula = family_norm_power(family, FOUR_THIRDS, weight)
    norm = lp_norm(family_handle(family), HARTOGS_TRIANGLE, FOUR_THIRDS, weight=weight.spec(), rule=rule)
    return formula, norm.value ** FOUR_THIRDS


def hartogs_orlicz_sweep(
    alpha: float,
    lam_list: Optional[Iterable[float]] = None,
    progress: bool = False,
) -> SweepResult:
    """lam^(4/3) mu{|P f_p| > lam} / ||f_p||^(4/3) in L^(4/3)(log+ L)^alpha, p = 4/3 + lam^(-9/10)."""
    lam_values = _increasing(lam_list, DEFAULT_WEAK43_LAMBDA, "lambda")
    _require_decades(lam_values, 3, "lambda")

    def row(lam: float) -> SweepRow:
        family = CounterexampleFamily.coupled(FamilyKind.FP_HARTOGS, Coupling.P_FROM_LAMBDA_POWER, lam)
        guess = family_norm_power(family) ** 0.75
        root = luxemburg_root(hartogs_orlicz_modular(family, alpha), guess, k=alpha)
        return _fp_row(family, lam, root.value ** FOUR_THIRDS, flag=root.flag)

    rows = _rows(row, lam_values, "hartogs-orlicz", progress)
    fits = {}
    fit = _loglog_fit(rows)
    if fit is not None:
        fits["ratio"] = fit
    return _warn_flags(SweepResult(
        experiment="hartogs-orlicz",
        family=FamilyKind.FP_HARTOGS.value,
        q=FOUR_THIRDS,
        rows=rows,
        fits=fits,
        summary={"alpha": alpha, "expected_slope": 1.0 / 30.0 - 0.9 * alpha},
        notes=[f"L^(4/3)(log+L)^{alpha:g}"],
    ))


# --- positive results on the Hartogs triangle ---


def default_weak44_suite() -> List[FunctionHandle]:
    """Five functions in L^4 of the Hartogs triangle."""
    return [
        constant(1.0, 2).relabel("1"),
        family_handle(CounterexampleFamily.fp_hartogs(6.0)).relabel("f_6"),
        family_handle(CounterexampleFamily.fp_hartogs(3.0)).relabel("f_3"),
        laurent_polynomial({((0, 0), (0, 1)): 1.0}, 2, label="conj(z2)"),
        laurent_polynomial({((1, 0), (0, 2)): 1.0}, 2, label="z1*conj(z2)^2"),
    ]


def _image_measures(image: FunctionHandle, lam: Sequence[float], estimator: Estimator) -> np.ndarray:
    if estimator == Estimator.ANALYTIC:
        try:
            return analytic_measure(image, HARTOGS_TRIANGLE, lam)
        except DomainError:
            logger.info("no closed-form distribution for %s, using quadrature", image.label)
            estimator = Estimator.QUADRATURE
    return np.asarray(distribution(image, HARTOGS_TRIANGLE, lam, estimator).measures)


def weak44_bound_check(
    test_set: Optional[Sequence[FunctionHandle]] = None,
    lam_grid: Optional[Iterable[float]] = None,
    estimator: Estimator = Estimator.ANALYTIC,
    truncation: Optional[int] = None,
    progress: bool = False,
) -> SweepResult:
    """lam^4 mu{|P f| > lam} / ||f||_4^4 over a suite of L^4 functions."""
    estimator = Estimator(estimator)
    lam = _increasing(lam_grid, DEFAULT_BOUND_LAMBDA, "lambda")
    suite = list(test_set) if test_set is not None else default_weak44_suite()

    def rows_for(f: FunctionHandle) -> List[SweepRow]:
        norm = lp_norm(f, HARTOGS_TRIANGLE, 4.0)
        if not norm.ok:
            raise DomainError(f"{f.label} is not in L^4 of the Hartogs triangle ({norm.flag})")
        image = image_handle(project_series(HARTOGS_TRIANGLE, f, truncation), label=f"P[{f.label}]")
        measures = _image_measures(image, lam, estimator)
        return [_row(x, x, float(m), norm.value, 4.0, label=f.label) for x, m in zip(lam, measures)]

    rows = [r for group in _rows(rows_for, suite, "weak44", progress) for r in group]
    fits = {}
    for f in suite:
        fit = _loglog_fit([r for r in rows if r.label == f.label])
        if fit is not None:
            fits[f.label] = fit
    slopes = [abs(fit.slope) for fit in fits.values()]
    return _warn_flags(SweepResult(
        experiment="weak44",
        family="suite",
        q=4.0,
        rows=rows,
        fits=fits,
        summary={
            "suite_max": max((r.ratio for r in rows if math.isfinite(r.ratio)), default=math.nan),
            "max_abs_slope": max(slopes, default=0.0),
        },
    ))


def weighted_weak_check(
    eps: float,
    weight_kind: str = "power",
    test_set: Optional[Sequence[CounterexampleFamily]] = None,
    lam_grid: Optional[Iterable[float]] = None,
    j: int = 1,
    alpha: float = -2.0,
    progress: bool = False,
) -> SweepResult:
    """
    lam^(4/3) mu{|P f| > lam} / ||f||^(4/3) in weighted L^(4/3) of the Hartogs triangle.

    ``weight_kind`` selects |z2|^-eps ("power", eps > 0), (-log|z2| + 1)^eps
    ("log", eps > 1/3) or (|z2|^2 f_{alpha,j})^(-1/3) ("iterated"). The log
    weight at eps = 1/3 runs the coupled logarithmic family instead.
    """
    if weight_kind == "log" and math.isclose(eps, 1.0 / 3.0):
        result = orlicz_weight_failure_sweep(lam_grid, eps, progress)
        return result.model_copy(update={"experiment": "weighted", "notes": result.notes + ["endpoint eps = 1/3"]})
    if weight_kind == "power" and not eps > 0:
        raise DomainError(f"the power weight needs eps > 0, got {eps}")
    if weight_kind == "log" and not eps > 1.0 / 3.0:
        raise DomainError(f"the log weight needs eps > 1/3, got {eps}")
    if weight_kind not in ("power", "log", "iterated"):
        raise DomainError(f"unknown weight kind {weight_kind!r}")
    lam = _increasing(lam_grid, DEFAULT_BOUND_LAMBDA, "lambda")
    families = list(test_set) if test_set is not None else [
        CounterexampleFamily.fp_hartogs(p) for p in (1.5, 2.0, 3.0)
    ]
    if any(f.kind.uses_s for f in families):
        raise DomainError("weighted checks run on the f_p families")

    if weight_kind == "iterated":
        spec = hartogs_iterated_weight(j, alpha)
        weight_label = spec.label
    else:
        weight = HartogsWeight(weight_kind, eps)
        weight_label = weight.spec().label

    def rows_for(family: CounterexampleFamily) -> List[SweepRow]:
        if weight_kind == "iterated":
            norm_q = lp_norm(family_handle(family), HARTOGS_TRIANGLE, FOUR_THIRDS, weight=spec).value ** FOUR_THIRDS
        else:
            norm_q = family_norm_power(family, FOUR_THIRDS, weight)
        rows = []
        for x in lam:
            row = _fp_row(family, x, norm_q)
            # below the threshold the measure is the full volume, still exact
            rows.append(row.model_copy(update={"flag": "" if row.flag == "threshold" else row.flag}))
        return rows

    rows = [r for group in _rows(rows_for, families, "weighted", progress) for r in group]
    fits = {}
    for family in families:
        fit = _loglog_fit([r for r in rows if r.label == family.label])
        if fit is not None:
            fits[family.label] = fit
    return _warn_flags(SweepResult(
        experiment="weighted",
        family=FamilyKind.FP_HARTOGS.value,
        q=FOUR_THIRDS,
        rows=rows,
        fits=fits,
        summary={"suite_max": max((r.ratio for r in rows if math.isfinite(r.ratio)), default=math.nan)},
        notes=[f"weight {weight_label}"],
    ))


# --- Orlicz estimates on the disc and bidisc ---


def default_mapping_suite() -> List[Tuple[FunctionHandle, Optional[FunctionHandle]]]:
    """Five disc functions with finite L (log+ L)^(k+1) norms, paired with known images."""
    cases = []
    for s in (0.5, 0.9):
        family = CounterexampleFamily.fs_disc(s)
        cases.append((family_handle(family), image_family_handle(family)))
    cases.append((constant(2.0, 1), None))
    cases.append((modulus_power(0, -1.0, 1), None))
    cases.append((laurent_polynomial({((2,), (1,)): 1.0}, 1, label="z^2*conj(z)"), None))
    return cases


def polydisc_orlicz_check(
    k: int = 0,
    s_list: Optional[Iterable[float]] = None,
    test_set: Optional[Sequence[Tuple[FunctionHandle, Optional[FunctionHandle]]]] = None,
    lam_grid: Optional[Iterable[float]] = None,
    truncation: Optional[int] = None,
    progress: bool = False,
) -> SweepResult:
    """
    Weak-type L log+ L on the bidisc and L (log+ L)^(k+1) -> L (log+ L)^k on the disc.

    Weak rows: lam mu{|P f_s| > lam} / ||f_s||_{L log+ L} along the coupling
    lam = (1 - s)^-2 / 16, and the constant function over ``lam_grid``.
    Mapping rows (kind "mapping"): ||P f||_{k} / ||f||_{k+1} for each case.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    s_values = _increasing(s_list, DEFAULT_S[:6], "s")
    lam = _increasing(lam_grid, (0.5, 2.0, 8.0), "lambda")
    cases = list(test_set) if test_set is not None else default_mapping_suite()
    llogl = OrliczSpec(1.0, 1.0)

    def weak_row(s: float) -> SweepRow:
        family = CounterexampleFamily.fs_bidisc(s)
        x = lambda_from_s(s)
        norm = orlicz_norm(family_handle(family), BIDISC, llogl)
        measure, _ = bidisc_superlevel_measure(s, x)
        return _row(s, x, measure, norm.value, 1.0, label="f_s", flag=norm.flag)

    weak = _rows(weak_row, s_values, "orlicz-polydisc", progress)
    one = constant(1.0, 2)
    one_norm = orlicz_norm(one, BIDISC, llogl)
    one_image = image_handle(project_series(BIDISC, one, 0), label="P[1]")
    for x, m in zip(lam, analytic_measure(one_image, BIDISC, lam)):
        weak.append(_row(x, x, float(m), one_norm.value, 1.0, label="1", flag=one_norm.flag))

    def mapping_row(case) -> SweepRow:
        f, image = case
        if image is None:
            image = image_handle(project_series(UNIT_DISC, f, truncation), label=f"P[{f.label}]")
        source = orlicz_norm(f, UNIT_DISC, OrliczSpec(1.0, k + 1))
        target = orlicz_norm(image, UNIT_DISC, OrliczSpec(1.0, k))
        flag = source.flag or target.flag
        ratio = target.value / source.value if source.value > 0 else math.nan
        return SweepRow(
            param=float(k), lam=math.nan, measure=math.nan, norm=source.value,
            ratio=ratio, flag=flag, label=f.label, kind="mapping",
        )

    mapping = _rows(mapping_row, cases, "orlicz-mapping", progress)
    fits = {}
    fs_rows = [r for r in weak if r.label == "f_s" and not r.flag]
    if len(fs_rows) >= 2:
        fits["f_s"] = fit_growth(
            [math.log(1.0 / (1.0 - r.param)) for r in fs_rows], [r.ratio for r in fs_rows], "log(1/(1-s))", "ratio",
        )
    return _warn_flags(SweepResult(
        experiment="orlicz-polydisc",
        family=FamilyKind.FS_BIDISC.value,
        q=1.0,
        rows=weak + mapping,
        fits=fits,
        summary={
            "weak_max": max((r.ratio for r in weak if math.isfinite(r.ratio)), default=math.nan),
            "mapping_max": max((r.ratio for r in mapping if math.isfinite(r.ratio)), default=math.nan),
            "k": float(k),
        },
    ))
