"""
Command-line front end.

Every command builds one validated RunConfig from flags (optionally on top
of a key=value battery file), runs, writes one result file plus a manifest,
and exits 0 (possibly with flagged rows), 2 (invalid configuration) or 3
(numerical failure).
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from .artifacts import SWEEP_COLUMNS, sweep_meta, sweep_rows, write_manifest, write_result
from .config import configure_logging
from .errors import ConfigError, DomainError, NumericalError
from .families import CounterexampleFamily, FamilyKind, family_handle
from .forelli_rudin import IntegralKind, forelli_rudin_scan
from .functions import FunctionHandle, constant, modulus_power, monomial
from .geometry import HARTOGS_TRIANGLE, CPoint, DomainSpec, quadrature_rule, sample
from .kernels import kernel
from .models import RunConfig, SweepResult
from .norms import (
    Estimator,
    OrliczSpec,
    distribution,
    lorentz_p1_norm,
    lp_norm,
    orlicz_norm,
    weak_lp_quasinorm,
)
from .projector import eval_projection, project_abs, project_quadrature, project_series
from .special import e1_bounds, exp_integral_e1
from .sweeps import (
    default_weak44_suite,
    disc_weak11_sweep,
    hartogs_orlicz_sweep,
    polydisc_orlicz_check,
    weak11_failure_sweep,
    weak43_failure_sweep,
    weak44_bound_check,
    weighted_weak_check,
)
from .transport import conjugation_check, transport_isometry
from .weights import bb_constant, bb_constant_iterated, log_power_weight, power_weight

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

GRID_FIELDS = ("lam", "s", "p", "eps", "x", "t")
SWEEPS = ("weak11", "weak11-disc", "weak43", "weak44", "weighted", "orlicz-polydisc", "hartogs-orlicz")


@dataclass
class RunOutput:
    rows: List[Dict[str, Any]]
    meta: Dict[str, Any] = field(default_factory=dict)
    columns: Optional[List[str]] = None
    flagged: int = 0
    message: Optional[str] = None


# --- parsing ---


def parse_grid(text: str) -> List[float]:
    """Comma list, or geom:start:stop:count / lin:start:stop:count."""
    text = text.strip()
    if text.startswith(("geom:", "lin:")):
        kind, *parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must read {kind}:start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError(f"grid {text!r} needs a positive count")
        if kind == "geom":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"geometric grid {text!r} needs positive endpoints")
            return [float(v) for v in np.geomspace(start, stop, count)]
        return [float(v) for v in np.linspace(start, stop, count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse grid {text!r}: {e}") from e


def function_from_spec(text: Optional[str], domain: DomainSpec) -> FunctionHandle:
    """
    Test functions by name: const:c, monomial:a[,b], modulus:k,power and
    the families fs-bidisc:s, fs-disc:s, fp-hartogs:p, fp-log-hartogs:p.
    """
    if not text:
        raise ConfigError("this command needs --function")
    name, _, arg = text.partition(":")
    try:
        if name == "const":
            return constant(complex(arg or "1"), domain.dimension)
        if name == "monomial":
            return monomial(tuple(int(a) for a in arg.split(",")))
        if name == "modulus":
            k, power = arg.split(",")
            return modulus_power(int(k) - 1, float(power), domain.dimension)
        kind = FamilyKind(name)
        value = float(arg)
    except ValueError as e:
        raise ConfigError(f"cannot parse function {text!r}: {e}") from e
    if kind == FamilyKind.FS_BIDISC:
        family = CounterexampleFamily.fs_bidisc(value)
    elif kind == FamilyKind.FS_DISC:
        family = CounterexampleFamily.fs_disc(value)
    elif kind == FamilyKind.FP_HARTOGS:
        family = CounterexampleFamily.fp_hartogs(value)
    else:
        family = CounterexampleFamily.fp_log_hartogs(value)
    if family.domain.kind != domain.kind or family.domain.dimension != domain.dimension:
        raise ConfigError(f"{name} lives on {family.domain}, not {domain}")
    return family_handle(family)


def _domain(config: RunConfig, default: str = "disc") -> DomainSpec:
    try:
        return DomainSpec.parse(config.domain or default)
    except DomainError as e:
        raise ConfigError(str(e)) from e


def _point(text: Optional[str], what: str) -> CPoint:
    if text is None:
        raise ConfigError(f"this command needs --{what}")
    try:
        return CPoint.parse(text)
    except (ValueError, DomainError) as e:
        raise ConfigError(f"cannot parse --{what} {text!r}: {e}") from e


def _rule(config: RunConfig, domain: DomainSpec, f: Optional[FunctionHandle] = None, angular: int = 0):
    return quadrature_rule(
        domain, config.radial_order, max(config.angular_order, angular),
        singularity=f.singularity if f is not None else None,
    )


def _estimator(config: RunConfig) -> Estimator:
    try:
        return Estimator(config.estimator)
    except ValueError as e:
        raise ConfigError(f"unknown estimator {config.estimator!r}") from e


def _complex_columns(prefix: str, value: complex) -> Dict[str, float]:
    return {f"{prefix}_re": value.real, f"{prefix}_im": value.imag}


# --- commands ---


def run_kernel(config: RunConfig) -> RunOutput:
    domain = _domain(config)
    z, w = _point(config.z, "z"), _point(config.w, "w")
    value = kernel(domain, z, w).value
    row = {"domain": str(domain), "z": config.z, "w": config.w, **_complex_columns("value", value), "abs": abs(value)}
    return RunOutput([row], message=f"{value.real:.17g}{value.imag:+.17g}j")


def run_project(config: RunConfig) -> RunOutput:
    domain = _domain(config)
    f = function_from_spec(config.function, domain)
    z = _point(config.z, "z")
    if config.method == "series":
        rule = _rule(config, domain, f, config.truncation)
        coeffs = project_series(domain, f, config.truncation, rule)
        value, error, converged = eval_projection(coeffs, z), coeffs.tail_estimate, coeffs.converged
    elif config.method in ("quadrature", "abs"):
        project = project_quadrature if config.method == "quadrature" else project_abs
        result = project(domain, f, z, _rule(config, domain, f))
        value, error, converged = complex(result.value), result.error, result.converged
    else:
        raise ConfigError(f"unknown projection method {config.method!r}")
    row = {
        "domain": str(domain), "function": f.label, "z": config.z, "method": config.method,
        **_complex_columns("value", value), "abs": abs(value), "error": error,
        "flag": "" if converged else "unconverged",
    }
    return RunOutput([row], flagged=int(not converged), message=f"{value.real:.17g}{value.imag:+.17g}j")


def run_norm(config: RunConfig) -> RunOutput:
    domain = _domain(config)
    f = function_from_spec(config.function, domain)
    kind = config.kind or "lp"
    q = config.q if config.q is not None else 1.0
    estimator = _estimator(config)
    mc = {"seed": config.seed, "count": config.samples} if estimator == Estimator.MONTE_CARLO else {}
    if kind == "lp":
        result = lp_norm(f, domain, q, rule=_rule(config, domain, f))
    elif kind == "weak":
        lam = config.lam or parse_grid("geom:1e-3:1e3:61")
        result = weak_lp_quasinorm(f, domain, q, lam, estimator, **mc)
    elif kind == "lorentz":
        result = lorentz_p1_norm(f, domain, q, config.t or None, estimator, **mc)
    elif kind == "orlicz":
        result = orlicz_norm(f, domain, OrliczSpec(q, config.k), rule=_rule(config, domain, f))
    else:
        raise ConfigError(f"unknown norm kind {kind!r}")
    row = {
        "domain": str(domain), "function": f.label, "kind": kind, "q": q, "k": config.k,
        "value": result.value, "error": result.error, "argmax": result.argmax, "flag": result.flag,
    }
    return RunOutput([row], flagged=int(bool(result.flag)), message=f"{result.value:.17g}")


def run_distribution(config: RunConfig) -> RunOutput:
    domain = _domain(config)
    f = function_from_spec(config.function, domain)
    if not config.t:
        raise ConfigError("distribution needs --t")
    estimator = _estimator(config)
    kwargs: Dict[str, Any] = {}
    if estimator == Estimator.MONTE_CARLO:
        kwargs = {"seed": config.seed, "count": config.samples}
    elif estimator == Estimator.QUADRATURE:
        kwargs = {"rule": _rule(config, domain, f)}
    curve = distribution(f, domain, config.t, estimator, **kwargs)
    rows = [{"t": s.t, "measure": s.measure, "error": s.error} for s in curve.samples]
    meta = {"estimator": curve.estimator, "domain": curve.domain, "seed": curve.seed, "count": curve.count}
    return RunOutput(rows, meta=meta)


def run_bb(config: RunConfig) -> RunOutput:
    weight = config.weight or "power"
    p = config.q if config.q is not None else 4.0 / 3.0
    if weight == "iterated":
        results = [bb_constant_iterated(config.j, config.alpha if config.alpha is not None else -2.0)]
    elif weight == "power":
        if not config.x:
            raise ConfigError("bb-constant --weight power needs exponents in --x")
        results = [bb_constant(power_weight(g), p) for g in config.x]
    elif weight == "log":
        if not config.eps:
            raise ConfigError("bb-constant --weight log needs --eps")
        results = [bb_constant(log_power_weight(2.0 / 3.0, e), p) for e in config.eps]
    else:
        raise ConfigError(f"unknown weight {weight!r}")
    rows = [
        {
            "weight": r.label, "p": r.p, "value": r.value, "center_re": r.center.real,
            "center_im": r.center.imag, "change": r.change, "diverged": r.diverged,
            "flag": "divergent" if r.diverged else ("" if r.converged else "unconverged"),
        }
        for r in results
    ]
    return RunOutput(rows, flagged=sum(1 for r in rows if r["flag"]))


def run_forelli_rudin(config: RunConfig) -> RunOutput:
    eps = config.eps[0] if config.eps else 0.0
    delta = config.delta if config.delta is not None else 0.0
    try:
        kind = IntegralKind(config.kind or "area")
    except ValueError as e:
        raise ConfigError(f"unknown integral kind {config.kind!r}") from e
    values = forelli_rudin_scan(eps, delta, config.x or None, kind)
    rows = [
        {
            "kind": v.kind.value, "eps": v.eps, "delta": v.delta, "rho": v.rho, "value": v.value,
            "error": v.error, "regime": v.regime.value, "ratio": v.ratio,
            "flag": "" if v.converged else "unconverged",
        }
        for v in values
    ]
    return RunOutput(rows, flagged=sum(1 for r in rows if r["flag"]))


def run_e1(config: RunConfig) -> RunOutput:
    if not config.x:
        raise ConfigError("e1 needs --x")
    rows = []
    for x in config.x:
        lower, upper = e1_bounds(x)
        rows.append({"x": x, "e1": exp_integral_e1(x), "lower": lower, "upper": upper})
    return RunOutput(rows, message="\n".join(f"{r['e1']:.17g}" for r in rows))


def run_sweep(config: RunConfig, name: str) -> RunOutput:
    progress = sys.stderr.isatty()
    lam = config.lam or None
    if name == "weak11":
        result = weak11_failure_sweep(
            config.s or None, _estimator(config), count=config.samples, seed=config.seed, progress=progress,
        )
    elif name == "weak11-disc":
        result = disc_weak11_sweep(config.s or None, progress=progress)
    elif name == "weak43":
        result = weak43_failure_sweep(lam, config.p[0] if config.p else None, progress=progress)
    elif name == "weak44":
        result = weak44_bound_check(None, lam, _estimator(config), config.truncation, progress=progress)
    elif name == "weighted":
        if not config.eps:
            raise ConfigError("sweep weighted needs --eps")
        result = weighted_weak_check(
            config.eps[0], config.weight or "power", None, lam, j=config.j,
            alpha=config.alpha if config.alpha is not None else -2.0, progress=progress,
        )
    elif name == "orlicz-polydisc":
        result = polydisc_orlicz_check(config.k, config.s or None, None, lam, config.truncation, progress=progress)
    elif name == "hartogs-orlicz":
        if config.alpha is None:
            raise ConfigError("sweep hartogs-orlicz needs --alpha")
        result = hartogs_orlicz_sweep(config.alpha, lam, progress=progress)
    else:
        raise ConfigError(f"unknown sweep {name!r}")
    return _sweep_output(result)


def _sweep_output(result: SweepResult) -> RunOutput:
    return RunOutput(sweep_rows(result), meta=sweep_meta(result), columns=SWEEP_COLUMNS, flagged=len(result.flagged))


def run_transport(config: RunConfig) -> RunOutput:
    q = config.q if config.q is not None else 4.0
    if config.function:
        suite = [function_from_spec(config.function, HARTOGS_TRIANGLE)]
    else:
        full = default_weak44_suite()
        suite = [full[0], full[3], full[4]]
    rule = _rule(config, HARTOGS_TRIANGLE)
    points = sample(HARTOGS_TRIANGLE, 20, config.seed).points
    rows = []
    for f in suite:
        lhs, rhs = transport_isometry(f, q, rule=rule)
        rows.append({
            "check": "isometry", "function": f.label, "index": 0,
            "lhs": lhs, "rhs": rhs, "rel_err": abs(lhs - rhs) / abs(rhs),
        })
        for i, (a, b) in enumerate(conjugation_check(f, points, config.truncation, rule)):
            rows.append({
                "check": "conjugation", "function": f.label, "index": i,
                "lhs": abs(a), "rhs": abs(b), "rel_err": abs(a - b) / max(abs(a), 1e-300),
            })
    worst = max(r["rel_err"] for r in rows)
    return RunOutput(rows, meta={"q": q, "max_rel_err": worst}, message=f"{worst:.3e}")


COMMANDS: Dict[str, Callable[[RunConfig], RunOutput]] = {
    "kernel eval": run_kernel,
    "project": run_project,
    "norm": run_norm,
    "distribution": run_distribution,
    "bb-constant": run_bb,
    "forelli-rudin": run_forelli_rudin,
    "e1": run_e1,
    "transport-check": run_transport,
}


def run(config: RunConfig) -> int:
    """Execute one configured command; returns the exit status."""
    started = time.perf_counter()
    try:
        if config.command.startswith("sweep "):
            output = run_sweep(config, config.command.split(" ", 1)[1])
        elif config.command in COMMANDS:
            output = COMMANDS[config.command](config)
        else:
            raise ConfigError(f"unknown command {config.command!r}")
    except (ConfigError, DomainError) as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    elapsed = time.perf_counter() - started
    path = write_result(config, output.rows, output.meta, output.columns)
    write_manifest(config, path, output.flagged, {"compute_seconds": elapsed})
    if output.flagged:
        logger.warning("%d flagged row(s) in %s", output.flagged, path)
    if output.message is not None:
        print(output.message)
    logger.info("%s finished in %.2fs", config.command, elapsed)
    return EXIT_OK


# --- argument handling ---


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value battery file; flags override its values")
    parser.add_argument("--domain")
    parser.add_argument("--family")
    parser.add_argument("--weight")
    parser.add_argument("--function")
    parser.add_argument("--kind")
    parser.add_argument("--method")
    parser.add_argument("--z")
    parser.add_argument("--w")
    for name in GRID_FIELDS:
        parser.add_argument(f"--{name}", help="comma list or geom:/lin:start:stop:count")
    parser.add_argument("--k", type=int)
    parser.add_argument("--q", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--j", type=int)
    parser.add_argument("--estimator", choices=[e.value for e in Estimator])
    parser.add_argument("--truncation", type=int)
    parser.add_argument("--radial-order", dest="radial_order", type=int)
    parser.add_argument("--angular-order", dest="angular_order", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--log-level", dest="log_level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergman", description="Bergman projection numerics and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    kernel_parser = sub.add_parser("kernel", help="Bergman kernel values")
    kernel_sub = kernel_parser.add_subparsers(dest="action", required=True)
    _add_common(kernel_sub.add_parser("eval", help="K(z, w) on a model domain"))
    for name, help_text in (
        ("project", "P f(z) by the series or quadrature path"),
        ("norm", "L^p, weak L^p, Lorentz or Orlicz norm"),
        ("distribution", "superlevel measures mu{|f| > t}"),
        ("bb-constant", "Bekolle-Bonami constant of a radial weight"),
        ("forelli-rudin", "Forelli-Rudin integrals and their regimes"),
        ("e1", "exponential integral E1 with its bounds"),
        ("transport-check", "Hartogs-to-bidisc isometry and conjugation identity"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    sweep_parser = sub.add_parser("sweep", help="counterexample sweeps and bound checks")
    sweep_sub = sweep_parser.add_subparsers(dest="action", required=True)
    for name in SWEEPS:
        _add_common(sweep_sub.add_parser(name))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge battery-file values and explicit flags into a validated RunConfig."""
    command = args.command if getattr(args, "action", None) is None else f"{args.command} {args.action}"
    values: Dict[str, Any] = {}
    if args.config:
        file_values = dotenv_values(args.config)
        if not file_values and not _readable(args.config):
            raise ConfigError(f"cannot read battery file {args.config}")
        values.update({k.lower(): v for k, v in file_values.items() if v is not None})
        values.pop("command", None)
    for key, value in vars(args).items():
        if key in ("command", "action", "config", "log_level") or value is None:
            continue
        values[key] = value
    for name in GRID_FIELDS:
        if isinstance(values.get(name), str):
            values[name] = parse_grid(values[name])
    return RunConfig(command=command, **values)


def _readable(path: str) -> bool:
    try:
        with open(path, encoding="utf-8"):
            return True
    except OSError:
        return False


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = config_from_args(args)
    except (ConfigError, ValidationError) as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
