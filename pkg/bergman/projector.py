"""
Bergman projection P and absolute projection P+.

Two independent paths are provided. The series path expands P f in the
orthogonal (Laurent) monomial basis of the Reinhardt domain: angular
integrals come from the discrete Fourier transform on equispaced nodes,
radial integrals from the rule. The quadrature path integrates the kernel
against f directly.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .config import settings
from .errors import DomainError
from .functions import FunctionHandle, LaurentMonomial, ModulusProfile
from .geometry import (
    UNIT_DISC,
    CPoint,
    DomainKind,
    DomainSpec,
    QuadratureRule,
    as_points,
    compensated_sum,
    evaluate_finite,
    integrate,
    quadrature_rule,
    require_inside,
)
from .kernels import bergman_kernel_values
from .parallel import parallel_map

logger = logging.getLogger(__name__)

MAX_TRUNCATION = 512
# Relative size of the outermost shell below which a table counts as converged.
SHELL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MonomialIndex:
    exponents: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(a) for a in self.exponents))

    def is_admissible(self, domain: DomainSpec) -> bool:
        e = self.exponents
        if len(e) != domain.dimension:
            return False
        if domain.is_hartogs:
            return e[0] >= 0 and e[0] + e[1] >= -1
        return all(a >= 0 for a in e)

    def require(self, domain: DomainSpec) -> "MonomialIndex":
        if not self.is_admissible(domain):
            raise DomainError(f"index {self.exponents} is not admissible on {domain}")
        return self

    def degree(self, domain: DomainSpec) -> int:
        """Degree used for truncation: total degree, or the chart degree on the Hartogs triangle."""
        if domain.is_hartogs:
            a, b = self.exponents
            return max(a, a + b)
        return sum(self.exponents)


def admissible_indices(domain: DomainSpec, truncation: int) -> List[MonomialIndex]:
    if truncation < 0:
        raise DomainError(f"truncation must be nonnegative, got {truncation}")
    if domain.is_hartogs:
        return [
            MonomialIndex((a, m - a))
            for a in range(truncation + 1)
            for m in range(-1, truncation + 1)
        ]
    n = domain.dimension
    return [
        MonomialIndex(e)
        for e in itertools.product(range(truncation + 1), repeat=n)
        if sum(e) <= truncation
    ]


def monomial_norm_sq(domain: DomainSpec, idx: MonomialIndex) -> float:
    """Squared L^2 norm of z ** idx over the domain."""
    e = idx.require(domain).exponents
    if domain.is_hartogs:
        a, b = e
        return math.pi ** 2 / ((a + 1) * (a + b + 2))
    return math.prod(math.pi / (a + 1) for a in e)


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """Truncated coefficient table of a projected function."""
    domain: DomainSpec
    truncation: int
    indices: np.ndarray
    values: np.ndarray
    tail_estimate: float

    @property
    def entries(self) -> Dict[MonomialIndex, complex]:
        return {MonomialIndex(tuple(e)): complex(v) for e, v in zip(self.indices, self.values)}

    def coefficient(self, *exponents: int) -> complex:
        hits = np.all(self.indices == np.asarray(exponents), axis=1)
        return complex(self.values[hits][0]) if hits.any() else 0j

    @property
    def converged(self) -> bool:
        scale = float(np.max(np.abs(self.values), initial=0.0))
        return self.tail_estimate <= SHELL_TOLERANCE * max(scale, 1e-300)

    @cached_property
    def dense(self) -> np.ndarray:
        """Coefficients in chart exponents, ready for Horner evaluation."""
        n = self.truncation + 1
        if self.domain.is_hartogs:
            table = np.zeros((n, n + 1), dtype=complex)
            a = self.indices[:, 0]
            table[a, a + self.indices[:, 1] + 1] = self.values
            return table
        table = np.zeros((n,) * self.domain.dimension, dtype=complex)
        table[tuple(self.indices.T)] = self.values
        return table

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for e, v in zip(self.indices, self.values):
            exps = [int(x) for x in e] if len(e) > 1 else [int(e[0]), 0]
            rows.append(exps + [float(v.real), float(v.imag)])
        return {
            "domain": str(self.domain),
            "truncation": self.truncation,
            "entries": rows,
            "tail_estimate": float(self.tail_estimate),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SpectralCoefficients":
        domain = DomainSpec.parse(data["domain"])
        d = domain.dimension
        rows = np.asarray(data["entries"], dtype=float).reshape(-1, max(d, 2) + 2)
        indices = rows[:, :d].astype(int)
        values = rows[:, -2] + 1j * rows[:, -1]
        return cls(domain, int(data["truncation"]), indices, values, float(data["tail_estimate"]))


@dataclass(frozen=True)
class ProjectionValue:
    value: complex
    error: float
    converged: bool


def suggested_truncation(s: float) -> int:
    """Truncation resolving coefficients that decay like s ** a."""
    return min(MAX_TRUNCATION, int(math.ceil(8.0 / (1.0 - s))))


def _same_geometry(a: DomainSpec, b: DomainSpec) -> bool:
    return a == b or (a.is_disc_like and b.is_disc_like)


def _ordered_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    stack = np.stack(parts)
    return np.array([compensated_sum(col) for col in stack.T])


def _finish(domain: DomainSpec, truncation: int, indices: List[MonomialIndex], values: np.ndarray) -> SpectralCoefficients:
    shell = np.array([idx.degree(domain) == truncation for idx in indices])
    tail = float(np.max(np.abs(values[shell]), initial=0.0))
    table = np.array([idx.exponents for idx in indices], dtype=int).reshape(len(indices), domain.dimension)
    coeffs = SpectralCoefficients(domain, truncation, table, values, tail)
    if not coeffs.converged:
        logger.warning(
            "series on %s not converged at truncation %d (outer shell %.3e)", domain, truncation, tail
        )
    return coeffs


def _inner_products_polar(f: FunctionHandle, indices: List[MonomialIndex], rule: QuadratureRule) -> np.ndarray:
    nodes, weights = rule.radial_tensor()
    moduli = np.abs(nodes)
    by_mode: Dict[Tuple[int, ...], list] = {}
    for term in f.polar_data:
        by_mode.setdefault(tuple(term.modes), []).append(term)
    out = np.zeros(len(indices), dtype=complex)
    for j, idx in enumerate(indices):
        terms = by_mode.get(idx.exponents)
        if not terms:
            continue
        profile = sum(t.profile(moduli) for t in terms)
        values = weights * profile * np.prod(moduli ** np.asarray(idx.exponents, dtype=float), axis=1)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"radial profile of {f.label} is not finite on the rule")
        out[j] = compensated_sum(values)
    return out


def _chart_modes(domain: DomainSpec, indices: List[MonomialIndex]) -> np.ndarray:
    modes = np.array([idx.exponents for idx in indices], dtype=int)
    if domain.is_hartogs:
        modes[:, 1] = modes[:, 0] + modes[:, 1]
    return modes


def _inner_products_fft(domain: DomainSpec, f: FunctionHandle, indices: List[MonomialIndex], rule: QuadratureRule) -> np.ndarray:
    modes = _chart_modes(domain, indices)
    count = rule.angular_count
    phase = np.exp(1j * rule.angles)
    if domain.dimension == 1:
        radii, rweights = rule.radial[0]
        pts = (radii[:, None] * phase[None, :]).reshape(-1, 1)
        spectrum = np.fft.fft(evaluate_finite(f, pts).reshape(len(radii), count), axis=1) / count
        a = modes[:, 0]
        terms = rweights[:, None] * radii[:, None] ** a[None, :] * spectrum[:, a % count]
        return _ordered_sum(list(terms)) * 2 * math.pi
    if domain.dimension != 2:
        raise DomainError("polydiscs of dimension 3 or more need coordinate-factored functions")

    (r1, w1), (r2, w2) = rule.radial
    density = r2 ** 2 if domain.is_hartogs else np.ones_like(r2)
    a, m = modes[:, 0], modes[:, 1]
    second = r2[:, None] * phase[None, :]
    powers = (w2 * density)[:, None] * r2[:, None] ** m[None, :].astype(float)

    def radial_row(i: int) -> np.ndarray:
        z1 = np.broadcast_to((r1[i] * phase)[:, None, None], (count, len(r2), count))
        z2 = np.broadcast_to(second[None, :, :], (count, len(r2), count))
        if domain.is_hartogs:
            z1 = z1 * z2
        pts = np.column_stack([z1.ravel(), z2.ravel()])
        values = evaluate_finite(f, pts).reshape(count, len(r2), count)
        spectrum = np.fft.fft2(values, axes=(0, 2)) / count ** 2
        selected = spectrum[a % count, :, m % count]
        return w1[i] * r1[i] ** a.astype(float) * np.einsum("kj,jk->k", selected, powers)

    parts = parallel_map(radial_row, range(len(r1)))
    return _ordered_sum(parts) * (2 * math.pi) ** 2


def project_series(
    domain: DomainSpec,
    f: FunctionHandle,
    truncation: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
) -> SpectralCoefficients:
    """
    Coefficients c_idx = <f, z^idx> / ||z^idx||^2 for all admissible indices
    up to ``truncation``.
    """
    truncation = settings.truncation if truncation is None else truncation
    if f.dimension != domain.dimension:
        raise DomainError(f"{f.label} has dimension {f.dimension}, {domain} has {domain.dimension}")
    if rule is None:
        rule = quadrature_rule(
            domain, angular_order=max(settings.angular_order, truncation), singularity=f.singularity
        )
    if not _same_geometry(rule.domain, domain):
        raise DomainError(f"rule built for {rule.domain} used on {domain}")

    if f.factors is not None and domain.kind == DomainKind.POLYDISC:
        return _project_factored(domain, f, truncation, rule)

    indices = admissible_indices(domain, truncation)
    if f.polar_data is not None:
        inner = _inner_products_polar(f, indices, rule)
    else:
        if rule.angular_order < truncation:
            raise DomainError(
                f"angular order {rule.angular_order} cannot resolve modes up to {truncation}"
            )
        inner = _inner_products_fft(domain, f, indices, rule)
    norms = np.array([monomial_norm_sq(domain, idx) for idx in indices])
    return _finish(domain, truncation, indices, inner / norms)


def _project_factored(domain: DomainSpec, f: FunctionHandle, truncation: int, rule: QuadratureRule) -> SpectralCoefficients:
    # P on the polydisc is the composition of the one-variable projections
    per_factor = [
        project_series(UNIT_DISC, g, truncation, rule.factor(k)).dense
        for k, g in enumerate(f.factors)
    ]
    indices = admissible_indices(domain, truncation)
    table = np.array([idx.exponents for idx in indices], dtype=int)
    values = np.ones(len(indices), dtype=complex)
    for k, dense in enumerate(per_factor):
        values *= dense[table[:, k]]
    return _finish(domain, truncation, indices, values)


def evaluate_coefficients(coeffs: SpectralCoefficients, pts: np.ndarray) -> np.ndarray:
    """Horner evaluation of the coefficient table at an (n, d) array, no domain check."""
    table = coeffs.dense
    if coeffs.domain.is_hartogs:
        z1, z2 = pts[:, 0], pts[:, 1]
        # chart exponents: z1^a z2^b = (z1/z2)^a z2^(a+b), and a + b starts at -1
        return npoly.polyval2d(z1 / z2, z2, table) / z2
    if coeffs.domain.dimension == 1:
        return npoly.polyval(pts[:, 0], table)
    if coeffs.domain.dimension == 2:
        return npoly.polyval2d(pts[:, 0], pts[:, 1], table)
    out = np.empty(len(pts), dtype=complex)
    for i, z in enumerate(pts):
        value = table
        for zk in z:
            value = npoly.polyval(zk, value)
        out[i] = value
    return out


def eval_projection(coeffs: SpectralCoefficients, z: CPoint) -> complex:
    pts = require_inside(coeffs.domain, z)
    return complex(evaluate_coefficients(coeffs, pts)[0])


def image_handle(coeffs: SpectralCoefficients, label: str = "Pf") -> FunctionHandle:
    """The projected function as a handle; a lone monomial is recorded for analytic measures."""
    magnitude = np.abs(coeffs.values)
    significant = magnitude > 1e-12 * max(float(magnitude.max(initial=0.0)), 1e-300)
    single = profile = None
    if significant.sum() == 1:
        j = int(np.argmax(significant))
        exps = tuple(int(a) for a in coeffs.indices[j])
        c = complex(coeffs.values[j])
        single = LaurentMonomial(exps, c)
        nonzero = [k for k, a in enumerate(exps) if a != 0]
        if len(nonzero) <= 1:
            k = nonzero[0] if nonzero else 0
            profile = ModulusProfile(k, exps[k], abs(c))
    return FunctionHandle(
        lambda pts: evaluate_coefficients(coeffs, pts),
        coeffs.domain.dimension,
        label=label,
        radial_modulus=profile is not None,
        profile=profile,
        monomial=single,
    )


def _kernel_integrand(domain: DomainSpec, f: FunctionHandle, z: np.ndarray, absolute: bool) -> FunctionHandle:
    if f.factors is not None and domain.kind == DomainKind.POLYDISC:
        factors = tuple(
            _kernel_integrand(UNIT_DISC, g, z[:, k:k + 1], absolute) for k, g in enumerate(f.factors)
        )

        def evaluate_product(pts):
            return np.prod([h.evaluator(pts[:, k:k + 1]) for k, h in enumerate(factors)], axis=0)

        return FunctionHandle(evaluate_product, domain.dimension, factors=factors, singularity=f.singularity)

    def evaluate(pts):
        k = bergman_kernel_values(domain, np.broadcast_to(z, pts.shape), pts, validate=False)
        values = f.evaluator(pts)
        if absolute:
            return np.abs(k) * np.abs(values)
        return k * values

    return FunctionHandle(evaluate, domain.dimension, label=f"K*{f.label}", singularity=f.singularity)


def _project_at(domain, f, z, rule, tol, absolute) -> ProjectionValue:
    pts = require_inside(domain, z)
    if rule is None:
        rule = quadrature_rule(domain, singularity=f.singularity)
    if not _same_geometry(rule.domain, domain):
        raise DomainError(f"rule built for {rule.domain} used on {domain}")
    result = integrate(_kernel_integrand(domain, f, pts, absolute), rule)
    value = result.value.real if absolute else result.value
    converged = result.error <= tol * max(abs(value), 1.0)
    if not converged:
        logger.warning("projection of %s at %s unconverged (error %.3e)", f.label, tuple(pts[0]), result.error)
    return ProjectionValue(value, result.error, converged)


def project_quadrature(
    domain: DomainSpec,
    f: FunctionHandle,
    z: CPoint,
    rule: Optional[QuadratureRule] = None,
    tol: float = 1e-6,
) -> ProjectionValue:
    """P f(z) as the kernel integral against f."""
    return _project_at(domain, f, z, rule, tol, absolute=False)


def project_abs(
    domain: DomainSpec,
    f: FunctionHandle,
    z: CPoint,
    rule: Optional[QuadratureRule] = None,
    tol: float = 1e-6,
) -> ProjectionValue:
    """P+ f(z), the integral of |K(z; w)| |f(w)|."""
    return _project_at(domain, f, z, rule, tol, absolute=True)
