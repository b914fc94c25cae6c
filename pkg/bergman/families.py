"""
Counterexample families, their closed-form projections and closed-form norms.

f_s on the bidisc (and its one-variable factor F_s on the disc) breaks the
weak-(1,1) estimate; f_p and its logarithmic variant on the Hartogs triangle
break weak-(4/3, 4/3). Families near p = 4/3 are stored through
log(p - 4/3) so couplings such as p = 4/3 + exp(-lam^0.9) stay exact.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaincc, gammaln

from .errors import DomainError
from .functions import FunctionHandle, ModulusProfile, ModulusSamples, PolarTerm, monomial, product_handle
from .geometry import (
    BIDISC,
    HARTOGS_TRIANGLE,
    UNIT_DISC,
    CPoint,
    DomainSpec,
    QuadratureRule,
    lens_area,
    quadrature_rule,
    require_inside,
)
from .norms import WeightSpec
from .special import exp_integral_e1_log
from .weights import log_power_weight, power_weight

logger = logging.getLogger(__name__)

FOUR_THIRDS = 4.0 / 3.0
# Orders of the pulled-back disc rule; the pullback integrands are smooth.
AUTOMORPHISM_ORDER = 32
LENS_RTOL = 1e-10


class FamilyKind(str, Enum):
    FS_BIDISC = "fs-bidisc"
    FS_DISC = "fs-disc"
    FP_HARTOGS = "fp-hartogs"
    FP_LOG_HARTOGS = "fp-log-hartogs"

    @property
    def uses_s(self) -> bool:
        return self in (FamilyKind.FS_BIDISC, FamilyKind.FS_DISC)

    @property
    def domain(self) -> DomainSpec:
        if self == FamilyKind.FS_BIDISC:
            return BIDISC
        if self == FamilyKind.FS_DISC:
            return UNIT_DISC
        return HARTOGS_TRIANGLE


class Coupling(str, Enum):
    NONE = "none"
    LAMBDA_FROM_S = "lambda-from-s"
    P_FROM_LAMBDA_POWER = "p-from-lambda-power"
    P_FROM_LAMBDA_EXP = "p-from-lambda-exp"


def lambda_from_s(s: float) -> float:
    """lam = (1 - s)^-2 / 16."""
    return 1.0 / (16.0 * (1.0 - s) ** 2)


def s_from_lambda(lam: float) -> float:
    return 1.0 - 0.25 / math.sqrt(lam)


def log_offset_power(lam: float) -> float:
    """log(p - 4/3) for p = 4/3 + lam^(-9/10)."""
    return -0.9 * math.log(lam)


def log_offset_exp(lam: float) -> float:
    """log(p - 4/3) for p = 4/3 + exp(-lam^(9/10))."""
    return -(lam ** 0.9)


@dataclass(frozen=True)
class CounterexampleFamily:
    """
    One member of a counterexample family.

    ``s`` parametrizes the f_s families; ``log_offset`` = log(p - 4/3)
    parametrizes the f_p families. ``lam`` records the coupling parameter
    when the member was produced by a coupling.
    """
    kind: FamilyKind
    s: Optional[float] = None
    log_offset: Optional[float] = None
    coupling: Coupling = Coupling.NONE
    lam: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        if self.kind.uses_s:
            if self.s is None or not 0.0 < self.s < 1.0:
                raise DomainError(f"{self.kind.value} needs 0 < s < 1, got s={self.s}")
        elif self.log_offset is None or not math.isfinite(self.log_offset):
            raise DomainError(f"{self.kind.value} needs p > 4/3 (finite log(p - 4/3)), got {self.log_offset}")

    @classmethod
    def fs_bidisc(cls, s: float) -> "CounterexampleFamily":
        return cls(FamilyKind.FS_BIDISC, s=s)

    @classmethod
    def fs_disc(cls, s: float) -> "CounterexampleFamily":
        return cls(FamilyKind.FS_DISC, s=s)

    @classmethod
    def fp_hartogs(cls, p: float) -> "CounterexampleFamily":
        return cls(FamilyKind.FP_HARTOGS, log_offset=_log_offset_of(p))

    @classmethod
    def fp_log_hartogs(cls, p: float) -> "CounterexampleFamily":
        return cls(FamilyKind.FP_LOG_HARTOGS, log_offset=_log_offset_of(p))

    @classmethod
    def coupled(cls, kind: FamilyKind, coupling: Coupling, lam: float) -> "CounterexampleFamily":
        kind, coupling = FamilyKind(kind), Coupling(coupling)
        if not lam > 0:
            raise DomainError(f"coupling parameter must be positive, got {lam}")
        if coupling == Coupling.LAMBDA_FROM_S:
            if not kind.uses_s:
                raise DomainError(f"{coupling.value} applies to the f_s families, not {kind.value}")
            if lam <= 1.0 / 16.0:
                raise DomainError(f"lambda-from-s needs lam > 1/16, got {lam}")
            return cls(kind, s=s_from_lambda(lam), coupling=coupling, lam=lam)
        if coupling in (Coupling.P_FROM_LAMBDA_POWER, Coupling.P_FROM_LAMBDA_EXP):
            if kind.uses_s:
                raise DomainError(f"{coupling.value} applies to the f_p families, not {kind.value}")
            offset = log_offset_power(lam) if coupling == Coupling.P_FROM_LAMBDA_POWER else log_offset_exp(lam)
            return cls(kind, log_offset=offset, coupling=coupling, lam=lam)
        raise DomainError("a coupled family needs a coupling other than 'none'")

    @property
    def domain(self) -> DomainSpec:
        return self.kind.domain

    @property
    def delta(self) -> float:
        """p - 4/3 (may underflow to zero; use ``log_offset`` then)."""
        return math.exp(self.log_offset)

    @property
    def p(self) -> float:
        return FOUR_THIRDS + self.delta

    @property
    def log_beta(self) -> float:
        """log(4 - p'), with 4 - p' = 3 delta / (1/3 + delta)."""
        return math.log(3.0) + self.log_offset - math.log(1.0 / 3.0 + self.delta)

    @property
    def beta(self) -> float:
        return math.exp(self.log_beta)

    @property
    def p_conj(self) -> float:
        return 4.0 - self.beta

    @property
    def gamma(self) -> float:
        """p' - 1 = 1 / (p - 1), the decay rate of |f_p| in -log|z2|."""
        return 1.0 / (1.0 / 3.0 + self.delta)

    @property
    def label(self) -> str:
        if self.kind.uses_s:
            return f"{self.kind.value}(s={self.s:.17g})"
        return f"{self.kind.value}(log(p-4/3)={self.log_offset:.17g})"


def _log_offset_of(p: float) -> float:
    delta = p - FOUR_THIRDS
    if not delta > 0:
        raise DomainError(f"p must exceed 4/3, got {p}")
    return math.log(delta)


# --- the functions ---


def automorphism_samples(s: float, rule: Optional[QuadratureRule] = None) -> ModulusSamples:
    """
    |F_s| sampled through the disc automorphism w = (s - zeta) / (1 - s zeta).

    With J = |phi'|^2 = (1 - s^2)^2 |1 - s zeta|^-4 one has |F_s(w)| = 1 / J(zeta)
    and dV(w) = J(zeta) dV(zeta).
    """
    radial_order = min(rule.radial_order, AUTOMORPHISM_ORDER) if rule is not None else AUTOMORPHISM_ORDER
    angular_order = min(rule.angular_order, AUTOMORPHISM_ORDER) if rule is not None else AUTOMORPHISM_ORDER
    pullback = quadrature_rule(UNIT_DISC, radial_order, angular_order, origin_levels=0, edge_levels=0)
    zeta = pullback.nodes[:, 0]
    jac = (1.0 - s * s) ** 2 / np.abs(1.0 - s * zeta) ** 4
    return ModulusSamples(1.0 / jac, pullback.weights * jac)


def _fs_factor(s: float) -> FunctionHandle:
    scale = (1.0 - s * s) ** 2

    def evaluate(pts):
        return (scale / np.abs(1.0 - s * pts[:, 0]) ** 4).astype(complex)

    return FunctionHandle(
        evaluate, 1,
        label=f"F_{s:g}",
        singularity=s,
        modulus_samples=lambda rule: automorphism_samples(s, rule),
        metadata={"s": s},
    )


def _fp_profile(family: CounterexampleFamily) -> Callable[[np.ndarray], np.ndarray]:
    """|f_p| as a function of r = |z2|."""
    exponent = 1.0 - family.p_conj
    if family.kind == FamilyKind.FP_LOG_HARTOGS:
        return lambda r: r ** exponent / (1.0 - np.log(r))
    return lambda r: r ** exponent


def family_handle(family: CounterexampleFamily) -> FunctionHandle:
    """The family member as a FunctionHandle on its domain."""
    if family.kind == FamilyKind.FS_DISC:
        return _fs_factor(family.s)
    if family.kind == FamilyKind.FS_BIDISC:
        factor = _fs_factor(family.s)
        return product_handle(factor, factor, label=f"f_{family.s:g}")

    profile = _fp_profile(family)
    p_conj = family.p_conj
    log_variant = family.kind == FamilyKind.FP_LOG_HARTOGS

    def evaluate(pts):
        z2 = pts[:, 1]
        r = np.abs(z2)
        values = np.conj(z2) * r ** (-p_conj)
        return values / (1.0 - np.log(r)) if log_variant else values

    return FunctionHandle(
        evaluate, 2,
        label=family.label,
        polar_data=(PolarTerm((0, -1), lambda r: profile(r[:, 1])),),
        radial_modulus=True,
        profile=None if log_variant else ModulusProfile(1, 1.0 - p_conj, 1.0),
        metadata={"family": family},
    )


def family_eval(family: CounterexampleFamily, w: CPoint) -> complex:
    pts = require_inside(family.domain, w, "evaluation point")
    return complex(family_handle(family).evaluator(pts)[0])


# --- projections ---


@dataclass(frozen=True)
class ProjectionConstant:
    """c in P f_p = c / z2; ``quoted_value`` is the half-sized constant carried alongside."""
    value: float
    quoted_value: float
    method: str


def projection_constant(family: CounterexampleFamily, method: str = "closed-form") -> ProjectionConstant:
    """
    The constant c with P f_p(z) = c / z2.

    c = <f_p, 1/z2> / ||1/z2||^2 = 2 int_0^1 |f_p| r^2 dr in the radial
    variable; ``method="quadrature"`` evaluates that integral with scipy.
    """
    if family.kind.uses_s:
        raise DomainError(f"{family.kind.value} has no scalar projection constant")
    log_variant = family.kind == FamilyKind.FP_LOG_HARTOGS
    if method == "quadrature":
        # r^(3 - p') dr = exp(-beta t) dt with t = -log r
        beta = family.beta
        value, _ = quad(
            lambda t: math.exp(-beta * t) / ((1.0 + t) if log_variant else 1.0),
            0.0, math.inf, limit=500, epsabs=0.0, epsrel=1e-12,
        )
        value *= 2.0
    elif method == "closed-form":
        if log_variant:
            value = 2.0 * _scaled_e1(family.log_beta)
        else:
            value = 2.0 / family.beta
    else:
        raise DomainError(f"unknown method {method!r}")
    if log_variant:
        quoted = -(math.log(3.0) + family.log_offset)
    else:
        quoted = 1.0 / family.beta
    return ProjectionConstant(value, quoted, method)


def _scaled_e1(log_x: float) -> float:
    """exp(x) E1(x) for x = exp(log_x)."""
    return math.exp(math.exp(log_x)) * exp_integral_e1_log(log_x)


def disc_superlevel_measure(s: float, lam: float) -> float:
    """mu{|1 - s z|^-2 > lam} on the disc: a lens around 1/s."""
    return float(lens_area(1.0 / s, 1.0, 1.0 / (s * math.sqrt(lam))))


def bidisc_superlevel_measure(s: float, lam: float) -> Tuple[float, float]:
    """
    mu{|1 - s z1|^-2 |1 - s z2|^-2 > lam} on the bidisc, with an error estimate.

    Writing d = |z1 - 1/s|, the z2-section is the lens D intersected with the
    disc of radius 1 / (s^2 d sqrt(lam)) about 1/s, and z1 runs over arcs of
    angular extent theta(d). The remaining integral over d is done in log d.
    """
    center = 1.0 / s
    root = math.sqrt(lam)

    def integrand(u: float) -> float:
        d = math.exp(u)
        cos_half = min(1.0, max(-1.0, (d * d + center * center - 1.0) / (2.0 * d * center)))
        arc = 2.0 * math.acos(cos_half)
        return arc * d * d * float(lens_area(center, 1.0, 1.0 / (s * s * d * root)))

    lo, hi = math.log(center - 1.0), math.log(center + 1.0)
    kinks = [-math.log(s * s * root * (center + sign)) for sign in (-1.0, 1.0)]
    points = [x for x in kinks if lo < x < hi]
    value, error = quad(
        integrand, lo, hi, points=points or None, limit=400, epsabs=1e-15, epsrel=LENS_RTOL,
    )
    return value, error


def image_family_handle(family: CounterexampleFamily) -> FunctionHandle:
    """P f for the family member, with its closed-form distribution attached."""
    if family.kind.uses_s:
        s = family.s

        def factor_eval(pts):
            return (1.0 - s * pts[:, 0]) ** -2

        factor = FunctionHandle(factor_eval, 1, label=f"(1-{s:g}z)^-2", singularity=s)
        if family.kind == FamilyKind.FS_DISC:
            return FunctionHandle(
                factor_eval, 1, label=factor.label, singularity=s,
                distribution=lambda t: np.array([disc_superlevel_measure(s, x) for x in np.atleast_1d(t)]),
            )
        product = product_handle(factor, factor, label=f"P f_{s:g}")
        return FunctionHandle(
            product.evaluator, 2,
            label=product.label,
            factors=product.factors,
            singularity=s,
            distribution=lambda t: np.array([bidisc_superlevel_measure(s, x)[0] for x in np.atleast_1d(t)]),
        )
    c = projection_constant(family).value
    return monomial((0, -1), c).relabel(f"P {family.label}")


def closed_form_projection(family: CounterexampleFamily, z: CPoint) -> complex:
    pts = require_inside(family.domain, z)
    return complex(image_family_handle(family).evaluator(pts)[0])


# --- closed-form norms on the Hartogs triangle ---


@dataclass(frozen=True)
class HartogsWeight:
    """Radial weight in z2: |z2|^-eps ("power") or (-log|z2| + 1)^eps ("log")."""
    kind: str
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise DomainError(f"weight kind must be 'power' or 'log', got {self.kind!r}")

    def spec(self) -> WeightSpec:
        if self.kind == "power":
            return power_weight(-self.eps, coordinate=1)
        return log_power_weight(0.0, self.eps, coordinate=1)


def _exp_moment(log_kappa: float, m: float) -> float:
    """int_0^inf exp(-kappa t) (1 + t)^m dt for kappa = exp(log_kappa) > 0."""
    kappa = math.exp(log_kappa)
    if abs(m) < 1e-12:
        return math.exp(-log_kappa)
    if abs(m + 1.0) < 1e-12:
        return _scaled_e1(log_kappa)
    if m > -1:
        # e^kappa kappa^-(m+1) Gamma(m+1, kappa)
        a = m + 1.0
        tail = gammaincc(a, kappa)
        if tail > 0:
            return math.exp(kappa - a * log_kappa + gammaln(a) + math.log(tail))
    value, _ = quad(lambda t: math.exp(-kappa * t) * (1.0 + t) ** m, 0.0, math.inf, limit=500, epsrel=1e-12)
    return value


def family_norm_power(
    family: CounterexampleFamily, q: float = FOUR_THIRDS, weight: Optional[HartogsWeight] = None
) -> float:
    """
    int_H |f_p|^q w dV in closed form.

    In t = -log|z2| the integral is 2 pi^2 int exp(-kappa t) (1 + t)^m dt with
    kappa = 4 + q (beta - 3) (less eps for the power weight) and m collecting
    the logarithmic factors. For q = 4/3 and no power weight kappa = 4 beta / 3
    is taken from log(beta) directly.
    """
    if family.kind.uses_s:
        raise DomainError("closed-form weighted norms are defined for the f_p families")
    weight = weight or HartogsWeight("power", 0.0)
    m = -q if family.kind == FamilyKind.FP_LOG_HARTOGS else 0.0
    shift = 0.0
    if weight.kind == "power":
        shift = weight.eps
    else:
        m += weight.eps
    if math.isclose(q, FOUR_THIRDS) and shift == 0.0:
        log_kappa = math.log(FOUR_THIRDS) + family.log_beta
    else:
        kappa = 4.0 + q * (family.beta - 3.0) - shift
        if not kappa > 0:
            logger.warning("|f_p|^%g is not integrable against %s", q, weight)
            return math.inf
        log_kappa = math.log(kappa)
    return 2.0 * math.pi ** 2 * _exp_moment(log_kappa, m)


def hartogs_orlicz_modular(family: CounterexampleFamily, alpha: float) -> Callable[[float], float]:
    """
    L -> int_H |f_p / L|^(4/3) (log+ |f_p / L|)^alpha dV for f_p = conj(z2)|z2|^-p'.

    With |f_p| = exp(gamma t) the modular is
    2 pi^2 L^-(4/3 + kappa) kappa^-(alpha + 1) Gamma(alpha + 1, kappa s0) / gamma,
    kappa = 4 (p - 4/3) and s0 = max(-log L, 0); evaluated in logs.
    """
    if family.kind != FamilyKind.FP_HARTOGS:
        raise DomainError("the closed-form Orlicz modular is defined for fp-hartogs")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    log_kappa = math.log(4.0) + family.log_offset
    kappa = math.exp(log_kappa)
    a = alpha + 1.0
    base = math.log(2.0 * math.pi ** 2) - math.log(family.gamma) - a * log_kappa + gammaln(a)

    def phi(lam: float) -> float:
        log_lam = math.log(lam)
        tail = gammaincc(a, kappa * max(-log_lam, 0.0))
        if tail <= 0:
            return 0.0
        exponent = base - (FOUR_THIRDS + kappa) * log_lam + math.log(tail)
        return math.exp(min(exponent, 700.0))

    return phi
