"""
Transport between the Hartogs triangle and the bidisc.

g(z1, z2) = z2 f(z1 z2, z2) is an isometry from L^q(H, w) onto
L^q(D^2, |z2|^(2-q) w), and the projections are conjugate:
P_H f(z) = P_{D^2} g(z1 / z2, z2) / z2.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .functions import FunctionHandle, PolarTerm
from .geometry import BIDISC, HARTOGS_TRIANGLE, QuadratureRule, quadrature_rule, require_inside
from .norms import WeightSpec, lp_norm
from .projector import evaluate_coefficients, project_series
from .weights import radial_weight

logger = logging.getLogger(__name__)


def _transport_polar(polar: Tuple[PolarTerm, ...]) -> Tuple[PolarTerm, ...]:
    # rho(|w1|, |w2|) e^{i(m1 phi1 + m2 phi2)} with w1 = z1 z2, w2 = z2
    def moved(profile):
        def evaluate(r):
            r1, r2 = r[:, 0], r[:, 1]
            return r2 * profile(np.column_stack([r1 * r2, r2]))
        return evaluate

    return tuple(
        PolarTerm((term.modes[0], term.modes[0] + term.modes[1] + 1), moved(term.profile)) for term in polar
    )


def transport_to_bidisc(f: FunctionHandle) -> FunctionHandle:
    """g(z1, z2) = z2 f(z1 z2, z2) on the bidisc."""
    if f.dimension != 2:
        raise DomainError(f"{f.label} is not a function on the Hartogs triangle")

    def evaluate(pts):
        z1, z2 = pts[:, 0], pts[:, 1]
        if np.any(z2 == 0):
            raise DomainError("g is undefined on z2 = 0")
        return z2 * f.evaluator(np.column_stack([z1 * z2, z2]))

    return FunctionHandle(
        evaluate, 2,
        label=f"T[{f.label}]",
        polar_data=_transport_polar(f.polar_data) if f.polar_data is not None else None,
        radial_modulus=f.radial_modulus,
        metadata={"source": f},
    )


def matched_rules(rule: Optional[QuadratureRule] = None) -> Tuple[QuadratureRule, QuadratureRule]:
    """A Hartogs rule and the bidisc rule with the same radial and angular nodes."""
    rule = rule or quadrature_rule(HARTOGS_TRIANGLE)
    bidisc = QuadratureRule(BIDISC, rule.radial_order, rule.angular_order, rule.origin_levels, rule.edge_levels)
    return rule, bidisc


def transported_weight(q: float, weight: Optional[WeightSpec] = None) -> WeightSpec:
    """|z2|^(2-q) w(z2) for a weight w of z2 (or w = 1)."""
    if weight is not None and weight.profile is None:
        raise DomainError("transport needs a radial weight of z2 with a profile")
    base = weight.profile if weight is not None else None

    def profile(r):
        out = r ** (2.0 - q)
        return out * base(r) if base is not None else out

    label = f"|z2|^{2.0 - q:g}" + (f"*{weight.label}" if weight is not None else "")
    return radial_weight(profile, label, coordinate=1)


def transport_isometry(
    f: FunctionHandle,
    q: float = 4.0,
    weight: Optional[WeightSpec] = None,
    rule: Optional[QuadratureRule] = None,
) -> Tuple[float, float]:
    """(||g||_{L^q(D^2, |z2|^(2-q) w)}, ||f||_{L^q(H, w)})."""
    hartogs_rule, bidisc_rule = matched_rules(rule)
    g = transport_to_bidisc(f)
    lhs = lp_norm(g, BIDISC, q, weight=transported_weight(q, weight), rule=bidisc_rule, check_divergence=False)
    rhs = lp_norm(f, HARTOGS_TRIANGLE, q, weight=weight, rule=hartogs_rule, check_divergence=False)
    return lhs.value, rhs.value


def conjugation_check(
    f: FunctionHandle,
    points: Sequence,
    truncation: Optional[int] = None,
    rule: Optional[QuadratureRule] = None,
) -> List[Tuple[complex, complex]]:
    """Pairs (P_H f(z), P_{D^2} g(z1/z2, z2) / z2) at each point of the Hartogs triangle."""
    pts = require_inside(HARTOGS_TRIANGLE, points)
    hartogs_rule, bidisc_rule = matched_rules(rule)
    g = transport_to_bidisc(f)
    ph = evaluate_coefficients(project_series(HARTOGS_TRIANGLE, f, truncation, hartogs_rule), pts)
    moved = np.column_stack([pts[:, 0] / pts[:, 1], pts[:, 1]])
    pb = evaluate_coefficients(project_series(BIDISC, g, truncation, bidisc_rule), moved) / pts[:, 1]
    return [(complex(a), complex(b)) for a, b in zip(ph, pb)]
