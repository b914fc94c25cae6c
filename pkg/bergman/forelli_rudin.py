"""
Forelli-Rudin integrals on the disc and their growth regimes.

a_{eps,delta}(w) = int_D (1 - |eta|^2)^-eps |1 - w conj(eta)|^-(2 - eps - delta) dV(eta)
b_delta(w)       = int_{|eta| = 1} |1 - w conj(eta)|^-(1 - delta) dsigma(eta)

Both are bounded for delta > 0, comparable to -log(1 - |w|^2) for delta = 0
and to (1 - |w|^2)^delta for delta < 0.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import hyp2f1

from .errors import DomainError
from .parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_RADII = (0.9, 0.95, 0.99, 0.995, 0.999)
RTOL = 1e-9
# Relative error above which an integral is reported unconverged.
CONVERGENCE_RTOL = 1e-6


class IntegralKind(str, Enum):
    AREA = "area"
    CIRCLE = "circle"


class Regime(str, Enum):
    BOUNDED = "bounded"
    LOGARITHMIC = "log"
    POWER = "power"


def regime(delta: float) -> Regime:
    if delta > 0:
        return Regime.BOUNDED
    if delta == 0:
        return Regime.LOGARITHMIC
    return Regime.POWER


def regime_profile(delta: float, rho: float) -> float:
    """The function a_{eps,delta} and b_delta are comparable to at |w| = rho."""
    r = regime(delta)
    if r == Regime.BOUNDED:
        return 1.0
    if r == Regime.LOGARITHMIC:
        return -math.log1p(-rho * rho)
    return (1.0 - rho * rho) ** delta


@dataclass(frozen=True)
class ForelliRudinValue:
    kind: IntegralKind
    eps: float
    delta: float
    rho: float
    value: float
    error: float
    regime: Regime
    ratio: Optional[float]
    converged: bool


def _graded_breaks(rho: float) -> List[float]:
    """Breakpoints in x = |eta|^2 accumulating at 1 on the scale 1 - rho^2."""
    gap = 1.0 - rho * rho
    breaks = [0.0]
    scale = 0.5
    while scale > gap / 10 and scale > 1e-14:
        breaks.append(1.0 - scale)
        scale /= 10.0
    return breaks + [1.0]


def _quad(fn, a, b, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, a, b, limit=200, epsabs=0.0, epsrel=RTOL, **kwargs)


def area_integral(eps: float, delta: float, rho: float) -> tuple:
    """
    a_{eps,delta} at |w| = rho as (value, error).

    The angular integral is 2 pi 2F1(c, c; 1; rho^2 r^2) with
    c = (2 - eps - delta) / 2; the radial one runs in x = r^2 on panels graded
    toward x = 1, the last panel carrying the (1 - x)^-eps factor as an
    algebraic quad weight.
    """
    c = (2.0 - eps - delta) / 2.0
    breaks = _graded_breaks(rho)
    values, errors = [], []
    for a, b in zip(breaks[:-2], breaks[1:-1]):
        v, e = _quad(lambda x: (1.0 - x) ** -eps * hyp2f1(c, c, 1.0, rho * rho * x), a, b)
        values.append(v)
        errors.append(e)
    v, e = _quad(
        lambda x: hyp2f1(c, c, 1.0, rho * rho * x), breaks[-2], 1.0, weight="alg", wvar=(0.0, -eps),
    )
    values.append(v)
    errors.append(e)
    return math.pi * math.fsum(values), math.pi * math.fsum(errors)


def circle_integral(delta: float, rho: float) -> tuple:
    """b_delta at |w| = rho as (value, error), integrating over the angle."""
    exponent = (1.0 - delta) / 2.0
    gap = max(1.0 - rho, 1e-300)
    points = [x for x in (gap, 10 * gap, 100 * gap) if x < math.pi]

    def integrand(theta: float) -> float:
        return (1.0 - 2.0 * rho * math.cos(theta) + rho * rho) ** -exponent

    v, e = _quad(integrand, 0.0, math.pi, points=points or None)
    return 2.0 * v, 2.0 * e


def circle_integral_closed(delta: float, rho: float) -> float:
    """b_delta = 2 pi 2F1(c, c; 1; rho^2) with c = (1 - delta) / 2."""
    c = (1.0 - delta) / 2.0
    return 2.0 * math.pi * float(hyp2f1(c, c, 1.0, rho * rho))


def forelli_rudin(
    eps: float, delta: float, w: complex, kind: IntegralKind = IntegralKind.AREA
) -> ForelliRudinValue:
    """a_{eps,delta}(w) or b_delta(w) with its regime and the ratio to the regime profile."""
    kind = IntegralKind(kind)
    rho = abs(complex(w))
    if not rho < 1:
        raise DomainError(f"w must lie in the open disc, got |w| = {rho}")
    if kind == IntegralKind.AREA:
        if not eps < 1:
            raise DomainError(f"eps must be below 1, got {eps}")
        value, error = area_integral(eps, delta, rho)
    else:
        value, error = circle_integral(delta, rho)
    profile = regime_profile(delta, rho)
    ratio = value / profile if profile > 0 else None
    converged = bool(np.isfinite(value)) and error <= CONVERGENCE_RTOL * max(abs(value), 1.0)
    if not converged:
        logger.warning("Forelli-Rudin %s integral at |w|=%g unconverged (error %.3e)", kind.value, rho, error)
    return ForelliRudinValue(kind, eps, delta, rho, value, error, regime(delta), ratio, converged)


def forelli_rudin_scan(
    eps: float,
    delta: float,
    radii: Optional[Sequence[float]] = None,
    kind: IntegralKind = IntegralKind.AREA,
) -> List[ForelliRudinValue]:
    """forelli_rudin over a list of radii on the positive axis."""
    radii = list(DEFAULT_RADII if radii is None else radii)
    return parallel_map(lambda rho: forelli_rudin(eps, delta, rho, kind), radii)
