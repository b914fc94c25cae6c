"""
The exponential integral E1(x) = int_x^inf exp(-t) / t dt.

Power series below x = 1, modified Lentz continued fraction above. The
log-argument entry point keeps arguments such as exp(-lambda ** 0.9) usable
after they underflow.
"""

import math
from typing import Tuple

import numpy as np

from .errors import ConvergenceError, DomainError

SERIES_SWITCH = 1.0
MAX_ITERATIONS = 500
EPS = 1e-16
FPMIN = 1e-300


def _series_tail(x: float) -> float:
    """sum_{n>=1} (-1)^(n+1) x^n / (n n!)."""
    terms = []
    power = 1.0
    for n in range(1, MAX_ITERATIONS):
        power *= x / n
        term = power / n
        terms.append(term if n % 2 else -term)
        if term < EPS * abs(terms[0]) or term == 0.0:
            return math.fsum(terms)
    raise ConvergenceError(f"E1 series did not converge at x={x}")


def _continued_fraction_scaled(x: float) -> float:
    """exp(x) E1(x) by the modified Lentz algorithm, for x > 1."""
    b = x + 1.0
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x: float) -> float:
    if not x > 0:
        raise DomainError(f"E1 needs x > 0, got {x}")
    if x <= SERIES_SWITCH:
        return -np.euler_gamma - math.log(x) + _series_tail(x)
    return _continued_fraction_scaled(x) * math.exp(-x)


def exp_integral_e1_scaled(x: float) -> float:
    """exp(x) E1(x), finite for every x > 0."""
    if not x > 0:
        raise DomainError(f"E1 needs x > 0, got {x}")
    if x <= SERIES_SWITCH:
        return math.exp(x) * exp_integral_e1(x)
    return _continued_fraction_scaled(x)


def exp_integral_e1_log(log_x: float) -> float:
    """E1(exp(log_x)); exact in the log term even when exp(log_x) underflows."""
    x = math.exp(log_x)
    if x <= SERIES_SWITCH:
        tail = _series_tail(x) if x > 0.0 else 0.0
        return -np.euler_gamma - log_x + tail
    return exp_integral_e1(x)


def e1_bounds(x: float) -> Tuple[float, float]:
    """Lower and upper bounds exp(-x)/2 log(1 + 2/x) < E1(x) < exp(-x) log(1 + 1/x)."""
    if not x > 0:
        raise DomainError(f"E1 bounds need x > 0, got {x}")
    decay = math.exp(-x)
    return 0.5 * decay * math.log1p(2.0 / x), decay * math.log1p(1.0 / x)
