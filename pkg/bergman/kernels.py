"""Closed-form Bergman kernels of the disc, the polydisc and the Hartogs triangle."""

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError
from .geometry import UNIT_DISC, CPoint, DomainKind, DomainSpec, as_points, require_inside


@dataclass(frozen=True)
class KernelValue:
    value: complex
    domain: DomainSpec

    def __abs__(self) -> float:
        return abs(self.value)


def _disc_values(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 1.0 / (math.pi * (1.0 - z * np.conj(w)) ** 2)


def _hartogs_values(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    # pi^-2 a / ((a - b)^2 (1 - a)^2) with a = z2 conj(w2), b = z1 conj(w1)
    a = z[:, 1] * np.conj(w[:, 1])
    b = z[:, 0] * np.conj(w[:, 0])
    return a / (math.pi ** 2 * (a - b) ** 2 * (1.0 - a) ** 2)


def bergman_kernel_values(domain: DomainSpec, z: Any, w: Any, validate: bool = True) -> np.ndarray:
    """
    Vectorized K(z; conj w) for broadcastable point arrays of shape (n, d).

    Interior points only: boundary points are rejected, not mapped to infinity.
    """
    if validate:
        z = require_inside(domain, z, "z")
        w = require_inside(domain, w, "w")
    else:
        z = as_points(z, domain.dimension)
        w = as_points(w, domain.dimension)
    if domain.is_hartogs:
        return _hartogs_values(z, w)
    return np.prod(_disc_values(z, w), axis=1)


def kernel_disc(z: complex, w: complex) -> complex:
    return complex(bergman_kernel_values(UNIT_DISC, np.array([[z]]), np.array([[w]]))[0])


def kernel_polydisc(z: CPoint, w: CPoint) -> complex:
    if z.dimension != w.dimension:
        raise DomainError(f"dimension mismatch: {z.dimension} vs {w.dimension}")
    return complex(bergman_kernel_values(DomainSpec.polydisc(z.dimension), z, w)[0])


def kernel_hartogs(z: CPoint, w: CPoint) -> complex:
    return complex(bergman_kernel_values(DomainSpec.hartogs(), z, w)[0])


def kernel(domain: DomainSpec, z: CPoint, w: CPoint) -> KernelValue:
    if domain.is_hartogs:
        value = kernel_hartogs(z, w)
    elif domain.kind == DomainKind.POLYDISC:
        value = kernel_polydisc(z, w)
    else:
        # the punctured disc shares the Bergman space of the disc
        if z.dimension != 1 or w.dimension != 1:
            raise DomainError(f"{domain} expects one-dimensional points")
        require_inside(domain, [z, w])
        value = kernel_disc(z[0], w[0])
    return KernelValue(value, domain)


def abs_kernel(domain: DomainSpec, z: CPoint, w: CPoint) -> float:
    return abs(kernel(domain, z, w))
