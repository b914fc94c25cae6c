"""
Evaluable functions on the model domains.

A FunctionHandle wraps a vectorized evaluator taking an (n, d) complex array
and returning n complex values, plus the structural metadata the rest of the
library exploits: polar separability, coordinate factorization, radial
modulus, closed-form superlevel measures.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import DomainError
from .geometry import CPoint, as_points

Evaluator = Callable[[np.ndarray], np.ndarray]
RadialProfile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PolarTerm:
    """One angular mode m with radial profile rho_m(|z_1|, ..., |z_n|)."""
    modes: Tuple[int, ...]
    profile: RadialProfile


@dataclass(frozen=True)
class ModulusProfile:
    """|f| = scale * |z_k| ** power."""
    coordinate: int
    power: float
    scale: float = 1.0


@dataclass(frozen=True)
class LaurentMonomial:
    """f = coefficient * z_1 ** a * z_2 ** b (negative powers allowed off the axes)."""
    exponents: Tuple[int, ...]
    coefficient: complex = 1.0


@dataclass(frozen=True)
class ModulusSamples:
    """Values of |f| with weights such that sum(w * psi(v)) = integral of psi(|f|)."""
    values: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class FunctionHandle:
    evaluator: Evaluator
    dimension: int
    label: str = "f"
    polar_data: Optional[Tuple[PolarTerm, ...]] = None
    factors: Optional[Tuple["FunctionHandle", ...]] = None
    singularity: Optional[float] = None
    radial: bool = False
    radial_modulus: bool = False
    profile: Optional[ModulusProfile] = None
    monomial: Optional[LaurentMonomial] = None
    modulus_samples: Optional[Callable[[Any], ModulusSamples]] = None
    distribution: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.radial and not self.radial_modulus:
            object.__setattr__(self, "radial_modulus", True)

    def __call__(self, points: Any) -> np.ndarray:
        pts = as_points(points, self.dimension)
        return np.asarray(self.evaluator(pts), dtype=complex)

    def at(self, z: CPoint) -> complex:
        return complex(self(z)[0])

    def polar_reconstruct(self, points: Any) -> np.ndarray:
        """Evaluate sum_m rho_m(|z|) exp(i m . theta) from ``polar_data``."""
        if self.polar_data is None:
            raise DomainError(f"{self.label} carries no polar data")
        pts = as_points(points, self.dimension)
        moduli, angles = np.abs(pts), np.angle(pts)
        total = np.zeros(len(pts), dtype=complex)
        for term in self.polar_data:
            total += term.profile(moduli) * np.exp(1j * (angles @ np.asarray(term.modes, dtype=float)))
        return total

    def relabel(self, label: str) -> "FunctionHandle":
        return replace(self, label=label)


def constant(value: complex, dimension: int = 1) -> FunctionHandle:
    value = complex(value)

    def evaluate(pts):
        return np.full(len(pts), value, dtype=complex)

    return FunctionHandle(
        evaluate,
        dimension,
        label=f"{value.real:g}" if value.imag == 0 else str(value),
        polar_data=(PolarTerm((0,) * dimension, lambda r: np.full(len(r), value)),),
        radial=True,
        profile=ModulusProfile(0, 0.0, abs(value)),
        monomial=LaurentMonomial((0,) * dimension, value),
    )


def laurent_polynomial(
    terms: Mapping[Tuple[Tuple[int, ...], Tuple[int, ...]], complex],
    dimension: int,
    label: str = "poly",
) -> FunctionHandle:
    """
    f = sum c * z**alpha * conj(z)**beta over ``{(alpha, beta): c}``.

    Negative entries are allowed and are evaluated directly, so the caller
    keeps the points away from the corresponding axes.
    """
    items = [
        (np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float), complex(c))
        for (alpha, beta), c in terms.items()
    ]
    for alpha, beta, _ in items:
        if len(alpha) != dimension or len(beta) != dimension:
            raise DomainError(f"exponent tuples must have length {dimension}")

    def evaluate(pts):
        out = np.zeros(len(pts), dtype=complex)
        conj = np.conj(pts)
        for alpha, beta, c in items:
            out += c * np.prod(pts ** alpha, axis=1) * np.prod(conj ** beta, axis=1)
        return out

    grouped: Dict[Tuple[int, ...], list] = {}
    for alpha, beta, c in items:
        modes = tuple(int(m) for m in alpha - beta)
        grouped.setdefault(modes, []).append((alpha + beta, c))

    def radial_sum(parts):
        return lambda r: sum(c * np.prod(r ** powers, axis=1) for powers, c in parts)

    polar = tuple(PolarTerm(modes, radial_sum(parts)) for modes, parts in grouped.items())
    single = None
    if len(items) == 1 and not items[0][1].any():
        single = LaurentMonomial(tuple(int(a) for a in items[0][0]), items[0][2])
    return FunctionHandle(
        evaluate, dimension, label=label, polar_data=polar,
        radial=all(m == (0,) * dimension for m in grouped), monomial=single,
        radial_modulus=len(items) == 1,
    )


def monomial(exponents: Tuple[int, ...], coefficient: complex = 1.0) -> FunctionHandle:
    exponents = tuple(int(a) for a in exponents)
    handle = laurent_polynomial(
        {(exponents, (0,) * len(exponents)): coefficient}, len(exponents),
        label="z^" + ",".join(str(a) for a in exponents),
    )
    nonzero = [k for k, a in enumerate(exponents) if a != 0]
    if len(nonzero) <= 1:
        k = nonzero[0] if nonzero else 0
        handle = replace(handle, radial_modulus=True, profile=ModulusProfile(k, exponents[k], abs(complex(coefficient))))
    return handle


def modulus_power(
    coordinate: int, power: float, dimension: int, scale: float = 1.0, label: Optional[str] = None,
) -> FunctionHandle:
    """The nonnegative radial function scale * |z_k| ** power."""

    def evaluate(pts):
        return (scale * np.abs(pts[:, coordinate]) ** power).astype(complex)

    return FunctionHandle(
        evaluate, dimension,
        label=label or f"|z{coordinate + 1}|^{power:g}",
        polar_data=(PolarTerm((0,) * dimension, lambda r: scale * r[:, coordinate] ** power),),
        radial=True,
        profile=ModulusProfile(coordinate, power, scale),
    )


def product_handle(*factors: FunctionHandle, label: Optional[str] = None) -> FunctionHandle:
    """f(z) = f_1(z_1) ... f_n(z_n) for one-variable factors."""
    if any(g.dimension != 1 for g in factors):
        raise DomainError("product factors must be functions of one variable")

    def evaluate(pts):
        out = np.ones(len(pts), dtype=complex)
        for k, g in enumerate(factors):
            out *= g.evaluator(pts[:, k:k + 1])
        return out

    polar = None
    if all(g.polar_data is not None for g in factors):
        polar = _product_polar([g.polar_data for g in factors])
    return FunctionHandle(
        evaluate,
        len(factors),
        label=label or " * ".join(g.label for g in factors),
        polar_data=polar,
        factors=tuple(factors),
        singularity=max((g.singularity for g in factors if g.singularity is not None), default=None),
        radial=all(g.radial for g in factors),
        radial_modulus=all(g.radial_modulus for g in factors),
    )


def _product_polar(per_factor) -> Tuple[PolarTerm, ...]:
    terms = [()]
    profiles = [[]]
    for k, polar in enumerate(per_factor):
        terms_next, profiles_next = [], []
        for modes, funcs in zip(terms, profiles):
            for term in polar:
                terms_next.append(modes + term.modes)
                profiles_next.append(funcs + [(k, term.profile)])
        terms, profiles = terms_next, profiles_next

    def combine(funcs):
        return lambda r: np.prod([prof(r[:, k:k + 1]) for k, prof in funcs], axis=0)

    return tuple(PolarTerm(modes, combine(funcs)) for modes, funcs in zip(terms, profiles))


def integrand(
    f: FunctionHandle,
    transform: Callable[[np.ndarray], np.ndarray],
    weight: Optional[FunctionHandle] = None,
    label: Optional[str] = None,
) -> FunctionHandle:
    """The handle transform(|f|) * weight used for norm functionals."""

    def evaluate(pts):
        values = transform(np.abs(f.evaluator(pts)))
        if weight is not None:
            values = values * weight.evaluator(pts).real
        return values.astype(complex)

    radial = f.radial_modulus and (weight is None or weight.radial)
    return FunctionHandle(
        evaluate, f.dimension,
        label=label or f"psi(|{f.label}|)",
        singularity=f.singularity,
        radial=radial,
    )
