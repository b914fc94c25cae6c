"""
Model domains and the integration machinery built on them.

Every domain here is Reinhardt, so integrals are taken in polar coordinates:
composite Gauss-Legendre nodes in each radius (weighted by r dr) times
equispaced angles. The Hartogs triangle is integrated on the bidisc through
the chart (u, z2) -> (u z2, z2), whose Jacobian is |z2|^2.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from .config import settings
from .errors import DomainError, NonFiniteValueError
from .parallel import parallel_map

if TYPE_CHECKING:
    from .functions import FunctionHandle

logger = logging.getLogger(__name__)

# Each graded panel spans one decade toward its endpoint.
GRADING_RATIO = 0.1
# Edge grading switches on once a function flags s at or beyond this value.
NEAR_BOUNDARY_THRESHOLD = 0.9
# Three successive refinements growing by this factor mark a divergent integral.
DIVERGENCE_GROWTH = 3.0
DIVERGENCE_STEPS = 3
SAMPLE_CHUNK = 1 << 16
# 0.1 ** k stays a normal double up to k = 307.
MAX_ORIGIN_LEVELS = 300


class DomainKind(str, Enum):
    UNIT_DISC = "disc"
    POLYDISC = "polydisc"
    PUNCTURED_DISC = "punctured-disc"
    HARTOGS = "hartogs"


@dataclass(frozen=True)
class DomainSpec:
    """One of the model domains together with its complex dimension."""
    kind: DomainKind
    dimension: int

    def __post_init__(self):
        fixed = {
            DomainKind.UNIT_DISC: 1,
            DomainKind.PUNCTURED_DISC: 1,
            DomainKind.HARTOGS: 2,
        }
        if self.dimension < 1:
            raise DomainError(f"dimension must be positive, got {self.dimension}")
        if self.kind in fixed and self.dimension != fixed[self.kind]:
            raise DomainError(
                f"{self.kind.value} has dimension {fixed[self.kind]}, got {self.dimension}"
            )

    @classmethod
    def disc(cls) -> "DomainSpec":
        return cls(DomainKind.UNIT_DISC, 1)

    @classmethod
    def polydisc(cls, n: int = 2) -> "DomainSpec":
        return cls(DomainKind.POLYDISC, n)

    @classmethod
    def punctured_disc(cls) -> "DomainSpec":
        return cls(DomainKind.PUNCTURED_DISC, 1)

    @classmethod
    def hartogs(cls) -> "DomainSpec":
        return cls(DomainKind.HARTOGS, 2)

    @classmethod
    def parse(cls, name: str) -> "DomainSpec":
        key = name.strip().lower()
        if key in ("disc", "unit-disc"):
            return cls.disc()
        if key in ("punctured-disc", "punctured"):
            return cls.punctured_disc()
        if key in ("hartogs", "hartogs-triangle"):
            return cls.hartogs()
        if key == "bidisc":
            return cls.polydisc(2)
        if key.startswith("polydisc"):
            suffix = key[len("polydisc"):].strip("()")
            return cls.polydisc(int(suffix) if suffix else 2)
        raise DomainError(f"unknown domain {name!r}")

    @property
    def is_hartogs(self) -> bool:
        return self.kind == DomainKind.HARTOGS

    @property
    def is_disc_like(self) -> bool:
        """True for the disc and the punctured disc, which share one Bergman space."""
        return self.kind in (DomainKind.UNIT_DISC, DomainKind.PUNCTURED_DISC)

    def __str__(self) -> str:
        if self.kind == DomainKind.POLYDISC:
            return f"polydisc{self.dimension}"
        return self.kind.value


UNIT_DISC = DomainSpec.disc()
BIDISC = DomainSpec.polydisc(2)
PUNCTURED_DISC = DomainSpec.punctured_disc()
HARTOGS_TRIANGLE = DomainSpec.hartogs()


@dataclass(frozen=True)
class CPoint:
    """A point of C^n stored as a tuple of complex coordinates."""
    coords: Tuple[complex, ...]

    def __post_init__(self):
        coords = tuple(complex(c) for c in self.coords)
        if not coords:
            raise DomainError("a point needs at least one coordinate")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coords):
            raise DomainError(f"non-finite coordinate in {coords}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords: complex) -> "CPoint":
        return cls(tuple(coords))

    @classmethod
    def parse(cls, text: str) -> "CPoint":
        """Parse ``"0.3+0.1j,0.5"`` style input."""
        try:
            return cls(tuple(complex(part.strip().replace(" ", "")) for part in text.split(",")))
        except ValueError as e:
            raise DomainError(f"cannot parse point {text!r}: {e}") from e

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __getitem__(self, k: int) -> complex:
        return self.coords[k]

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)


def as_points(z: Any, dimension: Optional[int] = None) -> np.ndarray:
    """Normalize a CPoint, a list of CPoints or an array into shape (n, d)."""
    if isinstance(z, CPoint):
        arr = z.as_array()[None, :]
    elif isinstance(z, (list, tuple)) and z and all(isinstance(p, CPoint) for p in z):
        arr = np.array([p.coords for p in z], dtype=complex)
    else:
        arr = np.asarray(z, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1) if dimension == 1 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DomainError(f"points must form a 2-D array, got shape {arr.shape}")
    if dimension is not None and arr.shape[1] != dimension:
        raise DomainError(f"expected points of dimension {dimension}, got {arr.shape[1]}")
    return arr


def contains_points(domain: DomainSpec, points: Any) -> np.ndarray:
    """Vectorized membership test; returns a boolean array."""
    pts = as_points(points, domain.dimension)
    mod = np.abs(pts)
    if domain.kind == DomainKind.UNIT_DISC:
        return mod[:, 0] < 1.0
    if domain.kind == DomainKind.PUNCTURED_DISC:
        return (mod[:, 0] > 0.0) & (mod[:, 0] < 1.0)
    if domain.kind == DomainKind.POLYDISC:
        return np.max(mod, axis=1) < 1.0
    return (mod[:, 0] < mod[:, 1]) & (mod[:, 1] < 1.0)


def contains(domain: DomainSpec, z: CPoint) -> bool:
    if z.dimension != domain.dimension:
        raise DomainError(f"point of dimension {z.dimension} used with {domain}")
    return bool(contains_points(domain, z)[0])


def require_inside(domain: DomainSpec, points: Any, what: str = "point") -> np.ndarray:
    pts = as_points(points, domain.dimension)
    inside = contains_points(domain, pts)
    if not inside.all():
        bad = pts[int(np.argmin(inside))]
        raise DomainError(f"{what} {tuple(bad)} is not interior to {domain}")
    return pts


def volume(domain: DomainSpec) -> float:
    if domain.is_disc_like:
        return math.pi
    if domain.kind == DomainKind.POLYDISC:
        return math.pi ** domain.dimension
    return math.pi ** 2 / 2


def coordinate_ball_measure(domain: DomainSpec, k: int, rho: Any) -> np.ndarray:
    """Lebesgue measure of {z in domain : |z_k| < rho} (k is 0-based)."""
    rho = np.clip(np.asarray(rho, dtype=float), 0.0, 1.0)
    if not 0 <= k < domain.dimension:
        raise DomainError(f"coordinate {k} out of range for {domain}")
    if domain.is_disc_like:
        return math.pi * rho ** 2
    if domain.kind == DomainKind.POLYDISC:
        return math.pi ** domain.dimension * rho ** 2
    if k == 1:
        return math.pi ** 2 * rho ** 4 / 2
    return math.pi ** 2 * (rho ** 2 - rho ** 4 / 2)


def lens_area(distance: float, r1: float, r2: Any) -> np.ndarray:
    """Area of the intersection of two discs of radii r1, r2 whose centers are ``distance`` apart."""
    d = float(distance)
    r2 = np.asarray(r2, dtype=float)
    small = np.minimum(r1, r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = np.clip((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0)
        c2 = np.clip((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0)
        kite = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)
        partial = r1 * r1 * np.arccos(c1) + r2 * r2 * np.arccos(c2) - 0.5 * np.sqrt(np.maximum(kite, 0.0))
    return np.where(
        d >= r1 + r2, 0.0,
        np.where(d + small <= np.maximum(r1, r2), math.pi * small ** 2, partial),
    )


def radial_rule(order: int, origin_levels: int = 0, edge_levels: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on (0, 1) whose weights integrate against r dr."""
    if order < 1:
        raise DomainError(f"radial order must be at least 1, got {order}")
    breaks = {0.0, 1.0}
    breaks.update(GRADING_RATIO ** k for k in range(1, origin_levels + 1))
    breaks.update(1.0 - GRADING_RATIO ** k for k in range(1, edge_levels + 1))
    edges = np.array(sorted(breaks))
    x, w = roots_legendre(order)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel() * nodes
    return nodes, weights


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Tensor polar rule on a model domain.

    ``angular_order`` is the highest angular frequency resolved exactly; the
    rule uses 2 * (angular_order + 1) equispaced angles per coordinate.
    ``origin_levels`` and ``edge_levels`` hold the number of graded panels
    per coordinate toward r = 0 and r = 1.
    """
    domain: DomainSpec
    radial_order: int
    angular_order: int
    origin_levels: Tuple[int, ...]
    edge_levels: Tuple[int, ...]

    def __post_init__(self):
        if self.radial_order < 1 or self.angular_order < 1:
            raise DomainError("quadrature orders must be at least 1")
        d = self.domain.dimension
        if len(self.origin_levels) != d or len(self.edge_levels) != d:
            raise DomainError(f"grading levels must have one entry per coordinate ({d})")

    @cached_property
    def radial(self) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
        return tuple(
            radial_rule(self.radial_order, o, e)
            for o, e in zip(self.origin_levels, self.edge_levels)
        )

    @property
    def angular_count(self) -> int:
        return 2 * (self.angular_order + 1)

    @property
    def angular_weight(self) -> float:
        return 2 * math.pi / self.angular_count

    @cached_property
    def angles(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.angular_count) / self.angular_count

    @cached_property
    def _full(self) -> Tuple[np.ndarray, np.ndarray]:
        phase = np.exp(1j * self.angles)
        coords, weights = [], []
        for radii, rweights in self.radial:
            coords.append((radii[:, None] * phase[None, :]).ravel())
            weights.append(np.repeat(rweights, self.angular_count) * self.angular_weight)
        return self._assemble(coords, weights)

    @cached_property
    def _radial_only(self) -> Tuple[np.ndarray, np.ndarray]:
        coords = [radii.astype(complex) for radii, _ in self.radial]
        weights = [rweights * 2 * math.pi for _, rweights in self.radial]
        return self._assemble(coords, weights)

    def _assemble(self, coords: List[np.ndarray], weights: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        grids = np.meshgrid(*coords, indexing="ij")
        wgrids = np.meshgrid(*weights, indexing="ij")
        nodes = np.column_stack([g.ravel() for g in grids])
        w = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)
        if self.domain.is_hartogs:
            u, z2 = nodes[:, 0], nodes[:, 1]
            nodes = np.column_stack([u * z2, z2])
            w = w * np.abs(z2) ** 2
        return nodes, w

    @property
    def nodes(self) -> np.ndarray:
        return self._full[0]

    @property
    def weights(self) -> np.ndarray:
        return self._full[1]

    def radial_tensor(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes at angle zero with the full angular measure folded into the weights."""
        return self._radial_only

    def factor(self, k: int = 0) -> "QuadratureRule":
        """The one-variable disc rule carried by coordinate ``k``."""
        return QuadratureRule(
            UNIT_DISC, self.radial_order, self.angular_order,
            (self.origin_levels[k],), (self.edge_levels[k],),
        )

    def coarsened(self) -> "QuadratureRule":
        return QuadratureRule(
            self.domain,
            max(1, (self.radial_order + 1) // 2),
            max(1, self.angular_order // 2),
            self.origin_levels,
            self.edge_levels,
        )

    def refined(self, level: int) -> "QuadratureRule":
        """Deepen origin grading fourfold per level on coordinates that are graded."""
        if level == 0:
            return self
        origin = tuple(min(o * 4 ** level, MAX_ORIGIN_LEVELS) if o > 0 else 0 for o in self.origin_levels)
        return QuadratureRule(self.domain, self.radial_order, self.angular_order, origin, self.edge_levels)

    def with_edge_levels(self, levels: int) -> "QuadratureRule":
        return QuadratureRule(
            self.domain, self.radial_order, self.angular_order,
            self.origin_levels, (levels,) * self.domain.dimension,
        )


def quadrature_rule(
    domain: DomainSpec,
    radial_order: Optional[int] = None,
    angular_order: Optional[int] = None,
    *,
    origin_levels: Optional[int] = None,
    edge_levels: Optional[int] = None,
    singularity: Optional[float] = None,
) -> QuadratureRule:
    """
    Build the polar tensor rule for ``domain``.

    Origin grading applies to the coordinates that can approach a singular
    axis: z2 on the Hartogs triangle and the punctured disc's coordinate by
    default, every coordinate when ``origin_levels`` is given explicitly.
    Edge grading switches on for ``singularity >= 0.9``.
    """
    radial_order = radial_order or settings.radial_order
    angular_order = angular_order or settings.angular_order
    d = domain.dimension
    if origin_levels is None:
        if domain.is_hartogs:
            origin = (0, settings.origin_levels)
        elif domain.kind == DomainKind.PUNCTURED_DISC:
            origin = (settings.origin_levels,)
        else:
            origin = (0,) * d
    elif domain.is_hartogs:
        origin = (0, origin_levels)
    else:
        origin = (origin_levels,) * d
    if edge_levels is None:
        near = singularity is not None and singularity >= NEAR_BOUNDARY_THRESHOLD
        edge_levels = settings.edge_levels if near else 0
    return QuadratureRule(domain, radial_order, angular_order, origin, (edge_levels,) * d)


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    error: float


@dataclass(frozen=True)
class RefinementResult:
    """Estimates of one integral along successively refined rules."""
    estimates: Tuple[complex, ...]
    diverged: bool

    @property
    def value(self) -> complex:
        return self.estimates[-1]

    @property
    def change(self) -> float:
        if len(self.estimates) < 2:
            return 0.0
        last, prev = self.estimates[-1], self.estimates[-2]
        if not np.isfinite(last):
            return math.inf
        return abs(last - prev) / max(abs(last), 1e-300)


def compensated_sum(values: np.ndarray) -> complex:
    """Exactly rounded sum, independent of evaluation order."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return complex(math.fsum(values), 0.0)


def evaluate_finite(f: "FunctionHandle", nodes: np.ndarray) -> np.ndarray:
    values = f(nodes)
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteValueError(tuple(nodes[i]), values[i])
    return values


def _weighted_sum(f: "FunctionHandle", rule: QuadratureRule) -> complex:
    domain = rule.domain
    if f.factors is not None and domain.kind == DomainKind.POLYDISC and len(f.factors) == domain.dimension:
        return math.prod(_weighted_sum(g, rule.factor(k)) for k, g in enumerate(f.factors))
    nodes, weights = rule.radial_tensor() if f.radial else (rule.nodes, rule.weights)
    return compensated_sum(weights * evaluate_finite(f, nodes))


def integrate(f: "FunctionHandle", rule: QuadratureRule, estimate_error: bool = True) -> IntegralResult:
    """
    Integrate ``f`` over ``rule.domain``.

    The error estimate is the change against the rule with both orders halved.
    """
    value = _weighted_sum(f, rule)
    error = abs(value - _weighted_sum(f, rule.coarsened())) if estimate_error else 0.0
    return IntegralResult(value, error)


def integrate_refined(f: "FunctionHandle", rule: QuadratureRule, levels: Optional[int] = None) -> RefinementResult:
    """Integrate along ``rule.refined(0..levels)`` and test for divergence."""
    levels = settings.refinement_levels if levels is None else levels
    estimates: List[complex] = [_weighted_sum(f, rule)]
    for level in range(1, levels + 1):
        try:
            estimates.append(_weighted_sum(f, rule.refined(level)))
        except NonFiniteValueError as e:
            logger.debug("refinement level %d hit a non-finite value: %s", level, e)
            estimates.append(complex(math.inf))
            break
    return RefinementResult(tuple(estimates), _is_divergent(estimates))


def _is_divergent(estimates: Sequence[complex]) -> bool:
    if not np.isfinite(estimates[-1]):
        return True
    if len(estimates) <= DIVERGENCE_STEPS:
        return False
    tail = [abs(v) for v in estimates[-(DIVERGENCE_STEPS + 1):]]
    return all(b >= DIVERGENCE_GROWTH * a > 0 for a, b in zip(tail[:-1], tail[1:]))


@dataclass(frozen=True, eq=False)
class SampleCloud:
    points: np.ndarray
    seed: int
    count: int
    domain: DomainSpec


def _uniform_disc(rng: np.random.Generator, size: int, punctured: bool) -> np.ndarray:
    low = np.finfo(float).tiny if punctured else 0.0
    radius = np.sqrt(rng.uniform(low, 1.0, size))
    return radius * np.exp(2j * math.pi * rng.random(size))


def _sample_chunk(domain: DomainSpec, seed_seq: np.random.SeedSequence, size: int) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    if domain.is_hartogs:
        u = _uniform_disc(rng, size, punctured=False)
        # |z2| has density proportional to r^3 on (0, 1)
        r2 = rng.uniform(np.finfo(float).tiny, 1.0, size) ** 0.25
        z2 = r2 * np.exp(2j * math.pi * rng.random(size))
        return np.column_stack([u * z2, z2])
    punctured = domain.kind == DomainKind.PUNCTURED_DISC
    return np.column_stack([_uniform_disc(rng, size, punctured) for _ in range(domain.dimension)])


def sample(domain: DomainSpec, count: int, seed: Optional[int] = None) -> SampleCloud:
    """
    Draw ``count`` points uniformly from ``domain``.

    The seed is spawned into one child stream per fixed-size chunk, so the
    cloud does not depend on the thread count.
    """
    if count < 1:
        raise DomainError(f"sample count must be at least 1, got {count}")
    seed = settings.seed if seed is None else seed
    sizes = [SAMPLE_CHUNK] * (count // SAMPLE_CHUNK)
    if count % SAMPLE_CHUNK:
        sizes.append(count % SAMPLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    chunks = parallel_map(lambda job: _sample_chunk(domain, *job), list(zip(children, sizes)))
    return SampleCloud(np.concatenate(chunks, axis=0), seed, count, domain)
