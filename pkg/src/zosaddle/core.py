"""Block vectors, seeded randomness, sphere sampling and the noisy value oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

Vector = NDArray[np.float64]


class DimensionError(ValueError):
    """Raised on block-length mismatches or empty blocks."""


class OutOfDomainError(ValueError):
    """Raised when a query point leaves the region the objective is defined on."""


class ConfigurationError(ValueError):
    """Raised on invalid solver / estimator / geometry configuration."""


class SeededRng:
    """Deterministic random stream backed by numpy's PCG64.

    Normal variates come from numpy's ziggurat implementation; the algorithm
    name and seed are echoed into run-log headers so any run is reproducible
    within this implementation.
    """

    algorithm_name = "pcg64"
    normal_transform = "ziggurat"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def standard_normal(self, n: int) -> Vector:
        return self._gen.standard_normal(n)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int) -> int:
        return int(self._gen.integers(low, high))

    def spawn(self) -> "SeededRng":
        """Derive an independent child stream (used for probe evaluations)."""
        child = SeededRng(0)
        child._gen = np.random.Generator(self._gen.bit_generator.jumped())
        return child


@dataclass(frozen=True)
class BlockPoint:
    """A point z = (x, y) of the saddle problem, stored blockwise."""

    x: Vector
    y: Vector

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.ndim != 1 or x.size < 1 or y.size < 1:
            raise DimensionError("x and y must be 1-d with at least one entry")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("BlockPoint entries must be finite")

    @property
    def n_x(self) -> int:
        return self.x.size

    @property
    def n_y(self) -> int:
        return self.y.size

    @property
    def n(self) -> int:
        return self.x.size + self.y.size

    @property
    def z(self) -> Vector:
        return np.concatenate([self.x, self.y])

    @staticmethod
    def from_concat(v: Vector, n_x: int, n_y: int) -> "BlockPoint":
        v = np.asarray(v, dtype=np.float64)
        if v.size != n_x + n_y:
            raise DimensionError(f"expected length {n_x + n_y}, got {v.size}")
        return BlockPoint(v[:n_x].copy(), v[n_x:].copy())

    def shifted(self, direction: Vector, step: float) -> "BlockPoint":
        return BlockPoint.from_concat(self.z + step * direction, self.n_x, self.n_y)


@dataclass(frozen=True)
class Direction:
    """A unit vector on the Euclidean sphere in R^n."""

    e: Vector

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64)
        object.__setattr__(self, "e", e)
        if abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise ValueError("direction must have unit Euclidean norm")

    @property
    def n(self) -> int:
        return self.e.size

    def split(self, n_x: int) -> tuple[Vector, Vector]:
        return self.e[:n_x], self.e[n_x:]


def sample_sphere(rng: SeededRng, n: int) -> Direction:
    """Uniform draw from the Euclidean unit sphere via normalized Gaussians."""
    if n < 1:
        raise DimensionError("sphere dimension must be >= 1")
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return Direction(g / norm)


def flip_y(v: Vector, n_x: int, n_y: int) -> Vector:
    """Negate the y-block of a concatenated vector: (v_x, v_y) -> (v_x, -v_y)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != n_x + n_y:
        raise DimensionError(f"expected length {n_x + n_y}, got {v.size}")
    out = v.copy()
    out[n_x:] = -out[n_x:]
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Additive oracle corruption: zero-mean noise xi plus a bounded bias term.

    ``xi_distribution`` is configurable because the analysis only constrains
    the variance of xi, not its law.
    """

    sigma: float = 0.0
    delta_bound: float = 0.0
    bias_fn: Optional[Callable[[BlockPoint], float]] = None
    xi_distribution: str = "gaussian"  # gaussian | uniform | none

    def __post_init__(self):
        if self.sigma < 0 or self.delta_bound < 0:
            raise ConfigurationError("sigma and delta_bound must be >= 0")
        if self.xi_distribution not in ("gaussian", "uniform", "none"):
            raise ConfigurationError(
                f"unknown xi distribution {self.xi_distribution!r}")

    def draw_xi(self, rng: SeededRng) -> float:
        if self.sigma == 0.0 or self.xi_distribution == "none":
            return 0.0
        if self.xi_distribution == "gaussian":
            return self.sigma * float(rng.standard_normal(1)[0])
        # uniform(-sqrt(3) sigma, sqrt(3) sigma) has variance sigma^2
        half = math.sqrt(3.0) * self.sigma
        return float(rng.uniform(-half, half))

    def bias(self, z: BlockPoint) -> float:
        if self.bias_fn is None:
            return 0.0
        b = float(self.bias_fn(z))
        return b


NOISELESS = NoiseModel(sigma=0.0, delta_bound=0.0, xi_distribution="none")


@dataclass(frozen=True)
class ProblemMetadata:
    """Regularity constants of the objective (absent ones are None)."""

    M: Optional[float] = None        # Lipschitz constant of phi
    L: Optional[float] = None        # Lipschitz constant of grad phi
    mu: float = 0.0                  # strong convexity-concavity modulus
    beta: Optional[float] = None     # Hoelder smoothness order
    L_beta: Optional[float] = None   # Hoelder constant

    def __post_init__(self):
        for name in ("M", "L", "beta", "L_beta"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigurationError(f"metadata constant {name} must be positive")
        if self.mu < 0:
            raise ConfigurationError("mu must be >= 0")


@dataclass(frozen=True)
class ProblemSpec:
    """A saddle objective phi with its block structure and regularity data.

    ``true_grad`` returns the block vector (grad_x phi, -grad_y phi) and exists
    for testing only. ``neighborhood_radius`` is how far outside the feasible
    set phi remains defined; smoothing radii must stay within it.
    """

    n_x: int
    n_y: int
    clean_value: Callable[[BlockPoint], float]
    true_grad: Optional[Callable[[BlockPoint], Vector]] = None
    metadata: ProblemMetadata = field(default_factory=ProblemMetadata)
    neighborhood_radius: float = math.inf

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise DimensionError("n_x and n_y must be >= 1")
        if self.neighborhood_radius <= 0:
            raise ConfigurationError("neighborhood_radius must be > 0")

    @property
    def n(self) -> int:
        return self.n_x + self.n_y

    def value(self, z: BlockPoint) -> float:
        return float(self.clean_value(z))

    def grad(self, z: BlockPoint) -> Vector:
        if self.true_grad is None:
            raise ConfigurationError("problem has no analytic gradient")
        return np.asarray(self.true_grad(z), dtype=np.float64)


class Oracle:
    """Noisy zeroth-order oracle: query(z) = phi(z) + xi + delta(z).

    Owns the per-run call counter. ``domain`` is optional; when present, query
    points further than ``neighborhood_radius`` from the feasible set are
    rejected instead of silently extrapolating.
    """

    def __init__(self, problem: ProblemSpec, noise: NoiseModel, rng: SeededRng,
                 domain=None):
        self.problem = problem
        self.noise = noise
        self.rng = rng
        self.domain = domain
        self.calls = 0

    def query(self, z: BlockPoint) -> float:
        if self.domain is not None and math.isfinite(self.problem.neighborhood_radius):
            dist = self.domain.distance(z)
            if dist > self.problem.neighborhood_radius + 1e-12:
                raise OutOfDomainError(
                    f"query point is {dist:.3g} from the feasible set, beyond "
                    f"the defined neighborhood {self.problem.neighborhood_radius:.3g}")
        self.calls += 1
        return self.problem.value(z) + self.noise.draw_xi(self.rng) + self.noise.bias(z)
