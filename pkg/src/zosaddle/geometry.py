"""Domains, norms, the sphere constant a_q, and the two prox geometries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BlockPoint, ConfigurationError, DimensionError, Vector

ENTROPY_FLOOR = 1e-300  # keeps multiplicative iterates away from absorbing zeros


def dual_norm(v: Vector, q) -> float:
    v = np.asarray(v, dtype=np.float64)
    if q == 2:
        return float(np.linalg.norm(v))
    if q == math.inf:
        return float(np.max(np.abs(v)))
    raise ConfigurationError(f"unsupported dual exponent q={q}")


def a_q_squared(n: int, q) -> float:
    """Upper bound a_q^2 on E[||e||_q^2] for a uniform unit-sphere direction.

    For q=2 the exact value 1 is used (||e||_2 = 1 identically); the generic
    min{2q-1, 32 ln n - 8} n^(2/q-1) bound would give 3 and would needlessly
    inflate every schedule. For q=inf the 2q-1 branch is infinite, leaving
    (32 ln n - 8)/n. Below n=3 the formula is outside its stated range; we
    evaluate it at n=3 and clamp the log factor to >= 1.
    """
    if q == 2:
        return 1.0
    if q == math.inf:
        log_factor = 32.0 * math.log(max(n, 3)) - 8.0
        return max(log_factor, 1.0) / n
    raise ConfigurationError(f"unsupported dual exponent q={q}")


def project_simplex(v: Vector) -> Vector:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=np.float64)
    m = v.size
    if m < 1:
        raise DimensionError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, m + 1)
    cond = u - css / idx > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class DomainSpec:
    """Feasible set Z = X x Y. Kinds:

    - box: per-coordinate bounds lo <= z <= hi,
    - ball2: Euclidean ball around ``center`` with ``radius``,
    - simplex_pair: probability simplices Delta_{n_x} x Delta_{n_y}.
    """

    kind: str
    n_x: int
    n_y: int
    lo: Optional[Vector] = None
    hi: Optional[Vector] = None
    center: Optional[Vector] = None
    radius: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("box", "ball2", "simplex_pair"):
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if self.kind == "box":
            lo = np.asarray(self.lo, dtype=np.float64)
            hi = np.asarray(self.hi, dtype=np.float64)
            if lo.size != self.n or hi.size != self.n or np.any(lo > hi):
                raise ConfigurationError("invalid box bounds")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball2":
            center = np.asarray(self.center, dtype=np.float64)
            if center.size != self.n or self.radius is None or self.radius <= 0:
                raise ConfigurationError("invalid ball specification")
            object.__setattr__(self, "center", center)

    @property
    def n(self) -> int:
        return self.n_x + self.n_y

    @staticmethod
    def box(lo, hi, n_x: int, n_y: int) -> "DomainSpec":
        return DomainSpec("box", n_x, n_y, lo=np.asarray(lo, dtype=np.float64),
                          hi=np.asarray(hi, dtype=np.float64))

    @staticmethod
    def ball(center, radius: float, n_x: int, n_y: int) -> "DomainSpec":
        return DomainSpec("ball2", n_x, n_y,
                          center=np.asarray(center, dtype=np.float64),
                          radius=float(radius))

    @staticmethod
    def simplex_pair(n_x: int, n_y: int) -> "DomainSpec":
        return DomainSpec("simplex_pair", n_x, n_y)

    def project(self, v: Vector) -> Vector:
        v = np.asarray(v, dtype=np.float64)
        if v.size != self.n:
            raise DimensionError(f"expected length {self.n}, got {v.size}")
        if self.kind == "box":
            return np.clip(v, self.lo, self.hi)
        if self.kind == "ball2":
            d = v - self.center
            norm = np.linalg.norm(d)
            if norm <= self.radius:
                return v.copy()
            return self.center + d * (self.radius / norm)
        x = project_simplex(v[:self.n_x])
        y = project_simplex(v[self.n_x:])
        return np.concatenate([x, y])

    def contains(self, z: BlockPoint, tol: float = 1e-9) -> bool:
        return self.distance(z) <= tol

    def distance(self, z: BlockPoint) -> float:
        v = z.z
        return float(np.linalg.norm(v - self.project(v)))

    def start_point(self) -> BlockPoint:
        """Canonical initial iterate: simplex barycenter, box/ball center."""
        if self.kind == "box":
            mid = 0.5 * (self.lo + self.hi)
            return BlockPoint.from_concat(mid, self.n_x, self.n_y)
        if self.kind == "ball2":
            return BlockPoint.from_concat(self.center.copy(), self.n_x, self.n_y)
        return BlockPoint(np.full(self.n_x, 1.0 / self.n_x),
                          np.full(self.n_y, 1.0 / self.n_y))

    def euclidean_diameter(self) -> float:
        if self.kind == "box":
            return float(np.linalg.norm(self.hi - self.lo))
        if self.kind == "ball2":
            return 2.0 * self.radius
        # diameter of Delta_m is sqrt(2); the product combines in quadrature
        return math.sqrt(2.0 + 2.0)


@dataclass(frozen=True)
class GeometrySetup:
    """A prox geometry: norm pair (p, q), Bregman diameter and a_q constant."""

    kind: str  # euclidean | entropy_simplex_pair
    p: float
    q: float
    domain: DomainSpec
    omega: float
    a_q_sq: float

    @staticmethod
    def euclidean(domain: DomainSpec) -> "GeometrySetup":
        omega = bregman_diameter("euclidean", domain)
        return GeometrySetup("euclidean", 2.0, 2.0, domain, omega,
                             a_q_squared(domain.n, 2))

    @staticmethod
    def entropy_simplex_pair(domain: DomainSpec) -> "GeometrySetup":
        if domain.kind != "simplex_pair":
            raise ConfigurationError("entropy geometry needs a simplex-pair domain")
        omega = bregman_diameter("entropy_simplex_pair", domain)
        return GeometrySetup("entropy_simplex_pair", 1.0, math.inf, domain,
                             omega, a_q_squared(domain.n, math.inf))


def bregman_diameter(kind: str, domain: DomainSpec) -> float:
    """Bregman diameter Omega of the domain under the given prox geometry."""
    if kind == "euclidean":
        d = domain.euclidean_diameter()
        if not math.isfinite(d):
            raise ConfigurationError("unbounded domain has no Bregman diameter")
        return d
    if kind == "entropy_simplex_pair":
        if domain.kind != "simplex_pair":
            raise ConfigurationError("entropy diameter needs a simplex-pair domain")
        return math.sqrt(2.0 * math.log(domain.n_x) + 2.0 * math.log(domain.n_y))
    raise ConfigurationError(f"unknown geometry kind {kind!r}")


def _entropic_block_update(x: Vector, g: Vector, gamma: float) -> Vector:
    # multiplicative-weights step in log-space so large exponents never overflow
    logits = np.log(np.maximum(x, ENTROPY_FLOOR)) - gamma * g
    logits -= np.max(logits)
    w = np.exp(logits)
    w = np.maximum(w, ENTROPY_FLOOR)
    return w / np.sum(w)


def prox_step(geometry: GeometrySetup, z: BlockPoint, g: Vector,
              gamma: float) -> BlockPoint:
    """One mirror step from z along the estimator output g with stepsize gamma.

    The y-block sign flip is already inside g, so both blocks move in the
    minus-gradient direction.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.size != z.n:
        raise DimensionError(f"gradient length {g.size} != point length {z.n}")
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient estimate must be finite")
    if not geometry.domain.contains(z, tol=1e-7):
        raise ConfigurationError("prox_step called at an infeasible point")
    if geometry.kind == "euclidean":
        return BlockPoint.from_concat(geometry.domain.project(z.z - gamma * g),
                                      z.n_x, z.n_y)
    x_new = _entropic_block_update(z.x, g[:z.n_x], gamma)
    y_new = _entropic_block_update(z.y, g[z.n_x:], gamma)
    return BlockPoint(x_new, y_new)
