"""Benchmark problems: the bilinear matrix game and a quadratic saddle
with a known solution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (BlockPoint, ConfigurationError, DimensionError,
                   ProblemMetadata, ProblemSpec, SeededRng, Vector)
from .geometry import DomainSpec


@dataclass(frozen=True)
class MatrixGame:
    """min over x in Delta_n, max over y in Delta_k of y^T C x."""

    C: np.ndarray
    boosted_row: Optional[int] = None
    boosted_element: Optional[tuple[int, int]] = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=np.float64)
        if C.ndim != 2 or not np.all(np.isfinite(C)):
            raise ConfigurationError("payoff matrix must be a finite 2-d array")
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.C.shape[1]  # x-simplex dimension

    @property
    def k(self) -> int:
        return self.C.shape[0]  # y-simplex dimension

    def value(self, z: BlockPoint) -> float:
        return float(z.y @ self.C @ z.x)

    def grad(self, z: BlockPoint) -> Vector:
        # block vector (grad_x, -grad_y) = (C^T y, -C x)
        return np.concatenate([self.C.T @ z.y, -(self.C @ z.x)])

    def lipschitz_bound(self) -> float:
        # On simplices, C x is a convex combination of columns and C^T y of
        # rows, so the gradient norm is bounded by the worst column/row pair.
        col = float(np.max(np.linalg.norm(self.C, axis=0)))
        row = float(np.max(np.linalg.norm(self.C, axis=1)))
        return math.hypot(col, row)

    def problem(self) -> ProblemSpec:
        return ProblemSpec(
            n_x=self.n, n_y=self.k,
            clean_value=self.value,
            true_grad=self.grad,
            metadata=ProblemMetadata(M=self.lipschitz_bound(),
                                     L=float(np.linalg.norm(self.C, 2))),
            neighborhood_radius=math.inf,
        )

    def domain(self) -> DomainSpec:
        return DomainSpec.simplex_pair(self.n, self.k)

    def checksum(self) -> str:
        return f"{np.abs(self.C).sum():.12e}"


def gen_matrix_game(n: int, k: int, seed: int,
                    normalization: str = "max") -> MatrixGame:
    """Random payoff matrix: Uniform(0,1) entries, one row boosted to
    Uniform(5,10), one element of that row redrawn from Uniform(1,5), then
    the whole matrix normalized.

    The reference normalization divides by the largest absolute entry so
    payoffs land in [0, 1]; ``row_sum`` divides each row by its sum instead.
    """
    if n < 2 or k < 2:
        raise DimensionError("matrix game needs n, k >= 2")
    rng = SeededRng(seed)
    C = rng.uniform(0.0, 1.0, size=(k, n))
    row = rng.integers(0, k)
    C[row, :] = rng.uniform(5.0, 10.0, size=n)
    col = rng.integers(0, n)
    C[row, col] = rng.uniform(1.0, 5.0)
    if normalization == "max":
        C = C / np.max(np.abs(C))
    elif normalization == "row_sum":
        C = C / C.sum(axis=1, keepdims=True)
    else:
        raise ConfigurationError(f"unknown normalization {normalization!r}")
    return MatrixGame(C=C, boosted_row=row, boosted_element=(row, col))


def matgame_gap(game: MatrixGame, x: Vector, y: Vector,
                tol: float = 1e-9) -> float:
    """Exact saddle gap max_{y'} y'^T C x - min_{x'} y^T C x' on the simplices."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    for v, m in ((x, game.n), (y, game.k)):
        if v.size != m:
            raise DimensionError("strategy length mismatch")
        if np.min(v) < -tol or abs(v.sum() - 1.0) > 1e-6:
            raise ValueError("strategy is not a simplex point")
    best_y = float(np.max(game.C @ x))
    best_x = float(np.min(game.C.T @ y))
    return best_y - best_x


def save_matrix(game: MatrixGame, path):
    """Plain-text persistence: first line 'n k', then k rows of n decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{game.n} {game.k}\n")
        for row in game.C:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_matrix(path) -> MatrixGame:
    with open(path, encoding="utf-8") as fh:
        n, k = (int(t) for t in fh.readline().split())
        C = np.array([[float(t) for t in fh.readline().split()]
                      for _ in range(k)])
    if C.shape != (k, n):
        raise ValueError(f"matrix file shape mismatch: {C.shape} vs ({k}, {n})")
    return MatrixGame(C=C)


@dataclass(frozen=True)
class QuadraticSaddle:
    """phi(x, y) = x^T A x / 2 - y^T B y / 2 + x^T D y with SPD A, B.

    The saddle point is the origin (no linear terms), which makes the exact
    optimality error cheap to evaluate.
    """

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    mu: float
    L: float
    domain_spec: DomainSpec
    z_star: BlockPoint = field(init=False)

    def __post_init__(self):
        n_x, n_y = self.A.shape[0], self.B.shape[0]
        if self.D.shape != (n_x, n_y):
            raise DimensionError("coupling matrix shape mismatch")
        # first-order system: A x + D y = 0, B y - D^T x = 0
        KKT = np.block([[self.A, self.D], [-self.D.T, self.B]])
        z = np.linalg.solve(KKT, np.zeros(n_x + n_y))
        object.__setattr__(self, "z_star",
                           BlockPoint(z[:n_x].copy(), z[n_x:].copy()))

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_y(self) -> int:
        return self.B.shape[0]

    def value(self, z: BlockPoint) -> float:
        return float(0.5 * z.x @ self.A @ z.x - 0.5 * z.y @ self.B @ z.y
                     + z.x @ self.D @ z.y)

    def grad(self, z: BlockPoint) -> Vector:
        gx = self.A @ z.x + self.D @ z.y
        gy = -(self.B @ z.y) + self.D.T @ z.x
        return np.concatenate([gx, -gy])

    def gradient_bound(self) -> float:
        """Sup of the gradient norm over the (compact) domain."""
        J = np.block([[self.A, self.D], [self.D.T, -self.B]])
        dom = self.domain_spec
        if dom.kind == "ball2":
            c = np.linalg.norm(J @ dom.center)
            return float(c + np.linalg.norm(J, 2) * dom.radius)
        return float(np.linalg.norm(J, 2) * dom.euclidean_diameter())

    def problem(self) -> ProblemSpec:
        return ProblemSpec(
            n_x=self.n_x, n_y=self.n_y,
            clean_value=self.value,
            true_grad=self.grad,
            metadata=ProblemMetadata(M=self.gradient_bound(), L=self.L,
                                     mu=self.mu, beta=3.0, L_beta=self.L),
            neighborhood_radius=math.inf,
        )


def make_quadratic_saddle(n_x: int, n_y: int, mu: float, L: float, seed: int,
                          coupling_scale: float = 0.5,
                          domain: Optional[DomainSpec] = None) -> QuadraticSaddle:
    """Random SPD blocks with spectra in [mu, L] plus a bounded coupling."""
    if not (0 < mu <= L):
        raise ConfigurationError("need 0 < mu <= L")
    rng = SeededRng(seed)

    def spd(m: int) -> np.ndarray:
        G = rng.standard_normal(m * m).reshape(m, m)
        Q, _ = np.linalg.qr(G)
        eigs = rng.uniform(mu, L, size=m) if m > 1 else np.array([mu])
        eigs[0] = mu
        if m > 1:
            eigs[-1] = L
        return Q @ np.diag(eigs) @ Q.T

    A = spd(n_x)
    B = spd(n_y)
    D = coupling_scale * rng.standard_normal(n_x * n_y).reshape(n_x, n_y)
    if domain is None:
        n = n_x + n_y
        center = np.full(n, 0.5 / math.sqrt(n))
        domain = DomainSpec.ball(center, 1.0, n_x, n_y)
    J = np.block([[A, D], [D.T, -B]])
    L_eff = float(np.linalg.norm(J, 2))
    return QuadraticSaddle(A=A, B=B, D=D, mu=mu, L=max(L_eff, L),
                           domain_spec=domain)


def error_to_solution(saddle: QuadraticSaddle, z_bar: BlockPoint) -> float:
    """phi(x_bar, y*) - phi(x*, y_bar), nonnegative by saddle optimality."""
    zs = saddle.z_star
    return (saddle.value(BlockPoint(z_bar.x, zs.y))
            - saddle.value(BlockPoint(zs.x, z_bar.y)))
