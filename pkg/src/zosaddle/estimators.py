"""One-point gradient estimators and Monte-Carlo smoothing oracles.

All estimators draw the two oracle noises independently (the one-point
regime); a shared-noise two-point mode is deliberately not provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (BlockPoint, ConfigurationError, Direction, Oracle,
                   SeededRng, Vector, flip_y, sample_sphere)
from .kernels import SmoothingKernel


@dataclass(frozen=True)
class GradEstimate:
    g: Vector
    calls_used: int
    direction_used: Direction
    r_used: Optional[float] = None


@dataclass(frozen=True)
class ResidualState:
    """Carries the previous iteration's single noisy query."""

    prev_value: float = math.nan
    initialized: bool = False


def _check_tau(tau: float):
    if tau <= 0:
        raise ConfigurationError("smoothing radius tau must be > 0")


def estimate_standard(oracle: Oracle, z: BlockPoint, tau: float,
                      rng: SeededRng) -> GradEstimate:
    """Central-difference estimator g = (n/2tau)(phi~(z+tau e) - phi~(z-tau e)) (e_x, -e_y)."""
    _check_tau(tau)
    n = z.n
    e = sample_sphere(rng, n)
    plus = oracle.query(z.shifted(e.e, tau))
    minus = oracle.query(z.shifted(e.e, -tau))
    g = (n / (2.0 * tau)) * (plus - minus) * flip_y(e.e, z.n_x, z.n_y)
    return GradEstimate(g=g, calls_used=2, direction_used=e)


def estimate_residual(oracle: Oracle, state: ResidualState, z: BlockPoint,
                      tau: float, rng: SeededRng) -> tuple[GradEstimate, ResidualState]:
    """Residual-feedback estimator: one oracle call, reusing last iteration's query.

    The first call is a warm-up: it spends its single query initializing the
    carried value and reports a zero gradient, keeping the one-call-per-step
    accounting exact.
    """
    _check_tau(tau)
    n = z.n
    e = sample_sphere(rng, n)
    value = oracle.query(z.shifted(e.e, tau))
    if not state.initialized:
        g = np.zeros(n)
    else:
        g = (n / tau) * (value - state.prev_value) * flip_y(e.e, z.n_x, z.n_y)
    return (GradEstimate(g=g, calls_used=1, direction_used=e),
            ResidualState(prev_value=value, initialized=True))


def estimate_kernel(oracle: Oracle, kernel: SmoothingKernel, z: BlockPoint,
                    tau: float, rng: SeededRng) -> GradEstimate:
    """Kernel-smoothed estimator g = (n/2tau)(phi~+ - phi~-)(e_x, -e_y) K(r)."""
    _check_tau(tau)
    n = z.n
    r = float(rng.uniform(-1.0, 1.0))
    e = sample_sphere(rng, n)
    plus = oracle.query(z.shifted(e.e, tau * r))
    minus = oracle.query(z.shifted(e.e, -tau * r))
    g = (n / (2.0 * tau)) * (plus - minus) * flip_y(e.e, z.n_x, z.n_y) * float(kernel(r))
    return GradEstimate(g=g, calls_used=2, direction_used=e, r_used=r)


@dataclass(frozen=True)
class MCValue:
    value: float
    stderr: float


@dataclass(frozen=True)
class MCGrad:
    g: Vector
    stderr: Vector


def smoothed_value_mc(problem, z: BlockPoint, tau: float, m_samples: int,
                      rng: SeededRng) -> MCValue:
    """Monte-Carlo estimate of the sphere-smoothed value E_e[phi(z + tau e)].

    Test-only oracle; reports its standard error so tolerances can be set
    statistically.
    """
    if m_samples < 1:
        raise ConfigurationError("m_samples must be >= 1")
    vals = np.empty(m_samples)
    for i in range(m_samples):
        e = sample_sphere(rng, z.n)
        vals[i] = problem.value(z.shifted(e.e, tau))
    stderr = float(vals.std(ddof=1) / math.sqrt(m_samples)) if m_samples > 1 else math.inf
    return MCValue(value=float(vals.mean()), stderr=stderr)


def smoothed_grad_mc(problem, z: BlockPoint, tau: float, m_samples: int,
                     rng: SeededRng) -> MCGrad:
    """Monte-Carlo estimate of the smoothed-function gradient block vector.

    Averages the noiseless central difference (n/2tau)(phi(z+tau e) -
    phi(z-tau e))(e_x, -e_y), whose expectation is exactly the gradient of
    the smoothed function.
    """
    if m_samples < 1:
        raise ConfigurationError("m_samples must be >= 1")
    n = z.n
    draws = np.empty((m_samples, n))
    for i in range(m_samples):
        e = sample_sphere(rng, n)
        diff = problem.value(z.shifted(e.e, tau)) - problem.value(z.shifted(e.e, -tau))
        draws[i] = (n / (2.0 * tau)) * diff * flip_y(e.e, z.n_x, z.n_y)
    stderr = draws.std(axis=0, ddof=1) / math.sqrt(m_samples) if m_samples > 1 \
        else np.full(n, math.inf)
    return MCGrad(g=draws.mean(axis=0), stderr=stderr)
