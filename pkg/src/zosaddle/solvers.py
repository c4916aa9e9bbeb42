"""Mirror-descent and projected-gradient zeroth-order solvers with the
theorem-prescribed step schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (BlockPoint, ConfigurationError, NoiseModel, Oracle,
                   ProblemMetadata, ProblemSpec, SeededRng, Vector)
from .estimators import (ResidualState, estimate_kernel, estimate_residual,
                         estimate_standard)
from .geometry import DomainSpec, GeometrySetup, prox_step
from .kernels import SmoothingKernel

GapFn = Callable[[BlockPoint], float]


@dataclass(frozen=True)
class StepSchedule:
    """Per-iteration stepsize gamma_k and smoothing radius tau_k."""

    kind: str
    gamma: Callable[[int], float]
    tau: Callable[[int], float]
    description: str = ""

    def validate(self, ks) -> None:
        for k in ks:
            if self.gamma(k) <= 0 or self.tau(k) <= 0:
                raise ConfigurationError(
                    f"schedule produced non-positive gamma/tau at k={k}")


def constant_schedule(gamma: float, tau: float) -> StepSchedule:
    if gamma <= 0 or tau <= 0:
        raise ConfigurationError("constant schedule needs gamma, tau > 0")
    return StepSchedule("constant", lambda k: gamma, lambda k: tau,
                        f"constant gamma={gamma:g} tau={tau:g}")


def _require(params: dict, *names):
    for name in names:
        v = params.get(name)
        if v is None or (isinstance(v, (int, float)) and v <= 0):
            raise ConfigurationError(
                f"schedule requires positive constant {name!r}")


def derive_schedule(case: str, *, n: int = 0, q: float = 2.0,
                    M: float = 0.0, L: float = 0.0, mu: float = 0.0,
                    sigma: float = 0.0, omega: float = 0.0, N: int = 0,
                    kernel: Optional[SmoothingKernel] = None,
                    theta_gamma: float = 1.0,
                    theta_tau: float = 1.0) -> StepSchedule:
    """Build the corollary-prescribed schedule with order constants set to 1.

    ``theta_gamma`` / ``theta_tau`` are the exposed multipliers the harness
    grid-searches, since the theory fixes only the orders.
    """
    p = dict(n=n, q=q, M=M, L=L, mu=mu, sigma=sigma, omega=omega, N=N)
    if case == "nonsmooth_cc":
        _require(p, "n", "M", "sigma", "omega", "N")
        expo = 0.25 + 0.5 / q
        gamma = theta_gamma * omega / (n ** expo * M * N ** 0.75)
        tau = theta_tau * (sigma / M) * n ** expo / N ** 0.25
        return constant_schedule(gamma, tau)
    if case == "nonsmooth_scsc":
        _require(p, "n", "M", "mu", "sigma", "N")
        tau = theta_tau * (sigma ** 2 / (mu * M)) ** (1 / 3) * (n ** 2 / N) ** (1 / 3)
        # shifted index keeps the k=0 step finite; 1/(mu k) would diverge
        return StepSchedule("inv_mu_k",
                            lambda k: theta_gamma / (mu * (k + 1)),
                            lambda k: tau,
                            f"gamma_k=1/(mu(k+1)) tau={tau:g}")
    if case == "residual_cc":
        _require(p, "n", "M", "sigma", "omega", "N")
        tau = theta_tau * (sigma / M) * math.sqrt(n) / N ** 0.25
        gamma = theta_gamma * omega * tau / (6.0 * n * M * math.sqrt(N))
        return constant_schedule(gamma, tau)
    if case == "smooth_cc":
        _require(p, "n", "M", "sigma", "omega", "N")
        gexpo = 1 / 3 + 2 / (3 * q)
        texpo = 1 / 6 + 1 / (3 * q)
        gamma = theta_gamma * omega / (n ** gexpo * M * N ** (2 / 3))
        tau = theta_tau * (sigma / M) * n ** texpo / N ** (1 / 6)
        return constant_schedule(gamma, tau)
    if case == "smooth_scsc":
        _require(p, "n", "M", "mu", "L", "sigma", "N")
        tau = theta_tau * (sigma ** 2 / (mu * L)) ** 0.25 * math.sqrt(n) / N ** 0.25
        return StepSchedule("inv_mu_k",
                            lambda k: theta_gamma / (mu * (k + 1)),
                            lambda k: tau,
                            f"gamma_k=1/(mu(k+1)) tau={tau:g}")
    if case == "kernel_scsc":
        _require(p, "n", "mu", "L", "sigma")
        if kernel is None:
            raise ConfigurationError("kernel_scsc schedule needs a kernel")
        return kernel_thm_schedule(kernel, n=n, mu=mu, L=L, sigma=sigma,
                                   theta_gamma=theta_gamma, theta_tau=theta_tau)
    raise ConfigurationError(f"unknown schedule case {case!r}")


def kernel_thm_schedule(kernel: SmoothingKernel, *, n: int, mu: float,
                        L: float, sigma: float, theta_gamma: float = 1.0,
                        theta_tau: float = 1.0) -> StepSchedule:
    """gamma_k = 2/(mu k), tau_k = (3 kappa sigma^2 n / (2(beta-1)(kappa_beta L)^2))^(1/2beta) k^(-1/2beta)."""
    beta = kernel.beta
    base = (3.0 * kernel.kappa * sigma ** 2 * n
            / (2.0 * (beta - 1.0) * (kernel.kappa_beta * L) ** 2)) ** (1.0 / (2 * beta))
    base *= theta_tau
    return StepSchedule(
        "kernel_scsc",
        lambda k: theta_gamma * 2.0 / (mu * k),
        lambda k: base * k ** (-1.0 / (2 * beta)),
        f"gamma_k=2/(mu k), tau_k={base:g} k^(-1/{2 * beta:g})")


def theorem_envelope_kernel(*, n: int, beta: float, kappa: float,
                            kappa_beta: float, L: float, sigma: float,
                            mu: float, G: float, N: int) -> float:
    """Guaranteed mean-error bound for the kernel solver after N steps.

    The constant G in the second term is the Lipschitz bound M of the
    objective (the proof's second-moment step uses M).
    """
    A1 = 3.0 * beta * (kappa * sigma ** 2) ** ((beta - 1) / beta) \
        * (kappa_beta * L) ** (2 / beta)
    A2 = 9.0 * kappa * G ** 2
    return (n ** (2 - 1 / beta) * A1 / N ** ((beta - 1) / beta)
            + A2 * n * (1 + math.log(N)) / N) / mu


@dataclass
class LogRow:
    k: int
    oracle_calls: int
    gap: float
    f_value: float
    gamma_k: float
    tau_k: float
    avg_checksum: float = math.nan


@dataclass
class RunLog:
    """Per-iteration record stream serialized as '#'-prefixed-header CSV."""

    header: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    COLUMNS = ("k", "oracle_calls", "gap", "f_value", "gamma_k", "tau_k")

    def add(self, row: LogRow):
        if self.rows:
            last = self.rows[-1]
            if row.oracle_calls <= last.oracle_calls or row.k <= last.k:
                raise ValueError("log rows must advance in k and oracle_calls")
        self.rows.append(row)

    def to_csv_string(self) -> str:
        lines = [f"# {key} = {value}" for key, value in self.header.items()]
        lines.append(",".join(self.COLUMNS))
        for r in self.rows:
            lines.append(f"{r.k},{r.oracle_calls},{r.gap:.12g},"
                         f"{r.f_value:.12g},{r.gamma_k:.12g},{r.tau_k:.12g}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_string())

    def final_gap(self) -> float:
        return self.rows[-1].gap if self.rows else math.nan


class _RunningAverage:
    def __init__(self, n: int):
        self.total = np.zeros(n)
        self.count = 0

    def add(self, z: BlockPoint):
        self.total += z.z
        self.count += 1

    def mean(self, n_x: int, n_y: int) -> BlockPoint:
        return BlockPoint.from_concat(self.total / self.count, n_x, n_y)


def _base_header(problem: ProblemSpec, noise: NoiseModel, seed: int,
                 method: str, schedule: StepSchedule,
                 extra: Optional[dict]) -> dict:
    header = {
        "method": method,
        "seed": seed,
        "rng": f"{SeededRng.algorithm_name}/{SeededRng.normal_transform}",
        "n_x": problem.n_x,
        "n_y": problem.n_y,
        "sigma": f"{noise.sigma:g}",
        "delta_bound": f"{noise.delta_bound:g}",
        "schedule": schedule.description,
    }
    if extra:
        header.update(extra)
    return header


def _validate_neighborhood(problem: ProblemSpec, max_tau: float):
    if max_tau > problem.neighborhood_radius:
        raise ConfigurationError(
            f"smoothing radius {max_tau:g} exceeds the objective's defined "
            f"neighborhood {problem.neighborhood_radius:g}")


def run_zoopmd(problem: ProblemSpec, noise: NoiseModel,
               geometry: GeometrySetup, estimator_kind: str,
               schedule: StepSchedule, N: int, seed: int,
               gap_fn: Optional[GapFn] = None, log_every: int = 1,
               extra_header: Optional[dict] = None) -> tuple[RunLog, BlockPoint]:
    """Zeroth-order mirror descent: N+1 estimator+prox steps, output the
    average of iterates z_0 .. z_N."""
    if estimator_kind not in ("standard", "residual"):
        raise ConfigurationError(f"unknown estimator kind {estimator_kind!r}")
    if estimator_kind == "residual" and geometry.kind != "euclidean":
        raise ConfigurationError(
            "residual feedback is only analyzed in the Euclidean setup")
    schedule.validate([0, N])
    _validate_neighborhood(problem, max(schedule.tau(0), schedule.tau(N)))
    M = problem.metadata.M
    if estimator_kind == "residual" and M is not None:
        g0, t0 = schedule.gamma(0), schedule.tau(0)
        alpha = 6.0 * g0 ** 2 * problem.n ** 2 * M ** 2 / t0 ** 2
        if alpha >= 1.0:
            raise ConfigurationError(
                f"residual feedback requires alpha = 6 gamma^2 n^2 M^2 / tau^2 "
                f"< 1, got {alpha:.3g}")

    rng = SeededRng(seed)
    oracle = Oracle(problem, noise, rng, domain=geometry.domain)
    log = RunLog(header=_base_header(problem, noise, seed,
                                     f"zoopmd-{estimator_kind}", schedule,
                                     extra_header))
    log.header["geometry"] = geometry.kind
    log.header["a_q_sq"] = f"{geometry.a_q_sq:g}"

    z = geometry.domain.start_point()
    avg = _RunningAverage(problem.n)
    state = ResidualState()
    if estimator_kind == "residual":
        # warm-up query at the start point so that every iteration, including
        # k = 0, produces a genuine residual gradient from one oracle call
        _, state = estimate_residual(oracle, state, z, schedule.tau(0), rng)
    for k in range(N + 1):
        avg.add(z)
        gamma_k, tau_k = schedule.gamma(k), schedule.tau(k)
        if estimator_kind == "standard":
            est = estimate_standard(oracle, z, tau_k, rng)
        else:
            est, state = estimate_residual(oracle, state, z, tau_k, rng)
        z = prox_step(geometry, z, est.g, gamma_k)
        if k % log_every == 0 or (k == N and N % log_every != 0):
            z_bar = avg.mean(problem.n_x, problem.n_y)
            gap = gap_fn(z_bar) if gap_fn is not None else math.nan
            log.add(LogRow(k=k, oracle_calls=oracle.calls, gap=gap,
                           f_value=problem.value(z_bar), gamma_k=gamma_k,
                           tau_k=tau_k, avg_checksum=float(z_bar.z.sum())))
    return log, avg.mean(problem.n_x, problem.n_y)


def run_kernel_zospg(problem: ProblemSpec, noise: NoiseModel,
                     kernel: SmoothingKernel, mu: float, N: int, seed: int,
                     domain: DomainSpec,
                     schedule: Optional[StepSchedule] = None,
                     gap_fn: Optional[GapFn] = None, log_every: int = 1,
                     extra_header: Optional[dict] = None) -> tuple[RunLog, BlockPoint]:
    """Projected zeroth-order gradient with kernel smoothing, k = 1 .. N;
    output the average of z_1 .. z_N."""
    if mu <= 0:
        raise ConfigurationError("kernel solver needs mu > 0; regularize first")
    if N < 1:
        raise ConfigurationError("kernel solver needs N >= 1")
    if schedule is None:
        meta = problem.metadata
        if meta.L is None:
            raise ConfigurationError("problem metadata lacks L for the schedule")
        if noise.sigma <= 0:
            raise ConfigurationError("theorem schedule needs sigma > 0")
        schedule = kernel_thm_schedule(kernel, n=problem.n, mu=mu,
                                       L=meta.L, sigma=noise.sigma)
    schedule.validate([1, N])
    _validate_neighborhood(problem, schedule.tau(1))

    rng = SeededRng(seed)
    oracle = Oracle(problem, noise, rng, domain=domain)
    log = RunLog(header=_base_header(problem, noise, seed, "kernel-zospg",
                                     schedule, extra_header))
    log.header["beta"] = f"{kernel.beta:g}"
    log.header["kappa"] = f"{kernel.kappa:g}"
    log.header["kappa_beta"] = f"{kernel.kappa_beta:g}"

    z = domain.start_point()
    avg = _RunningAverage(problem.n)
    for k in range(1, N + 1):
        gamma_k, tau_k = schedule.gamma(k), schedule.tau(k)
        est = estimate_kernel(oracle, kernel, z, tau_k, rng)
        z = BlockPoint.from_concat(domain.project(z.z - gamma_k * est.g),
                                   problem.n_x, problem.n_y)
        avg.add(z)
        if k % log_every == 0 or (k == N and N % log_every != 0):
            z_bar = avg.mean(problem.n_x, problem.n_y)
            gap = gap_fn(z_bar) if gap_fn is not None else math.nan
            log.add(LogRow(k=k, oracle_calls=oracle.calls, gap=gap,
                           f_value=problem.value(z_bar), gamma_k=gamma_k,
                           tau_k=tau_k, avg_checksum=float(z_bar.z.sum())))
    return log, avg.mean(problem.n_x, problem.n_y)


def regularize(problem: ProblemSpec, mu: float, z0: BlockPoint) -> ProblemSpec:
    """Strongly-convex-strongly-concave surrogate
    phi_mu(z) = phi(z) + mu/2 ||x - x0||^2 - mu/2 ||y - y0||^2."""
    if mu <= 0:
        raise ConfigurationError("regularization strength mu must be > 0")
    base_value = problem.clean_value
    base_grad = problem.true_grad
    x0, y0 = z0.x.copy(), z0.y.copy()

    def value(z: BlockPoint) -> float:
        return (base_value(z) + 0.5 * mu * float(np.sum((z.x - x0) ** 2))
                - 0.5 * mu * float(np.sum((z.y - y0) ** 2)))

    grad = None
    if base_grad is not None:
        def grad(z: BlockPoint) -> Vector:
            extra = np.concatenate([mu * (z.x - x0), mu * (z.y - y0)])
            return np.asarray(base_grad(z), dtype=np.float64) + extra

    meta = problem.metadata
    new_meta = ProblemMetadata(
        M=meta.M, L=(meta.L + mu) if meta.L is not None else mu, mu=mu,
        beta=meta.beta, L_beta=meta.L_beta)
    return ProblemSpec(n_x=problem.n_x, n_y=problem.n_y, clean_value=value,
                       true_grad=grad, metadata=new_meta,
                       neighborhood_radius=problem.neighborhood_radius)
