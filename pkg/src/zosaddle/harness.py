"""Experiment orchestration: config parsing, sigma calibration, the four
benchmark methods, multi-seed sweeps and grid search."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import BlockPoint, ConfigurationError, NoiseModel, SeededRng
from .geometry import GeometrySetup, prox_step
from .kernels import build_legendre_kernel
from .problems import MatrixGame, gen_matrix_game, load_matrix, matgame_gap
from .solvers import (LogRow, RunLog, constant_schedule, derive_schedule,
                      run_kernel_zospg, run_zoopmd)

METHOD_KINDS = ("ZO-Std", "ZO-RF", "ZO-Ker", "FO")


@dataclass
class MethodConfig:
    name: str
    kind: str
    geometry: str = "entropy"        # entropy | euclidean
    gamma: Optional[float] = None    # explicit stepsize; else corollary schedule
    tau: Optional[float] = None
    theta_gamma: float = 1.0
    theta_tau: float = 1.0
    beta: float = 3.0                # ZO-Ker kernel order
    mu: float = 0.01                 # ZO-Ker regularization strength

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ConfigurationError(f"unknown method kind {self.kind!r}")
        if self.kind == "ZO-RF" and self.geometry != "euclidean":
            raise ConfigurationError(
                "residual feedback requires the euclidean geometry")


@dataclass
class ExperimentConfig:
    problem_type: str = "matgame"
    n: int = 50
    k: int = 50
    problem_seed: int = 0
    noise_level: float = 0.05        # relative sigma
    delta: float = 0.0
    normalization: str = "max"
    matrix_file: Optional[str] = None
    methods: list = field(default_factory=list)
    N: int = 1000
    seeds: list = field(default_factory=lambda: [0])
    log_every: int = 1
    outdir: str = "runs"

    def validate(self):
        if self.problem_type != "matgame":
            raise ConfigurationError(
                f"unsupported problem type {self.problem_type!r}")
        if not self.methods:
            raise ConfigurationError("no methods configured")
        if self.N < 0 or self.log_every < 1 or not self.seeds:
            raise ConfigurationError("invalid run block")


def parse_config(path) -> ExperimentConfig:
    """Flat `key = value` file with `[section]` headers and `#` comments."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")
    cfg = ExperimentConfig()
    if cp.has_section("problem"):
        s = cp["problem"]
        cfg.problem_type = s.get("type", cfg.problem_type)
        cfg.n = s.getint("n", cfg.n)
        cfg.k = s.getint("k", cfg.k)
        cfg.problem_seed = s.getint("seed", cfg.problem_seed)
        cfg.noise_level = s.getfloat("noise_level", cfg.noise_level)
        cfg.delta = s.getfloat("delta", cfg.delta)
        cfg.normalization = s.get("normalization", cfg.normalization)
        cfg.matrix_file = s.get("matrix_file", None)
    if cp.has_section("run"):
        s = cp["run"]
        cfg.N = s.getint("N", cfg.N)
        seeds = s.get("seeds", None)
        if seeds:
            cfg.seeds = [int(t) for t in seeds.replace(",", " ").split()]
        cfg.log_every = s.getint("log_every", cfg.log_every)
        cfg.outdir = s.get("outdir", cfg.outdir)
    for section in cp.sections():
        if not section.startswith("method"):
            continue
        s = cp[section]
        kind = s.get("kind", section.split(None, 1)[-1])
        mc = MethodConfig(
            name=s.get("name", kind), kind=kind,
            geometry=s.get("geometry",
                           "euclidean" if kind == "ZO-RF" else "entropy"),
            gamma=s.getfloat("gamma", None), tau=s.getfloat("tau", None),
            theta_gamma=s.getfloat("theta_gamma", 1.0),
            theta_tau=s.getfloat("theta_tau", 1.0),
            beta=s.getfloat("beta", 3.0), mu=s.getfloat("mu", 0.01))
        cfg.methods.append(mc)
    cfg.validate()
    return cfg


def calibrate_sigma(game: MatrixGame, level: float, probe_seed: int,
                    n_probes: int = 100) -> float:
    """sigma = level x mean |phi| over probe points near the uniform start.

    The probes are multiplicative perturbations of the barycenter, so the
    scale reflects typical payoffs the run will actually see.
    """
    if level <= 0:
        return 0.0
    rng = SeededRng(probe_seed)
    z0 = game.domain().start_point()
    acc = 0.0
    for _ in range(n_probes):
        x = z0.x * np.exp(0.2 * rng.standard_normal(game.n))
        y = z0.y * np.exp(0.2 * rng.standard_normal(game.k))
        z = BlockPoint(x / x.sum(), y / y.sum())
        acc += abs(game.value(z))
    return level * acc / n_probes


def build_game(cfg: ExperimentConfig) -> MatrixGame:
    if cfg.matrix_file:
        return load_matrix(cfg.matrix_file)
    return gen_matrix_game(cfg.n, cfg.k, cfg.problem_seed,
                           normalization=cfg.normalization)


def fo_mirror_descent(game: MatrixGame, gamma: float, N: int, seed: int,
                      log_every: int = 1,
                      extra_header: Optional[dict] = None) -> tuple[RunLog, BlockPoint]:
    """Entropic mirror descent with the exact gradient, as the first-order
    baseline. Uses the same multiplicative update and CSV schema as the
    zeroth-order runs."""
    problem = game.problem()
    domain = game.domain()
    geometry = GeometrySetup.entropy_simplex_pair(domain)
    schedule = constant_schedule(gamma, 1.0)  # tau column is a placeholder
    log = RunLog(header={
        "method": "FO", "seed": seed, "rng": "none (deterministic)",
        "n_x": problem.n_x, "n_y": problem.n_y, "sigma": "0", "delta_bound": "0",
        "schedule": f"constant gamma={gamma:g}", "geometry": geometry.kind,
    })
    if extra_header:
        log.header.update(extra_header)

    z = domain.start_point()
    total = np.zeros(problem.n)
    calls = 0
    for k in range(N + 1):
        total += z.z
        z_bar = BlockPoint.from_concat(total / (k + 1), game.n, game.k)
        calls += 1  # one exact-gradient call per iteration
        if k % log_every == 0 or (k == N and N % log_every != 0):
            log.add(LogRow(k=k, oracle_calls=calls,
                           gap=matgame_gap(game, z_bar.x, z_bar.y),
                           f_value=game.value(z_bar), gamma_k=gamma,
                           tau_k=math.nan, avg_checksum=float(z_bar.z.sum())))
        z = prox_step(geometry, z, game.grad(z), gamma)
    z_bar = BlockPoint.from_concat(total / (N + 1), game.n, game.k)
    return log, z_bar


def _default_gamma_tau(method: MethodConfig, game: MatrixGame, sigma: float,
                       N: int) -> tuple[Optional[float], Optional[float]]:
    """Corollary schedules (order constants 1) when no explicit values given."""
    problem = game.problem()
    domain = game.domain()
    if method.kind == "ZO-Std":
        geometry = (GeometrySetup.entropy_simplex_pair(domain)
                    if method.geometry == "entropy"
                    else GeometrySetup.euclidean(domain))
        sched = derive_schedule(
            "nonsmooth_cc", n=problem.n, q=geometry.q, M=problem.metadata.M,
            sigma=max(sigma, 1e-6), omega=geometry.omega, N=max(N, 1),
            theta_gamma=method.theta_gamma, theta_tau=method.theta_tau)
        return sched.gamma(0), sched.tau(0)
    if method.kind == "ZO-RF":
        geometry = GeometrySetup.euclidean(domain)
        sched = derive_schedule(
            "residual_cc", n=problem.n, M=problem.metadata.M,
            sigma=max(sigma, 1e-6), omega=geometry.omega, N=max(N, 1),
            theta_gamma=method.theta_gamma, theta_tau=method.theta_tau)
        return sched.gamma(0), sched.tau(0)
    return None, None


def run_method(method: MethodConfig, game: MatrixGame, sigma: float,
               N: int, seed: int, log_every: int = 1,
               gamma: Optional[float] = None, tau: Optional[float] = None,
               extra_header: Optional[dict] = None) -> tuple[RunLog, BlockPoint]:
    """Execute one (method, seed) cell on a matrix game."""
    problem = game.problem()
    domain = game.domain()
    noise = NoiseModel(sigma=sigma, delta_bound=0.0,
                       xi_distribution="gaussian" if sigma > 0 else "none")
    gap_fn = lambda z_bar: matgame_gap(game, z_bar.x, z_bar.y)  # noqa: E731
    header = dict(extra_header or {})
    header["method"] = method.name
    header.setdefault("problem_checksum", game.checksum())
    header.setdefault("sigma_calibrated", f"{sigma:g}")

    if method.kind == "FO":
        g = gamma if gamma is not None else (
            method.gamma if method.gamma is not None else 0.5)
        return fo_mirror_descent(game, g, N, seed, log_every, header)

    if method.kind == "ZO-Ker":
        from .solvers import kernel_thm_schedule, regularize
        kernel = build_legendre_kernel(method.beta)
        reg = regularize(problem, method.mu, domain.start_point())
        schedule = kernel_thm_schedule(
            kernel, n=reg.n, mu=method.mu, L=reg.metadata.L,
            sigma=max(sigma, 1e-6), theta_gamma=method.theta_gamma,
            theta_tau=method.theta_tau)
        if gamma is not None:
            base = schedule
            schedule = type(base)(base.kind, lambda k: gamma,
                                  base.tau if tau is None else (lambda k: tau),
                                  f"override gamma={gamma:g}")
        return run_kernel_zospg(reg, noise, kernel, method.mu, max(N, 1),
                                seed, domain, schedule=schedule, gap_fn=gap_fn,
                                log_every=log_every, extra_header=header)

    g, t = gamma, tau
    if g is None or t is None:
        dg, dt = _default_gamma_tau(method, game, sigma, N)
        g = g if g is not None else (method.gamma if method.gamma is not None else dg)
        t = t if t is not None else (method.tau if method.tau is not None else dt)
    schedule = constant_schedule(g, t)
    geometry = (GeometrySetup.euclidean(domain)
                if method.geometry == "euclidean" or method.kind == "ZO-RF"
                else GeometrySetup.entropy_simplex_pair(domain))
    kind = "standard" if method.kind == "ZO-Std" else "residual"
    return run_zoopmd(problem, noise, geometry, kind, schedule, N, seed,
                      gap_fn=gap_fn, log_every=log_every, extra_header=header)


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """One RunLog CSV per (method, seed); identical layout across methods."""
    cfg.validate()
    game = build_game(cfg)
    sigma = calibrate_sigma(game, cfg.noise_level, cfg.problem_seed + 104729)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    header = {
        "problem_checksum": game.checksum(),
        "noise_level": f"{cfg.noise_level:g}",
        "sigma_calibrated": f"{sigma:g}",
        "problem_seed": cfg.problem_seed,
    }
    for method in cfg.methods:
        for seed in cfg.seeds:
            log, _ = run_method(method, game, sigma, cfg.N, seed,
                                cfg.log_every, extra_header=dict(header))
            path = outdir / f"{method.name.replace(' ', '_')}_seed{seed}.csv"
            log.save(path)
            paths.append(path)
    return paths


class NoStableConfigurationError(ConfigurationError):
    """Every grid cell diverged under the stability rule."""


def grid_search(cfg: ExperimentConfig, gamma_grid, tau_grid,
                budget: Optional[int] = None,
                min_seeds: int = 3) -> tuple[float, float, list[dict]]:
    """Score each (gamma, tau) cell by median final gap over seeds.

    A cell is disqualified as unstable if any run's gap ever exceeds ten
    times its initial value. Returns the winning pair plus the full table
    (rows: gamma, tau, median_final_gap, stable).
    """
    if not gamma_grid or not tau_grid:
        raise ConfigurationError("grid_search needs nonempty grids")
    cfg.validate()
    game = build_game(cfg)
    sigma = calibrate_sigma(game, cfg.noise_level, cfg.problem_seed + 104729)
    method = cfg.methods[0]
    N = budget if budget is not None else cfg.N
    seeds = list(cfg.seeds)
    while len(seeds) < min_seeds:
        seeds.append(max(seeds) + 1)

    table = []
    best = None
    for gamma in gamma_grid:
        for tau in tau_grid:
            finals, stable = [], True
            for seed in seeds:
                try:
                    log, _ = run_method(method, game, sigma, N, seed,
                                        log_every=max(N // 20, 1),
                                        gamma=gamma, tau=tau)
                except ConfigurationError:
                    stable = False
                    break
                gaps = [r.gap for r in log.rows]
                if any(g > 10.0 * gaps[0] for g in gaps):
                    stable = False
                    break
                finals.append(gaps[-1])
            score = float(np.median(finals)) if stable else math.inf
            table.append({"gamma": gamma, "tau": tau,
                          "median_final_gap": score, "stable": stable})
            if stable and (best is None or score < best[0]):
                best = (score, gamma, tau)
    if best is None:
        raise NoStableConfigurationError(
            "no stable (gamma, tau) cell in the search grid")
    return best[1], best[2], table


def grid_table_csv(table: list[dict]) -> str:
    lines = ["gamma,tau,median_final_gap,stable"]
    for row in table:
        lines.append(f"{row['gamma']:.12g},{row['tau']:.12g},"
                     f"{row['median_final_gap']:.12g},"
                     f"{'true' if row['stable'] else 'false'}")
    return "\n".join(lines) + "\n"
