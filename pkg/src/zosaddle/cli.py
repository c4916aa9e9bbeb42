"""Command-line entry point: experiments, grid search, kernel tables,
problem generation and a fast self-test."""

from __future__ import annotations

import argparse
import sys
import traceback

import numpy as np

from .core import ConfigurationError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _cmd_run(args) -> int:
    from .harness import parse_config, run_experiment
    cfg = parse_config(args.config)
    if args.out is not None:
        cfg.outdir = args.out
    paths = run_experiment(cfg)
    for p in paths:
        print(p)
    return EXIT_OK


def _cmd_grid(args) -> int:
    from .harness import grid_search, grid_table_csv, parse_config
    cfg = parse_config(args.config)
    gamma_grid = [float(t) for t in args.gamma.split(",")]
    tau_grid = [float(t) for t in args.tau.split(",")]
    gamma, tau, table = grid_search(cfg, gamma_grid, tau_grid,
                                    budget=args.budget)
    csv = grid_table_csv(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    print(f"best gamma={gamma:g} tau={tau:g}")
    return EXIT_OK


def _cmd_kernel_table(args) -> int:
    from .kernels import build_legendre_kernel, max_moment_residual
    betas = [float(t) for t in args.beta_list.split(",")]
    print("beta,l,coeffs,kappa,kappa_beta,max_moment_residual")
    for beta in betas:
        kernel = build_legendre_kernel(beta)
        coeffs = ";".join(f"{c:.12g}" for c in kernel.coeffs)
        print(f"{beta:g},{kernel.l},{coeffs},{kernel.kappa:.12g},"
              f"{kernel.kappa_beta:.12g},{max_moment_residual(kernel):.3e}")
    return EXIT_OK


def _cmd_gen_problem(args) -> int:
    from .problems import gen_matrix_game, save_matrix
    if args.type != "matgame":
        raise ConfigurationError(f"unsupported problem type {args.type!r}")
    game = gen_matrix_game(args.n, args.k, args.seed,
                           normalization=args.normalization)
    save_matrix(game, args.out)
    print(f"wrote {args.k}x{args.n} payoff matrix to {args.out}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    """Fast property checks: kernel moments, simplex projection, estimator
    unbiasedness smoke test."""
    from .core import (BlockPoint, NOISELESS, Oracle, ProblemSpec, SeededRng)
    from .estimators import estimate_standard, smoothed_grad_mc
    from .geometry import project_simplex
    from .kernels import build_legendre_kernel, max_moment_residual

    failures = []

    for beta in (2.5, 4.0, 6.0):
        res = max_moment_residual(build_legendre_kernel(beta))
        ok = res <= 1e-10
        print(f"kernel moments beta={beta}: residual {res:.2e} "
              f"{'PASS' if ok else 'FAIL'}")
        if not ok:
            failures.append("kernel moments")

    rng = SeededRng(1)
    ok = True
    for _ in range(200):
        v = rng.standard_normal(5) * 3
        w = project_simplex(v)
        if abs(w.sum() - 1) > 1e-9 or w.min() < 0:
            ok = False
        w2 = project_simplex(w)
        if np.max(np.abs(w2 - w)) > 1e-9:
            ok = False
    print(f"simplex projection: {'PASS' if ok else 'FAIL'}")
    if not ok:
        failures.append("simplex projection")

    problem = ProblemSpec(
        n_x=1, n_y=1,
        clean_value=lambda z: float(z.x[0] ** 2 - z.y[0] ** 2),
        true_grad=lambda z: np.array([2 * z.x[0], 2 * z.y[0]]))
    z = BlockPoint(np.array([1.0]), np.array([1.0]))
    rng = SeededRng(7)
    oracle = Oracle(problem, NOISELESS, rng)
    draws = np.array([estimate_standard(oracle, z, 1e-3, rng).g
                      for _ in range(4000)])
    ref = smoothed_grad_mc(problem, z, 1e-3, 4000, SeededRng(8))
    err = np.abs(draws.mean(axis=0) - ref.g)
    tol = 4 * (draws.std(axis=0) / np.sqrt(4000) + ref.stderr)
    ok = bool(np.all(err <= tol))
    print(f"estimator unbiasedness smoke test: {'PASS' if ok else 'FAIL'}")
    if not ok:
        failures.append("estimator unbiasedness")

    if failures:
        print(f"selftest FAILED: {', '.join(failures)}")
        return EXIT_RUNTIME
    print("selftest passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zosaddle",
        description="Zeroth-order saddle-point optimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("--config", required=True, help="path to the config file")
    p.add_argument("--out", default=None,
                   help="override the output directory from the config")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("grid", help="grid-search gamma and tau")
    p.add_argument("--config", required=True, help="path to the config file")
    p.add_argument("--gamma", required=True,
                   help="comma-separated stepsize grid")
    p.add_argument("--tau", required=True,
                   help="comma-separated smoothing-radius grid")
    p.add_argument("--budget", type=int, default=None,
                   help="iterations per cell (default: the config's N)")
    p.add_argument("--out", default=None, help="write the score table here")
    p.set_defaults(fn=_cmd_grid)

    p = sub.add_parser("kernel-table",
                       help="print kernel coefficients and constants as CSV")
    p.add_argument("--beta-list", required=True,
                   help="comma-separated smoothness orders in (2, 7]")
    p.set_defaults(fn=_cmd_kernel_table)

    p = sub.add_parser("gen-problem", help="generate and persist a problem")
    p.add_argument("--type", default="matgame", help="problem type")
    p.add_argument("--n", type=int, required=True, help="x-simplex dimension")
    p.add_argument("--k", type=int, required=True, help="y-simplex dimension")
    p.add_argument("--seed", type=int, required=True, help="generation seed")
    p.add_argument("--normalization", default="max",
                   choices=("max", "row_sum"), help="payoff normalization")
    p.add_argument("--out", required=True, help="output matrix file")
    p.set_defaults(fn=_cmd_gen_problem)

    p = sub.add_parser("selftest", help="run the fast property suite")
    p.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failure after validation
        print(f"error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
