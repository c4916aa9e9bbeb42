"""Command line: `plotgen convergence ...` and `plotgen kernels ...`.

Exit codes: 0 success, 1 runtime failure, 2 usage/configuration error
(empty glob, unsupported beta), 3 mixed problem checksums in one figure.
"""

import argparse
import sys

from .figures import ChecksumMismatchError, plot_convergence, plot_kernels
from .runlog import SchemaError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_MISMATCH = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotgen",
        description="Render figures from solver run-log CSVs")
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence",
                          help="median gap curves per method, with seed bands")
    conv.add_argument("--glob", required=True,
                      help="glob of run-log CSV files, e.g. 'runs/*.csv'")
    conv.add_argument("--x", choices=["iteration", "oracle_calls"],
                      default="oracle_calls")
    conv.add_argument("--out", required=True, help="output image path")

    ker = sub.add_parser("kernels",
                         help="smoothing-kernel shapes K_beta(r) on [-1, 1]")
    ker.add_argument("--beta-list", required=True,
                     help="comma-separated beta values, e.g. 2.5,4,6")
    ker.add_argument("--table", default=None,
                     help="read a saved kernel-table CSV instead of invoking "
                          "the zosaddle command")
    ker.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "convergence":
            series = plot_convergence(args.glob, args.x, args.out)
            print(f"wrote {args.out} ({len(series)} methods)")
        else:
            try:
                betas = [float(b) for b in args.beta_list.split(",")]
            except ValueError:
                print(f"plot error: bad beta list {args.beta_list!r}",
                      file=sys.stderr)
                return EXIT_USAGE
            series = plot_kernels(betas, args.out, table_path=args.table)
            print(f"wrote {args.out} ({len(series)} kernels)")
        return EXIT_OK
    except ChecksumMismatchError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (FileNotFoundError, ValueError, SchemaError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
