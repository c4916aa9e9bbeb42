"""Shared fixtures: repo paths, CSV parsing, and the (expensive) 50x50
matrix-game benchmark runs reused by several tests."""

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"


def read_runlog(path):
    """Parse a run-log CSV into (header dict, list of row dicts)."""
    header = {}
    rows = []
    columns = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
        elif columns is None:
            columns = line.split(",")
        else:
            parts = line.split(",")
            row = {"k": int(parts[0]), "oracle_calls": int(parts[1])}
            for name, raw in zip(columns[2:], parts[2:]):
                row[name] = float(raw)
            rows.append(row)
    return header, columns, rows


@pytest.fixture(scope="session")
def matgame_benchmark(tmp_path_factory):
    """Run the shipped 50x50 game configs (5% and 10% noise, 4 methods,
    5 seeds, N=20000) once per session; several tests share the output."""
    from zosaddle.harness import parse_config, run_experiment

    results = {}
    for level, name in ((0.05, "matgame50_noise5.cfg"),
                        (0.10, "matgame50_noise10.cfg")):
        cfg = parse_config(CONFIG_DIR / name)
        cfg.outdir = str(tmp_path_factory.mktemp(f"bench{int(level * 100)}"))
        paths = run_experiment(cfg)
        by_method = {}
        for path in paths:
            header, columns, rows = read_runlog(path)
            assert columns == ["k", "oracle_calls", "gap", "f_value",
                               "gamma_k", "tau_k"]
            by_method.setdefault(header["method"], []).append(
                {"header": header, "rows": rows, "path": path})
        results[level] = by_method
    return results


def median(values):
    values = sorted(values)
    m = len(values)
    mid = m // 2
    if m % 2 == 1:
        return values[mid]
    return 0.5 * (values[mid - 1] + values[mid])


def gap_at(run, k):
    for row in run["rows"]:
        if row["k"] == k:
            return row["gap"]
    raise AssertionError(f"no logged row at k={k}")
