"""Parsing of the solver package's CSV artifacts.

Run logs are plain CSV preceded by `# key = value` header lines; the data
columns are k, oracle_calls, gap, f_value, gamma_k, tau_k. Kernel tables are
plain CSV with a `coeffs` column holding semicolon-separated polynomial
coefficients in ascending powers of r.
"""

from dataclasses import dataclass, field
from pathlib import Path


class SchemaError(ValueError):
    """The file does not follow the documented CSV layout."""


@dataclass
class RunLog:
    path: Path
    header: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)  # list of dicts per data row

    @property
    def method(self) -> str:
        return self.header.get("method", "unknown")

    @property
    def checksum(self) -> str:
        return self.header.get("problem_checksum", "")

    def column(self, name):
        return [row[name] for row in self.rows]


EXPECTED_COLUMNS = ["k", "oracle_calls", "gap", "f_value", "gamma_k", "tau_k"]


def read_runlog(path) -> RunLog:
    path = Path(path)
    log = RunLog(path=path)
    columns = None
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if not sep:
                raise SchemaError(f"{path}: malformed header line {line!r}")
            log.header[key.strip()] = value.strip()
        elif columns is None:
            columns = line.split(",")
            if columns != EXPECTED_COLUMNS:
                raise SchemaError(
                    f"{path}: unexpected columns {columns!r}")
        else:
            parts = line.split(",")
            if len(parts) != len(columns):
                raise SchemaError(f"{path}: ragged row {line!r}")
            row = {"k": int(parts[0]), "oracle_calls": int(parts[1])}
            for name, raw in zip(columns[2:], parts[2:]):
                row[name] = float(raw)
            log.rows.append(row)
    if columns is None or not log.rows:
        raise SchemaError(f"{path}: no data rows")
    return log


def read_kernel_table(text: str) -> list[dict]:
    """Parse `kernel-table` CSV text into one dict per kernel row."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("kernel table is empty")
    columns = lines[0].split(",")
    required = {"beta", "coeffs"}
    if not required.issubset(columns):
        raise SchemaError(f"kernel table lacks columns {required}")
    out = []
    for line in lines[1:]:
        parts = dict(zip(columns, line.split(",")))
        out.append({
            "beta": float(parts["beta"]),
            "coeffs": [float(c) for c in parts["coeffs"].split(";")],
        })
    return out
