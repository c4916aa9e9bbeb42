"""Batch figure generation from run-log and kernel-table CSV files.

This package never computes gaps or kernel constants itself: it parses the
CSVs produced by the solver package and only aggregates (median, min, max)
and renders.
"""

from .runlog import RunLog, read_runlog

__all__ = ["RunLog", "read_runlog"]
