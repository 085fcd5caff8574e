"""Experiment reports and their CSV/JSON serializations.

Formats:
- time series CSV: header t,besov_sigma,l2,energy_s,sphere_drift;
- summary CSV: one row per checked metric, header metric,value,threshold,pass;
- JSON: the whole report with sorted keys, so byte-identical reruns diff clean.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from importlib import metadata

TIMESERIES_COLUMNS = ("t", "besov_sigma", "l2", "energy_s", "sphere_drift")


def _code_version() -> str:
    try:
        return metadata.version("fsmap")
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class Check:
    """One thresholded metric; `op` documents the comparison direction."""

    metric: str
    value: float
    threshold: float
    passed: bool
    op: str = "<="


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0
    code_version: str = field(default_factory=_code_version)
    # named time series (diagnostics dicts) for CSV/figure emission; not
    # serialized into the JSON report
    series: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check_upper(self, metric: str, value: float, threshold: float):
        self.metrics[metric] = float(value)
        self.checks.append(Check(metric, float(value), float(threshold),
                                 value <= threshold, "<="))

    def check_lower(self, metric: str, value: float, threshold: float):
        self.metrics[metric] = float(value)
        self.checks.append(Check(metric, float(value), float(threshold),
                                 value >= threshold, ">="))

    def check_bracket(self, metric: str, value: float, lo: float, hi: float):
        self.metrics[metric] = float(value)
        self.checks.append(Check(f"{metric}_lower", float(value), float(lo),
                                 value >= lo, ">="))
        self.checks.append(Check(f"{metric}_upper", float(value), float(hi),
                                 value <= hi, "<="))

    def record(self, metric: str, value: float):
        """Logged metric with no threshold."""
        self.metrics[metric] = float(value)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "metrics": self.metrics,
            "checks": [{"metric": c.metric, "value": c.value, "op": c.op,
                        "threshold": c.threshold, "pass": c.passed}
                       for c in self.checks],
            "passed": self.passed,
            "provenance": {"seed": self.seed, "code_version": self.code_version,
                           "wall_time_s": self.wall_time},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class timed:
    """Context manager stamping wall time onto a report."""

    def __init__(self, report: ExperimentReport):
        self.report = report

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time = time.perf_counter() - self._t0
        return False


def write_timeseries_csv(path, diagnostics: dict):
    """diagnostics: column name -> 1-D array, columns as in TIMESERIES_COLUMNS."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMESERIES_COLUMNS)
        n_rows = len(diagnostics["t"])
        for i in range(n_rows):
            writer.writerow([repr(float(diagnostics[c][i]))
                             for c in TIMESERIES_COLUMNS])


def write_summary_csv(path, report: ExperimentReport):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("metric", "value", "threshold", "pass"))
        for c in report.checks:
            writer.writerow((c.metric, repr(c.value), repr(c.threshold),
                             str(c.passed).lower()))


def write_json_report(path, report: ExperimentReport):
    with open(path, "w") as fh:
        fh.write(report.to_json())
