"""Flat-file persistence: config.json, plot-ready CSVs and JSON reports.

Floats are written with repr so that a re-run from the persisted config
reproduces every file byte-for-byte.
"""

import csv
import json
import logging
from collections.abc import Sequence
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any

from .params import RunConfig
from .types import BoundReport, MomentReport, RateReport

logger = logging.getLogger("sburgers.results")

CONFIG_FILE = "config.json"


def load_config(path: Path) -> RunConfig:
    return RunConfig.model_validate_json(Path(path).read_text())


def write_config(config: RunConfig, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / CONFIG_FILE
    path.write_text(config.model_dump_json(indent=2) + "\n")
    return path


def _plain(obj: Any) -> Any:
    if is_dataclass(obj) and not isinstance(obj, type):
        return asdict(obj)
    return obj


def write_json(obj: Any, path: Path) -> Path:
    if isinstance(obj, (list, tuple)):
        data = [_plain(o) for o in obj]
    else:
        data = _plain(obj)
    path.write_text(json.dumps(data, indent=2) + "\n")
    logger.info("wrote %s", path)
    return path


def write_rate_csv(report: RateReport, path: Path) -> Path:
    """One row per (path, N): experiment, N, path_seed, error."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "N", "path_seed", "error"])
        for seed, row in zip(report.path_seeds, report.path_errors):
            for n, err in zip(report.ladder, row):
                writer.writerow([report.experiment, n, seed, repr(err)])
    logger.info("wrote %s", path)
    return path


def write_rate_summary_csv(report: RateReport, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "N", "mean_error", "median_error"])
        for n, mean, median in zip(report.ladder, report.mean_errors, report.median_errors):
            writer.writerow([report.experiment, n, repr(mean), repr(median)])
    return path


def write_moment_csv(report: MomentReport, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "N", "path_seed", "sup_norm"])
        for seed, sup in zip(report.path_seeds, report.path_sups):
            writer.writerow(["moments", report.n_keep, seed, repr(sup)])
    logger.info("wrote %s", path)
    return path


def write_bounds_csv(reports: Sequence[BoundReport], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bound", "mode", "path_seed", "lhs", "rhs", "slack", "passed", "under_resolved"])
        for r in reports:
            seed = "" if r.path_seed is None else r.path_seed
            writer.writerow([r.bound_name, r.mode, seed, repr(r.lhs), repr(r.rhs), repr(r.slack), int(r.passed),
                             int(r.under_resolved)])
    return path
