from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "snr_db",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "mean_iters",
    "seconds",
)
_INT_COLUMNS = frozenset({"frames", "bit_errors", "frame_errors"})


@dataclass(frozen=True)
class PointResult:
    snr_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    mean_iters: float
    seconds: float


@dataclass
class SweepResult:
    points: list[PointResult] = field(default_factory=list)
    config_hash: str = ""
    master_seed: int = 0

    def __len__(self) -> int:
        return len(self.points)


def _fmt(value: float | int) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return np.format_float_positional(float(value), unique=True, trim="0")


def write_csv(result: SweepResult, path: str | Path) -> Path:
    """One row per SNR point, in grid order, decimal notation."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for point in result.points:
                row = asdict(point)
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    logger.info("Wrote %d SNR points to %s", len(result.points), path)
    return path


def read_csv(path: str | Path) -> list[PointResult]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    return [
        PointResult(**{c: int(row[c]) if c in _INT_COLUMNS else float(row[c]) for c in CSV_COLUMNS})
        for row in rows
    ]


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_sidecar(csv_path: str | Path, config: dict[str, Any], result: SweepResult) -> Path:
    """Resolved configuration next to the CSV, enough to rerun it exactly."""
    path = sidecar_path(csv_path)
    payload = {
        "config_hash": result.config_hash,
        "master_seed": result.master_seed,
        "config": config,
    }
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write config sidecar to {path}: {exc}") from exc
    logger.info("Wrote config sidecar %s", path)
    return path
