"""Diagnostic samples, trajectory records and their CSV/JSON forms."""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .spectral import SpectralField, atomic_write_text

CSV_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

CSV_COLUMNS = ("t", "l2_norm_sq", "grad_norm_sq", "lap_norm_sq",
               "d1_norm_sq", "d2_norm_sq", "energy_residual")


@dataclass(frozen=True)
class DiagnosticSample:
    t: float
    l2_norm_sq: float
    grad_norm_sq: float
    lap_norm_sq: float
    d1_norm_sq: float
    d2_norm_sq: float
    energy_residual: float = math.nan
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DiagnosticSample":
        return cls(**d)


@dataclass
class TrajectoryRecord:
    """Time series of diagnostics, optional snapshots and the run outcome."""

    samples: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)   # (t, SpectralField)
    status: str = "completed"                        # or "diverged"
    diverged_at: float | None = None
    final_t: float | None = None
    final_state: SpectralField | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        if name in CSV_COLUMNS:
            return np.array([getattr(s, name) for s in self.samples])
        return np.array([s.extras.get(name, math.nan) for s in self.samples])

    @property
    def l2_norm(self) -> np.ndarray:
        return np.sqrt(self.column("l2_norm_sq"))


def _fmt(x: float) -> str:
    return repr(float(x))


def diagnostics_csv(record: TrajectoryRecord) -> str:
    """CSV text; floats use ``repr`` so the file round-trips bit-for-bit."""
    buf = io.StringIO()
    buf.write(f"# troposim diagnostics schema_version={CSV_SCHEMA_VERSION}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for s in record.samples:
        buf.write(",".join(_fmt(getattr(s, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def write_diagnostics_csv(path, record: TrajectoryRecord) -> None:
    atomic_write_text(path, diagnostics_csv(record))


def read_diagnostics_csv(path) -> list[DiagnosticSample]:
    lines = [ln for ln in open(path).read().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    return [DiagnosticSample(**{k: float(v) for k, v in zip(header, ln.split(","))})
            for ln in lines[1:]]


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True)


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps(obj) + "\n")
