"""Run-record persistence and plot-data export.

A run record is a directory:

  run.json      metadata: schema version, full config echo, applied
                patches, tick count, wall time, real-time factor, abort
                info (or null)
  metrics.csv   one row per sampled tick, shortest-roundtrip floats, so
                equal runs produce byte-identical files
  states.npz    arrays t (F,) and states (F, N, 6): position then
                inertial velocity per agent, possibly strided
  map.txt       obstacle field, if the run had one

Floats are serialized with repr, which round-trips exactly; the CSV is
therefore a faithful witness for determinism comparisons.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .environment import ObstacleMap, load_map, save_map
from .metrics import MetricsFrame

SCHEMA_VERSION = 1

_INT_COLUMNS = {"n_ag", "n_obs"}


class SchemaError(RuntimeError):
    """Record written by an incompatible schema version."""


@dataclass
class RunRecord:
    """In-memory form of one finished (or aborted) simulation run."""

    config: dict
    patches: list = field(default_factory=list)
    n_ticks: int = 0
    wall_seconds: float = 0.0
    real_time_factor: float = 0.0
    aborted: Optional[dict] = None
    metrics: list = field(default_factory=list)
    state_t: Optional[np.ndarray] = None
    states: Optional[np.ndarray] = None
    omap: Optional[ObstacleMap] = None
    schema_version: int = SCHEMA_VERSION

    def final_metrics(self) -> Optional[MetricsFrame]:
        return self.metrics[-1] if self.metrics else None


def _cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def metrics_csv_text(frames: list) -> str:
    lines = [",".join(MetricsFrame.header())]
    for frame in frames:
        lines.append(",".join(_cell(v) for v in frame.as_row()))
    return "\n".join(lines) + "\n"


def _parse_metrics_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    if header != MetricsFrame.header():
        raise SchemaError(f"unexpected metrics columns: {header}")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        kwargs = {
            name: (int(cell) if name in _INT_COLUMNS else float(cell))
            for name, cell in zip(header, cells)
        }
        out.append(MetricsFrame(**kwargs))
    return out


def write_record(rec: RunRecord, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema_version": rec.schema_version,
        "config": rec.config,
        "patches": rec.patches,
        "n_ticks": rec.n_ticks,
        "wall_seconds": rec.wall_seconds,
        "real_time_factor": rec.real_time_factor,
        "aborted": rec.aborted,
        "files": {
            "metrics": "metrics.csv",
            "states": "states.npz" if rec.states is not None else None,
            "map": "map.txt" if rec.omap is not None else None,
        },
    }
    (out / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (out / "metrics.csv").write_text(metrics_csv_text(rec.metrics))
    if rec.states is not None:
        np.savez_compressed(out / "states.npz", t=rec.state_t, states=rec.states)
    if rec.omap is not None:
        save_map(rec.omap, out / "map.txt")
    return out


def load_record(run_dir) -> RunRecord:
    run_dir = Path(run_dir)
    meta_path = run_dir / "run.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"{run_dir} does not contain run.json")
    meta = json.loads(meta_path.read_text())
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"record schema version {version!r}, this build reads {SCHEMA_VERSION}"
        )
    rec = RunRecord(
        config=meta["config"],
        patches=meta.get("patches", []),
        n_ticks=meta["n_ticks"],
        wall_seconds=meta["wall_seconds"],
        real_time_factor=meta["real_time_factor"],
        aborted=meta.get("aborted"),
    )
    rec.metrics = _parse_metrics_csv((run_dir / "metrics.csv").read_text())
    states_path = run_dir / "states.npz"
    if states_path.exists():
        with np.load(states_path) as data:
            rec.state_t = data["t"]
            rec.states = data["states"]
    map_path = run_dir / "map.txt"
    if map_path.exists():
        rec.omap = load_map(map_path)
    return rec


# ---------------------------------------------------------------------------
# Plot-data export

_PANELS = {
    "distance": ["dist_min", "dist_avg", "dist_max"],
    "speed": ["speed_min", "speed_avg", "speed_max"],
    "accel": ["accel_min", "accel_avg", "accel_max"],
    "order": ["phi_order"],
    "safety": ["phi_safety_ag", "phi_safety_obs", "n_ag", "n_obs"],
    "connectivity": ["phi_union", "phi_connectivity"],
}


def export_panels(rec: RunRecord, out_dir) -> list[Path]:
    """Write one plot-ready CSV per metric panel, plus trajectories.

    Deterministic: exporting the same record twice produces byte-identical
    files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for panel, columns in _PANELS.items():
        lines = [",".join(["t"] + columns)]
        for frame in rec.metrics:
            cells = [_cell(frame.t)]
            cells += [_cell(getattr(frame, c)) for c in columns]
            lines.append(",".join(cells))
        path = out / f"{panel}.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    if rec.states is not None:
        lines = [",".join(["t", "agent", "pn", "pe", "pd", "vn", "ve", "vd"])]
        for f_idx in range(rec.states.shape[0]):
            t = rec.state_t[f_idx]
            for i in range(rec.states.shape[1]):
                row = rec.states[f_idx, i]
                lines.append(",".join([_cell(float(t)), str(i)]
                                      + [_cell(float(x)) for x in row]))
        path = out / "trajectories.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
