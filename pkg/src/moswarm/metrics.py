"""Plot-ready CSV outputs: traces, per-second metrics, sweeps, heatmaps.

Every CSV written here has a fixed header (the ``*_HEADER`` tuples) and
full-precision decimal floats (``repr``), so identical runs give
byte-identical files. :func:`validate_csv` checks a file against its
schema.
"""

from __future__ import annotations

import csv
import io
import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataIntegrityError, UsageError
from .sim import ArenaSpec

TRACE_HEADER = ("time_s", "robot_id", "x_m", "y_m", "heading_rad", "dx_m", "dy_m",
                "sensor_front", "sensor_right", "sensor_back", "sensor_left",
                "rotation_cmd_rad", "velocity_cmd_mps")
METRICS_HEADER = ("time_s", "mean_l1_distance_m", "mean_speed_mps")
PARETO_HEADER = ("w1", "w2", "mean_obj1_distance_m", "mean_obj2_velocity_mps")
LOG_HEADER = ("generation", "evaluations", "best_fitness", "mean_fitness", "sigma")

_INT_COLUMNS = {"robot_id", "generation", "evaluations"}


class MetricsRecord(NamedTuple):
    time_s: float
    mean_l1_distance_m: float
    mean_speed_mps: float


class HeatmapGrid(NamedTuple):
    resolution: int
    counts: np.ndarray  # counts[iy, ix], iy = 0 at the bottom (y = -side/2)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _csv_text(header: Sequence[str], rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def metrics_records(result) -> list[MetricsRecord]:
    """Per-robot means of distance and speed at each second of an episode."""
    n = result.num_robots
    dt = result.initial.arena.dt
    return [MetricsRecord((t + 1) * dt, d / n, v / n)
            for t, (d, v) in enumerate(zip(result.obj1.tolist(), result.obj2.tolist()))]


def metrics_csv(result) -> str:
    return _csv_text(METRICS_HEADER, metrics_records(result))


def trace_rows(result):
    dt = result.initial.arena.dt
    trace = result.trace
    if trace is None:
        raise UsageError("episode was run without recording a trace")
    for t in range(trace.shape[0]):
        for i in range(trace.shape[1]):
            yield ((t + 1) * dt, i, *trace[t, i].tolist())


def trace_csv(result) -> str:
    return _csv_text(TRACE_HEADER, trace_rows(result))


def pareto_csv(rows) -> str:
    return _csv_text(PARETO_HEADER, rows)


def read_csv(path, header: Sequence[str]) -> dict[str, np.ndarray]:
    """Load a schema'd CSV into columns, validating it first."""
    validate_csv(path, header)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    cols = {}
    for j, name in enumerate(header):
        dtype = int if name in _INT_COLUMNS else float
        cols[name] = np.array([dtype(r[j]) for r in rows], dtype=dtype)
    return cols


def validate_csv(path, header: Sequence[str]) -> int:
    """Check header, row width and numeric cells; return the row count."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if not rows or tuple(rows[0]) != tuple(header):
        got = rows[0] if rows else None
        raise DataIntegrityError(f"{path}: expected header {list(header)}, got {got}")
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataIntegrityError(f"{path}:{k}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            try:
                v = int(cell) if name in _INT_COLUMNS else float(cell)
            except ValueError:
                raise DataIntegrityError(f"{path}:{k}: column {name} is not numeric: {cell!r}") from None
            if not math.isfinite(v):
                raise DataIntegrityError(f"{path}:{k}: column {name} is not finite")
    return len(rows) - 1


def heatmap(xs, ys, arena: ArenaSpec, resolution: int) -> HeatmapGrid:
    """Count position samples on a ``resolution`` x ``resolution`` grid over the arena."""
    if resolution < 1:
        raise UsageError(f"resolution must be positive, got {resolution}")
    half = arena.half
    counts = np.zeros((resolution, resolution), dtype=np.int64)
    cell = arena.side_length / resolution
    for x, y in zip(np.asarray(xs, dtype=float).tolist(), np.asarray(ys, dtype=float).tolist()):
        if not (-half <= x <= half and -half <= y <= half):
            raise DataIntegrityError(f"sample ({x}, {y}) lies outside the arena")
        ix = min(int((x + half) / cell), resolution - 1)
        iy = min(int((y + half) / cell), resolution - 1)
        counts[iy, ix] += 1
    return HeatmapGrid(resolution, counts)


def heatmap_csv(grid: HeatmapGrid) -> str:
    header = ("y_index",) + tuple(f"x{i}" for i in range(grid.resolution))
    return _csv_text(header, ((iy, *map(int, grid.counts[iy])) for iy in range(grid.resolution)))


def central_share(grid: HeatmapGrid, area_fraction: float = 0.2) -> float:
    """Fraction of counts in the central square block covering at most ``area_fraction``.

    The block side is the largest cell count with the grid's parity whose
    area does not exceed the requested fraction, so the block is centred.
    """
    n = grid.resolution
    k = int(math.floor(n * math.sqrt(area_fraction)))
    if (n - k) % 2:
        k -= 1
    if k < 1:
        raise UsageError(f"resolution {n} too coarse for a centred block of {area_fraction:.0%}")
    lo = (n - k) // 2
    total = grid.counts.sum()
    return float(grid.counts[lo:lo + k, lo:lo + k].sum() / total) if total else 0.0
