"""Coverage metrics, visitation heatmaps, and tabular/image exporters.

All outputs are pure functions of simulation state — simulated time is
steps * dt and no wall-clock value ever reaches a file — so rerunning a
scenario reproduces every artifact byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .world import GridConfig, Hotspot, ValidationError

CSV_COLUMNS = [
    "scenario_id",
    "algorithm",
    "levy_weight",
    "seed",
    "steps_to_cover",
    "time_to_cover_s",
    "biodiversity_b",
    "min_pairwise_distance",
    "collision_interventions",
]


@dataclass
class Heatmap:
    """Per-cell visitation counts over the integer grid.

    counts[r, c] is the number of recorded UAV positions whose floor-binned
    cell is (x in [c, c+1), y in [r, r+1)); positions exactly on the far edge
    (x == width or y == height) fall into the last cell.  The running total
    equals n_uavs * recorded_steps by construction.
    """

    width: int
    height: int
    counts: np.ndarray = None

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.height, self.width), dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (self.height, self.width):
                raise ValidationError(
                    f"heatmap counts shape {self.counts.shape} does not match "
                    f"height x width ({self.height}, {self.width})"
                )

    @classmethod
    def for_grid(cls, grid: GridConfig) -> "Heatmap":
        return cls(width=grid.width, height=grid.height)

    def cell_of(self, position) -> tuple[int, int]:
        x, y = float(position[0]), float(position[1])
        if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
            raise ValidationError(f"position ({x}, {y}) is outside the heatmap domain")
        c = min(int(math.floor(x)), self.width - 1)
        r = min(int(math.floor(y)), self.height - 1)
        return r, c

    def record(self, positions):
        for p in np.atleast_2d(np.asarray(positions, dtype=float)):
            r, c = self.cell_of(p)
            self.counts[r, c] += 1

    def total(self) -> int:
        return int(self.counts.sum())

    def merged_with(self, other: "Heatmap") -> "Heatmap":
        if (self.width, self.height) != (other.width, other.height):
            raise ValidationError("cannot merge heatmaps with different grids")
        return Heatmap(self.width, self.height, self.counts + other.counts)


def merge_heatmaps(heatmaps) -> Heatmap:
    heatmaps = list(heatmaps)
    if not heatmaps:
        raise ValidationError("merge_heatmaps needs at least one heatmap")
    out = heatmaps[0]
    for h in heatmaps[1:]:
        out = out.merged_with(h)
    return out


def biodiversity_metric(hotspots: list[Hotspot]) -> float:
    """Total weight of the hotspots currently covered."""
    return float(sum(h.weight for h in hotspots if h.covered))


@dataclass
class RunMetrics:
    """Everything a single run reports."""

    scenario_id: str
    algorithm: str
    levy_weight: float
    seed: int
    steps_to_cover: int | None
    time_to_cover_s: float | None
    biodiversity_b: float
    min_pairwise_distance: float
    collision_interventions: int
    coverage_curve: list[tuple[int, int]] = field(default_factory=list)
    min_pairwise_series: list[float] = field(default_factory=list)
    heatmap: Heatmap | None = None
    recorded_steps: int = 0
    covered_count: int = 0
    n_hotspots: int = 0
    zone_escape_events: int = 0

    @property
    def covered_all(self) -> bool:
        return self.steps_to_cover is not None

    def csv_row(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "algorithm": self.algorithm,
            "levy_weight": _format_float(self.levy_weight),
            "seed": str(self.seed),
            "steps_to_cover": "NA" if self.steps_to_cover is None else str(self.steps_to_cover),
            "time_to_cover_s": (
                "NA" if self.time_to_cover_s is None else _format_float(self.time_to_cover_s)
            ),
            "biodiversity_b": _format_float(self.biodiversity_b),
            "min_pairwise_distance": _format_float(self.min_pairwise_distance),
            "collision_interventions": str(self.collision_interventions),
        }


def _format_float(value: float) -> str:
    return repr(float(value))


def write_runs_csv(metrics_list, path_or_file):
    """One row per run, schema CSV_COLUMNS; uncovered runs get steps 'NA'."""
    if hasattr(path_or_file, "write"):
        _write_runs(metrics_list, path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write_runs(metrics_list, f)


def _write_runs(metrics_list, f):
    writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for m in metrics_list:
        writer.writerow(m.csv_row() if isinstance(m, RunMetrics) else m)


def read_runs_csv(path) -> list[dict]:
    """Parse a runs CSV back into typed dicts (None for 'NA' fields)."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValidationError(
                f"unexpected runs CSV header {reader.fieldnames}, wanted {CSV_COLUMNS}"
            )
        rows = []
        for raw in reader:
            rows.append(
                {
                    "scenario_id": raw["scenario_id"],
                    "algorithm": raw["algorithm"],
                    "levy_weight": float(raw["levy_weight"]),
                    "seed": int(raw["seed"]),
                    "steps_to_cover": (
                        None if raw["steps_to_cover"] == "NA" else int(raw["steps_to_cover"])
                    ),
                    "time_to_cover_s": (
                        None if raw["time_to_cover_s"] == "NA" else float(raw["time_to_cover_s"])
                    ),
                    "biodiversity_b": float(raw["biodiversity_b"]),
                    "min_pairwise_distance": float(raw["min_pairwise_distance"]),
                    "collision_interventions": int(raw["collision_interventions"]),
                }
            )
        return rows


def heatmap_to_pgm(heatmap: Heatmap, path_or_file):
    """Plain-text PGM (P2) picture of the heatmap, scaled to the busiest cell.

    Cell values are rounded to 255 * count / max_count (maxval 255); row 0 of
    the raster is the y = 0 cell row.  Lossy by design — the CSV exporter is
    the lossless companion.
    """
    peak = max(int(heatmap.counts.max()), 1)
    scaled = np.rint(heatmap.counts * (255.0 / peak)).astype(int)
    buf = io.StringIO()
    buf.write(f"P2\n{heatmap.width} {heatmap.height}\n255\n")
    for row in scaled:
        buf.write(" ".join(str(v) for v in row))
        buf.write("\n")
    data = buf.getvalue()
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "w", newline="") as f:
            f.write(data)


def heatmap_to_csv(heatmap: Heatmap, path_or_file):
    """Lossless integer matrix, one CSV row per y-cell row."""
    lines = [",".join(str(v) for v in row) for row in heatmap.counts]
    data = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "w", newline="") as f:
            f.write(data)


def heatmap_from_csv(path) -> Heatmap:
    counts = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    return Heatmap(width=counts.shape[1], height=counts.shape[0], counts=counts)


def write_coverage_curve(metrics: RunMetrics, path_or_file):
    """CSV of (step, covered_count) pairs for one run."""

    def _write(f):
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["step", "covered_count"])
        writer.writerows(metrics.coverage_curve)

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write(f)
