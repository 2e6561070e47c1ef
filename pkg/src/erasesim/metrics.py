"""Post-run analytics: prediction error, energy-delay product, overheads."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass


@dataclass(frozen=True)
class PredictionRecord:
    task_id: int
    predicted_seconds: float
    actual_seconds: float
    predicted_energy_mj: float
    actual_energy_mj: float

    def __post_init__(self):
        if self.actual_seconds <= 0 or self.actual_energy_mj <= 0:
            raise ValueError("actual values must be > 0")


_FIELDS = {
    "time": ("predicted_seconds", "actual_seconds"),
    "energy": ("predicted_energy_mj", "actual_energy_mj"),
}


def mape(records: list[PredictionRecord], field: str = "time") -> float:
    """Mean absolute percentage error of predictions against actuals."""
    if not records:
        raise ValueError("mape needs at least one record")
    pred_name, real_name = _FIELDS[field]
    total = 0.0
    for rec in records:
        real = getattr(rec, real_name)
        pred = getattr(rec, pred_name)
        total += abs((real - pred) / real)
    return total / len(records) * 100.0


def edp(energy_j: float, time_s: float) -> float:
    """Energy-delay product in joule-seconds."""
    if energy_j < 0 or time_s < 0:
        raise ValueError("energy and time must be >= 0")
    return energy_j * time_s


def overhead_fraction(report) -> float:
    """Average share of core time spent outside task execution and sleep (%)."""
    makespan = report.makespan_s
    if makespan <= 0:
        return 0.0
    total = 0.0
    for core in report.per_core:
        total += 1.0 - (core.task_time_s + core.sleep_time_s) / makespan
    return total / len(report.per_core) * 100.0


def distributions(report) -> dict:
    """Normalized task-per-place histogram and per-core time split."""
    counts = report.place_task_counts
    total_tasks = sum(counts.values())
    place_fractions = {
        key: n / total_tasks for key, n in sorted(counts.items())
    } if total_tasks else {}
    per_core = {}
    for core in report.per_core:
        makespan = report.makespan_s or 1.0
        per_core[core.core] = {
            "task": core.task_time_s / makespan,
            "sleep": core.sleep_time_s / makespan,
            "overhead": core.overhead_time_s / makespan,
        }
    return {"places": place_fractions, "per_core_time": per_core}


def records_to_csv(records: list[PredictionRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["task_id", "predicted_seconds", "actual_seconds",
         "predicted_energy_mj", "actual_energy_mj"]
    )
    for rec in records:
        writer.writerow(
            [rec.task_id, repr(rec.predicted_seconds), repr(rec.actual_seconds),
             repr(rec.predicted_energy_mj), repr(rec.actual_energy_mj)]
        )
    return buf.getvalue()
