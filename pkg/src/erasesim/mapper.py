"""Energy-minimizing task mapping.

For every ready task the mapper walks all (cluster, width) configurations,
prices each one as (idle power share + runtime power) x predicted time, and
takes the cheapest. Idle power is attributed by resource occupation: a
candidate on cluster A is charged A's idle power when any other cluster still
has active cores, and the whole chip's idle power otherwise. While a kernel's
lookup table still has untrained cells the task is routed to the next
training place instead and no energy comparison happens.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .perfmodel import PerformanceModel, next_training_place
from .platform import (
    ExecutionPlace,
    PlatformTopology,
    aligned_leaders,
    enumerate_places,
)
from .powermodel import PowerProfile, TaskType, lookup_power
from .tracing import CoreStatusBoard, count_active, effective_active_for_place, resource_occupation
from .workload import TaskNode


@dataclass(frozen=True)
class EnergyEstimate:
    place: ExecutionPlace
    idle_power_share_mw: float
    runtime_power_mw: float
    predicted_seconds: float
    predicted_energy_mj: float


@dataclass
class Placement:
    """Outcome of mapping one ready task."""

    place: ExecutionPlace
    training: bool = False
    estimate: EnergyEstimate | None = None
    alternatives: tuple[EnergyEstimate, ...] = ()
    pending_cell: tuple[int, int] | None = None
    epoch: int = 0
    predicted_seconds: float | None = None

    def __post_init__(self):
        if self.estimate is not None and self.predicted_seconds is None:
            self.predicted_seconds = self.estimate.predicted_seconds


class SchedulerContext:
    """Everything the scheduler side can see: board, tables, profile, beliefs.

    Ground truth (actual frequencies, actual durations) lives in the engine;
    the context only learns about it through completions.
    """

    def __init__(self, topology: PlatformTopology, board: CoreStatusBoard,
                 profile: PowerProfile, perf: PerformanceModel, rng: random.Random):
        self.topology = topology
        self.board = board
        self.profile = profile
        self.perf = perf
        self.rng = rng
        # (kernel name, snapped frequency hz) -> TaskType, set on first completion.
        self._classifications: dict[tuple[str, float], TaskType] = {}
        self._latest_type: dict[str, TaskType] = {}

    def record_classification(self, kernel: str, frequency_hz: float, ai: float) -> TaskType:
        key = (kernel, frequency_hz)
        if key not in self._classifications:
            self._classifications[key] = self.profile.classify_ai(ai)
        self._latest_type[kernel] = self._classifications[key]
        return self._classifications[key]

    def task_type_for(self, kernel: str, frequency_hz: float) -> TaskType:
        ttype = self._classifications.get((kernel, frequency_hz))
        if ttype is not None:
            return ttype
        ttype = self._latest_type.get(kernel)
        if ttype is None:
            raise LookupError(f"kernel {kernel!r} has no classified instances yet")
        return ttype


def idle_power_base(profile: PowerProfile, board: CoreStatusBoard, cluster: int) -> float:
    """Cluster idle if any other cluster is active, else the whole chip's idle."""
    others_active = any(
        count_active(board, other.id) > 0
        for other in board.topology.clusters
        if other.id != cluster
    )
    return profile.idle_power_cluster_mw[cluster] if others_active else profile.idle_power_chip_mw


def estimate_energy(ctx: SchedulerContext, kernel: str, place: ExecutionPlace) -> EnergyEstimate:
    """Price one candidate place for one task of a kernel."""
    base = idle_power_base(ctx.profile, ctx.board, place.cluster)
    effective = effective_active_for_place(ctx.board, place)
    occupation = resource_occupation(place.width, effective)
    idle_share = base * occupation
    frequency = ctx.perf.believed_frequency_hz[place.cluster]
    ttype = ctx.task_type_for(kernel, frequency)
    runtime = lookup_power(ctx.profile, ttype, place.cluster, frequency, place.width)
    seconds = ctx.perf.table_for(kernel).predict(place.cluster, place.width)
    return EnergyEstimate(
        place=place,
        idle_power_share_mw=idle_share,
        runtime_power_mw=runtime,
        predicted_seconds=seconds,
        predicted_energy_mj=(idle_share + runtime) * seconds,
    )


class ErasePolicy:
    """The energy-aware mapper plus its training detour."""

    name = "erase"
    uses_tables = True

    def place(self, task: TaskNode, releasing_core: int, ctx: SchedulerContext) -> Placement:
        table = ctx.perf.table_for(task.kernel.name)
        if table.needs_training():
            place = next_training_place(table, ctx.topology, ctx.rng)
            table.mark_pending(place.cluster, place.width)
            return Placement(
                place=place,
                training=True,
                pending_cell=(place.cluster, place.width),
                epoch=table.epoch,
            )
        best = None
        estimates = []
        for cluster, width in enumerate_places(ctx.topology):
            leaders = aligned_leaders(ctx.topology, cluster, width)
            leader = leaders[ctx.rng.randrange(len(leaders))]
            candidate = ExecutionPlace(leader_core=leader, width=width, cluster=cluster)
            est = estimate_energy(ctx, task.kernel.name, candidate)
            estimates.append(est)
            if best is None or est.predicted_energy_mj < best.predicted_energy_mj:
                best = est
        return Placement(
            place=best.place,
            training=False,
            estimate=best,
            alternatives=tuple(estimates),
            epoch=table.epoch,
        )

    def allowed_victims(self, core: int, topology: PlatformTopology) -> list[int]:
        cluster = topology.cluster_of_core(core)
        return [c for c in topology.cluster_cores(cluster) if c != core]

    def stealable(self, task: TaskNode, placement: Placement) -> bool:
        return True
