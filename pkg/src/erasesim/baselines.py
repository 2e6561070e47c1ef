"""Comparison schedulers run against the same engine as the energy-aware mapper.

RWS is plain random work stealing at width 1. CATS splits critical tasks onto
the fast cluster and the rest onto slow cores, letting fast cores steal from
anywhere. CALC adds moldability to criticality scheduling by minimizing
parallel execution cost (time x width) using the shared performance tables.
"""

from __future__ import annotations

from enum import Enum

from .mapper import ErasePolicy, Placement, SchedulerContext
from .perfmodel import next_training_place
from .platform import (
    ExecutionPlace,
    PlatformTopology,
    align_leader_for_core,
    aligned_leaders,
    enumerate_places,
)
from .workload import TaskNode


class SchedulerPolicy(Enum):
    ERASE = "erase"
    RWS = "rws"
    CATS = "cats"
    CALC = "calc"


class RwsPolicy:
    """Width-1 placement on the releasing core; balance comes from stealing."""

    name = "rws"
    uses_tables = False

    def place(self, task: TaskNode, releasing_core: int, ctx: SchedulerContext) -> Placement:
        cluster = ctx.topology.cluster_of_core(releasing_core)
        return Placement(place=ExecutionPlace(releasing_core, 1, cluster))

    def allowed_victims(self, core: int, topology: PlatformTopology) -> list[int]:
        cluster = topology.cluster_of_core(core)
        return [c for c in topology.cluster_cores(cluster) if c != core]

    def stealable(self, task: TaskNode, placement: Placement) -> bool:
        return True


class CatsPolicy:
    """Critical tasks to the fast cluster, the rest to slow cores, width 1."""

    name = "cats"
    uses_tables = False

    def __init__(self, topology: PlatformTopology, initial_frequency_hz: dict[int, float]):
        speeds = {
            c.id: c.perf_coefficient * initial_frequency_hz[c.id] for c in topology.clusters
        }
        fastest = max(speeds.values())
        fast = [cid for cid, s in speeds.items() if s == fastest]
        if len(fast) == len(topology.clusters):
            raise ValueError("CATS needs an asymmetric platform: no cluster is faster")
        self.fast_cluster = min(fast)
        self.slow_clusters = [c.id for c in topology.clusters if c.id != self.fast_cluster]

    def place(self, task: TaskNode, releasing_core: int, ctx: SchedulerContext) -> Placement:
        if task.critical:
            cluster = self.fast_cluster
        elif len(self.slow_clusters) == 1:
            cluster = self.slow_clusters[0]
        else:
            cluster = self.slow_clusters[ctx.rng.randrange(len(self.slow_clusters))]
        cores = list(ctx.topology.cluster_cores(cluster))
        leader = cores[ctx.rng.randrange(len(cores))]
        return Placement(place=ExecutionPlace(leader, 1, cluster))

    def allowed_victims(self, core: int, topology: PlatformTopology) -> list[int]:
        # Fast cores steal from everyone, slow cores only inside their cluster.
        if topology.cluster_of_core(core) == self.fast_cluster:
            return [c for c in range(topology.total_cores) if c != core]
        cluster = topology.cluster_of_core(core)
        return [c for c in topology.cluster_cores(cluster) if c != core]

    def stealable(self, task: TaskNode, placement: Placement) -> bool:
        return True


class CalcPolicy:
    """Criticality-aware low cost: minimize predicted time x width.

    Critical tasks take the global cost argmin over every configuration and
    are pinned (not stealable); non-critical tasks keep the releasing core's
    alignment and only pick a width. Shares the training path of the
    performance tables.
    """

    name = "calc"
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
        if task.critical:
            best = None
            for cluster, width in enumerate_places(ctx.topology):
                cost = table.predict(cluster, width) * width
                key = (cost, width, cluster)
                if best is None or key < best[0]:
                    best = (key, cluster, width)
            _, cluster, width = best
            leaders = aligned_leaders(ctx.topology, cluster, width)
            leader = leaders[ctx.rng.randrange(len(leaders))]
        else:
            cluster = ctx.topology.cluster_of_core(releasing_core)
            widths = ctx.topology.clusters[cluster].widths()
            best = None
            for width in widths:
                cost = table.predict(cluster, width) * width
                if best is None or (cost, width) < best[0]:
                    best = ((cost, width), width)
            width = best[1]
            leader = align_leader_for_core(ctx.topology, releasing_core, width)
        place = ExecutionPlace(leader, width, cluster)
        seconds = table.predict(cluster, width)
        return Placement(place=place, predicted_seconds=seconds, epoch=table.epoch)

    def allowed_victims(self, core: int, topology: PlatformTopology) -> list[int]:
        cluster = topology.cluster_of_core(core)
        return [c for c in topology.cluster_cores(cluster) if c != core]

    def stealable(self, task: TaskNode, placement: Placement) -> bool:
        return not task.critical


def build_policy(name: "str | SchedulerPolicy", topology: PlatformTopology,
                 initial_frequency_hz: dict[int, float]):
    policy = SchedulerPolicy(name) if isinstance(name, str) else name
    if policy is SchedulerPolicy.ERASE:
        return ErasePolicy()
    if policy is SchedulerPolicy.RWS:
        return RwsPolicy()
    if policy is SchedulerPolicy.CATS:
        return CatsPolicy(topology, initial_frequency_hz)
    if policy is SchedulerPolicy.CALC:
        return CalcPolicy()
    raise ValueError(f"unknown policy {name!r}")
