"""Online performance model: per-kernel lookup tables over (cluster, width).

Each kernel gets a matrix of execution-time estimates, zero meaning untrained.
Placement goes through a training phase until every valid cell has been
dispatched once; afterwards predictions read the cell and completions fold in
a weighted average. Frequencies are speculated from cycles / time on every
completion; a detected change wipes the tables and retrains from scratch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .platform import (
    ExecutionPlace,
    FrequencyState,
    PlatformTopology,
    aligned_leaders,
    enumerate_places,
)

UNTRAINED = 0.0


class UntrainedEntryError(LookupError):
    pass


@dataclass
class PerformanceTable:
    """Execution-time estimates for one kernel, clusters x width slots."""

    kernel: str
    topology: PlatformTopology
    ema_weight: float = 0.5
    epoch: int = 0

    def __post_init__(self):
        if not 0.0 < self.ema_weight < 1.0:
            raise ValueError("ema_weight must lie in (0, 1)")
        width_slots = max(len(c.widths()) for c in self.topology.clusters)
        self._width_slots = width_slots
        self.entries = [
            [UNTRAINED] * width_slots for _ in self.topology.clusters
        ]
        # Cells already handed to an in-flight training task (per epoch).
        self._pending: set[tuple[int, int]] = set()

    def _slot(self, cluster: int, width: int) -> int:
        widths = self.topology.clusters[cluster].widths()
        if width not in widths:
            raise ValueError(f"width {width} invalid for cluster {cluster}")
        return widths.index(width)

    def get(self, cluster: int, width: int) -> float:
        return self.entries[cluster][self._slot(cluster, width)]

    def is_trained(self, cluster: int, width: int) -> bool:
        return self.get(cluster, width) != UNTRAINED

    def fully_trained(self) -> bool:
        return all(
            self.is_trained(c.id, w)
            for c in self.topology.clusters
            for w in c.widths()
        )

    def untrained_cells(self) -> list[tuple[int, int]]:
        return [
            (c.id, w)
            for c in self.topology.clusters
            for w in c.widths()
            if not self.is_trained(c.id, w)
        ]

    def needs_training(self) -> bool:
        return bool(self.untrained_cells())

    def mark_pending(self, cluster: int, width: int) -> None:
        self._pending.add((cluster, width))

    def clear_pending(self, cluster: int, width: int) -> None:
        self._pending.discard((cluster, width))

    def next_training_cell(self) -> tuple[int, int] | None:
        """First untrained cell not already dispatched; cluster asc, width asc."""
        for cluster, width in self.untrained_cells():
            if (cluster, width) not in self._pending:
                return cluster, width
        # Everything untrained is in flight: piggyback on the first of them.
        for cluster, width in self.untrained_cells():
            return cluster, width
        return None

    def predict(self, cluster: int, width: int) -> float:
        value = self.get(cluster, width)
        if value == UNTRAINED:
            raise UntrainedEntryError(
                f"kernel {self.kernel}: ({cluster}, {width}) is untrained"
            )
        return value

    def update(self, cluster: int, width: int, observed_seconds: float) -> None:
        if observed_seconds <= 0:
            raise ValueError("observed execution time must be > 0")
        slot = self._slot(cluster, width)
        old = self.entries[cluster][slot]
        if old == UNTRAINED:
            self.entries[cluster][slot] = observed_seconds
        else:
            self.entries[cluster][slot] = (
                self.ema_weight * old + (1.0 - self.ema_weight) * observed_seconds
            )
        self.clear_pending(cluster, width)

    def reset(self) -> None:
        for row in self.entries:
            for i in range(len(row)):
                row[i] = UNTRAINED
        self._pending.clear()
        self.epoch += 1

    def dump(self) -> dict:
        return {
            "kernel": self.kernel,
            "epoch": self.epoch,
            "entries": {
                f"{c.id}": {str(w): self.get(c.id, w) for w in c.widths()}
                for c in self.topology.clusters
            },
        }


def next_training_place(table: PerformanceTable, topology: PlatformTopology,
                        rng: random.Random) -> ExecutionPlace | None:
    """Training placement with the randomized aligned-leader draw."""
    cell = table.next_training_cell()
    if cell is None:
        return None
    cluster, width = cell
    leaders = aligned_leaders(topology, cluster, width)
    leader = leaders[rng.randrange(len(leaders))]
    return ExecutionPlace(leader_core=leader, width=width, cluster=cluster)


class PerformanceModel:
    """All kernels' tables plus the per-cluster frequency the runtime believes.

    The believed frequencies start from the levels read at startup and move
    only when a completion's cycles/time speculation snaps to a different
    level; that event zeroes every table so the whole model retrains at the
    new operating point.
    """

    def __init__(self, topology: PlatformTopology, freq_state: FrequencyState,
                 ema_weight: float = 0.5):
        self.topology = topology
        self.ema_weight = ema_weight
        self._freq_state = freq_state
        self.tables: dict[str, PerformanceTable] = {}
        self.believed_frequency_hz: dict[int, float] = freq_state.snapshot()
        self.detections: list[tuple[int, float, float]] = []

    def table_for(self, kernel: str) -> PerformanceTable:
        table = self.tables.get(kernel)
        if table is None:
            table = PerformanceTable(kernel, self.topology, self.ema_weight)
            self.tables[kernel] = table
        return table

    def observe_frequency(self, cluster: int, cycles: float, seconds: float) -> bool:
        """Speculate the cluster frequency from one completion; True if it moved."""
        if seconds <= 0:
            raise ValueError("seconds must be > 0")
        snapped = self._freq_state.snap(cluster, cycles / seconds)
        previous = self.believed_frequency_hz.get(cluster)
        if previous is None:
            self.believed_frequency_hz[cluster] = snapped
            return False
        if snapped == previous:
            return False
        self.believed_frequency_hz[cluster] = snapped
        for table in self.tables.values():
            table.reset()
        self.detections.append((cluster, previous, snapped))
        return True

    def dump(self) -> dict:
        return {
            "believed_frequency_hz": {str(c): f for c, f in self.believed_frequency_hz.items()},
            "detections": [
                {"cluster": c, "from_hz": a, "to_hz": b} for c, a, b in self.detections
            ],
            "tables": {name: t.dump() for name, t in sorted(self.tables.items())},
        }


def expected_table_shape(topology: PlatformTopology) -> tuple[int, int]:
    """Clusters x width slots, the size law the lookup tables must obey."""
    return len(topology.clusters), max(len(c.widths()) for c in topology.clusters)
