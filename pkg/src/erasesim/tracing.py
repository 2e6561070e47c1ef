"""Core activity tracing: the live status board and resource occupation.

status[core] is 1 while the core is considered active and 0 from the moment it
enters back-off sleep until it next dequeues work. The mapper divides idle
power among concurrent tasks by resource occupation: a task's width over the
cluster's effective active count, where cores the task would wake count as
active.
"""

from __future__ import annotations

from .platform import ExecutionPlace, PlatformTopology

ACTIVE = 1
SLEEP = 0


class CoreStatusBoard:
    def __init__(self, topology: PlatformTopology):
        self.topology = topology
        self.status = [ACTIVE] * topology.total_cores
        self.last_transition_s = [0.0] * topology.total_cores

    def set_active(self, core: int, now: float = 0.0) -> None:
        self.status[core] = ACTIVE
        self.last_transition_s[core] = now

    def set_sleep(self, core: int, now: float = 0.0) -> None:
        self.status[core] = SLEEP
        self.last_transition_s[core] = now

    def is_active(self, core: int) -> bool:
        return self.status[core] == ACTIVE


def count_active(board: CoreStatusBoard, cluster: int) -> int:
    return sum(board.status[c] for c in board.topology.cluster_cores(cluster))


def effective_active_for_place(board: CoreStatusBoard, place: ExecutionPlace) -> int:
    """Cluster actives plus the place's sleeping cores, which would wake to run it."""
    active = count_active(board, place.cluster)
    woken = sum(
        1 for c in place.cores(board.topology) if board.status[c] == SLEEP
    )
    return active + woken


def resource_occupation(width: int, effective_active: int) -> float:
    """The task's share of its cluster's idle power, in (0, 1]."""
    if width < 1:
        raise ValueError("width must be >= 1")
    if effective_active < width:
        raise ValueError(
            f"effective active count {effective_active} below width {width}"
        )
    return width / effective_active
