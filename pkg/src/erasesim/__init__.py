"""Discrete-event simulation of energy-aware work-stealing task scheduling."""

__version__ = "0.1.0"

from .engine import SimOptions, SimReport, Simulator, integrate_energy, run
from .platform import (
    ClusterSpec,
    ExecutionPlace,
    FrequencyState,
    PlatformTopology,
    aligned_leaders,
    enumerate_places,
    load_topology,
)
from .powermodel import (
    PowerProfile,
    TaskType,
    arithmetic_intensity,
    classify,
    derive_thresholds,
    lookup_power,
)
from .workload import (
    KERNEL_PRESETS,
    KernelSpec,
    TaskDag,
    TaskNode,
    emit_counters,
    generate_synthetic_dag,
    ground_truth_time,
)

__all__ = [
    "ClusterSpec",
    "ExecutionPlace",
    "FrequencyState",
    "KERNEL_PRESETS",
    "KernelSpec",
    "PlatformTopology",
    "PowerProfile",
    "SimOptions",
    "SimReport",
    "Simulator",
    "TaskDag",
    "TaskNode",
    "TaskType",
    "aligned_leaders",
    "arithmetic_intensity",
    "classify",
    "derive_thresholds",
    "emit_counters",
    "enumerate_places",
    "generate_synthetic_dag",
    "ground_truth_time",
    "integrate_energy",
    "load_topology",
    "lookup_power",
    "run",
]
