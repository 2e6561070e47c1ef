"""Task DAGs, the synthetic generator and the ground-truth task cost model.

The cost model is the simulator's stand-in for silicon: it decides how long a
task of a kernel really takes on a given place at a given frequency, and what
its performance counters look like. The preset kernels are calibrated so the
per-place energy/time orderings seen on a Denver+A57 board hold (matmul: D_2
cheapest and fastest; copy: A_1 cheapest, widest places fast but costly).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .platform import ExecutionPlace, PlatformTopology

COUNTER_CACHE_LINE_BYTES = 64.0


@dataclass(frozen=True)
class KernelSpec:
    """A family of identical tasks.

    work_units is the single-core execution time (seconds) on a cluster with
    perf_coefficient 1.0 at the platform's reference frequency.
    frequency_sensitivity is 1 for fully compute-bound scaling, 0 for
    frequency-insensitive. width_efficiency maps a core-type tag (or
    "default") to {width: efficiency in (0, 1]}.
    """

    name: str
    work_units: float
    flops_per_cycle: float
    ai_reference: float
    frequency_sensitivity: float
    width_efficiency: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.work_units <= 0:
            raise ValueError("work_units must be > 0")
        if not 0.0 <= self.frequency_sensitivity <= 1.0:
            raise ValueError("frequency_sensitivity must lie in [0, 1]")
        for tag, table in self.width_efficiency.items():
            if table.get(1, 1.0) != 1.0:
                raise ValueError(f"{self.name}/{tag}: width-1 efficiency must be 1")
            last = 1.0
            for width in sorted(table):
                eff = table[width]
                if not 0.0 < eff <= 1.0:
                    raise ValueError(f"{self.name}/{tag}: efficiency must be in (0, 1]")
                if eff > last:
                    raise ValueError(f"{self.name}/{tag}: efficiency must be non-increasing")
                last = eff

    def efficiency(self, tag: str, width: int) -> float:
        table = self.width_efficiency.get(tag) or self.width_efficiency.get("default") or {}
        if width in table:
            return table[width]
        if width == 1:
            return 1.0
        raise ValueError(f"kernel {self.name}: no efficiency for width {width} on {tag!r}")

    def ai_at(self, frequency_hz: float, reference_hz: float) -> float:
        """Arithmetic intensity drifts with frequency for partially bound kernels."""
        ratio = frequency_hz / reference_hz
        return self.ai_reference * ratio ** (1.0 - self.frequency_sensitivity)


@dataclass
class TaskNode:
    id: int
    kernel: KernelSpec
    predecessors: list[int] = field(default_factory=list)
    successors: list[int] = field(default_factory=list)
    critical: bool = False
    unreleased_dependency_count: int = 0


@dataclass
class TaskDag:
    nodes: list[TaskNode]
    root_ids: list[int]
    dop_target: int
    critical_path_len: int

    def __len__(self) -> int:
        return len(self.nodes)

    def reset_dependency_counts(self) -> None:
        for node in self.nodes:
            node.unreleased_dependency_count = len(node.predecessors)

    def topological_order(self) -> list[int]:
        """Kahn's algorithm; raises if the graph has a cycle."""
        remaining = {n.id: len(n.predecessors) for n in self.nodes}
        ready = [nid for nid, deg in remaining.items() if deg == 0]
        order = []
        while ready:
            nid = ready.pop()
            order.append(nid)
            for succ in self.nodes[nid].successors:
                remaining[succ] -= 1
                if remaining[succ] == 0:
                    ready.append(succ)
        if len(order) != len(self.nodes):
            raise ValueError("task graph contains a cycle")
        return order

    def longest_path_len(self) -> int:
        depth = {}
        for nid in self.topological_order():
            node = self.nodes[nid]
            depth[nid] = 1 + max((depth[p] for p in node.predecessors), default=0)
        return max(depth.values(), default=0)

    def to_edge_list(self) -> str:
        """Plain-text export: one `pred succ` pair per line, roots listed first."""
        lines = [f"# tasks={len(self.nodes)} roots={','.join(map(str, self.root_ids))}"]
        for node in self.nodes:
            for succ in node.successors:
                lines.append(f"{node.id}\t{succ}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edges(cls, n: int, edges: list[tuple[int, int]], kernel: KernelSpec,
                   critical: set[int] | None = None) -> "TaskDag":
        nodes = [TaskNode(i, kernel) for i in range(n)]
        for pred, succ in edges:
            nodes[pred].successors.append(succ)
            nodes[succ].predecessors.append(pred)
        for node in nodes:
            node.critical = node.id in (critical or set())
        roots = [n.id for n in nodes if not n.predecessors]
        dag = cls(nodes=nodes, root_ids=roots, dop_target=1, critical_path_len=0)
        dag.critical_path_len = dag.longest_path_len()
        dag.reset_dependency_counts()
        return dag


def generate_synthetic_dag(dop: int, total_tasks: int, kernel: KernelSpec,
                           seed: int = 0) -> TaskDag:
    """Spawn-tree benchmark DAG with configurable parallelism.

    The root releases dop children; the first child of every spawner keeps
    spawning dop more until total_tasks exist. Tasks that spawn the maximum
    number of children are the critical ones (for dop == 1 the whole chain is
    the critical path).
    """
    if dop < 1 or total_tasks < 1:
        raise ValueError("dop and total_tasks must be >= 1")
    if total_tasks > 1 and dop > total_tasks - 1:
        raise ValueError(f"dop={dop} needs at least {dop + 1} tasks")
    nodes = [TaskNode(0, kernel)]
    spawner = 0
    while len(nodes) < total_tasks:
        children = []
        for _ in range(min(dop, total_tasks - len(nodes))):
            child = TaskNode(len(nodes), kernel, predecessors=[spawner])
            nodes[spawner].successors.append(child.id)
            nodes.append(child)
            children.append(child.id)
        spawner = children[0]
    max_spawned = max(len(n.successors) for n in nodes)
    for node in nodes:
        node.critical = dop == 1 or (max_spawned > 0 and len(node.successors) == max_spawned)
    dag = TaskDag(nodes=nodes, root_ids=[0], dop_target=dop, critical_path_len=0)
    dag.critical_path_len = dag.longest_path_len()
    dag.reset_dependency_counts()
    return dag


def ground_truth_time(kernel: KernelSpec, place: ExecutionPlace, frequency_hz: float,
                      topology: PlatformTopology) -> float:
    """Noiseless execution time of one task of the kernel on a place (seconds)."""
    spec = topology.clusters[place.cluster]
    freq_factor = (frequency_hz / topology.reference_frequency_hz) ** kernel.frequency_sensitivity
    eff = kernel.efficiency(spec.core_type_tag, place.width)
    return kernel.work_units / (spec.perf_coefficient * freq_factor * place.width * eff)


def emit_counters(kernel: KernelSpec, place: ExecutionPlace, frequency_hz: float,
                  topology: PlatformTopology,
                  actual_seconds: float | None = None) -> tuple[float, float, float]:
    """(cycles, flops_per_cycle, cache_misses) observed by the place's leader.

    cycles always equal execution time times the cluster frequency, so the
    scheduler's frequency speculation sees the level exactly. Cache misses are
    back-computed from the kernel's intended arithmetic intensity at the
    current frequency.
    """
    seconds = actual_seconds
    if seconds is None:
        seconds = ground_truth_time(kernel, place, frequency_hz, topology)
    cycles = seconds * frequency_hz
    ai = kernel.ai_at(frequency_hz, topology.reference_frequency_hz)
    misses = cycles * kernel.flops_per_cycle / (COUNTER_CACHE_LINE_BYTES * ai)
    return cycles, kernel.flops_per_cycle, misses


def noisy_duration(base_seconds: float, sigma: float, rng: random.Random) -> float:
    """Log-normal jitter on a ground-truth time; sigma 0 means deterministic."""
    if sigma <= 0:
        return base_seconds
    return base_seconds * rng.lognormvariate(0.0, sigma)


# Preset kernels. AI targets at 2.04 GHz / 0.35 GHz follow the measured pairs
# 423.8/400.6 (matmul), 2.07/1.03 (copy), 17.23/16.88 (stencil), 31.5/23.8
# (sparse LU mix); the frequency sensitivities reproduce the low-frequency AI.
def _kernel_presets() -> dict[str, KernelSpec]:
    matmul_eff = {
        "denver": {1: 1.0, 2: 1.0},
        "a57": {1: 1.0, 2: 0.98, 4: 0.95},
        "default": {1: 1.0, 2: 0.98, 4: 0.95, 8: 0.92, 16: 0.90},
    }
    copy_eff = {
        "denver": {1: 1.0, 2: 0.55},
        "a57": {1: 1.0, 2: 0.55, 4: 0.30},
        "default": {1: 1.0, 2: 0.55, 4: 0.30, 8: 0.16, 16: 0.085},
    }
    stencil_eff = {
        "denver": {1: 1.0, 2: 0.90},
        "a57": {1: 1.0, 2: 0.90, 4: 0.80},
        "default": {1: 1.0, 2: 0.90, 4: 0.80, 8: 0.70, 16: 0.60},
    }
    slu_eff = {
        "denver": {1: 1.0, 2: 0.92},
        "a57": {1: 1.0, 2: 0.90, 4: 0.85},
        "default": {1: 1.0, 2: 0.92, 4: 0.85, 8: 0.78, 16: 0.70},
    }
    return {
        "matmul": KernelSpec("matmul", 1.0e-3, 2.0, 423.8, 0.968, matmul_eff),
        "copy": KernelSpec("copy", 1.0e-3, 0.1, 2.07, 0.600, copy_eff),
        "stencil": KernelSpec("stencil", 1.0e-3, 0.5, 17.23, 0.988, stencil_eff),
        "sparselu-mix": KernelSpec("sparselu-mix", 1.0e-3, 1.0, 31.5, 0.842, slu_eff),
    }


KERNEL_PRESETS = _kernel_presets()


def kernel_from_dict(data: dict) -> KernelSpec:
    eff = {
        tag: {int(w): float(e) for w, e in table.items()}
        for tag, table in data.get("width_efficiency", {}).items()
    }
    return KernelSpec(
        name=str(data["name"]),
        work_units=float(data["work_units"]),
        flops_per_cycle=float(data.get("flops_per_cycle", 1.0)),
        ai_reference=float(data.get("ai_reference", 100.0)),
        frequency_sensitivity=float(data.get("frequency_sensitivity", 1.0)),
        width_efficiency=eff,
    )


def load_kernel(source: "str | dict") -> KernelSpec:
    if isinstance(source, dict):
        return kernel_from_dict(source)
    if source in KERNEL_PRESETS:
        return KERNEL_PRESETS[source]
    raise ValueError(f"unknown kernel preset {source!r}")
