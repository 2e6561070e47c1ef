"""Machine model: core clusters, discrete frequency levels and execution places.

A platform is a set of homogeneous core clusters. A task runs on an
*execution place*: a contiguous, aligned group of cores inside one cluster,
identified by (leader core, resource width). Valid widths are the powers of
two that fit in the cluster, so a Denver2+A57x4 board exposes the five places
D_1, D_2, A_1, A_2 and A_4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ClusterSpec:
    """One cluster of identical cores."""

    id: int
    core_count: int
    core_type_tag: str
    frequency_levels_hz: tuple[float, ...]
    perf_coefficient: float

    def __post_init__(self):
        if self.core_count < 1:
            raise ValueError(f"cluster {self.id}: core_count must be >= 1")
        if self.perf_coefficient <= 0:
            raise ValueError(f"cluster {self.id}: perf_coefficient must be > 0")
        levels = tuple(float(f) for f in self.frequency_levels_hz)
        if not levels or any(f <= 0 for f in levels):
            raise ValueError(f"cluster {self.id}: frequency levels must be positive")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"cluster {self.id}: frequency levels must be strictly increasing")
        object.__setattr__(self, "frequency_levels_hz", levels)

    @property
    def min_frequency_hz(self) -> float:
        return self.frequency_levels_hz[0]

    @property
    def max_frequency_hz(self) -> float:
        return self.frequency_levels_hz[-1]

    def widths(self) -> list[int]:
        """Valid resource widths: powers of two up to the core count."""
        out = []
        w = 1
        while w <= self.core_count:
            out.append(w)
            w *= 2
        return out

    def resolve_frequency(self, level: "int | float | str") -> float:
        """Map a level index, named alias (min/max) or Hz value to a configured level."""
        if isinstance(level, str):
            name = level.strip().lower()
            if name == "min":
                return self.min_frequency_hz
            if name == "max":
                return self.max_frequency_hz
            try:
                level = float(name) if "." in name or "e" in name else int(name)
            except ValueError:
                raise ValueError(f"cluster {self.id}: unknown frequency alias {level!r}") from None
        if isinstance(level, int) and 0 <= level < len(self.frequency_levels_hz):
            return self.frequency_levels_hz[level]
        value = float(level)
        if value in self.frequency_levels_hz:
            return value
        raise ValueError(
            f"cluster {self.id}: {level!r} is not a configured frequency level"
        )


@dataclass(frozen=True)
class PlatformTopology:
    """Clusters plus the contiguous cluster-major global core numbering."""

    name: str
    clusters: tuple[ClusterSpec, ...]
    reference_frequency_hz: float = 0.0

    def __post_init__(self):
        clusters = tuple(self.clusters)
        if not clusters:
            raise ValueError("topology needs at least one cluster")
        for expect, cluster in enumerate(clusters):
            if cluster.id != expect:
                raise ValueError(f"cluster ids must be 0..n-1 in order, got {cluster.id}")
        object.__setattr__(self, "clusters", clusters)
        if self.reference_frequency_hz <= 0:
            object.__setattr__(
                self, "reference_frequency_hz", clusters[0].max_frequency_hz
            )

    @property
    def total_cores(self) -> int:
        return sum(c.core_count for c in self.clusters)

    def cluster_base(self, cluster_id: int) -> int:
        """Global id of the cluster's first core."""
        return sum(c.core_count for c in self.clusters[:cluster_id])

    def cluster_cores(self, cluster_id: int) -> range:
        base = self.cluster_base(cluster_id)
        return range(base, base + self.clusters[cluster_id].core_count)

    def cluster_of_core(self, core: int) -> int:
        if core < 0 or core >= self.total_cores:
            raise ValueError(f"core {core} out of range")
        base = 0
        for cluster in self.clusters:
            if core < base + cluster.core_count:
                return cluster.id
            base += cluster.core_count
        raise AssertionError("unreachable")

    def place_count(self) -> int:
        return sum(len(c.widths()) for c in self.clusters)


@dataclass(frozen=True)
class ExecutionPlace:
    """(leader core, resource width) tuple naming the cores a task runs on."""

    leader_core: int
    width: int
    cluster: int

    def cores(self, topology: PlatformTopology) -> range:
        return range(self.leader_core, self.leader_core + self.width)

    def validate(self, topology: PlatformTopology) -> None:
        spec = topology.clusters[self.cluster]
        base = topology.cluster_base(self.cluster)
        if self.width not in spec.widths():
            raise ValueError(f"width {self.width} invalid for cluster {self.cluster}")
        if (self.leader_core - base) % self.width != 0:
            raise ValueError(f"leader {self.leader_core} misaligned for width {self.width}")
        if self.leader_core < base or self.leader_core + self.width > base + spec.core_count:
            raise ValueError("place spills outside its cluster")


class FrequencyState:
    """Per-cluster current frequency; cores in a cluster always share one value."""

    def __init__(self, topology: PlatformTopology, levels: dict[int, "int | float | str"] | None = None):
        self._topology = topology
        self._current = {}
        for cluster in topology.clusters:
            wanted = (levels or {}).get(cluster.id, "max")
            self._current[cluster.id] = cluster.resolve_frequency(wanted)

    def get(self, cluster_id: int) -> float:
        return self._current[cluster_id]

    def set(self, cluster_id: int, level: "int | float | str") -> float:
        value = self._topology.clusters[cluster_id].resolve_frequency(level)
        self._current[cluster_id] = value
        return value

    def snapshot(self) -> dict[int, float]:
        return dict(self._current)

    def snap(self, cluster_id: int, raw_hz: float) -> float:
        """Nearest configured level of the cluster to a speculated frequency."""
        levels = self._topology.clusters[cluster_id].frequency_levels_hz
        return min(levels, key=lambda f: abs(f - raw_hz))


def enumerate_places(topology: PlatformTopology) -> list[tuple[int, int]]:
    """All (cluster, width) configurations, cluster ascending then width ascending."""
    out = []
    for cluster in topology.clusters:
        for width in cluster.widths():
            out.append((cluster.id, width))
    return out


def aligned_leaders(topology: PlatformTopology, cluster_id: int, width: int) -> list[int]:
    """Global ids of the valid leader cores for a width inside a cluster."""
    spec = topology.clusters[cluster_id]
    if width not in spec.widths():
        raise ValueError(f"width {width} invalid for cluster {cluster_id}")
    base = topology.cluster_base(cluster_id)
    slots = spec.core_count // width
    return [base + k * width for k in range(slots)]


def align_leader_for_core(topology: PlatformTopology, core: int, width: int) -> int:
    """The aligned leader whose place of the given width contains the core."""
    cluster_id = topology.cluster_of_core(core)
    spec = topology.clusters[cluster_id]
    if width not in spec.widths():
        raise ValueError(f"width {width} invalid for cluster {cluster_id}")
    base = topology.cluster_base(cluster_id)
    leader = base + ((core - base) // width) * width
    # Last partial slot folds back onto the final aligned slot.
    if leader + width > base + spec.core_count:
        leader = base + (spec.core_count // width - 1) * width
    return leader


# TX2 cpufreq table (kHz sysfs values); the board names only the extremes,
# MIN ~0.35 GHz and MAX ~2.04 GHz.
_TX2_LEVELS_HZ = tuple(
    k * 1e3
    for k in (
        345600, 499200, 652800, 806400, 960000, 1113600,
        1267200, 1420800, 1574400, 1728000, 1881600, 2035200,
    )
)


def tx2_topology() -> PlatformTopology:
    """Denver x2 + A57 x4 board with cluster-level DVFS, 12 shared levels."""
    return PlatformTopology(
        name="tx2",
        clusters=(
            ClusterSpec(0, 2, "denver", _TX2_LEVELS_HZ, 1.0),
            ClusterSpec(1, 4, "a57", _TX2_LEVELS_HZ, 0.5),
        ),
        reference_frequency_hz=_TX2_LEVELS_HZ[-1],
    )


def symmetric16_topology() -> PlatformTopology:
    """Single 16-core cluster, two frequency levels."""
    return PlatformTopology(
        name="sym16",
        clusters=(ClusterSpec(0, 16, "xeon", (1.0e9, 2.0e9), 1.0),),
        reference_frequency_hz=2.0e9,
    )


_PRESETS = {"tx2": tx2_topology, "sym16": symmetric16_topology}


def topology_from_dict(data: dict) -> PlatformTopology:
    clusters = tuple(
        ClusterSpec(
            id=i,
            core_count=int(c["core_count"]),
            core_type_tag=str(c.get("core_type_tag", f"type{i}")),
            frequency_levels_hz=tuple(float(f) for f in c["frequency_levels_hz"]),
            perf_coefficient=float(c.get("perf_coefficient", 1.0)),
        )
        for i, c in enumerate(data["clusters"])
    )
    return PlatformTopology(
        name=str(data.get("name", "custom")),
        clusters=clusters,
        reference_frequency_hz=float(data.get("reference_frequency_hz", 0.0)),
    )


def topology_to_dict(topology: PlatformTopology) -> dict:
    return {
        "name": topology.name,
        "reference_frequency_hz": topology.reference_frequency_hz,
        "clusters": [
            {
                "core_count": c.core_count,
                "core_type_tag": c.core_type_tag,
                "frequency_levels_hz": list(c.frequency_levels_hz),
                "perf_coefficient": c.perf_coefficient,
            }
            for c in topology.clusters
        ],
    }


def load_topology(source: str) -> PlatformTopology:
    """Resolve a preset name or a JSON config file path."""
    if source in _PRESETS:
        return _PRESETS[source]()
    with open(source) as fh:
        return topology_from_dict(json.load(fh))
