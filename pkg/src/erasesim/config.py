"""Experiment configuration: a JSON-serializable description of one run."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass
class ExperimentConfig:
    platform: str = "tx2"
    kernel: str = "matmul"
    dop: int = 4
    total_tasks: int = 10000
    policy: str = "erase"
    frequency: dict[str, str] = field(default_factory=dict)  # cluster id -> level/alias
    dvfs_schedule: "list | dict | None" = None
    dvfs_detection: bool = True
    seed: int = 1
    repetitions: int = 1
    noise_sigma: float = 0.0
    backoff_n: int = 100
    backoff_enabled: bool = True
    spin_power_mw: float = 50.0
    map_overhead_s: float = 2e-6
    out_dir: str = "out"
    emit_plot_data: bool = False
    profile_file: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.dop < 1 or self.total_tasks < 1:
            raise ValueError("dop and total_tasks must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def frequency_levels(self) -> dict[int, str]:
        return {int(c): lvl for c, lvl in self.frequency.items()}


def derive_seed(master_seed: int, repetition: int) -> int:
    """Per-repetition seed: a pure function of (master seed, index)."""
    return (master_seed * 1000003 + repetition * 7919 + 17) % (2**31 - 1)
