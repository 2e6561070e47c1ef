"""Deterministic discrete-event engine for the work-stealing runtime.

Each core owns a work queue (stealable, holds placed tasks) and a FIFO
assembly queue (holds share pointers of dispatched moldable tasks). Cores
spin through attempt events: drain the assembly queue, dispatch the own work
queue, then try one random steal; after N straight failures they enter capped
exponential back-off sleep. Energy is integrated exactly over the
piecewise-constant power timeline: chip idle power while any core is awake,
a small spin power per awake-but-idle core, and per-share runtime power taken
from the same profile the scheduler consults, divided across the share's
cores. Frequencies change only through injected DVFS events; the scheduler
side finds out by speculating cycles/time on completions.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field

from .baselines import build_policy
from .mapper import Placement, SchedulerContext
from .metrics import PredictionRecord
from .perfmodel import PerformanceModel
from .platform import (
    ExecutionPlace,
    FrequencyState,
    PlatformTopology,
    align_leader_for_core,
)
from .powermodel import PowerProfile, arithmetic_intensity, lookup_power
from .tracing import CoreStatusBoard
from .workload import TaskDag, emit_counters, ground_truth_time

# Event kinds in tie-break priority order.
EV_DVFS = 0
EV_FINISH = 1
EV_WAKE = 2
EV_ATTEMPT = 3

# Core modes.
EXEC = "exec"
SPIN = "spin"
SLEEP = "sleep"


class SimulationDeadlock(RuntimeError):
    pass


@dataclass
class SimOptions:
    seed: int = 0
    noise_sigma: float = 0.0
    dvfs_schedule: "list | dict | None" = None
    dvfs_detection: bool = True
    backoff_enabled: bool = True
    backoff_n: int = 100
    backoff_min_ms: float = 1.0
    backoff_max_ms: float = 64.0
    sample_period_s: float = 0.005
    map_overhead_s: float = 2e-6
    steal_attempt_cost_s: float = 5e-7
    spin_power_mw: float = 50.0
    root_core: int = 0
    ema_weight: float = 0.5
    record_event_log: bool = False
    record_alternatives: bool = False


@dataclass
class CoreTimes:
    core: int
    cluster: int
    task_time_s: float = 0.0
    sleep_time_s: float = 0.0
    overhead_time_s: float = 0.0


@dataclass
class SimReport:
    policy: str
    platform: str
    seed: int
    total_energy_mj: float = 0.0
    makespan_s: float = 0.0
    billed_task_energy_mj: float = 0.0
    billed_idle_gap_energy_mj: float = 0.0
    completed_tasks: int = 0
    training_task_count: int = 0
    per_core: list[CoreTimes] = field(default_factory=list)
    place_task_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    config_task_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    prediction_records: list[PredictionRecord] = field(default_factory=list)
    detections: list[dict] = field(default_factory=list)
    dvfs_events: list[dict] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    timeline: list[tuple[float, float, float]] = field(default_factory=list)
    power_samples: list[tuple[float, float]] = field(default_factory=list)
    task_placements: list[dict] = field(default_factory=list)
    perf_model_dump: dict = field(default_factory=dict)
    measured_ai: dict[str, dict[float, float]] = field(default_factory=dict)
    event_log: list[dict] | None = None

    @property
    def total_energy_j(self) -> float:
        return self.total_energy_mj / 1000.0

    def to_dict(self, include_timeline: bool = False, include_event_log: bool = False) -> dict:
        data = {
            "policy": self.policy,
            "platform": self.platform,
            "seed": self.seed,
            "total_energy_mj": self.total_energy_mj,
            "makespan_s": self.makespan_s,
            "billed_task_energy_mj": self.billed_task_energy_mj,
            "billed_idle_gap_energy_mj": self.billed_idle_gap_energy_mj,
            "completed_tasks": self.completed_tasks,
            "training_task_count": self.training_task_count,
            "per_core": [
                {
                    "core": c.core,
                    "cluster": c.cluster,
                    "task_time_s": c.task_time_s,
                    "sleep_time_s": c.sleep_time_s,
                    "overhead_time_s": c.overhead_time_s,
                }
                for c in self.per_core
            ],
            "place_task_counts": {f"{k[0]}:{k[1]}": v for k, v in sorted(self.place_task_counts.items())},
            "config_task_counts": {f"{k[0]}:{k[1]}": v for k, v in sorted(self.config_task_counts.items())},
            "prediction_records": [
                {
                    "task_id": r.task_id,
                    "predicted_seconds": r.predicted_seconds,
                    "actual_seconds": r.actual_seconds,
                    "predicted_energy_mj": r.predicted_energy_mj,
                    "actual_energy_mj": r.actual_energy_mj,
                }
                for r in self.prediction_records
            ],
            "detections": self.detections,
            "dvfs_events": self.dvfs_events,
            "counts": dict(sorted(self.counts.items())),
            "power_samples": [[t, p] for t, p in self.power_samples],
            "task_placements": self.task_placements,
            "perf_model_dump": self.perf_model_dump,
            "measured_ai": {
                k: {f"{f:.0f}": ai for f, ai in sorted(v.items())}
                for k, v in sorted(self.measured_ai.items())
            },
        }
        if include_timeline:
            data["timeline"] = [[a, b, p] for a, b, p in self.timeline]
        if include_event_log and self.event_log is not None:
            data["event_log"] = self.event_log
        return data


def integrate_energy(timeline: list[tuple[float, float, float]]) -> float:
    """Exact integral of a piecewise-constant power timeline, in millijoules."""
    return sum((t1 - t0) * p for t0, t1, p in timeline)


@dataclass
class _PlacedTask:
    node_id: int
    placement: Placement


class _TaskRun:
    __slots__ = (
        "node_id", "kernel", "placement", "place", "noise_factor", "dispatch_s",
        "shares_remaining", "running_cores", "current_power_mw", "billed_mj",
        "leader_seconds", "leader_freq_hz", "start_s", "finish_s",
    )

    def __init__(self, node_id, kernel, placement, place, noise_factor, dispatch_s):
        self.node_id = node_id
        self.kernel = kernel
        self.placement = placement
        self.place = place
        self.noise_factor = noise_factor
        self.dispatch_s = dispatch_s
        self.shares_remaining = place.width
        self.running_cores = 0
        self.current_power_mw = 0.0
        self.billed_mj = 0.0
        self.leader_seconds = 0.0
        self.leader_freq_hz = 0.0
        self.start_s = None
        self.finish_s = None


class _Share:
    __slots__ = ("run", "core", "start_s", "duration_s", "freq_hz", "power_mw")

    def __init__(self, run, core, start_s, duration_s, freq_hz, power_mw):
        self.run = run
        self.core = core
        self.start_s = start_s
        self.duration_s = duration_s
        self.freq_hz = freq_hz
        self.power_mw = power_mw


class _CoreState:
    __slots__ = (
        "core", "cluster", "mode", "mode_since", "wq", "aq",
        "idle_tries", "backoff_param", "task_time", "sleep_time", "attempt_token",
    )

    def __init__(self, core, cluster):
        self.core = core
        self.cluster = cluster
        self.mode = SPIN
        self.mode_since = 0.0
        self.wq = deque()
        self.aq = deque()
        self.idle_tries = 0
        self.backoff_param = 0
        self.task_time = 0.0
        self.sleep_time = 0.0
        self.attempt_token = 0


class Simulator:
    def __init__(self, dag: TaskDag, topology: PlatformTopology, profile: PowerProfile,
                 policy, options: SimOptions | None = None,
                 initial_frequency: dict[int, "int | float | str"] | None = None):
        self.dag = dag
        self.topology = topology
        self.profile = profile
        self.opts = options or SimOptions()
        self.freq_state = FrequencyState(topology, initial_frequency)
        if isinstance(policy, str):
            policy = build_policy(policy, topology, self.freq_state.snapshot())
        self.policy = policy

        base = random.Random(self.opts.seed)
        self.rng_mapper = random.Random(base.getrandbits(64))
        self.rng_steal = random.Random(base.getrandbits(64))
        self.rng_noise = random.Random(base.getrandbits(64))
        self.rng_dvfs = random.Random(base.getrandbits(64))

        self.board = CoreStatusBoard(topology)
        self.perf = PerformanceModel(topology, self.freq_state, self.opts.ema_weight)
        self.ctx = SchedulerContext(topology, self.board, profile, self.perf, self.rng_mapper)

        self.cores = [
            _CoreState(c, topology.cluster_of_core(c)) for c in range(topology.total_cores)
        ]
        self.victims = {
            c: list(self.policy.allowed_victims(c, topology)) for c in range(topology.total_cores)
        }

        self.dag.reset_dependency_counts()
        self.report = SimReport(policy=self.policy.name, platform=topology.name,
                                seed=self.opts.seed)
        self.report.counts = {
            "maps": 0, "dispatches": 0, "steals": 0, "steal_fails": 0,
            "sleeps": 0, "reanchored_steals": 0,
        }
        self.report.event_log = [] if self.opts.record_event_log else None

        self._heap: list = []
        self._seq = 0
        self._now = 0.0
        self._last_settle = 0.0
        self._completed = 0
        self._n_awake = topology.total_cores
        self._n_spin = topology.total_cores
        self._runtime_mw = 0.0
        self._m_cores = 0
        self._running: dict[int, _TaskRun] = {}
        self._dvfs_iter = None
        self._dvfs_random_state = None

    # -- plumbing ---------------------------------------------------------

    def _log(self, t: float, ev: str, core: int | None = None, **detail):
        if self.report.event_log is not None:
            rec = {"t": t, "ev": ev}
            if core is not None:
                rec["core"] = core
            rec.update(detail)
            self.report.event_log.append(rec)

    def _push(self, time_s: float, kind: int, core: int, payload=None):
        self._seq += 1
        heapq.heappush(self._heap, (time_s, kind, core, self._seq, payload))

    def _settle(self, t: float):
        """Close the power segment ending at t and bill it.

        Runtime power goes to the owning tasks; the drawn idle power splits
        over the currently running share-cores; spin power and idle over empty
        stretches land in the unattributed gap. The split keeps the sum of all
        billed energies identical to the integrated timeline.
        """
        dt = t - self._last_settle
        if dt > 0:
            idle = self.profile.idle_power_chip_mw if self._n_awake > 0 else 0.0
            spin = self.opts.spin_power_mw * self._n_spin
            power = idle + spin + self._runtime_mw
            self.report.total_energy_mj += power * dt
            self.report.timeline.append((self._last_settle, t, power))
            if self._m_cores > 0:
                for run in self._running.values():
                    if run.running_cores:
                        run.billed_mj += (
                            run.current_power_mw
                            + idle * run.running_cores / self._m_cores
                        ) * dt
                self.report.billed_idle_gap_energy_mj += spin * dt
            else:
                self.report.billed_idle_gap_energy_mj += (idle + spin) * dt
        self._last_settle = t

    def _set_mode(self, cs: _CoreState, mode: str, t: float):
        dt = t - cs.mode_since
        if cs.mode == EXEC:
            cs.task_time += dt
        elif cs.mode == SLEEP:
            cs.sleep_time += dt
        cs.mode_since = t
        if cs.mode != mode:
            if cs.mode == SLEEP:
                self._n_awake += 1
            if mode == SLEEP:
                self._n_awake -= 1
            if cs.mode == SPIN:
                self._n_spin -= 1
            if mode == SPIN:
                self._n_spin += 1
            cs.mode = mode

    # -- scheduling actions -------------------------------------------------

    def _map_ready(self, node_ids: list[int], releasing_core: int, t: float) -> int:
        """Run the policy for freshly released tasks in creation order."""
        mapped = 0
        for node_id in node_ids:
            node = self.dag.nodes[node_id]
            placement = self.policy.place(node, releasing_core, self.ctx)
            mapped += 1
            self.report.counts["maps"] += 1
            leader = placement.place.leader_core
            self.cores[leader].wq.append(_PlacedTask(node_id, placement))
            self._log(t, "map", releasing_core, task=node_id,
                      leader=leader, width=placement.place.width,
                      training=placement.training)
        return mapped

    def _dispatch(self, cs: _CoreState, placed: _PlacedTask, t: float):
        node = self.dag.nodes[placed.node_id]
        place = placed.placement.place
        noise = 1.0
        if self.opts.noise_sigma > 0:
            noise = self.rng_noise.lognormvariate(0.0, self.opts.noise_sigma)
        run = _TaskRun(placed.node_id, node.kernel, placed.placement, place, noise, t)
        self.report.counts["dispatches"] += 1
        key = (place.cluster, place.width)
        self.report.config_task_counts[key] = self.report.config_task_counts.get(key, 0) + 1
        pkey = (place.leader_core, place.width)
        self.report.place_task_counts[pkey] = self.report.place_task_counts.get(pkey, 0) + 1
        if placed.placement.training:
            self.report.training_task_count += 1
        entry = {
            "task": placed.node_id,
            "kernel": node.kernel.name,
            "leader": place.leader_core,
            "width": place.width,
            "cluster": place.cluster,
            "training": placed.placement.training,
            "t_dispatch": t,
        }
        if placed.placement.estimate is not None:
            entry["predicted_energy_mj"] = placed.placement.estimate.predicted_energy_mj
            if self.opts.record_alternatives:
                entry["alternatives"] = [
                    {
                        "cluster": e.place.cluster,
                        "width": e.place.width,
                        "predicted_energy_mj": e.predicted_energy_mj,
                    }
                    for e in placed.placement.alternatives
                ]
        self.report.task_placements.append(entry)
        self._running[id(run)] = run
        for core in place.cores(self.topology):
            self.cores[core].aq.append(run)
            self._log(t, "aq_insert", core, task=run.node_id)
        self._log(t, "dispatch", cs.core, task=run.node_id,
                  leader=place.leader_core, width=place.width)

    def _start_share(self, cs: _CoreState, run: _TaskRun, t: float):
        freq = self.freq_state.get(run.place.cluster)
        base = ground_truth_time(run.kernel, run.place, freq, self.topology)
        duration = run.noise_factor * base
        ai = run.kernel.ai_at(freq, self.topology.reference_frequency_hz)
        ttype = self.profile.classify_ai(ai)
        power = lookup_power(self.profile, ttype, run.place.cluster, freq, run.place.width)
        share = _Share(run, cs.core, t, duration, freq, power / run.place.width)
        self._set_mode(cs, EXEC, t)
        self._runtime_mw += share.power_mw
        run.running_cores += 1
        run.current_power_mw += share.power_mw
        self._m_cores += 1
        if run.start_s is None:
            run.start_s = t
        self._push(t + duration, EV_FINISH, cs.core, share)
        self._log(t, "share_start", cs.core, task=run.node_id, duration=duration)

    def _complete_task(self, run: _TaskRun, core: int, t: float) -> int:
        run.finish_s = t
        self._completed += 1
        self.report.completed_tasks = self._completed
        del self._running[id(run)]
        self._log(t, "task_done", core, task=run.node_id)
        est = run.placement.estimate
        if est is not None and run.leader_seconds > 0 and run.billed_mj > 0:
            self.report.billed_task_energy_mj += run.billed_mj
            self.report.prediction_records.append(
                PredictionRecord(
                    task_id=run.node_id,
                    predicted_seconds=run.placement.predicted_seconds,
                    actual_seconds=run.leader_seconds,
                    predicted_energy_mj=est.predicted_energy_mj,
                    actual_energy_mj=run.billed_mj,
                )
            )
        else:
            self.report.billed_task_energy_mj += run.billed_mj
        ready = []
        for succ in self.dag.nodes[run.node_id].successors:
            node = self.dag.nodes[succ]
            node.unreleased_dependency_count -= 1
            if node.unreleased_dependency_count == 0:
                ready.append(succ)
        if ready:
            self._log(t, "release", core, tasks=list(ready))
        return self._map_ready(ready, core, t)

    # -- event handlers -------------------------------------------------------

    def _on_attempt(self, cs: _CoreState, t: float, token: int):
        if token != cs.attempt_token or cs.mode != SPIN:
            return
        while True:
            if cs.aq:
                run = cs.aq.popleft()
                self.board.set_active(cs.core, t)
                cs.idle_tries = 0
                cs.backoff_param = 0
                self._start_share(cs, run, t)
                return
            if cs.wq:
                placed = cs.wq.popleft()
                self._dispatch(cs, placed, t)
                continue
            break
        # Steal: inspect one random victim's queue end.
        victims = self.victims[cs.core]
        stolen = None
        if victims:
            victim = self.cores[victims[self.rng_steal.randrange(len(victims))]]
            if victim.wq:
                head = victim.wq[0]
                node = self.dag.nodes[head.node_id]
                width = head.placement.place.width
                # A task as wide as the thief's whole cluster cannot start any
                # sooner elsewhere; it waits for the resources to free up.
                if (self.policy.stealable(node, head.placement)
                        and width in self.topology.clusters[cs.cluster].widths()
                        and width < self.topology.clusters[cs.cluster].core_count):
                    victim.wq.popleft()
                    stolen = head
                    new_leader = align_leader_for_core(self.topology, cs.core, width)
                    old_place = head.placement.place
                    reanchored = new_leader != old_place.leader_core
                    head.placement.place = ExecutionPlace(new_leader, width, cs.cluster)
                    self.report.counts["steals"] += 1
                    if reanchored:
                        self.report.counts["reanchored_steals"] += 1
                    self._log(t, "steal", cs.core, task=head.node_id,
                              victim=victim.core, reanchored=reanchored)
        if stolen is not None:
            self.board.set_active(cs.core, t)
            cs.idle_tries = 0
            cs.backoff_param = 0
            self._dispatch(cs, stolen, t)
            # The thief's own assembly queue now holds a share of the task.
            run = cs.aq.popleft()
            self._start_share(cs, run, t)
            return
        # Failure path.
        self.report.counts["steal_fails"] += 1
        self._log(t, "steal_fail", cs.core, idle_tries=cs.idle_tries + 1)
        cs.idle_tries += 1
        if cs.idle_tries >= self.opts.backoff_n and self.opts.backoff_enabled:
            sleep_s = min(
                (self.opts.backoff_min_ms / 1000.0) * (1 << cs.backoff_param),
                self.opts.backoff_max_ms / 1000.0,
            )
            self.board.set_sleep(cs.core, t)
            self._set_mode(cs, SLEEP, t)
            cs.idle_tries = 0
            cs.backoff_param += 1
            self.report.counts["sleeps"] += 1
            self._log(t, "sleep_start", cs.core, duration=sleep_s)
            self._push(t + sleep_s, EV_WAKE, cs.core)
        else:
            if cs.idle_tries >= self.opts.backoff_n:
                cs.idle_tries = 0
            cs.attempt_token += 1
            self._push(t + self.opts.steal_attempt_cost_s, EV_ATTEMPT, cs.core,
                       cs.attempt_token)

    def _on_finish(self, share: _Share, t: float):
        cs = self.cores[share.core]
        run = share.run
        self._set_mode(cs, SPIN, t)
        self._runtime_mw -= share.power_mw
        run.running_cores -= 1
        run.current_power_mw -= share.power_mw
        self._m_cores -= 1
        run.shares_remaining -= 1
        self._log(t, "share_finish", cs.core, task=run.node_id)
        if cs.core == run.place.leader_core:
            run.leader_seconds = share.duration_s
            run.leader_freq_hz = share.freq_hz
            self._leader_bookkeeping(run, share, t)
        mapped = 0
        if run.shares_remaining == 0:
            mapped = self._complete_task(run, cs.core, t)
        cs.attempt_token += 1
        delay = mapped * self.opts.map_overhead_s
        self._push(t + delay, EV_ATTEMPT, cs.core, cs.attempt_token)

    def _leader_bookkeeping(self, run: _TaskRun, share: _Share, t: float):
        if not self.policy.uses_tables:
            return
        cycles, fpc, misses = emit_counters(
            run.kernel, run.place, share.freq_hz, self.topology,
            actual_seconds=share.duration_s,
        )
        table = self.perf.table_for(run.kernel.name)
        if run.placement.epoch == table.epoch:
            table.update(run.place.cluster, run.place.width, share.duration_s)
        ai = arithmetic_intensity(cycles, fpc, misses)
        self.report.measured_ai.setdefault(run.kernel.name, {}).setdefault(share.freq_hz, ai)
        self.ctx.record_classification(run.kernel.name, share.freq_hz, ai)
        if self.opts.dvfs_detection:
            fired = self.perf.observe_frequency(run.place.cluster, cycles, share.duration_s)
            if fired:
                cluster, prev, new = self.perf.detections[-1]
                self.report.detections.append(
                    {"time_s": t, "cluster": cluster, "from_hz": prev, "to_hz": new,
                     "task": run.node_id}
                )
                self._log(t, "detect", share.core, cluster=cluster,
                          from_hz=prev, to_hz=new)

    def _on_wake(self, cs: _CoreState, t: float):
        if cs.mode != SLEEP:
            return
        self._set_mode(cs, SPIN, t)
        self._log(t, "sleep_end", cs.core)
        cs.attempt_token += 1
        self._push(t, EV_ATTEMPT, cs.core, cs.attempt_token)

    def _on_dvfs(self, changes: dict, t: float):
        for cluster, level in changes.items():
            new = self.freq_state.set(cluster, level)
            self.report.dvfs_events.append({"time_s": t, "cluster": cluster, "to_hz": new})
            self._log(t, "dvfs", None, cluster=cluster, to_hz=new)
        self._schedule_next_random_dvfs(t)

    # -- DVFS schedule -----------------------------------------------------

    def _init_dvfs(self):
        schedule = self.opts.dvfs_schedule
        if schedule is None:
            return
        if isinstance(schedule, dict):
            lo = float(schedule.get("lo_s", 3.0))
            hi = float(schedule.get("hi_s", 12.0))
            levels = schedule.get("levels", ["max", "min"])
            first = self.rng_dvfs.uniform(lo, hi)
            start_idx = 0
            current = self.freq_state.get(0)
            if self.topology.clusters[0].resolve_frequency(levels[0]) == current:
                start_idx = 1
            self._dvfs_random_state = {"lo": lo, "hi": hi, "levels": levels, "idx": start_idx}
            changes = {c.id: levels[start_idx % len(levels)] for c in self.topology.clusters}
            self._push(first, EV_DVFS, -1, changes)
        else:
            for time_s, changes in schedule:
                resolved = {int(c): lvl for c, lvl in changes.items()}
                for cluster, level in resolved.items():
                    self.topology.clusters[cluster].resolve_frequency(level)
                self._push(float(time_s), EV_DVFS, -1, resolved)

    def _schedule_next_random_dvfs(self, t: float):
        state = self._dvfs_random_state
        if state is None:
            return
        state["idx"] += 1
        gap = self.rng_dvfs.uniform(state["lo"], state["hi"])
        changes = {
            c.id: state["levels"][state["idx"] % len(state["levels"])]
            for c in self.topology.clusters
        }
        self._push(t + gap, EV_DVFS, -1, changes)

    # -- main loop -----------------------------------------------------------

    def run(self) -> SimReport:
        self._init_dvfs()
        roots = list(self.dag.root_ids)
        mapped = self._map_ready(roots, self.opts.root_core, 0.0)
        for cs in self.cores:
            cs.attempt_token += 1
            delay = mapped * self.opts.map_overhead_s if cs.core == self.opts.root_core else 0.0
            self._push(delay, EV_ATTEMPT, cs.core, cs.attempt_token)
        total = len(self.dag)
        while self._completed < total:
            if not self._heap:
                raise SimulationDeadlock(self._deadlock_snapshot())
            t, kind, core, _seq, payload = heapq.heappop(self._heap)
            self._now = t
            self._settle(t)
            if kind == EV_DVFS:
                self._on_dvfs(payload, t)
            elif kind == EV_FINISH:
                self._on_finish(payload, t)
            elif kind == EV_WAKE:
                self._on_wake(self.cores[core], t)
            elif kind == EV_ATTEMPT:
                self._on_attempt(self.cores[core], t, payload)
        makespan = self._now
        self._settle(makespan)
        self.report.makespan_s = makespan
        for cs in self.cores:
            self._set_mode(cs, cs.mode, makespan)
            overhead = makespan - cs.task_time - cs.sleep_time
            self.report.per_core.append(
                CoreTimes(cs.core, cs.cluster, cs.task_time, cs.sleep_time, overhead)
            )
        self.report.power_samples = self._sample_power()
        self.report.perf_model_dump = self.perf.dump() if self.policy.uses_tables else {}
        return self.report

    def _sample_power(self) -> list[tuple[float, float]]:
        period = self.opts.sample_period_s
        if period <= 0 or not self.report.timeline:
            return []
        samples = []
        seg = 0
        timeline = self.report.timeline
        t = 0.0
        while t <= self.report.makespan_s:
            while seg < len(timeline) - 1 and timeline[seg][1] <= t:
                seg += 1
            samples.append((t, timeline[seg][2]))
            t += period
        return samples

    def _deadlock_snapshot(self) -> str:
        lines = [f"deadlock: {self._completed}/{len(self.dag)} tasks done at t={self._now}"]
        for cs in self.cores:
            lines.append(
                f"  core {cs.core}: mode={cs.mode} wq={[p.node_id for p in cs.wq]} "
                f"aq={[r.node_id for r in cs.aq]}"
            )
        return "\n".join(lines)


def run(dag: TaskDag, topology: PlatformTopology, profile: PowerProfile, policy,
        options: SimOptions | None = None,
        initial_frequency: dict[int, "int | float | str"] | None = None) -> SimReport:
    """Build a simulator, execute the DAG to completion, return the report."""
    return Simulator(dag, topology, profile, policy, options, initial_frequency).run()
