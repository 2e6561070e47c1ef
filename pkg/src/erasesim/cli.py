"""Experiment runner: single runs, power profiling, policy comparisons, sweeps.

Exit codes: 0 on success, 1 for configuration errors, 2 for simulation errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

from . import metrics
from .config import ExperimentConfig, derive_seed
from .engine import SimOptions, SimReport, SimulationDeadlock, Simulator
from .platform import load_topology
from .powermodel import (
    MICROBENCH_AI_TARGETS,
    derive_thresholds,
    load_profile,
    profile_for_platform,
    profile_to_dict,
    save_profile,
)
from .workload import KernelSpec, generate_synthetic_dag, load_kernel


class ConfigError(ValueError):
    pass


def _resolve_inputs(cfg: ExperimentConfig):
    try:
        topology = load_topology(cfg.platform)
        kernel = load_kernel(cfg.kernel)
        if cfg.profile_file:
            profile = load_profile(cfg.profile_file)
        else:
            profile = profile_for_platform(topology)
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return topology, kernel, profile


def _options_for(cfg: ExperimentConfig, seed: int) -> SimOptions:
    return SimOptions(
        seed=seed,
        noise_sigma=cfg.noise_sigma,
        dvfs_schedule=cfg.dvfs_schedule,
        dvfs_detection=cfg.dvfs_detection,
        backoff_n=cfg.backoff_n,
        backoff_enabled=cfg.backoff_enabled,
        spin_power_mw=cfg.spin_power_mw,
        map_overhead_s=cfg.map_overhead_s,
    )


def run_single(cfg: ExperimentConfig, seed: int) -> SimReport:
    topology, kernel, profile = _resolve_inputs(cfg)
    dag = generate_synthetic_dag(cfg.dop, cfg.total_tasks, kernel, seed=seed)
    sim = Simulator(dag, topology, profile, cfg.policy, _options_for(cfg, seed),
                    initial_frequency=cfg.frequency_levels())
    return sim.run()


def _report_row(report: SimReport) -> dict:
    energy_j = report.total_energy_j
    row = {
        "policy": report.policy,
        "energy_j": energy_j,
        "time_s": report.makespan_s,
        "edp_js": metrics.edp(energy_j, report.makespan_s),
        "overhead_pct": metrics.overhead_fraction(report),
        "training_tasks": report.training_task_count,
    }
    if report.prediction_records:
        row["mape_time_pct"] = metrics.mape(report.prediction_records, "time")
        row["mape_energy_pct"] = metrics.mape(report.prediction_records, "energy")
    return row


def _write_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        return
    fields = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _write_report_json(report: SimReport, path: str, include_timeline=False,
                       include_event_log=False) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(include_timeline, include_event_log), fh,
                  indent=1, sort_keys=True)
        fh.write("\n")


def _emit_plot_data(report: SimReport, out_dir: str, tag: str) -> None:
    dist = metrics.distributions(report)
    rows = [
        {"place": place, "fraction": frac}
        for place, frac in dist["places"].items()
    ]
    _write_csv(os.path.join(out_dir, f"{tag}_task_distribution.csv"), rows)
    rows = [
        {"core": core, **split} for core, split in dist["per_core_time"].items()
    ]
    _write_csv(os.path.join(out_dir, f"{tag}_time_distribution.csv"), rows)
    rows = [{"t_s": t, "power_mw": p} for t, p in report.power_samples]
    _write_csv(os.path.join(out_dir, f"{tag}_power_timeline.csv"), rows)


def cmd_run(cfg: ExperimentConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    for rep in range(cfg.repetitions):
        seed = derive_seed(cfg.seed, rep)
        report = run_single(cfg, seed)
        row = {"rep": rep, "seed": seed, **_report_row(report)}
        rows.append(row)
        _write_report_json(report, os.path.join(cfg.out_dir, f"report_rep{rep}.json"))
        if cfg.emit_plot_data:
            _emit_plot_data(report, cfg.out_dir, f"rep{rep}")
    agg = {"policy": cfg.policy, "repetitions": cfg.repetitions}
    for field in ("energy_j", "time_s", "edp_js"):
        values = [r[field] for r in rows]
        mean = sum(values) / len(values)
        if len(values) > 1:
            var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
            cv = math.sqrt(var) / mean if mean else 0.0
        else:
            cv = 0.0
        agg[f"{field}_mean"] = mean
        agg[f"{field}_cv"] = cv
    _write_csv(os.path.join(cfg.out_dir, "runs.csv"), rows)
    _write_csv(os.path.join(cfg.out_dir, "aggregate.csv"), [agg])
    print(f"wrote {cfg.repetitions} run(s) to {cfg.out_dir}")
    for row in rows:
        print(
            f"  rep {row['rep']}: energy {row['energy_j']:.3f} J, "
            f"time {row['time_s']:.3f} s, EDP {row['edp_js']:.2f} Js"
        )
    return 0


def _microbench_kernel(ai: float) -> KernelSpec:
    return KernelSpec(
        name=f"microbench_ai{ai:g}",
        work_units=2e-4,
        flops_per_cycle=1.0,
        ai_reference=ai,
        frequency_sensitivity=0.9,
        width_efficiency={"default": {1: 1.0, 2: 0.9, 4: 0.8, 8: 0.7, 16: 0.6}},
    )


def cmd_profile(cfg: ExperimentConfig, out_file: str) -> int:
    topology, _, profile = _resolve_inputs(cfg)
    ai_values = []
    for ai in MICROBENCH_AI_TARGETS:
        kernel = _microbench_kernel(ai)
        dag = generate_synthetic_dag(1, 24, kernel, seed=cfg.seed)
        sim = Simulator(dag, topology, profile, "erase", _options_for(cfg, cfg.seed),
                        initial_frequency=cfg.frequency_levels())
        report = sim.run()
        measured = report.measured_ai[kernel.name]
        level = max(measured)
        ai_values.append(measured[level])
    low, high = derive_thresholds(ai_values)
    refreshed = replace(profile, ai_thresholds=(low, high))
    save_profile(refreshed, out_file)
    print(f"AI values: {[round(v, 3) for v in ai_values]}")
    print(f"thresholds: low={low} high={high}")
    print(f"profile written to {out_file}")
    return 0


def cmd_compare(cfg: ExperimentConfig, policies: list[str]) -> int:
    if len(policies) < 2:
        raise ConfigError("compare needs at least two policies")
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    for policy in policies:
        report = run_single(replace(cfg, policy=policy), cfg.seed)
        rows.append(_report_row(report))
    base = rows[0]
    for row in rows:
        for field in ("energy_j", "time_s", "edp_js"):
            ref = base[field]
            row[f"{field}_delta_pct"] = (row[field] - ref) / ref * 100.0 if ref else 0.0
    path = os.path.join(cfg.out_dir, "compare.csv")
    _write_csv(path, rows)
    print(f"comparison written to {path}")
    for row in rows:
        print(
            f"  {row['policy']:>6}: energy {row['energy_j']:.3f} J "
            f"({row['energy_j_delta_pct']:+.1f}%), time {row['time_s']:.3f} s "
            f"({row['time_s_delta_pct']:+.1f}%), EDP {row['edp_js']:.2f} "
            f"({row['edp_js_delta_pct']:+.1f}%)"
        )
    return 0


def cmd_sweep(cfg: ExperimentConfig, dops: list[int], freq_perms: list[str],
              policies: list[str]) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    topology, _, _ = _resolve_inputs(cfg)
    rows = []
    for dop in dops:
        for perm in freq_perms:
            levels = perm.split(":")
            if len(levels) != len(topology.clusters):
                raise ConfigError(
                    f"frequency permutation {perm!r} must name {len(topology.clusters)} levels"
                )
            freq = {str(i): lvl for i, lvl in enumerate(levels)}
            for policy in policies:
                sub = replace(cfg, dop=dop, policy=policy, frequency=freq)
                report = run_single(sub, cfg.seed)
                rows.append({"dop": dop, "freq": perm, **_report_row(report)})
    path = os.path.join(cfg.out_dir, "sweep.csv")
    _write_csv(path, rows)
    print(f"{len(rows)} sweep rows written to {path}")
    return 0


def _parse_freq_args(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--freq expects cluster=level, got {pair!r}")
        cluster, level = pair.split("=", 1)
        out[cluster] = level
    return out


def _parse_dvfs(spec: str):
    if spec.startswith("random:"):
        try:
            lo, hi = spec[len("random:"):].split(",")
            return {"lo_s": float(lo), "hi_s": float(hi), "levels": ["max", "min"]}
        except ValueError:
            raise ConfigError(f"bad random DVFS spec {spec!r}; use random:lo,hi") from None
    try:
        with open(spec) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read DVFS schedule {spec!r}: {exc}") from exc


def _add_common_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment config JSON; flags override it")
    p.add_argument("--platform", help="platform preset name or config file")
    p.add_argument("--policy", help="erase | rws | cats | calc")
    p.add_argument("--dag", help="kernel preset for the synthetic DAG")
    p.add_argument("--dop", type=int, help="DAG parallelism")
    p.add_argument("--tasks", type=int, help="total task count")
    p.add_argument("--freq", action="append", default=[],
                   metavar="CLUSTER=LEVEL", help="per-cluster frequency (index, Hz, min, max)")
    p.add_argument("--dvfs-schedule", help="schedule JSON file or random:lo,hi")
    p.add_argument("--no-dvfs-detection", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--noise", type=float, help="log-normal sigma on task times")
    p.add_argument("--backoff-n", type=int)
    p.add_argument("--profile-file", help="power profile JSON instead of the preset")
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit-plot-data", action="store_true")


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        try:
            cfg = ExperimentConfig.from_file(args.config)
        except (OSError, ValueError, TypeError) as exc:
            raise ConfigError(f"config {args.config!r}: {exc}") from exc
    else:
        cfg = ExperimentConfig()
    overrides = {}
    if args.platform:
        overrides["platform"] = args.platform
    if args.policy:
        overrides["policy"] = args.policy
    if args.dag:
        overrides["kernel"] = args.dag
    if args.dop is not None:
        overrides["dop"] = args.dop
    if args.tasks is not None:
        overrides["total_tasks"] = args.tasks
    if args.freq:
        overrides["frequency"] = _parse_freq_args(args.freq)
    if args.dvfs_schedule:
        overrides["dvfs_schedule"] = _parse_dvfs(args.dvfs_schedule)
    if args.no_dvfs_detection:
        overrides["dvfs_detection"] = False
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.noise is not None:
        overrides["noise_sigma"] = args.noise
    if args.backoff_n is not None:
        overrides["backoff_n"] = args.backoff_n
    if args.profile_file:
        overrides["profile_file"] = args.profile_file
    if args.out:
        overrides["out_dir"] = args.out
    if args.emit_plot_data:
        overrides["emit_plot_data"] = True
    try:
        return replace(cfg, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erasesim",
        description="Simulate energy-aware work-stealing schedulers on clustered multicores",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment (with repetitions)")
    _add_common_args(p_run)

    p_prof = sub.add_parser("profile", help="regenerate the power profile and AI thresholds")
    _add_common_args(p_prof)
    p_prof.add_argument("--profile-out", default="profile.json")

    p_cmp = sub.add_parser("compare", help="same workload under several policies")
    _add_common_args(p_cmp)
    p_cmp.add_argument("--policies", default="erase,rws",
                       help="comma-separated policy list; first is the baseline")

    p_sweep = sub.add_parser("sweep", help="grid over dop, frequency permutations, policies")
    _add_common_args(p_sweep)
    p_sweep.add_argument("--dops", default="2,4,6,8")
    p_sweep.add_argument("--freq-perms", default="max:max",
                         help="colon-joined per-cluster levels, comma-separated list")
    p_sweep.add_argument("--policies", default="erase,rws,cats,calc")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "profile":
            return cmd_profile(cfg, args.profile_out)
        if args.command == "compare":
            return cmd_compare(cfg, [p.strip() for p in args.policies.split(",") if p.strip()])
        if args.command == "sweep":
            dops = [int(d) for d in args.dops.split(",") if d]
            perms = [p.strip() for p in args.freq_perms.split(",") if p.strip()]
            policies = [p.strip() for p in args.policies.split(",") if p.strip()]
            return cmd_sweep(cfg, dops, perms, policies)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SimulationDeadlock, RuntimeError, KeyError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
