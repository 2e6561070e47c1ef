import random

import pytest

from erasesim.baselines import CalcPolicy, CatsPolicy, RwsPolicy, build_policy
from erasesim.mapper import SchedulerContext
from erasesim.perfmodel import PerformanceModel
from erasesim.platform import (
    ClusterSpec,
    FrequencyState,
    PlatformTopology,
    symmetric16_topology,
    tx2_topology,
)
from erasesim.powermodel import tx2_power_profile
from erasesim.tracing import CoreStatusBoard
from erasesim.workload import KERNEL_PRESETS, KernelSpec, TaskNode

TOPO = tx2_topology()


def make_ctx(topo=TOPO, levels=None, seed=0):
    fs = FrequencyState(topo, levels)
    return SchedulerContext(
        topo, CoreStatusBoard(topo), tx2_power_profile(),
        PerformanceModel(topo, fs), random.Random(seed),
    ), fs


def task(critical=False, kernel="matmul"):
    node = TaskNode(0, KERNEL_PRESETS[kernel])
    node.critical = critical
    return node


def test_rws_places_on_releasing_core_width_one():
    ctx, _ = make_ctx()
    placement = RwsPolicy().place(task(), 3, ctx)
    assert placement.place.leader_core == 3
    assert placement.place.width == 1
    assert placement.place.cluster == 1


def test_rws_victims_are_same_cluster():
    policy = RwsPolicy()
    assert policy.allowed_victims(0, TOPO) == [1]
    assert policy.allowed_victims(3, TOPO) == [2, 4, 5]


def test_cats_split_by_criticality():
    ctx, fs = make_ctx()
    policy = CatsPolicy(TOPO, fs.snapshot())
    assert policy.fast_cluster == 0
    critical = policy.place(task(critical=True), 4, ctx)
    assert critical.place.cluster == 0 and critical.place.width == 1
    normal = policy.place(task(critical=False), 0, ctx)
    assert normal.place.cluster == 1 and normal.place.width == 1


def test_cats_victim_asymmetry():
    ctx, fs = make_ctx()
    policy = CatsPolicy(TOPO, fs.snapshot())
    assert policy.allowed_victims(0, TOPO) == [1, 2, 3, 4, 5]
    assert policy.allowed_victims(2, TOPO) == [3, 4, 5]


def test_cats_rejects_symmetric_platform():
    topo = symmetric16_topology()
    with pytest.raises(ValueError):
        CatsPolicy(topo, FrequencyState(topo).snapshot())


def test_cats_fast_cluster_follows_current_frequency():
    # Denver at the bottom level while the A57s run flat out: A57 is faster.
    fs = FrequencyState(TOPO, {0: "min", 1: "max"})
    policy = CatsPolicy(TOPO, fs.snapshot())
    assert policy.fast_cluster == 1


def _train(ctx, kernel, times):
    table = ctx.perf.table_for(kernel)
    for (c, w), s in times.items():
        table.update(c, w, s)


def test_calc_critical_global_cost_argmin_with_tie_break():
    topo = PlatformTopology("flat", (ClusterSpec(0, 4, "c", (1.0e9,), 1.0),))
    ctx, _ = make_ctx(topo)
    # Costs: w1 -> 10, w2 -> 10, w4 -> 12; the tie goes to the smaller width.
    _train(ctx, "k", {(0, 1): 0.010, (0, 2): 0.005, (0, 4): 0.003})
    kernel = KernelSpec("k", 1e-3, 1.0, 100.0, 1.0, {"default": {1: 1.0, 2: 1.0, 4: 1.0}})
    node = TaskNode(0, kernel)
    node.critical = True
    placement = CalcPolicy().place(node, 0, ctx)
    assert placement.place.width == 1


def test_calc_perfect_scaling_prefers_width_one():
    topo = PlatformTopology("flat", (ClusterSpec(0, 4, "c", (1.0e9,), 1.0),))
    ctx, _ = make_ctx(topo)
    _train(ctx, "k", {(0, 1): 0.008, (0, 2): 0.004, (0, 4): 0.002})
    kernel = KernelSpec("k", 1e-3, 1.0, 100.0, 1.0,
                        {"default": {1: 1.0, 2: 1.0, 4: 1.0}})
    node = TaskNode(0, kernel)
    node.critical = True
    placement = CalcPolicy().place(node, 0, ctx)
    assert placement.place.width == 1


def test_calc_non_critical_keeps_releasing_core_alignment():
    ctx, _ = make_ctx()
    _train(ctx, "matmul", {(0, 1): 0.010, (0, 2): 0.005,
                           (1, 1): 0.035, (1, 2): 0.018, (1, 4): 0.010})
    node = task(critical=False)
    placement = CalcPolicy().place(node, 4, ctx)
    # Releasing core 4 sits in the A57 cluster; cost argmin over its widths:
    # w1 35ms, w2 36ms, w4 40ms -> width 1 on core 4 itself.
    assert placement.place.cluster == 1
    assert placement.place.width == 1
    assert placement.place.leader_core == 4


def test_calc_critical_oracle_over_all_configs():
    ctx, _ = make_ctx()
    times = {(0, 1): 0.010, (0, 2): 0.004, (1, 1): 0.035, (1, 2): 0.018, (1, 4): 0.010}
    _train(ctx, "matmul", times)
    best = min(
        ((seconds * w, w, c) for (c, w), seconds in times.items()),
    )
    node = task(critical=True)
    placement = CalcPolicy().place(node, 0, ctx)
    assert (placement.place.cluster, placement.place.width) == (best[2], best[1])
    assert placement.predicted_seconds == times[(best[2], best[1])]


def test_calc_uses_training_path_first():
    ctx, _ = make_ctx()
    placement = CalcPolicy().place(task(), 0, ctx)
    assert placement.training


def test_calc_critical_not_stealable():
    policy = CalcPolicy()
    ctx, _ = make_ctx()
    _train(ctx, "matmul", {(0, 1): 0.01, (0, 2): 0.005,
                           (1, 1): 0.035, (1, 2): 0.018, (1, 4): 0.01})
    crit = task(critical=True)
    placement = policy.place(crit, 0, ctx)
    assert not policy.stealable(crit, placement)
    norm = task(critical=False)
    placement = policy.place(norm, 0, ctx)
    assert policy.stealable(norm, placement)


def test_build_policy_factory():
    fs = FrequencyState(TOPO)
    for name, cls in (("erase", None), ("rws", RwsPolicy), ("cats", CatsPolicy),
                      ("calc", CalcPolicy)):
        policy = build_policy(name, TOPO, fs.snapshot())
        assert policy.name == name
        if cls is not None:
            assert isinstance(policy, cls)
    with pytest.raises(ValueError):
        build_policy("unknown", TOPO, fs.snapshot())


def test_rws_matches_erase_width_shape_on_symmetric_platform():
    """With a kernel whose energy optimum is width 1, the energy mapper's
    placements collapse to the random-stealing shape: every task at width 1."""
    from erasesim.engine import SimOptions, Simulator
    from erasesim.powermodel import symmetric16_power_profile
    from erasesim.workload import generate_synthetic_dag

    topo = symmetric16_topology()
    prof = symmetric16_power_profile()
    dag = generate_synthetic_dag(4, 300, KERNEL_PRESETS["copy"], seed=2)
    erase_rep = Simulator(dag, topo, prof, "erase", SimOptions(seed=5)).run()
    dag = generate_synthetic_dag(4, 300, KERNEL_PRESETS["copy"], seed=2)
    rws_rep = Simulator(dag, topo, prof, "rws", SimOptions(seed=5)).run()
    non_training = [p for p in erase_rep.task_placements if not p["training"]]
    assert all(p["width"] == 1 for p in non_training)
    assert all(w == 1 for (c, w) in rws_rep.config_task_counts)
