import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erasesim.platform import ExecutionPlace, tx2_topology
from erasesim.powermodel import arithmetic_intensity
from erasesim.workload import (
    KERNEL_PRESETS,
    KernelSpec,
    TaskDag,
    emit_counters,
    generate_synthetic_dag,
    ground_truth_time,
    noisy_duration,
)

MATMUL = KERNEL_PRESETS["matmul"]
TOPO = tx2_topology()
F_MAX = TOPO.clusters[0].max_frequency_hz
F_MIN = TOPO.clusters[0].min_frequency_hz


def simple_kernel(sensitivity=1.0, eff=None):
    return KernelSpec(
        "k", 1.0e-3, 1.0, 50.0, sensitivity,
        eff or {"default": {1: 1.0, 2: 0.9, 4: 0.8}},
    )


# -- synthetic DAG generator -------------------------------------------------

def test_dop2_total7_unrolls_to_three_spawners():
    dag = generate_synthetic_dag(2, 7, MATMUL, seed=0)
    assert len(dag) == 7
    assert dag.critical_path_len == 4
    criticals = [n.id for n in dag.nodes if n.critical]
    assert len(criticals) == 3
    spawn_counts = [len(n.successors) for n in dag.nodes]
    assert sorted(spawn_counts, reverse=True)[:3] == [2, 2, 2]


def test_dop1_is_a_chain_all_critical():
    dag = generate_synthetic_dag(1, 5, MATMUL, seed=0)
    assert dag.critical_path_len == 5
    assert all(n.critical for n in dag.nodes)
    assert all(len(n.successors) <= 1 for n in dag.nodes)


def test_dop4_matmul_scale_critical_path():
    dag = generate_synthetic_dag(4, 50000, MATMUL, seed=0)
    assert len(dag) == 50000
    assert dag.critical_path_len == 12501
    assert dag.longest_path_len() == 12501


def test_dop_larger_than_tasks_rejected():
    with pytest.raises(ValueError):
        generate_synthetic_dag(5, 5, MATMUL, seed=0)


@given(
    dop=st.integers(min_value=1, max_value=8),
    extra=st.integers(min_value=0, max_value=300),
    seed=st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=60)
def test_generated_dags_are_acyclic_with_dop_roots(dop, extra, seed):
    total = dop * dop + 1 + extra
    dag = generate_synthetic_dag(dop, total, MATMUL, seed=seed)
    order = dag.topological_order()
    assert len(order) == total
    root = dag.nodes[0]
    assert len(root.successors) == min(dop, total - 1)
    # Parallelism lands within one task of the target once the DAG is deep
    # enough for the spawner chain to dominate.
    actual_dop = total / dag.critical_path_len
    assert abs(actual_dop - dop) <= 1.0


def test_edge_list_round_trip():
    dag = generate_synthetic_dag(2, 7, MATMUL, seed=0)
    text = dag.to_edge_list()
    edges = [
        tuple(int(x) for x in line.split())
        for line in text.splitlines()
        if line and not line.startswith("#")
    ]
    assert len(edges) == sum(len(n.successors) for n in dag.nodes)
    rebuilt = TaskDag.from_edges(7, edges, MATMUL)
    assert rebuilt.critical_path_len == dag.critical_path_len


def test_from_edges_rejects_cycles():
    with pytest.raises(ValueError):
        TaskDag.from_edges(2, [(0, 1), (1, 0)], MATMUL)


# -- ground-truth cost model --------------------------------------------------

def test_reference_time_identity():
    k = simple_kernel()
    place = ExecutionPlace(0, 1, 0)
    assert ground_truth_time(k, place, TOPO.reference_frequency_hz, TOPO) == k.work_units


def test_perfect_scaling_halves_time():
    k = KernelSpec("p", 1.0e-3, 1.0, 50.0, 1.0, {"default": {1: 1.0, 2: 1.0}})
    t1 = ground_truth_time(k, ExecutionPlace(0, 1, 0), F_MAX, TOPO)
    t2 = ground_truth_time(k, ExecutionPlace(0, 2, 0), F_MAX, TOPO)
    assert t2 == pytest.approx(t1 / 2)


@given(
    kernel=st.sampled_from(sorted(KERNEL_PRESETS)),
    cluster=st.integers(min_value=0, max_value=1),
    f_idx=st.integers(min_value=0, max_value=10),
)
def test_time_non_increasing_in_width_and_frequency(kernel, cluster, f_idx):
    k = KERNEL_PRESETS[kernel]
    spec = TOPO.clusters[cluster]
    f = spec.frequency_levels_hz[f_idx]
    f_up = spec.frequency_levels_hz[f_idx + 1]
    base = TOPO.cluster_base(cluster)
    last = None
    for w in spec.widths():
        t = ground_truth_time(k, ExecutionPlace(base, w, cluster), f, TOPO)
        if last is not None:
            assert t <= last + 1e-15
        last = t
        t_fast = ground_truth_time(k, ExecutionPlace(base, w, cluster), f_up, TOPO)
        assert t_fast <= t + 1e-15


# -- counters -----------------------------------------------------------------

@pytest.mark.parametrize(
    "kernel,ai_max",
    [("matmul", 423.8), ("copy", 2.07), ("stencil", 17.23), ("sparselu-mix", 31.5)],
)
def test_counter_ai_matches_targets_at_max(kernel, ai_max):
    k = KERNEL_PRESETS[kernel]
    place = ExecutionPlace(0, 1, 0)
    cycles, fpc, misses = emit_counters(k, place, F_MAX, TOPO)
    assert arithmetic_intensity(cycles, fpc, misses) == pytest.approx(ai_max, rel=1e-9)


@pytest.mark.parametrize(
    "kernel,ai_min",
    [("matmul", 400.6), ("copy", 1.03), ("stencil", 16.88), ("sparselu-mix", 23.8)],
)
def test_counter_ai_tracks_low_frequency(kernel, ai_min):
    k = KERNEL_PRESETS[kernel]
    cycles, fpc, misses = emit_counters(k, ExecutionPlace(0, 1, 0), F_MIN, TOPO)
    assert arithmetic_intensity(cycles, fpc, misses) == pytest.approx(ai_min, rel=0.02)


@given(
    cluster=st.integers(min_value=0, max_value=1),
    f_idx=st.integers(min_value=0, max_value=11),
    kernel=st.sampled_from(sorted(KERNEL_PRESETS)),
)
def test_cycles_over_time_equals_frequency(cluster, f_idx, kernel):
    k = KERNEL_PRESETS[kernel]
    f = TOPO.clusters[cluster].frequency_levels_hz[f_idx]
    base = TOPO.cluster_base(cluster)
    place = ExecutionPlace(base, 1, cluster)
    t = ground_truth_time(k, place, f, TOPO)
    cycles, _, _ = emit_counters(k, place, f, TOPO)
    assert cycles / t == pytest.approx(f, rel=1e-12)


def test_counters_follow_actual_time():
    k = KERNEL_PRESETS["matmul"]
    place = ExecutionPlace(0, 1, 0)
    cycles, fpc, misses = emit_counters(k, place, F_MAX, TOPO, actual_seconds=2.0e-3)
    assert cycles == pytest.approx(2.0e-3 * F_MAX)
    assert arithmetic_intensity(cycles, fpc, misses) == pytest.approx(423.8, rel=1e-9)


def test_noise_default_off_and_positive():
    rng = random.Random(1)
    assert noisy_duration(1.0, 0.0, rng) == 1.0
    values = [noisy_duration(1.0, 0.02, rng) for _ in range(200)]
    assert all(v > 0 for v in values)
    mean = sum(values) / len(values)
    assert abs(mean - 1.0) < 0.01


def test_efficiency_validation():
    with pytest.raises(ValueError):
        KernelSpec("bad", 1e-3, 1.0, 10.0, 0.5, {"default": {1: 0.9}})
    with pytest.raises(ValueError):
        KernelSpec("bad", 1e-3, 1.0, 10.0, 0.5, {"default": {1: 1.0, 2: 0.5, 4: 0.7}})
    with pytest.raises(ValueError):
        KernelSpec("bad", -1e-3, 1.0, 10.0, 0.5)
