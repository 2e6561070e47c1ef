import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from erasesim.platform import (
    ClusterSpec,
    ExecutionPlace,
    FrequencyState,
    PlatformTopology,
    align_leader_for_core,
    aligned_leaders,
    enumerate_places,
    load_topology,
    topology_from_dict,
    topology_to_dict,
    tx2_topology,
)


def make_topology(core_counts):
    clusters = tuple(
        ClusterSpec(i, n, f"t{i}", (1.0e9, 2.0e9), 1.0) for i, n in enumerate(core_counts)
    )
    return PlatformTopology("custom", clusters)


def test_tx2_has_five_places():
    places = enumerate_places(tx2_topology())
    assert places == [(0, 1), (0, 2), (1, 1), (1, 2), (1, 4)]


def test_single_core_platform_has_one_place():
    topo = make_topology([1])
    assert enumerate_places(topo) == [(0, 1)]


def test_two_four_core_clusters_have_six_places():
    topo = make_topology([4, 4])
    assert len(enumerate_places(topo)) == 6


@given(st.lists(st.integers(min_value=1, max_value=64), min_size=1, max_size=5))
def test_place_count_law(core_counts):
    topo = make_topology(core_counts)
    expected = sum(int(math.log2(n)) + 1 for n in core_counts)
    assert len(enumerate_places(topo)) == expected
    assert topo.place_count() == expected


def test_aligned_leaders_tx2():
    topo = tx2_topology()
    assert aligned_leaders(topo, 1, 2) == [2, 4]
    assert aligned_leaders(topo, 1, 4) == [2]
    assert aligned_leaders(topo, 0, 1) == [0, 1]


def test_aligned_leaders_rejects_invalid_width():
    with pytest.raises(ValueError):
        aligned_leaders(tx2_topology(), 0, 4)


@given(
    st.lists(st.integers(min_value=1, max_value=32), min_size=1, max_size=4),
    st.data(),
)
def test_aligned_places_are_valid(core_counts, data):
    topo = make_topology(core_counts)
    cluster, width = data.draw(st.sampled_from(enumerate_places(topo)))
    for leader in aligned_leaders(topo, cluster, width):
        place = ExecutionPlace(leader, width, cluster)
        place.validate(topo)


def test_align_leader_for_core_folds_partial_slot():
    topo = make_topology([6])
    # Cores 4 and 5 have no full width-4 slot of their own.
    assert align_leader_for_core(topo, 5, 4) == 0
    assert align_leader_for_core(topo, 3, 2) == 2


def test_tx2_frequency_levels_and_aliases():
    topo = tx2_topology()
    denver = topo.clusters[0]
    assert len(denver.frequency_levels_hz) == 12
    assert denver.resolve_frequency("min") == pytest.approx(345.6e6)
    assert denver.resolve_frequency("max") == pytest.approx(2035.2e6)
    assert denver.resolve_frequency(0) == denver.min_frequency_hz
    with pytest.raises(ValueError):
        denver.resolve_frequency(1.5e9)


def test_frequency_state_snap():
    topo = tx2_topology()
    fs = FrequencyState(topo)
    assert fs.get(0) == topo.clusters[0].max_frequency_hz
    assert fs.snap(0, 2.0e9) == topo.clusters[0].max_frequency_hz
    assert fs.snap(0, 0.4e9) == topo.clusters[0].min_frequency_hz
    fs.set(1, "min")
    assert fs.get(1) == topo.clusters[1].min_frequency_hz


def test_cluster_major_numbering():
    topo = tx2_topology()
    assert list(topo.cluster_cores(0)) == [0, 1]
    assert list(topo.cluster_cores(1)) == [2, 3, 4, 5]
    assert topo.cluster_of_core(0) == 0
    assert topo.cluster_of_core(5) == 1


def test_topology_round_trip(tmp_path):
    topo = tx2_topology()
    again = topology_from_dict(topology_to_dict(topo))
    assert topology_to_dict(again) == topology_to_dict(topo)
    path = tmp_path / "platform.json"
    import json

    path.write_text(json.dumps(topology_to_dict(topo)))
    loaded = load_topology(str(path))
    assert topology_to_dict(loaded) == topology_to_dict(topo)


def test_invalid_clusters_rejected():
    with pytest.raises(ValueError):
        ClusterSpec(0, 0, "x", (1.0e9,), 1.0)
    with pytest.raises(ValueError):
        ClusterSpec(0, 2, "x", (2.0e9, 1.0e9), 1.0)
    with pytest.raises(ValueError):
        ClusterSpec(0, 2, "x", (1.0e9,), -1.0)
    with pytest.raises(ValueError):
        PlatformTopology("bad", ())


def test_misaligned_place_rejected():
    topo = tx2_topology()
    with pytest.raises(ValueError):
        ExecutionPlace(3, 2, 1).validate(topo)
    with pytest.raises(ValueError):
        ExecutionPlace(1, 2, 0).validate(topo)
