import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from erasesim.powermodel import (
    MICROBENCH_AI_TARGETS,
    PowerProfile,
    TaskType,
    arithmetic_intensity,
    classify,
    derive_thresholds,
    load_profile,
    lookup_power,
    profile_from_dict,
    profile_to_dict,
    save_profile,
    tx2_power_profile,
)

THRESH = (6.25, 18.75)
F_MAX = 2035200e3


def test_ai_unit_cancellation():
    assert arithmetic_intensity(64, 1.0, 1) == 1.0
    assert arithmetic_intensity(128, 2.0, 2) == 2.0


def test_zero_misses_is_compute_bound_sentinel():
    ai = arithmetic_intensity(1000, 2.0, 0)
    assert math.isinf(ai)
    assert classify(ai, THRESH) is TaskType.COMPUTE_BOUND


def test_classify_buckets():
    assert classify(2.07, THRESH) is TaskType.MEMORY_BOUND
    assert classify(17.23, THRESH) is TaskType.CACHE_INTENSIVE
    assert classify(31.5, THRESH) is TaskType.COMPUTE_BOUND
    # boundary values go up
    assert classify(6.25, THRESH) is TaskType.CACHE_INTENSIVE
    assert classify(18.75, THRESH) is TaskType.COMPUTE_BOUND


_ORDER = [TaskType.MEMORY_BOUND, TaskType.CACHE_INTENSIVE, TaskType.COMPUTE_BOUND]


@given(st.floats(min_value=0, max_value=1e4), st.floats(min_value=0, max_value=1e4))
def test_classify_is_order_consistent(a, b):
    lo, hi = sorted((a, b))
    assert _ORDER.index(classify(lo, THRESH)) <= _ORDER.index(classify(hi, THRESH))


# -- threshold derivation ------------------------------------------------------

def optimal_three_means(values):
    """Exhaustive 1-D 3-cluster split minimizing within-cluster SSE."""
    values = sorted(values)
    n = len(values)

    def sse(chunk):
        if not chunk:
            return math.inf
        mean = sum(chunk) / len(chunk)
        return sum((v - mean) ** 2 for v in chunk)

    best = None
    for i, j in itertools.combinations(range(1, n), 2):
        chunks = (values[:i], values[i:j], values[j:])
        cost = sum(sse(c) for c in chunks)
        if best is None or cost < best[0]:
            best = (cost, chunks)
    low = (max(best[1][0]) + min(best[1][1])) / 2
    high = (max(best[1][1]) + min(best[1][2])) / 2
    return low, high


@pytest.mark.parametrize(
    "values,expected",
    [
        ([1, 2, 15, 17, 400, 450], (8.5, 208.5)),
        ([1, 10, 100], (5.5, 55.0)),
        (list(MICROBENCH_AI_TARGETS), (6.25, 18.75)),
    ],
)
def test_derive_thresholds_examples(values, expected):
    assert derive_thresholds(values) == pytest.approx(expected)


@pytest.mark.parametrize(
    "values", [[1, 10, 100], list(MICROBENCH_AI_TARGETS)]
)
def test_well_separated_sets_match_exhaustive_optimum(values):
    # On clearly separated sets the seeded Lloyd iteration lands on the
    # globally SSE-optimal contiguous clustering.
    assert derive_thresholds(values) == pytest.approx(optimal_three_means(values))


def test_degenerate_middle_cluster_is_repaired():
    low, high = derive_thresholds([1.0, 2.0, 5.0, 6.0])
    assert 0 < low < high


def test_derive_thresholds_needs_three_distinct():
    with pytest.raises(ValueError):
        derive_thresholds([1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        derive_thresholds([1.0, 2.0])


@given(st.lists(st.floats(min_value=0.01, max_value=1e4), min_size=3, max_size=20,
                unique=True),
       st.randoms(use_true_random=False),
       st.floats(min_value=0.1, max_value=100.0))
def test_thresholds_permutation_invariant_and_scale_covariant(values, rng, scale):
    shuffled = list(values)
    rng.shuffle(shuffled)
    base = derive_thresholds(values)
    assert derive_thresholds(shuffled) == pytest.approx(base)
    scaled = derive_thresholds([v * scale for v in values])
    assert scaled[0] == pytest.approx(base[0] * scale, rel=1e-9)
    assert scaled[1] == pytest.approx(base[1] * scale, rel=1e-9)
    low, high = base
    assert 0 < low < high


# -- power lookup ---------------------------------------------------------------

def test_tx2_anchor_values():
    prof = tx2_power_profile()
    assert prof.idle_power_chip_mw == 228.0
    assert prof.idle_power_cluster_mw == {0: 76.0, 1: 152.0}
    assert lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 1) == 989.0
    assert lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 4) == pytest.approx(4 * 989.0)


def test_lookup_missing_key_is_an_error():
    prof = tx2_power_profile()
    with pytest.raises(KeyError) as err:
        lookup_power(prof, TaskType.COMPUTE_BOUND, 1, 1.0e9, 1)
    assert "1000000000" in str(err.value)
    with pytest.raises(KeyError):
        lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 8)


def test_width_interpolation_is_linear_within_cluster():
    prof = tx2_power_profile()
    p2 = lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 2)
    p4 = lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 4)
    assert lookup_power(prof, TaskType.COMPUTE_BOUND, 1, F_MAX, 3) == pytest.approx((p2 + p4) / 2)


def test_profile_round_trip_bit_exact(tmp_path):
    prof = tx2_power_profile()
    path = tmp_path / "profile.json"
    save_profile(prof, str(path))
    loaded = load_profile(str(path))
    assert profile_to_dict(loaded) == profile_to_dict(prof)
    for ttype in TaskType:
        for cluster, freqs in prof.runtime_power_mw[ttype].items():
            for freq, widths in freqs.items():
                for w in widths:
                    assert lookup_power(loaded, ttype, cluster, freq, w) == \
                        lookup_power(prof, ttype, cluster, freq, w)
    # Round-tripping the serialized form is the identity.
    assert profile_to_dict(profile_from_dict(profile_to_dict(prof))) == profile_to_dict(prof)


def test_profile_invariants_enforced():
    with pytest.raises(ValueError):
        PowerProfile("x", 100.0, {0: 60.0, 1: 60.0}, {}, (1.0, 2.0))
    with pytest.raises(ValueError):
        PowerProfile("x", 100.0, {0: 100.0}, {}, (5.0, 2.0))
    with pytest.raises(ValueError):
        PowerProfile(
            "x", 100.0, {0: 100.0},
            {TaskType.COMPUTE_BOUND: {0: {1.0e9: {1: 500.0, 2: 400.0}}}},
            (1.0, 2.0),
        )
