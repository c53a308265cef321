# © 2024 Carlos Manzanedo Rueda
# MIT License

import itertools
from collections import Counter
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from labelings import (
    LabelingRule,
    count_ov,
    count_ov2,
    count_ov2_k,
    count_v_labelings,
    cutoff,
    enumerate_adapted,
    enumerate_adapted_v,
    enumerate_onc,
    enumerate_ov2,
    extends_valley,
    is_adapted,
    is_anti_monotone,
    is_free,
    is_monotone,
    is_v_monotone,
    is_valley,
)
from moments import nk_recurrence
from partitions import LabeledPartition, Partition, enumerate_nc, enumerate_nc_pair


def test_is_valley_examples():
    assert is_valley(())
    assert is_valley((4,))
    assert is_valley((3, 1, 2))
    assert is_valley((5, 4, 1))
    assert is_valley((1, 2, 3))
    assert not is_valley((1, 2, 1))
    assert not is_valley((2, 2))
    assert not is_valley((3, 1, 2, 1))


def test_extends_valley():
    assert extends_valley((3, 1), 2)
    assert not extends_valley((1, 2), 1)
    assert extends_valley((), 7)
    with pytest.raises(ValueError):
        extends_valley((1, 2, 1), 3)


def test_cutoff_examples():
    assert cutoff((1,)) == 1
    assert cutoff((3, 1, 2)) == 3
    assert cutoff((1, 2, 1, 2, 1)) == 2
    # (2, 7) is a valley but (2, 7, 5) is not
    assert cutoff((2, 7, 5, 7, 5, 2)) == 2
    assert cutoff((7, 5, 2, 5, 7, 2)) == 5


def test_cutoff_rejects_bad_input():
    with pytest.raises(ValueError):
        cutoff(())
    with pytest.raises(ValueError):
        cutoff((1, 1, 2))


@pytest.mark.property_based
@given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=9))
@settings(max_examples=100)
def test_cutoff_is_longest_valley_prefix(seq):
    if any(a == b for a, b in zip(seq, seq[1:])):
        return
    r = cutoff(seq)
    assert is_valley(seq[:r])
    assert r == len(seq) or not is_valley(seq[:r + 1])


def test_is_adapted():
    lp = LabeledPartition.from_blocks([(1, 3), (2,)], (1, 2))
    assert is_adapted(lp, (1, 2, 1))
    assert not is_adapted(lp, (1, 2, 2))
    with pytest.raises(ValueError):
        is_adapted(lp, (1, 2))


def test_forest_labelings(forest_valley_labels, forest_peak_labels):
    assert is_v_monotone(forest_valley_labels)
    assert not is_v_monotone(forest_peak_labels)


def test_v_monotone_examples():
    nested = Partition.from_blocks([(1, 4), (2, 3)])
    assert is_v_monotone(LabeledPartition(nested, (1, 2)))
    assert is_v_monotone(LabeledPartition(nested, (2, 1)))
    assert not is_v_monotone(LabeledPartition(nested, (1, 1)))
    chain = Partition.from_blocks([(1, 6), (2, 5), (3, 4)])
    assert not is_v_monotone(LabeledPartition(chain, (1, 3, 2)))
    assert is_v_monotone(LabeledPartition(chain, (3, 1, 2)))


def test_labeling_rules_on_chain():
    chain = Partition.from_blocks([(1, 6), (2, 5), (3, 4)])
    rising = LabeledPartition(chain, (1, 2, 3))
    falling = LabeledPartition(chain, (3, 2, 1))
    bouncing = LabeledPartition(chain, (1, 2, 1))
    assert is_monotone(rising) and not is_monotone(falling)
    assert is_anti_monotone(falling) and not is_anti_monotone(rising)
    assert is_free(bouncing) and not is_v_monotone(bouncing)
    assert LabelingRule.FREE.accepts(bouncing)
    assert LabelingRule.MONOTONE.accepts(rising)
    assert LabelingRule("v-monotone") is LabelingRule.V_MONOTONE


def test_anti_monotone_is_reversed_monotone():
    for pi in enumerate_nc_pair(6):
        for labels in itertools.permutations(range(1, len(pi) + 1)):
            lp = LabeledPartition(pi, labels)
            reversed_lp = LabeledPartition(pi, tuple(len(pi) + 1 - l for l in labels))
            assert is_anti_monotone(lp) == is_monotone(reversed_lp)


def test_rules_reject_crossing():
    crossing = LabeledPartition(Partition.from_blocks([(1, 3), (2, 4)]), (1, 2))
    with pytest.raises(ValueError):
        is_v_monotone(crossing)


def test_adapted_class_example():
    found = list(enumerate_adapted_v((2, 7, 5, 7, 5, 2)))
    assert len(found) == 5
    assert all(is_v_monotone(lp) for lp in found)
    assert all(is_adapted(lp, (2, 7, 5, 7, 5, 2)) for lp in found)


def test_adapted_single_leg():
    found = list(enumerate_adapted_v((1,)))
    assert [lp.to_json() for lp in found] == [{"blocks": [[1]], "labels": [1]}]


def test_adapted_respects_rule_inclusions():
    for seq in itertools.product((1, 2, 3), repeat=4):
        v = set(enumerate_adapted(seq, LabelingRule.V_MONOTONE))
        free = set(enumerate_adapted(seq, LabelingRule.FREE))
        monotone = set(enumerate_adapted(seq, LabelingRule.MONOTONE))
        assert monotone <= v <= free


def test_onc_and_ov_small_orders():
    for n in range(5):
        assert count_ov(n) == sum(1 for _ in enumerate_onc(n))
    assert sum(1 for _ in enumerate_onc(5)) - count_ov(5) == 2


def test_ov2_counts_match_table():
    assert [count_ov2(2 * n) for n in range(5)] == [1, 1, 4, 28, 278]
    assert all(lp.is_ordered for lp in enumerate_ov2(6))


@pytest.mark.parametrize("n", range(0, 5))
def test_ov2_k_counts_match_recurrence(n):
    for k in range(1, n + 2):
        assert count_ov2_k(2 * n, k) == nk_recurrence(n, k)


@pytest.mark.slow
@pytest.mark.parametrize("n", [5, 6])
def test_ov2_k_counts_match_recurrence_slow(n):
    for k in range(1, n + 2):
        assert count_ov2_k(2 * n, k) == nk_recurrence(n, k)


def test_ov2_k_range():
    with pytest.raises(ValueError):
        count_ov2_k(4, 4)
    with pytest.raises(ValueError):
        count_ov2_k(4, 0)


def test_ov2_rejects_odd():
    with pytest.raises(ValueError):
        count_ov2(3)


def test_count_v_labelings_brute_force():
    for pi in enumerate_nc_pair(6):
        for N in (1, 2, 3):
            brute = sum(
                1 for labels in itertools.product(range(1, N + 1), repeat=len(pi))
                if is_v_monotone(LabeledPartition(pi, labels))
            )
            assert count_v_labelings(pi, N) == brute


def test_count_v_labelings_rejects_empty_range():
    with pytest.raises(ValueError):
        count_v_labelings(Partition.from_blocks([(1, 2)]), 0)


def test_valleys_closed_under_contiguous_slices():
    for length in range(0, 7):
        for seq in itertools.product(range(1, 5), repeat=length):
            if not is_valley(seq):
                continue
            for start in range(length + 1):
                for stop in range(start, length + 1):
                    assert is_valley(seq[start:stop]), (seq, start, stop)


@pytest.mark.parametrize("n", range(0, 5))
def test_ov2_is_top_label_class(n):
    assert count_ov2(2 * n) == count_ov2_k(2 * n, n + 1)


@pytest.mark.slow
@pytest.mark.parametrize("n", [5, 6])
def test_ov2_is_top_label_class_slow(n):
    assert count_ov2(2 * n) == count_ov2_k(2 * n, n + 1)


def _check_rule_chain(n):
    for lp in enumerate_onc(n):
        if is_monotone(lp):
            assert is_v_monotone(lp)
        if is_v_monotone(lp):
            assert is_free(lp)


@pytest.mark.parametrize("n", range(0, 7))
def test_rule_chain_on_ordered_partitions(n):
    _check_rule_chain(n)


@pytest.mark.slow
def test_rule_chain_on_ordered_partitions_order_7():
    _check_rule_chain(7)


@pytest.mark.parametrize("n", range(0, 7))
def test_onc_has_all_orderings_per_partition(n):
    per_partition = Counter(lp.partition for lp in enumerate_onc(n))
    assert set(per_partition) == set(enumerate_nc(n))
    assert all(count == factorial(len(pi)) for pi, count in per_partition.items())
