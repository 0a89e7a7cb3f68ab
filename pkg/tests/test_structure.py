import random
from fractions import Fraction

import pytest

from mmsgap.constructions import base_matrix, chores_instance, theorem1_instance
from mmsgap.model import Instance
from mmsgap.mms import gap
from mmsgap.structure import (
    CD_SEPARATION_EXCEPTIONS,
    CROSSING_DIAGONALS,
    PARALLEL_DIAGONALS,
    PD_SEPARATION_EXCEPTIONS,
    SplitLemmaReport,
    check_max_gap_necessary_conditions,
    check_split_lemma,
    classify_bundle,
    detect_structure,
    enumerate_exact_partitions,
)


def test_classify_bundle_examples():
    inst = theorem1_instance()
    assert classify_bundle(inst, 1, {6, 7, 8}) == "good"   # 13+20+9 = 42 >= 40
    assert classify_bundle(inst, 0, {0, 3, 6}) == "bad"    # 1+26+12 = 39 < 40
    assert classify_bundle(inst, 0, {0, 1, 2}) == "good"   # own share bundle


def test_detect_structure_on_first_instance():
    sc = detect_structure(theorem1_instance())
    assert sc.kind == PARALLEL_DIAGONALS
    assert sc.role_assignment == (0, 1, 2)
    rows, cols, pdq = sc.mms_partitions
    assert set(rows) == {frozenset({0, 1, 2}), frozenset({3, 4, 5}), frozenset({6, 7, 8})}
    assert set(cols) == {frozenset({0, 3, 6}), frozenset({1, 4, 7}), frozenset({2, 5, 8})}
    pair, diag, quad = pdq
    assert pair == frozenset({1, 3})
    assert diag == frozenset({2, 4, 6})
    assert quad == frozenset({0, 5, 7, 8})


def test_detect_structure_all_equal_returns_none_with_reason():
    inst = Instance.create([[5, 3, 2, 7, 1, 4, 6, 2, 3]] * 3)
    sc = detect_structure(inst)
    assert sc.kind is None
    assert sc.explanation


def test_detect_structure_rejects_chores_and_wrong_shape():
    with pytest.raises(ValueError):
        detect_structure(chores_instance())
    with pytest.raises(ValueError):
        detect_structure(Instance.create([[1, 2], [2, 1]]))


def test_detect_structure_finds_witness_whenever_gap_positive():
    # soundness check at desk scale: every positive-gap 3x9 instance we can
    # generate classifies as one of the two canonical structures; scaling
    # before perturbing keeps most perturbations on the negative side
    rng = random.Random(31)
    positives = 0
    base = theorem1_instance()
    for _ in range(40):
        scale = rng.choice([2, 3, 4])
        rows = [[int(v) * scale for v in row] for row in base.values]
        for _ in range(rng.randint(1, 3)):
            i, j = rng.randrange(3), rng.randrange(9)
            rows[i][j] = max(0, rows[i][j] + rng.choice([-1, 1]))
        inst = Instance.create(rows)
        if gap(inst).gap > 0:
            positives += 1
            assert detect_structure(inst).kind in (PARALLEL_DIAGONALS,
                                                   CROSSING_DIAGONALS)
    assert positives > 20


def test_exactly_three_bundles_good_for_everyone():
    inst = theorem1_instance()
    sc = detect_structure(inst)
    rows, cols, pdq = sc.mms_partitions
    candidates = {*rows, *cols, *pdq}
    good_for_all = {
        bundle for bundle in candidates
        if all(classify_bundle(inst, agent, bundle) == "good" for agent in range(3))
    }
    assert good_for_all == {frozenset({1, 3}), frozenset({6, 7, 8}),
                            frozenset({2, 5, 8})}


def test_split_lemma_n4_trichotomy():
    report = check_split_lemma(base_matrix(4))
    assert report.passed
    assert report.partition_count > 0
    assert not report.violations


def test_split_lemma_n5_trichotomy():
    report = check_split_lemma(base_matrix(5))
    assert report.passed
    assert report.partition_count > 0


def test_split_lemma_row_and_column_partitions_are_good():
    layout = base_matrix(4)
    report = check_split_lemma(layout)
    partitions = enumerate_exact_partitions([int(v) for v in layout.values],
                                            4, target=int(layout.target_sum))
    as_sets = {frozenset(p) for p in partitions}
    assert frozenset(layout.row_bundles()) in as_sets
    assert frozenset(layout.column_bundles()) in as_sets
    assert report.partition_count == len(partitions)


def test_partition_enumerator_matches_direct_oracle_on_toy():
    # without the exact-sum filter, the enumerator must count plain set
    # partitions into exactly three nonempty blocks
    def stirling_partitions(m, k):
        out = []

        def rec(item, blocks):
            if item == m:
                if len(blocks) == k:
                    out.append([frozenset(b) for b in blocks])
                return
            for b in blocks:
                b.append(item)
                rec(item + 1, blocks)
                b.pop()
            if len(blocks) < k:
                blocks.append([item])
                rec(item + 1, blocks)
                blocks.pop()

        rec(0, [])
        return out

    values = [6, 5, 4, 3, 2, 1]
    mine = [p for p in enumerate_exact_partitions(values, 3) if len(p) == 3]
    oracle = stirling_partitions(6, 3)
    assert len(mine) == len(oracle) == 90


def test_max_gap_conditions_hold_at_forty():
    inst = theorem1_instance()
    sc = detect_structure(inst)
    report = check_max_gap_necessary_conditions(inst, 40, sc)
    assert report.passed
    assert [c.passed for c in report.clauses] == [True] * 6


def test_max_gap_conditions_flag_small_item_value():
    inst = theorem1_instance()
    rows = [list(map(int, row)) for row in inst.values]
    rows[0][0] = 0  # push one item value below one
    # keep the structure detectable by re-running detection on the original
    sc = detect_structure(inst)
    lowered = Instance.create(rows)
    report = check_max_gap_necessary_conditions(lowered, 40, sc)
    clause = report.clause("item-values-at-least-one")
    assert not clause.passed


def test_separation_exception_constants():
    assert PD_SEPARATION_EXCEPTIONS == (frozenset({5, 8}), frozenset({7, 8}))
    assert CD_SEPARATION_EXCEPTIONS == (frozenset({2, 5}), frozenset({6, 7}))


def test_max_gap_conditions_reject_unclassified():
    inst = Instance.create([[1] * 9] * 3)
    sc = detect_structure(inst)
    with pytest.raises(ValueError):
        check_max_gap_necessary_conditions(inst, 3, sc)


def test_split_lemma_report_serializes():
    report = check_split_lemma(base_matrix(4))
    doc = report.to_json_dict()
    assert doc["passed"] is True
    assert doc["partition_count"] == report.partition_count
    assert isinstance(doc["condition_counts"], list)
