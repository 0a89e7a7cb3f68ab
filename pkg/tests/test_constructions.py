from fractions import Fraction

import pytest

from mmsgap.constructions import (
    base_matrix,
    chores_instance,
    extended_instance,
    target_mms,
    theorem1_instance,
    vr_vc_instance,
)
from mmsgap.model import CHORES, GOODS, bundle_value
from mmsgap.mms import gap, mms


def test_first_instance_matrices_match_golden_values():
    inst = theorem1_instance()
    assert inst.mode == GOODS and (inst.n, inst.m) == (3, 9)
    assert [int(v) for v in inst.values[0]] == [1, 16, 23, 26, 4, 10, 12, 19, 9]
    assert [int(v) for v in inst.values[1]] == [1, 16, 22, 26, 4, 9, 13, 20, 9]
    assert [int(v) for v in inst.values[2]] == [1, 15, 23, 25, 4, 10, 13, 20, 9]


def test_first_instance_row_and_column_sums():
    inst = theorem1_instance()
    rows = [{0, 1, 2}, {3, 4, 5}, {6, 7, 8}]
    cols = [{0, 3, 6}, {1, 4, 7}, {2, 5, 8}]
    assert [bundle_value(inst, 0, r) for r in rows] == [40, 40, 40]
    assert [bundle_value(inst, 1, c) for c in cols] == [40, 40, 40]
    for bundle in ({1, 3}, {2, 4, 6}, {0, 5, 7, 8}):
        assert bundle_value(inst, 2, bundle) == 40


def test_chores_instance_matches_golden_values():
    inst = chores_instance()
    assert inst.mode == CHORES
    assert [int(v) for v in inst.values[0]] == [6, 15, 22, 26, 10, 7, 12, 19, 12]
    assert [int(v) for v in inst.values[1]] == [6, 15, 23, 26, 10, 8, 11, 18, 12]
    assert [int(v) for v in inst.values[2]] == [6, 16, 22, 27, 10, 7, 11, 18, 12]


def test_chores_min_envelope():
    inst = chores_instance()
    envelope = [min(inst.values[i][j] for i in range(3)) for j in range(9)]
    assert [int(v) for v in envelope] == [6, 15, 22, 26, 10, 7, 11, 18, 12]


def test_chores_instance_mms_and_gap():
    inst = chores_instance()
    assert [mms(inst, i).value for i in range(3)] == [43, 43, 43]
    assert gap(inst).gap == Fraction(1, 43)


def test_base_matrix_four_matches_printed_pattern():
    layout = base_matrix(4)
    dense = [[int(v) for v in row] for row in layout.dense()]
    assert dense == [
        [0, 8, 8, 1],
        [6, 4, 0, 7],
        [6, 0, 4, 7],
        [5, 5, 5, 2],
    ]
    assert len(layout.item_positions) == 13
    assert layout.target_sum == 17


def test_base_matrix_five_shape():
    layout = base_matrix(5)
    assert len(layout.item_positions) == 18
    assert layout.target_sum == 46


def test_base_matrix_rejects_small_n():
    with pytest.raises(ValueError):
        base_matrix(3)


@pytest.mark.parametrize("n", range(4, 9))
def test_base_matrix_row_and_column_sums(n):
    layout = base_matrix(n)
    target = layout.target_sum
    for bundle in layout.row_bundles() + layout.column_bundles():
        assert sum(layout.values[i] for i in bundle) == target


@pytest.mark.parametrize("n", range(4, 9))
def test_base_matrix_special_items_by_residue(n):
    layout = base_matrix(n)
    special = set(layout.special_indices())
    assert len(special) == 2 * n - 2
    for idx, value in enumerate(layout.values):
        residue = int(value) % (n - 2)
        if idx in special:
            assert residue == 1 % (n - 2)
        else:
            assert residue == 0
    assert int(layout.target_sum) % (n - 2) == 1 % (n - 2)


def test_vr_vc_four_matches_printed_matrices():
    inst = vr_vc_instance(4, 2, 2)
    layout = base_matrix(4)

    def dense(agent):
        grid = [[0] * 4 for _ in range(4)]
        for (r, c), v in zip(layout.item_positions, inst.values[agent]):
            grid[r - 1][c - 1] = int(v)
        return grid

    assert dense(0) == [[0, 32, 32, 4], [24, 16, 0, 28], [24, 0, 16, 28],
                        [19, 19, 19, 11]]
    assert dense(1) == dense(0)
    assert dense(2) == [[0, 32, 32, 3], [24, 16, 0, 27], [24, 0, 16, 27],
                        [20, 20, 20, 11]]
    assert dense(3) == dense(2)


def test_vr_vc_multiplicity_validation():
    with pytest.raises(ValueError):
        vr_vc_instance(4, 1, 3)
    with pytest.raises(ValueError):
        vr_vc_instance(5, 2, 2)


def test_vr_vc_four_mms_is_68_exactly():
    inst = vr_vc_instance(4, 2, 2)
    assert target_mms(4) == 68
    for agent in range(4):
        assert mms(inst, agent).value == 68


@pytest.mark.parametrize("n", range(4, 9))
def test_vr_vc_mms_target_via_witness_and_averaging(n):
    """Row/column witness partitions reach the target share while the
    averaging bound caps it, so the MMS equals the target exactly without
    running the subset DP."""
    num_row = n // 2
    inst = vr_vc_instance(n, num_row, n - num_row)
    layout = base_matrix(n)
    target = target_mms(n)
    for agent in range(n):
        witness = layout.row_bundles() if agent < num_row else layout.column_bundles()
        assert min(bundle_value(inst, agent, b) for b in witness) == target
        assert inst.agent_total(agent) / n == target


def test_extended_small_cases_defer_to_core_family():
    assert extended_instance(4) == vr_vc_instance(4, 2, 2)
    assert extended_instance(5) == vr_vc_instance(5, 2, 3)


@pytest.mark.parametrize("N,expected_n,expected_items", [
    (6, 5, 19), (7, 6, 24), (8, 6, 25), (9, 7, 30), (10, 7, 31),
])
def test_extended_item_counts(N, expected_n, expected_items):
    inst = extended_instance(N)
    n_core = (N + 5) // 2
    assert n_core == expected_n
    assert inst.n == N
    assert inst.m == expected_items == N + 4 * n_core - 7


@pytest.mark.parametrize("N", [6, 7, 8, 9, 10])
def test_extended_agent_type_counts_leave_two_of_each(N):
    n_core = (N + 5) // 2
    aux = N - n_core
    row_agents = N // 2
    col_agents = N - row_agents
    assert row_agents - aux >= 2
    assert col_agents - aux >= 2


@pytest.mark.parametrize("N", [6, 7, 8])
def test_extended_mms_equals_core_target(N):
    inst = extended_instance(N)
    n_core = (N + 5) // 2
    layout = base_matrix(n_core)
    target = target_mms(n_core)
    aux = list(range(5 * n_core - 7, inst.m))
    row_agents = N // 2
    for agent in range(inst.n):
        assert inst.agent_total(agent) / inst.n == target  # averaging cap
        core = (layout.row_bundles() if agent < row_agents
                else layout.column_bundles())
        witness = list(core) + [frozenset({j}) for j in aux]
        assert len(witness) == inst.n
        assert min(bundle_value(inst, agent, b) for b in witness) == target
        for j in aux:
            assert inst.values[agent][j] == target
