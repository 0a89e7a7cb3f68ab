import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mmsgap.model import (
    GOODS,
    CHORES,
    Instance,
    ParseError,
    bundle_value,
    emit_instance,
    parse_instance,
)
from mmsgap.constructions import theorem1_instance


def test_bundle_value_row_of_first_matrix():
    inst = theorem1_instance()
    assert bundle_value(inst, 0, {6, 7, 8}) == 40


def test_bundle_value_empty_is_zero():
    inst = theorem1_instance()
    for agent in range(3):
        assert bundle_value(inst, agent, frozenset()) == 0


def test_bundle_value_pair_for_unbalanced_agent():
    inst = theorem1_instance()
    assert bundle_value(inst, 2, {1, 3}) == 40


def test_bundle_value_rejects_bad_indices():
    inst = theorem1_instance()
    with pytest.raises(ValueError):
        bundle_value(inst, 3, {0})
    with pytest.raises(ValueError):
        bundle_value(inst, 0, {9})


def test_parse_minimal_document():
    inst = parse_instance('{"mode": "goods", "agents": 1, "items": 3, "values": [[3, 3, 3]]}')
    assert inst.n == 1 and inst.m == 3
    assert inst.values[0] == (Fraction(3),) * 3


def test_parse_rejects_negative_value():
    doc = '{"mode": "goods", "agents": 1, "items": 1, "values": [["-1"]]}'
    with pytest.raises(ParseError, match="negative"):
        parse_instance(doc)


def test_parse_rejects_float_value():
    doc = '{"mode": "goods", "agents": 1, "items": 1, "values": [[1.5]]}'
    with pytest.raises(ParseError, match="not exact"):
        parse_instance(doc)


def test_parse_rejects_ragged_matrix():
    doc = '{"mode": "goods", "agents": 2, "items": 2, "values": [[1, 2], [1]]}'
    with pytest.raises(ParseError, match="values\\[1\\]"):
        parse_instance(doc)


def test_parse_reports_json_position():
    with pytest.raises(ParseError, match="line"):
        parse_instance("{broken")


def test_round_trip_of_first_matrix_is_bit_identical():
    inst = theorem1_instance()
    text = emit_instance(inst)
    again = emit_instance(parse_instance(text))
    assert text == again
    assert parse_instance(text) == inst
    doc = json.loads(text)
    assert doc["values"][0] == [1, 16, 23, 26, 4, 10, 12, 19, 9]


def test_emit_degenerate_no_items():
    inst = Instance.create([[]], mode=GOODS)
    doc = json.loads(emit_instance(inst))
    assert doc["items"] == 0 and doc["values"] == [[]]


def test_mode_flag_validated():
    with pytest.raises(ValueError):
        Instance.create([[1]], mode="bads")


values_strategy = st.one_of(
    st.integers(min_value=0, max_value=50),
    st.fractions(min_value=0, max_value=50, max_denominator=12),
)


@st.composite
def instances(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    m = draw(st.integers(min_value=0, max_value=6))
    mode = draw(st.sampled_from([GOODS, CHORES]))
    rows = [[draw(values_strategy) for _ in range(m)] for _ in range(n)]
    return Instance.create(rows, mode=mode)


@given(instances())
@settings(max_examples=120, deadline=None)
def test_parse_emit_round_trip(inst):
    assert parse_instance(emit_instance(inst)) == inst


@given(instances())
@settings(max_examples=120, deadline=None)
def test_emit_is_canonical_fixpoint(inst):
    text = emit_instance(inst)
    assert emit_instance(parse_instance(text)) == text


@given(instances(), st.data())
@settings(max_examples=100, deadline=None)
def test_additivity_on_disjoint_bundles(inst, data):
    if inst.m == 0:
        return
    items = list(range(inst.m))
    left = data.draw(st.sets(st.sampled_from(items)))
    right_pool = [j for j in items if j not in left]
    right = data.draw(st.sets(st.sampled_from(right_pool))) if right_pool else set()
    agent = data.draw(st.integers(min_value=0, max_value=inst.n - 1))
    assert bundle_value(inst, agent, left | right) == \
        bundle_value(inst, agent, left) + bundle_value(inst, agent, right)


@given(instances())
@settings(max_examples=60, deadline=None)
def test_bundle_value_matches_integer_reference(inst):
    # cross-check exact sums against big-integer arithmetic on a common
    # denominator
    for agent in range(inst.n):
        row = inst.values[agent]
        denom = 1
        for v in row:
            denom *= v.denominator
        scaled = sum(int(v * denom) for v in row)
        assert bundle_value(inst, agent, range(inst.m)) == Fraction(scaled, denom) if denom else True
