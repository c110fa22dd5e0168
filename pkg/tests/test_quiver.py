import json

import pytest
from hypothesis import given, settings, strategies as st

from mpa_workbench import fixtures
from mpa_workbench.errors import Disconnected, EmptyWhite, InvalidOrder, NoCycle, ParseError, ValidationError
from mpa_workbench.quiver import (
    build_doubled,
    make_quiver,
    parse_quiver,
    spanning_forest,
    split_cycle,
    star,
    validate_forest,
)


def test_doubling_the_affine_a2_cycle():
    dq = build_doubled(fixtures.cycle_quiver(3))
    assert len(dq.order) == 6
    assert sum(1 for d in dq.order if dq.epsilon(d) == 1) == 3


def test_doubling_the_jordan_quiver():
    dq = build_doubled(fixtures.jordan_quiver())
    assert dq.order == ("a0", "a0*")


def test_cycle_default_order_lists_arrows_before_reverses():
    dq = build_doubled(fixtures.cycle_quiver(3))
    assert dq.order == ("a0", "a1", "a2", "a0*", "a1*", "a2*")


def test_epsilon_flips_under_star():
    dq = build_doubled(fixtures.figure_two_quiver())
    for d in dq.order:
        assert dq.epsilon(star(d)) == -dq.epsilon(d)
        assert star(star(d)) == d
        assert dq.tail(star(d)) == dq.head(d)


def test_invalid_order_is_rejected():
    with pytest.raises(InvalidOrder):
        build_doubled(fixtures.cycle_quiver(2), ["a0", "a1", "a0*"])


def test_figure_two_forest_has_one_arrow_per_black_vertex():
    dq = build_doubled(fixtures.figure_two_quiver())
    forest = spanning_forest(dq, fixtures.FIGURE_TWO_WHITE)
    assert len(forest.arrows) == 3
    assert validate_forest(dq, fixtures.FIGURE_TWO_WHITE, forest) == []


def test_all_white_gives_empty_forest():
    dq = build_doubled(fixtures.cycle_quiver(3))
    assert spanning_forest(dq, [0, 1, 2]).arrows == ()


def test_path_forest_points_left():
    dq = build_doubled(make_quiver([0, 1, 2], [("p0", 0, 1), ("p1", 1, 2)]))
    forest = spanning_forest(dq, [0])
    assert len(forest.arrows) == 2
    for d in forest.arrows:
        assert dq.head(d) < dq.tail(d)


def test_empty_white_and_disconnected():
    dq = build_doubled(make_quiver([0, 1, 2], [("p0", 0, 1)]))
    with pytest.raises(EmptyWhite):
        spanning_forest(dq, [])
    with pytest.raises(Disconnected):
        spanning_forest(dq, [0])


def test_split_cycle_examples():
    dec = split_cycle(fixtures.cycle_quiver(3))
    assert sorted(dec.arrows) == ["a0", "a1", "a2"] and dec.complement == ()
    dec = split_cycle(fixtures.jordan_plus_pendant())
    assert dec.arrows == ("a0",) and dec.complement == ("b0",)
    dec = split_cycle(fixtures.figure_two_quiver())
    assert set(dec.vertices) == {0, 1, 2}
    assert len(dec.complement) == len(fixtures.figure_two_quiver().arrows) - 3


def test_tree_has_no_cycle():
    with pytest.raises(NoCycle):
        split_cycle(make_quiver([0, 1], [("p0", 0, 1)]))


def test_quiver_file_format():
    text = json.dumps({"vertices": [0, 1, 2], "arrows": [{"id": f"a{i}", "tail": i, "head": (i + 1) % 3} for i in range(3)],
                       "white": [0], "q": {"0": "1", "1": "2/3"}})
    quiver, white, q = parse_quiver(text)
    assert len(quiver.vertices) == 3 and len(quiver.arrows) == 3
    assert white == (0,) and str(q[1]) == "2/3"


@pytest.mark.parametrize("data", [
    {"vertices": [0, 1], "arrows": [{"id": "a", "tail": 0, "head": 5}]},
    {"vertices": [0, 1], "arrows": [{"id": "b", "tail": 0, "head": 1}], "q": {"1": "0"}},
    {"vertices": [0, 1], "arrows": [{"id": "b", "tail": 0, "head": 1}, {"id": "b", "tail": 1, "head": 0}]},
    {"vertices": [0, 0], "arrows": []},
])
def test_invalid_quiver_files(data):
    with pytest.raises(ValidationError):
        parse_quiver(json.dumps(data))


def test_malformed_json_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_quiver('{"vertices": [0,')


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_random_forest_invariants(seed, data):
    quiver = fixtures.random_connected_quiver(seed)
    dq = build_doubled(quiver)
    white = data.draw(st.lists(st.sampled_from(list(quiver.vertices)), min_size=1, unique=True))
    forest = spanning_forest(dq, white)
    assert validate_forest(dq, white, forest) == []
    assert len(forest.arrows) == len(quiver.vertices) - len(set(white))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_split_cycle_reassembles_the_arrow_set(seed):
    quiver = fixtures.random_connected_quiver(seed, require_cycle=True)
    dec = split_cycle(quiver)
    assert sorted(dec.arrows + dec.complement) == sorted(quiver.arrow_ids)
    count = len(dec.vertices)
    for i, arrow_id in enumerate(dec.arrows):
        arrow = quiver.arrow(arrow_id)
        ends = {dec.vertices[i], dec.vertices[(i + 1) % count]}
        assert {arrow.tail, arrow.head} == ends
