import random

import pytest
from hypothesis import given, settings, strategies as st

from mpa_workbench.errors import RoutingMismatch
from mpa_workbench.freeword import (
    arrow_letter,
    Element,
    Word,
    concat,
    element_mul,
    element_to_json,
    format_element,
    substitute,
    x_letter,
)
from mpa_workbench.presentations import cycle_system, partial_system
from mpa_workbench.quiver import build_doubled, make_quiver
from mpa_workbench.scalar import LaurentScalar

from oracles import random_element

CYCLE = cycle_system(3)
PATH = build_doubled(make_quiver([0, 1], [("b", 0, 1)]))


def test_idempotent_is_a_left_unit():
    a = CYCLE.arrow("a0")
    assert Element.idempotent(0) * a == a
    assert a * Element.idempotent(1) == a


def test_composable_arrows_concatenate():
    product = CYCLE.arrow("a0") * CYCLE.arrow("a0*")
    (word, coeff), = product.items()
    assert word.names() == ["a0", "a0*"] and coeff == 1


def test_incompatible_product_is_zero():
    assert CYCLE.arrow("a0") * CYCLE.arrow("a0") == 0
    assert concat(Word(0, (arrow_letter(CYCLE.dq, "a0"),)), Word(0, ())) is None


def test_scalar_multiples_multiply():
    w = CYCLE.arrow("a0")
    w2 = CYCLE.arrow("a1")
    assert element_mul(w.scale(2), w2.scale(3)) == (w * w2).scale(6)
    assert Element.idempotent(0) * Element() == 0


def test_bilinearity_example():
    jordan = cycle_system(1)
    a, a_star = jordan.arrow("a0"), jordan.arrow("a0*")
    q0 = LaurentScalar.q(0)
    assert (a.scale(q0) + a_star) * a == (a * a).scale(q0) + a_star * a


def test_substitute_expands_x():
    dq = PATH
    x = x_letter(dq, "b")
    a = Element.letter(arrow_letter(dq, "b"))
    a_star = Element.letter(arrow_letter(dq, "b*"))
    g = Element.idempotent(0) + a * a_star
    assert substitute(Element.letter(x), x, g) == g
    squared = Element.letter(x) * Element.letter(x)
    expected = Element.idempotent(0) + (a * a_star).scale(2) + a * a_star * a * a_star
    assert substitute(squared, x, g) == expected
    assert substitute(a, x, g) == a


def test_substitute_rejects_misrouted_replacement():
    x = x_letter(PATH, "b")
    with pytest.raises(RoutingMismatch):
        substitute(Element.letter(x), x, Element.letter(arrow_letter(PATH, "b")))


def test_json_and_text_forms():
    e = CYCLE.arrow("a0").scale(LaurentScalar.q(0)) - Element.idempotent(1)
    assert format_element(e) == "q0 * e0 * a0 - e1"
    assert element_to_json(e)[0] == {"coefficient": "q0", "start": 0, "letters": ["a0"]}
    assert format_element(Element()) == "0"


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=500, deadline=None)
@given(seeds)
def test_multiplication_is_associative(seed):
    rng = random.Random(seed)
    a, b, c = (random_element(CYCLE, rng, max_len=3) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_vertex_grading_recovers_element(seed):
    rng = random.Random(seed)
    m = random_element(CYCLE, rng, max_len=4, terms=5)
    total = Element()
    for i in CYCLE.vertices:
        for j in CYCLE.vertices:
            piece = Element.idempotent(i) * m * Element.idempotent(j)
            assert piece == m.restrict(start=i, end=j)
            total = total + piece
    assert total == m


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_products_keep_words_routed(seed):
    rng = random.Random(seed)
    p = partial_system(build_doubled(make_quiver([0, 1, 2], [("b0", 0, 1), ("b1", 2, 1)])), [0])
    product = random_element(p, rng) * random_element(p, rng)
    assert all(word.is_valid() for word in product.words())
