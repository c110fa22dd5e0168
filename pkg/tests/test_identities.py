from fractions import Fraction
import random

import pytest

from mpa_workbench import fixtures
from mpa_workbench.errors import UnsupportedLetter
from mpa_workbench.freeword import Element, format_element, r_letter
from mpa_workbench.identities import (
    GE,
    LE,
    OrderedContext,
    theta,
    theta_normal_form,
    verify_local_identities,
    verify_quantum_weyl,
    verify_theta_multiplicative,
    verify_theta_properties,
)
from mpa_workbench.quiver import build_doubled
from mpa_workbench.scalar import LaurentScalar

QUIVERS = {
    "jordan": fixtures.jordan_quiver,
    "affine-a1": lambda: fixtures.cycle_quiver(2),
    "affine-a2": lambda: fixtures.cycle_quiver(3),
    "jordan-pendant": fixtures.jordan_plus_pendant,
}


def failures(report):
    return [check.to_json() for check in report.failures()]


def test_theta_on_jordan_arrow_is_a_rescaling():
    ctx = OrderedContext(fixtures.jordan_quiver(), order=("a0", "a0*"))
    assert theta(ctx, ctx.arrow("a0")) == ctx.arrow("a0").scale(LaurentScalar.q(0) ** -1)
    assert theta(ctx, ctx.e(0)) == ctx.e(0)


def test_theta_rejects_relation_letters():
    ctx = OrderedContext(fixtures.jordan_quiver())
    with pytest.raises(UnsupportedLetter):
        theta(ctx, Element.letter(r_letter(0)))


def test_theta_of_g_is_conjugation_by_l():
    ctx = OrderedContext(fixtures.cycle_quiver(2))
    for d in ctx.le.order:
        expected = ctx.normal_form(ctx.l(d) * ctx.g(d) * ctx.l(d, inverse=True))
        assert theta_normal_form(ctx, ctx.g(d)) == expected


@pytest.mark.parametrize("name", sorted(QUIVERS))
def test_theta_properties(name):
    report = verify_theta_properties(OrderedContext(QUIVERS[name]()))
    assert report.passed, failures(report)


@pytest.mark.parametrize("seed", range(3))
def test_theta_properties_for_random_orders_on_affine_a2(seed):
    quiver = fixtures.cycle_quiver(3)
    order = list(build_doubled(quiver).order)
    random.Random(seed).shuffle(order)
    ctx = OrderedContext(quiver, order=tuple(order))
    for report in (verify_theta_properties(ctx), verify_local_identities(ctx)):
        assert report.passed, failures(report)


@pytest.mark.parametrize("name", sorted(QUIVERS))
def test_theta_is_multiplicative(name):
    report = verify_theta_multiplicative(OrderedContext(QUIVERS[name]()), pairs=60)
    assert report.passed, failures(report)


@pytest.mark.parametrize("name", sorted(QUIVERS))
def test_local_identities(name):
    report = verify_local_identities(OrderedContext(QUIVERS[name]()))
    assert report.passed, failures(report)


def test_theta_with_numeric_parameters():
    ctx = OrderedContext(fixtures.cycle_quiver(2), qvalues={0: 3, 1: -2})
    assert verify_theta_properties(ctx).passed


def test_both_sides_have_presentations():
    ctx = OrderedContext(fixtures.cycle_quiver(3))
    assert ctx.presentation(LE).source.order == tuple(reversed(ctx.presentation(GE).source.order))


@pytest.mark.parametrize("qval", [None, 2, 1, Fraction(-5, 3)])
def test_quantum_weyl_relation(qval):
    report = verify_quantum_weyl(qval)
    assert report.passed, failures(report)


def test_quantum_weyl_residual_is_reported():
    report = verify_quantum_weyl()
    assert report.checks[0].detail["residual"] == "0"
    assert format_element(Element()) == "0"
