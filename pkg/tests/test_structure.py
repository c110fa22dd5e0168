import json
import random
from fractions import Fraction

import pytest

from mpa_workbench import fixtures
from mpa_workbench.errors import ValidationError, ZeroInput, ZeroParameter
from mpa_workbench.freeword import Element
from mpa_workbench.presentations import combined_system, cycle_system, partial_system
from mpa_workbench.quiver import build_doubled, make_quiver
from mpa_workbench.structure import (
    CommutativeNF,
    affine_presentation,
    center_solve,
    certificate_stable,
    commutative_cross_check,
    nullspace,
    prime_witness,
    random_nonzero_element,
    recheck_center,
    satake_lift_check,
    satake_lifts,
    verify_shaw_relation,
    xyz_elements,
)

GENERIC_Q = [2, 3, 5, 7]


def generic(p):
    return {v: GENERIC_Q[i % len(GENERIC_Q)] for i, v in enumerate(p.vertices)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_shaw_relation(n):
    report = verify_shaw_relation(n, samples=20)
    assert report.passed, [c.to_json() for c in report.failures()]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_satake_lifts_are_central(n):
    report = satake_lift_check(n)
    assert report.passed, [c.to_json() for c in report.failures()]


def test_sum_of_short_loops_is_not_central():
    p = affine_presentation(2)
    naive = sum((Element.letter(p.abstract_letter("arrow", f"a{i}")) * Element.letter(p.abstract_letter("arrow", f"a{i}*"))
                 for i in range(3)), Element())
    lifted = p.normalize_abstract(naive, lambda_level=True)
    noncentral = False
    for letter in p.generators(lambda_level=True):
        g = Element.letter(letter)
        if p.normal_form(lifted * g - g * lifted, lambda_level=True):
            noncentral = True
    assert noncentral
    assert set(satake_lifts(2, p)) == {"z_X", "z_Y", "z_Z"}


def test_xyz_needs_positive_n():
    with pytest.raises(ValidationError):
        xyz_elements(0)


def test_commutative_normal_form_reduces_the_relation():
    n = 2
    relation = CommutativeNF.reduce(n, {(0, 0, n + 1): 1, (1, 1, 0): 1, (1, 1, 1): 1})
    assert relation.is_zero()
    x = CommutativeNF.monomial(n, 1, 0, 0)
    y = CommutativeNF.monomial(n, 0, 1, 0)
    assert not (x * y).is_zero()
    assert (x * y - y * x).is_zero()


def test_commutative_cross_check_agrees():
    assert commutative_cross_check(2, samples=30, seed=4) == []


def test_nullspace_of_small_system():
    rows = [{0: Fraction(1), 1: Fraction(-1)}, {1: Fraction(2), 2: Fraction(-2)}]
    kernel = nullspace(rows, [0, 1, 2])
    assert len(kernel) == 1
    vector = kernel[0]
    assert vector[0] == vector[1] == vector[2] != 0
    assert len(nullspace([], [0, 1])) == 2


@pytest.mark.parametrize("build", [fixtures.a2_plus_pendant, fixtures.jordan_plus_pendant])
def test_center_is_scalars_at_generic_q(build):
    p = combined_system(build())
    solution = center_solve(p, generic(p), 4)
    assert solution.dimension == 1
    assert recheck_center(p, solution, samples=10).passed


def test_center_of_affine_a1_at_q_one_is_large():
    p = cycle_system(2)
    solution = center_solve(p, {0: 1, 1: 1}, 4)
    assert solution.dimension >= 4
    assert recheck_center(p, solution, samples=10).passed


def test_center_solution_json_and_triples():
    p = combined_system(fixtures.jordan_plus_pendant())
    solution = center_solve(p, generic(p), 2, return_triples=True)
    payload = json.loads(json.dumps(solution.to_json(p)))
    assert payload["dimension"] == 1 and payload["bound"] == 2
    assert solution.triples and all(len(t) == 3 for t in solution.triples)


def test_center_rejects_zero_parameter():
    with pytest.raises(ZeroParameter):
        center_solve(cycle_system(1), {0: 0}, 2)


A2_PENDANT = combined_system(fixtures.a2_plus_pendant())


@pytest.mark.parametrize("seed", range(8))
def test_prime_witness_is_nonzero(seed):
    rng = random.Random(seed)
    p = A2_PENDANT
    alpha = random_nonzero_element(p, rng)
    beta = random_nonzero_element(p, rng)
    gamma, result, certificate = prime_witness(p, alpha, beta)
    assert result and result == p.normal_form(alpha * gamma * beta, lambda_level=True)
    assert certificate["N"] % len(p.cycle_arrows) == 0
    assert certificate_stable(p, alpha, gamma, beta, points=2, seed=seed).passed


def test_prime_witness_rejects_zero():
    p = A2_PENDANT
    with pytest.raises(ZeroInput):
        prime_witness(p, Element(), random_nonzero_element(p, random.Random(0)))


def test_prime_witness_needs_a_cycle():
    p = partial_system(build_doubled(make_quiver([0, 1], [("b", 0, 1)])), [0])
    e = Element.idempotent(0)
    with pytest.raises(ValidationError):
        prime_witness(p, e, e)
