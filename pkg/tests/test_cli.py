import json
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from mpa_workbench.cli import SCHEMA, SCHEMA_VERSION, SEED_VARIABLE, parse_element, run_command
from mpa_workbench.errors import ParseError, RoutingError
from mpa_workbench.freeword import Element, format_element
from mpa_workbench.presentations import cycle_system

from conftest import get_presentation
from oracles import random_element


def run(capsys, *argv):
    status = run_command(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return status, payload, captured.err


def test_report_envelope(capsys):
    status, payload, _ = run(capsys, "confluence", "--n", "2", "--no-transcripts")
    assert status == 0
    assert payload["schema"] == SCHEMA and payload["schema_version"] == SCHEMA_VERSION
    assert payload["command"] == "confluence" and payload["passed"] is True and payload["seed"] == 0
    assert payload["result"]["confluence"]["verdict"] is True


def test_confluence_counts_for_three_cycle(capsys):
    _, payload, _ = run(capsys, "confluence", "--n", "3", "--no-transcripts")
    assert payload["result"]["confluence"]["ambiguity_count"] == 42


def test_normalize_short_cycle(capsys):
    status, payload, _ = run(capsys, "normalize", "--n", "2", "--expr", "a0*a0*")
    assert status == 0
    assert payload["result"]["normal_form"] == "-e0 + e0 * x[a0]"


def test_normalize_quantum_weyl(capsys):
    _, payload, _ = run(capsys, "normalize", "--n", "1", "--lambda", "--expr", "a0 * a0* - q0 * a0* * a0 - (q0 - 1) * e0")
    assert payload["result"]["normal_form"] == "0"


def test_seed_comes_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(SEED_VARIABLE, "17")
    _, payload, _ = run(capsys, "nccr", "--n", "1")
    assert payload["seed"] == 17
    _, payload, _ = run(capsys, "--seed", "3", "nccr", "--n", "1")
    assert payload["seed"] == 3


def test_failed_check_exits_one(capsys):
    status, payload, _ = run(capsys, "homology", "--fixture", "jordan")
    assert status == 1 and payload["passed"] is False


def test_center_expectation(capsys):
    status, payload, _ = run(capsys, "center", "--fixture", "jordan-pendant", "--bound", "2", "--q", "2,3")
    assert status == 0 and payload["result"]["solution"]["dimension"] == 1
    status, _, _ = run(capsys, "center", "--fixture", "jordan-pendant", "--bound", "2", "--q", "2,3",
                       "--expect-dimension", "2")
    assert status == 1


def test_center_dumps_triples(capsys, tmp_path):
    target = tmp_path / "triples.txt"
    run(capsys, "center", "--fixture", "jordan-pendant", "--bound", "1", "--q", "2", "--dump-triples", str(target))
    lines = target.read_text().splitlines()
    assert lines and all(len(line.split()) == 3 for line in lines)


def test_quiver_file_input(capsys, tmp_path):
    path = tmp_path / "quiver.json"
    path.write_text(json.dumps({"vertices": [0, 1], "arrows": [{"id": "c", "tail": 0, "head": 0},
                                                               {"id": "d", "tail": 0, "head": 1}]}))
    status, payload, _ = run(capsys, "basis", "--quiver", str(path), "--flavor", "combined", "--max-len", "2")
    assert status == 0 and payload["result"]["counts"][0] == 2


@pytest.mark.parametrize("argv", [
    ["normalize", "--n", "1", "--expr", "a0 +"],
    ["normalize", "--n", "2", "--expr", "a0 * a0"],
    ["basis", "--fixture", "nonsense"],
    ["nccr", "--n", "0"],
    ["confluence", "--fixture", "jordan", "--flavor", "partial", "--white", ""],
    ["frobnicate"],
])
def test_usage_and_input_errors_exit_two(capsys, argv):
    status, payload, err = run(capsys, *argv)
    assert status == 2 and payload is None and err


@pytest.mark.parametrize("verb", [
    ["basis", "--fixture", "figure-two", "--flavor", "partial-barred", "--max-len", "2"],
    ["free-product", "--n", "2", "--max-len", "2"],
    ["identities", "--fixture", "cycle:2", "--weyl"],
    ["prime-witness", "--fixture", "a2-pendant", "--random", "2"],
    ["prime-witness", "--fixture", "jordan-pendant", "--alpha", "a0", "--beta", "x[a0]"],
    ["confluence", "--fixture", "affine:2", "--flavor", "combined", "--no-transcripts"],
])
def test_verbs_pass(capsys, verb):
    status, payload, _ = run(capsys, *verb)
    assert status == 0 and payload["passed"] is True


def test_expression_grammar():
    p = cycle_system(2)
    x = p.x("a0")
    assert parse_element("x[a0]^2 * xinv[a0]", p) == x * x * p.x("a0", -1)
    assert parse_element("a0**a0", p) == p.arrow("a0*") * p.arrow("a0")
    assert parse_element("2/3*q0^-1*e0", p) == Element.idempotent(0, p.q(0) ** -1 * Fraction(2, 3))
    assert parse_element("r", p) == p.r(0) + p.r(1)
    with pytest.raises(ParseError):
        parse_element("a0 * (a1", p)
    with pytest.raises(ParseError):
        parse_element("a0 a1", p)
    with pytest.raises(RoutingError):
        parse_element("a0 * a0", p)


@st.composite
def printed_elements(draw):
    name = draw(st.sampled_from(["cycle-3", "cycle-barred-2", "partial-barred-figure-two", "combined-a2-pendant"]))
    p = get_presentation(name)
    element = p.normal_form(random_element(p, random.Random(draw(st.integers(0, 10**6))), max_len=4))
    return p, element


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(printed_elements())
def test_printed_elements_parse_back(case):
    p, element = case
    text = format_element(element)
    if element:
        assert parse_element(text, p) == element
