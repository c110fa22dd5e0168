"""Command-line front end: quiver and expression parsing, dispatch and JSON reports.

Every run prints exactly one JSON report on standard output.  Exit status is
0 when every check passes, 1 when a check fails and 2 for usage or input
errors (reported on standard error).
"""

import argparse
import json
import os
import random
import re
import sys
from fractions import Fraction

from . import fixtures
from .errors import ParseError, RoutingError, UnknownGenerator, WorkbenchError
from .freeword import XBAR, Element, Letter, arrow_letter, element_to_json, format_element, r_letter, rp_letter, x_letter
from .homology import ComplexContext, verify_complex, verify_selfduality
from .identities import OrderedContext, verify_local_identities, verify_quantum_weyl, verify_theta_properties
from .presentations import (
    combined_system,
    cycle_system,
    free_product_counts,
    partial_system,
    verify_strong_free_product,
)
from .quiver import build_doubled, parse_quiver
from .rewrite import check_confluence
from .scalar import LaurentScalar, parse_scalar
from .structure import (
    center_solve,
    certificate_stable,
    prime_witness,
    random_nonzero_element,
    recheck_center,
    satake_lift_check,
    verify_shaw_relation,
)

SCHEMA = "mpa-workbench-report"
SCHEMA_VERSION = 1
SEED_VARIABLE = "MPA_WORKBENCH_SEED"
DEFAULT_SEED = 0


class UsageError(WorkbenchError):
    pass


# expressions

_EXPR_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+(?:/\d+)?)"
    r"|(?P<bracket>(?:x|xinv|xbar|xbarinv|y|yinv)\[(?P<inner>[^\]]+)\])"
    r"|(?P<rprime>r')"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_~]*\*?)"
    r"|(?P<power>\^\s*(?P<exp>-?\d+))"
    r"|(?P<symbol>[-+*()])"
    r")"
)


def _tokenize_expression(text, is_arrow=lambda name: True):
    """Tokens with positions.

    A trailing ``*`` belongs to a name when it completes an arrow id and is not
    glued to a following operand, so ``a0*a0*`` reads as ``a0 * a0*``.
    """
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _EXPR_TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r}", pos)
        start = match.start() + len(match.group(0)) - len(match.group(0).lstrip())
        if match.group("number") is not None:
            tokens.append(("number", Fraction(match.group("number")), start))
        elif match.group("bracket") is not None:
            stem = match.group("bracket").split("[", 1)[0]
            tokens.append(("bracket", (stem, match.group("inner").strip()), start))
        elif match.group("rprime") is not None:
            tokens.append(("ident", "r'", start))
        elif match.group("ident") is not None:
            name = match.group("ident")
            glued = re.match(r"[A-Za-z0-9_(]", text[match.end():match.end() + 1])
            if name.endswith("*") and (glued or not is_arrow(name)):
                tokens.append(("ident", name[:-1], start))
                tokens.append(("*", None, match.end() - 1))
            else:
                tokens.append(("ident", name, start))
        elif match.group("power") is not None:
            tokens.append(("power", int(match.group("exp")), start))
        else:
            tokens.append((match.group("symbol"), None, start))
        pos = match.end()
    return tokens


class _Value:
    """A parsed operand; ``scalar`` is set while the operand is a pure coefficient."""

    def __init__(self, element=None, scalar=None, invertible=None):
        self.element = element
        self.scalar = scalar
        self.invertible = invertible


class _ExpressionParser:
    def __init__(self, text, presentation):
        self.text = text
        self.p = presentation
        self.tokens = _tokenize_expression(text, lambda name: self._system_arrow(name) or self._source_arrow(name))
        self.index = 0

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        token = self.peek()
        self.index += 1
        return token

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression", 0)
        value = self.sum()
        kind, _, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected token {self.text[pos:pos + 1]!r}", pos)
        return self.as_element(value)

    def as_element(self, value):
        if value.scalar is not None:
            return self.p.unit().scale(value.scalar)
        return value.element

    def sum(self):
        kind, _, _ = self.peek()
        negate = False
        if kind in ("+", "-"):
            negate = self.take()[0] == "-"
        total = self.product()
        if negate:
            total = self.negate(total)
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            right = self.product()
            total = self.add(total, self.negate(right) if op == "-" else right)
        return total

    def negate(self, value):
        if value.scalar is not None:
            return _Value(scalar=-value.scalar)
        return _Value(-value.element)

    def add(self, left, right):
        if left.scalar is not None and right.scalar is not None:
            return _Value(scalar=left.scalar + right.scalar)
        return _Value(self.as_element(left) + self.as_element(right))

    def product(self):
        value = self.power()
        while self.peek()[0] == "*":
            _, _, pos = self.take()
            right = self.power()
            value = self.multiply(value, right, pos)
        return value

    def multiply(self, left, right, pos):
        if left.scalar is not None and right.scalar is not None:
            return _Value(scalar=left.scalar * right.scalar)
        if left.scalar is not None:
            return _Value(right.element.scale(left.scalar))
        if right.scalar is not None:
            return _Value(left.element.scale(right.scalar))
        result = left.element * right.element
        if left.element and right.element and not result:
            raise RoutingError(f"factors do not concatenate (at position {pos})")
        return _Value(result)

    def power(self):
        value = self.atom()
        while self.peek()[0] == "power":
            exponent, pos = self.take()[1:]
            value = self.raise_power(value, exponent, pos)
        return value

    def raise_power(self, value, exponent, pos):
        if value.scalar is not None:
            if exponent < 0:
                inverse = value.scalar.invert_monomial()
                return _Value(scalar=_scalar_power(inverse, -exponent))
            return _Value(scalar=_scalar_power(value.scalar, exponent))
        if exponent < 0:
            if value.invertible is None:
                raise ParseError("only x letters and scalar monomials take negative powers", pos)
            value = value.invertible
            exponent = -exponent
        if exponent == 0:
            starts = {word.start for word in value.element.words()}
            return _Value(Element.unit(sorted(starts)))
        result = value.element
        for _ in range(exponent - 1):
            result = self.multiply(_Value(result), value, pos).element
        return _Value(result)

    def atom(self):
        kind, payload, pos = self.take()
        if kind == "number":
            return _Value(scalar=LaurentScalar.const(payload))
        if kind == "(":
            value = self.sum()
            if self.take()[0] != ")":
                raise ParseError("missing closing parenthesis", pos)
            return value
        if kind == "bracket":
            return self.bracket(payload, pos)
        if kind == "ident":
            return self.identifier(payload, pos)
        raise ParseError("expected a scalar, a generator or a parenthesis", pos)

    def identifier(self, name, pos):
        p = self.p
        # e<v> and q<v> are reserved, so printed normal forms always parse back
        if re.fullmatch(r"e\d+", name):
            vertex = int(name[1:])
            if vertex not in p.vertices:
                raise UnknownGenerator(f"{name} is not a vertex idempotent (at position {pos})")
            return _Value(Element.idempotent(vertex))
        if re.fullmatch(r"q\d+", name):
            vertex = int(name[1:])
            if vertex not in p.vertices:
                raise UnknownGenerator(f"{name} is not a vertex parameter (at position {pos})")
            return _Value(scalar=p.q(vertex))
        if self._system_arrow(name) or self._source_arrow(name):
            return _Value(self.arrow(name))
        if name in ("r", "r'"):
            if not p.relation_vertices:
                raise UnknownGenerator(f"{name} does not occur in this presentation (at position {pos})")
            make = r_letter if name == "r" else rp_letter
            return _Value(sum((Element.letter(make(v)) for v in p.relation_vertices), Element()))
        raise UnknownGenerator(f"unknown generator {name!r} (at position {pos})")

    def _system_arrow(self, name):
        return name in self.p.dq.order

    def _source_arrow(self, name):
        return name in self.p.source.order

    def arrow(self, name):
        if self._system_arrow(name):
            return self.p.arrow(name)
        return self.p.embed(Element.letter(arrow_letter(self.p.source, name)))

    def x_power(self, name, power, pos):
        p = self.p
        if self._system_arrow(name):
            return p.x(name, power)
        if self._source_arrow(name):
            return p.embed(Element.letter(x_letter(p.source, name, power)))
        raise UnknownGenerator(f"unknown arrow {name!r} (at position {pos})")

    def bracket(self, payload, pos):
        stem, name = payload
        if stem in ("y", "yinv"):
            if not self.p.cycle_arrows:
                raise UnknownGenerator(f"{stem} needs a presentation with a cycle (at position {pos})")
            if name not in self.p.cycle_arrows:
                raise UnknownGenerator(f"{name!r} is not a cycle arrow (at position {pos})")
            name = name + "*"
            stem = "x" if stem == "y" else "xinv"
        power = 1 if stem in ("x", "xbar") else -1
        plain = self.x_power(name, power, pos)
        inverse = self.x_power(name, -power, pos)
        if stem in ("x", "xinv"):
            return _Value(plain, invertible=_Value(inverse, invertible=None))
        if self._system_arrow(name) and name in self.p.barred_arrows:
            vertex = self.p.dq.tail(name)
            return _Value(Element.letter(Letter(XBAR, name, power, vertex, vertex)))
        vertex = (self.p.dq if self._system_arrow(name) else self.p.source).tail(name)
        return _Value(plain - Element.idempotent(vertex))


def _scalar_power(scalar, exponent):
    result = LaurentScalar.const(1)
    for _ in range(exponent):
        result = result * scalar
    return result


def parse_element(text, presentation):
    """Raw element over the presentation's letters; arrows of the input quiver are embedded."""
    return _ExpressionParser(text, presentation).parse()


# quivers and presentations


def _fixture_quiver(name):
    table = {
        "jordan": fixtures.jordan_quiver,
        "jordan-pendant": fixtures.jordan_plus_pendant,
        "a2-pendant": fixtures.a2_plus_pendant,
        "figure-two": fixtures.figure_two_quiver,
    }
    if name in table:
        quiver = table[name]()
        white = fixtures.FIGURE_TWO_WHITE if name == "figure-two" else None
        return quiver, white, {}
    match = re.fullmatch(r"(cycle|affine|random)[:=](\d+)", name)
    if match:
        kind, number = match.group(1), int(match.group(2))
        if kind == "cycle":
            return fixtures.cycle_quiver(number), None, {}
        if kind == "affine":
            return fixtures.affine_a_quiver(number), None, {}
        return fixtures.random_connected_quiver(random.Random(number), require_cycle=True), None, {}
    raise UsageError(f"unknown fixture {name!r}; use jordan, jordan-pendant, a2-pendant, figure-two, cycle:N, affine:N or random:SEED")


def load_quiver(args):
    if getattr(args, "quiver", None):
        try:
            with open(args.quiver, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.quiver}: {exc.strerror}") from exc
        return parse_quiver(text)
    if getattr(args, "fixture", None):
        return _fixture_quiver(args.fixture)
    raise UsageError("give --quiver FILE or --fixture NAME")


def _parse_q_list(text, vertices):
    if text is None:
        return {}
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if len(parts) == 1:
        parts = parts * len(vertices)
    if len(parts) != len(vertices):
        raise UsageError(f"--q needs one value or {len(vertices)} values")
    values = {}
    for vertex, part in zip(vertices, parts):
        scalar = parse_scalar(part)
        if not scalar.is_constant():
            raise UsageError(f"q value {part!r} is not rational")
        values[vertex] = scalar.constant_value()
    return values


def build_presentation(args):
    """Presentation named by --flavor (cycle, cycle-barred, partial, partial-barred, combined)."""
    flavor = getattr(args, "flavor", None) or ("cycle" if getattr(args, "n", None) else "combined")
    qvalues_arg = getattr(args, "q", None)
    if flavor in ("cycle", "cycle-barred") and getattr(args, "n", None):
        vertices = list(range(args.n))
        return cycle_system(args.n, barred=flavor == "cycle-barred", qvalues=_parse_q_list(qvalues_arg, vertices))
    quiver, white, qvalues = load_quiver(args)
    qvalues = {**qvalues, **_parse_q_list(qvalues_arg, list(quiver.vertices))}
    if flavor == "cycle-barred":
        raise UsageError("the cycle-barred flavor is built from --n")
    if flavor == "cycle":
        if len(quiver.arrows) != len(quiver.vertices):
            raise UsageError("the cycle flavor needs a quiver that is a single cycle; use --flavor combined")
        return combined_system(quiver, qvalues=qvalues)
    if flavor in ("partial", "partial-barred"):
        if getattr(args, "white", None):
            white = tuple(int(v) for v in args.white.split(","))
        if not white:
            raise UsageError("the partial flavor needs white vertices (--white or a 'white' entry)")
        return partial_system(build_doubled(quiver), white, barred=flavor == "partial-barred", qvalues=qvalues)
    if flavor == "combined":
        return combined_system(quiver, qvalues=qvalues, bar_all=getattr(args, "bar_all", False))
    raise UsageError(f"unknown flavor {flavor!r}")


# commands


def _confluence(args):
    p = build_presentation(args)
    report = check_confluence(p.system, transcripts=not args.no_transcripts)
    return report.verdict, {"presentation": p.describe(), "confluence": report.to_json()}


def _normalize(args):
    p = build_presentation(args)
    element = parse_element(args.expr, p)
    nf = p.normal_form(element, lambda_level=args.lambda_level)
    return True, {
        "input": format_element(element),
        "normal_form": format_element(nf),
        "terms": element_to_json(nf),
        "lambda_level": args.lambda_level,
    }


def _basis(args):
    p = build_presentation(args)
    words = p.enumerate_basis(args.max_len, lambda_level=args.lambda_level)
    counts = [0] * (args.max_len + 1)
    for word in words:
        counts[len(word)] += 1
    result = {"presentation": p.describe(), "counts": counts, "total": len(words)}
    if args.words:
        result["words"] = [p.basis_record(word) for word in words]
    return True, result


def _free_product(args):
    p = build_presentation(args)
    report = verify_strong_free_product(p, args.max_len, seed=args.seed)
    result = {"report": report.to_json()}
    if p.flavor == "Combined":
        result["free_product_counts"] = free_product_counts(p, args.max_len)
    return report.passed, result


def _identities(args):
    quiver, _, qvalues = load_quiver(args)
    ctx = OrderedContext(quiver, qvalues=qvalues)
    reports = [verify_theta_properties(ctx), verify_local_identities(ctx)]
    if args.weyl:
        reports.append(verify_quantum_weyl())
    return all(r.passed for r in reports), {"reports": [r.to_json() for r in reports]}


def _homology(args):
    quiver, _, qvalues = load_quiver(args)
    ctx = ComplexContext(quiver, qvalues=qvalues)
    reports = [verify_complex(ctx), verify_selfduality(ctx)]
    return all(r.passed for r in reports), {"reports": [r.to_json() for r in reports]}


def _nccr(args):
    reports = [verify_shaw_relation(args.n, seed=args.seed), satake_lift_check(args.n)]
    return all(r.passed for r in reports), {"n": args.n, "reports": [r.to_json() for r in reports]}


def _center(args):
    quiver, _, qvalues = load_quiver(args)
    values = {**{v: 1 for v in quiver.vertices}, **qvalues, **_parse_q_list(args.q, list(quiver.vertices))}
    p = combined_system(quiver)
    solution = center_solve(p, values, args.bound, return_triples=bool(args.dump_triples))
    recheck = recheck_center(p, solution, seed=args.seed)
    if args.dump_triples:
        with open(args.dump_triples, "w", encoding="utf-8") as handle:
            for row, col, value in solution.triples:
                handle.write(f"{row} {col} {value}\n")
    result = {"solution": solution.to_json(), "recheck": recheck.to_json()}
    passed = recheck.passed
    if args.expect_dimension is not None:
        passed = passed and solution.dimension == args.expect_dimension
        result["expected_dimension"] = args.expect_dimension
    return passed, result


def _prime_witness(args):
    quiver, _, qvalues = load_quiver(args)
    p = combined_system(quiver, qvalues=qvalues)
    rng = random.Random(args.seed)
    pairs = []
    if args.alpha or args.beta:
        if not (args.alpha and args.beta):
            raise UsageError("give both --alpha and --beta")
        pairs.append((parse_element(args.alpha, p), parse_element(args.beta, p)))
    else:
        pairs.extend((random_nonzero_element(p, rng), random_nonzero_element(p, rng)) for _ in range(args.random))
    records = []
    passed = True
    for alpha, beta in pairs:
        gamma, value, certificate = prime_witness(p, alpha, beta)
        stability = certificate_stable(p, alpha, gamma, beta, seed=args.seed)
        passed = passed and bool(value) and stability.passed
        records.append({
            "alpha": format_element(alpha),
            "beta": format_element(beta),
            "gamma": format_element(gamma),
            "certificate": certificate,
            "stable": stability.passed,
        })
    return passed, {"witnesses": records}


COMMANDS = {
    "confluence": _confluence,
    "normalize": _normalize,
    "basis": _basis,
    "free-product": _free_product,
    "identities": _identities,
    "homology": _homology,
    "nccr": _nccr,
    "center": _center,
    "prime-witness": _prime_witness,
}


def _default_seed():
    value = os.environ.get(SEED_VARIABLE)
    if value is None:
        return DEFAULT_SEED
    try:
        return int(value)
    except ValueError:
        return DEFAULT_SEED


def _add_quiver_options(parser, flavor=False):
    parser.add_argument("--quiver", help="quiver JSON file")
    parser.add_argument("--fixture", help="built-in quiver: jordan, jordan-pendant, a2-pendant, figure-two, cycle:N, affine:N, random:SEED")
    if flavor:
        parser.add_argument("--flavor", choices=["cycle", "cycle-barred", "partial", "partial-barred", "combined"])
        parser.add_argument("--n", type=int, help="cycle length for the cycle flavors")
        parser.add_argument("--white", help="comma-separated white vertices for the partial flavors")
        parser.add_argument("--q", help="comma-separated rational q values (one value applies to every vertex)")
        parser.add_argument("--bar-all", action="store_true", help="bar every complement letter in the combined flavor")


def build_parser():
    parser = argparse.ArgumentParser(prog="mpa-workbench", description="Reduction systems and identity checks for multiplicative preprojective algebras.")
    parser.add_argument("--pretty", action="store_true", help="indent the JSON report")
    parser.add_argument("--seed", type=int, default=None, help=f"seed for randomized checks (default: ${SEED_VARIABLE} or {DEFAULT_SEED})")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("confluence", help="certify that every overlap ambiguity resolves")
    _add_quiver_options(p, flavor=True)
    p.add_argument("--no-transcripts", action="store_true")

    p = sub.add_parser("normalize", help="normal form of an expression")
    _add_quiver_options(p, flavor=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--lambda", dest="lambda_level", action="store_true", help="drop relation letters (work in the quotient)")

    p = sub.add_parser("basis", help="irreducible words up to a length")
    _add_quiver_options(p, flavor=True)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--lambda", dest="lambda_level", action="store_true")
    p.add_argument("--words", action="store_true", help="include the words themselves")

    p = sub.add_parser("free-product", help="strong free product checks at bounded length")
    _add_quiver_options(p, flavor=True)
    p.add_argument("--max-len", type=int, default=3)

    p = sub.add_parser("identities", help="theta and local identities")
    _add_quiver_options(p)
    p.add_argument("--weyl", action="store_true", help="also check the quantum Weyl relation on the Jordan quiver")

    p = sub.add_parser("homology", help="bimodule complex and self-duality squares")
    _add_quiver_options(p)

    p = sub.add_parser("nccr", help="affine type A center relation and central lifts")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("center", help="bounded-degree center at specialized q")
    _add_quiver_options(p)
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--q", help="comma-separated rational q values")
    p.add_argument("--expect-dimension", type=int)
    p.add_argument("--dump-triples", help="write the linear system as 'row col value' lines")

    p = sub.add_parser("prime-witness", help="witnesses gamma with alpha gamma beta nonzero")
    _add_quiver_options(p)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--random", type=int, default=5, help="number of random pairs when no elements are given")
    return parser


def _emit(payload, pretty):
    text = json.dumps(payload, sort_keys=True, indent=2 if pretty else None, default=str)
    sys.stdout.write(text + "\n")


def run_command(argv=None):
    """Parse arguments, run one verb and print its report; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is None:
        args.seed = _default_seed()
    if getattr(args, "n", None) is not None and args.n < 1:
        sys.stderr.write("error: --n must be positive\n")
        return 2
    try:
        passed, result = COMMANDS[args.verb](args)
    except (WorkbenchError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    payload = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "command": args.verb,
        "seed": args.seed,
        "passed": bool(passed),
        "result": result,
    }
    _emit(payload, args.pretty)
    return 0 if passed else 1


def main():
    sys.exit(run_command())


__all__ = ["build_parser", "build_presentation", "load_quiver", "main", "parse_element", "run_command"]
