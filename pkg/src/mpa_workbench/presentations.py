"""Concrete reduction systems for cycles, partial algebras and quivers with a cycle.

Conventions: paths compose left to right and q = sum_v q_v e_v.  At a white
cycle vertex v_j (j = i + 1) the system uses the cyclic rotation of the
preprojective product that starts right after c_i*, namely P_j x_j y_j^{-1},
where P_j is the product of the complement factors and y_j = x_{c_i*}.  The
relation letter there is r_j = P_j x_j y_j^{-1} - q_j.  At a black vertex the
relation letter is rho_v - q_v for the unrotated product.  Every rule is built
in unbarred letters first and then rewritten for the barred letters
xbar = x - e.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import itertools

from .errors import CountMismatch, UnsupportedOrder, ValidationError, WorkbenchError
from .freeword import (
    ARROW,
    R,
    RP,
    X,
    XBAR,
    ZERO_ELEMENT,
    Element,
    Letter,
    Word,
    arrow_letter,
    element_mul,
    format_word,
    map_letters,
    product,
    r_letter,
    rp_letter,
    substitute_letters,
    x_letter,
    xbar_letter,
)
from .quiver import (
    CycleDecomposition,
    DoubledQuiver,
    Quiver,
    Reorientation,
    base_id,
    build_doubled,
    default_order,
    is_star,
    spanning_forest,
    split_cycle,
    validate_forest,
)
from .report import Report
from .rewrite import Measure, ReductionSystem, Rule
from .scalar import ONE, LaurentScalar

CYCLE = "Cycle"
CYCLE_BARRED = "CycleBarred"
PARTIAL = "Partial"
PARTIAL_BARRED = "PartialBarred"
COMBINED = "Combined"
FLAVORS = (CYCLE, CYCLE_BARRED, PARTIAL, PARTIAL_BARRED, COMBINED)

ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII", "XIII")

CYCLE_FAMILIES = {
    (1, 2): "I",
    (2, 1): "II",
    (3, 4): "III",
    (4, 3): "IV",
    (5, 1): "V",
    (6, 1): "VI",
    (8, 2): "VII",
    (7, 2): "VIII",
    (3, 5): "IX",
    (4, 6): "X",
    (3, 8): "XI",
    (4, 7): "XII",
}

PARTIAL_FAMILIES = {
    (1, 2): "I",
    (2, 1): "II",
    (5, 1): "III",
    (5, 2): "IV",
    (6, 7): "V",
    (7, 8): "VI",
    (8, 4): "VII",
    (6, 8): "VIII",
    (4, 6): "IX",
    (4, 5): "X",
    (4, 4): "XI",
    (3, 4): "XII",
    (4, 3): "XIII",
}

EXTRA_PREFIX = "extra"


def _family_labels(prefix_cycle, prefix_partial):
    labels = {}
    for (f1, f2), label in CYCLE_FAMILIES.items():
        labels[(("cycle", f1), ("cycle", f2))] = prefix_cycle + label
    for (f1, f2), label in PARTIAL_FAMILIES.items():
        labels[(("partial", f1), ("partial", f2))] = prefix_partial + label
    labels[(("partial", 7), ("partial", 7))] = f"{EXTRA_PREFIX} x^3"
    for side in ("cycle", "partial"):
        labels[((side, "B1"), (side, "B2"))] = f"{EXTRA_PREFIX} r r' r"
        labels[((side, "B2"), (side, "B1"))] = f"{EXTRA_PREFIX} r' r r'"
    return labels


def is_extra_family(label):
    return label.startswith(EXTRA_PREFIX)


@dataclass(frozen=True)
class CycleDescriptor:
    """Cycle basis word x^m followed by l copies of one cycle direction."""

    start: int
    m: int
    length: int
    direction: str

    def to_json(self):
        return {"start": self.start, "m": self.m, "length": self.length, "direction": self.direction}


@dataclass
class _Spec:
    """Everything needed to rebuild a presentation, for example after specializing q."""

    flavor: str
    quiver: Quiver
    order: tuple
    white: tuple
    cycle: CycleDecomposition
    forest_source: tuple
    bar_mode: str
    qvalues: dict = field(default_factory=dict)
    order_given: bool = False


class Presentation:
    """A reduction system together with the maps to and from the abstract algebra.

    Abstract letters are built on ``source`` (the input quiver with its
    order); system letters live on ``dq`` (after reorienting the cycle and
    the forest).  ``embed`` and ``pullback`` are mutually inverse algebra maps
    in the localized algebra.
    """

    def __init__(self, spec, source, reorientation, dq, white, cycle_arrows, cycle_vertices, forest, system,
                 relation_vertices, barred_arrows, cycle_p, qfun, component_info):
        self.spec = spec
        self.flavor = spec.flavor
        self.quiver = spec.quiver
        self.source = source
        self.reorientation = reorientation
        self.dq = dq
        self.white = tuple(sorted(white))
        self.cycle = spec.cycle
        self.cycle_arrows = tuple(cycle_arrows)
        self.cycle_vertices = tuple(cycle_vertices)
        self.forest = forest
        self.system = system
        self.relation_vertices = tuple(sorted(relation_vertices))
        self.barred_arrows = frozenset(barred_arrows)
        self._cycle_p = cycle_p
        self._qfun = qfun
        self.component_info = component_info
        self._embed_cache = {}
        self._pullback_cache = {}
        self._substituted = frozenset(rule.pattern[0] for rule in system.rules if len(rule.pattern) == 1)

    # scalars and letters

    def q(self, vertex):
        return self._qfun(vertex)

    @property
    def vertices(self):
        return self.dq.vertices

    def unit(self):
        return Element.unit(self.dq.vertices)

    def letter(self, letter):
        return Element.letter(letter)

    def arrow(self, arrow_id):
        return Element.letter(arrow_letter(self.dq, arrow_id))

    def x(self, arrow_id, power=1):
        """System image of the abstract letter x_d^{power} for a system arrow id."""
        return self._system_view(x_letter(self.dq, arrow_id, power))

    def r(self, vertex):
        self._require_relation(vertex)
        return Element.letter(r_letter(vertex))

    def rp(self, vertex):
        self._require_relation(vertex)
        return Element.letter(rp_letter(vertex))

    def _require_relation(self, vertex):
        if vertex not in self.relation_vertices:
            raise ValidationError(f"vertex {vertex} carries no relation letter in this presentation")

    def generators(self, lambda_level=False, include_substituted=False):
        """Letters that may occur in normal forms (or all system letters)."""
        letters = set()
        for arrow_id in self.dq.order:
            letters.add(arrow_letter(self.dq, arrow_id))
            if self._is_cycle_star(arrow_id):
                continue
            kind = XBAR if arrow_id in self.barred_arrows else X
            for power in (1, -1):
                letters.add(Letter(kind, arrow_id, power, self.dq.tail(arrow_id), self.dq.tail(arrow_id)))
        if not lambda_level:
            for vertex in self.relation_vertices:
                letters.add(r_letter(vertex))
                letters.add(rp_letter(vertex))
        if not include_substituted:
            letters -= self._substituted
        return sorted(letters, key=Letter.sort_key)

    def relation_factors(self, vertex):
        """Doubled arrows d, in order, with r + q = prod x_d^{eps(d)} at ``vertex``.

        At cycle vertices the product starts right after the incoming cycle
        arrow's reverse, which is a rotation of the order at that vertex.
        """
        self._require_relation(vertex)
        if vertex in self.cycle_vertices:
            index = self.cycle_vertices.index(vertex)
            incoming = self.cycle_arrows[index - 1] + "*"
            return tuple(self._cycle_p[vertex]["factors"]) + (self.cycle_arrows[index], incoming)
        return tuple(self.dq.arrows_at_tail(vertex))

    def _is_cycle_star(self, arrow_id):
        return is_star(arrow_id) and base_id(arrow_id) in self.cycle_arrows

    # normal forms

    def normal_form(self, element, lambda_level=False, strategy="append"):
        return self.system.normalize(element, strategy=strategy, lambda_level=lambda_level)

    def normalize_abstract(self, element, lambda_level=False, strategy="append"):
        return self.normal_form(self.embed(element), lambda_level=lambda_level, strategy=strategy)

    def is_irreducible(self, word):
        return self.system.is_irreducible(word)

    # maps

    def _system_view(self, letter):
        """Image in system letters of an unbarred letter on the reoriented quiver."""
        if letter.kind != X:
            return Element.letter(letter)
        arrow_id = letter.arrow
        if self._is_cycle_star(arrow_id):
            index = self.cycle_arrows.index(base_id(arrow_id))
            return self._y_image(index, letter.power)
        return _convert_letter(letter, self.dq, self.barred_arrows)

    def _y_image(self, index, power):
        """y_j = x_{c_i*} written through the relation letters at v_j."""
        j = self.cycle_vertices[(index + 1) % len(self.cycle_vertices)]
        wrapped = self._cycle_p[j]
        return wrapped["y"] if power > 0 else wrapped["yinv"]

    def embed(self, element):
        """Abstract element on the source quiver -> system element."""
        return map_letters(element, self._embed_letter)

    def _embed_letter(self, letter):
        cached = self._embed_cache.get(letter)
        if cached is not None:
            return cached
        image = self._compute_embed(letter)
        self._embed_cache[letter] = image
        return image

    def _compute_embed(self, letter):
        ro = self.reorientation
        if letter.kind in (R, RP):
            self._require_relation(letter.source)
            return Element.letter(letter)
        arrow_id = letter.arrow
        if arrow_id not in ro.rename:
            raise ValidationError(f"letter {letter.name} does not belong to the source quiver")
        if letter.kind == XBAR:
            return self._compute_embed(Letter(X, arrow_id, letter.power, letter.source, letter.target)) - Element.idempotent(letter.source)
        new_id = ro.rename[arrow_id]
        if letter.kind == ARROW:
            if ro.is_flipped(arrow_id) and not is_star(arrow_id):
                # b = -x_{b~*}^{-1} b~*
                return -element_mul(self._system_view(x_letter(self.dq, new_id, -1)), self.arrow(new_id))
            return self.arrow(new_id)
        power = -letter.power if ro.is_flipped(arrow_id) else letter.power
        return self._system_view(x_letter(self.dq, new_id, power))

    def pullback(self, element):
        """System element -> abstract element on the source quiver."""
        return map_letters(element, self._pullback_letter)

    def _pullback_letter(self, letter):
        cached = self._pullback_cache.get(letter)
        if cached is not None:
            return cached
        image = self._compute_pullback(letter)
        self._pullback_cache[letter] = image
        return image

    def _compute_pullback(self, letter):
        ro = self.reorientation
        src = self.source
        if letter.kind in (R, RP):
            return Element.letter(letter)
        if letter.kind == XBAR:
            plain = Letter(X, letter.arrow, letter.power, letter.source, letter.target)
            return self._compute_pullback(plain) - Element.idempotent(letter.source)
        old_id = ro.inverse_rename[letter.arrow]
        flipped = ro.is_flipped(old_id)
        if letter.kind == ARROW:
            if flipped and not is_star(old_id):
                # system b~* corresponds to -x_b^{-1} b
                return -element_mul(
                    Element.letter(x_letter(src, old_id, -1)), Element.letter(arrow_letter(src, old_id))
                )
            return Element.letter(arrow_letter(src, old_id))
        power = -letter.power if flipped else letter.power
        return Element.letter(x_letter(src, old_id, power))

    def abstract_letter(self, kind, arrow_id, power=1):
        """Letter on the source quiver: arrow, x or xbar."""
        if kind == ARROW:
            return arrow_letter(self.source, arrow_id)
        if kind == X:
            return x_letter(self.source, arrow_id, power)
        if kind == XBAR:
            return xbar_letter(self.source, arrow_id, power)
        raise ValueError(kind)

    # bases

    def enumerate_basis(self, max_len, lambda_level=False, starts=None):
        """All irreducible words with at most ``max_len`` letters, sorted."""
        letters = self.generators(lambda_level=lambda_level)
        by_source = {}
        for letter in letters:
            by_source.setdefault(letter.source, []).append(letter)
        system = self.system
        result = []
        for start in sorted(self.dq.vertices if starts is None else starts):
            frontier = [Word(start, ())]
            result.append(frontier[0])
            for _ in range(max_len):
                following = []
                for word in frontier:
                    for letter in by_source.get(word.end, ()):
                        candidate = Word(start, word.letters + (letter,))
                        if system.suffix_match(candidate) is None and not _has_suffix_inclusion(system, candidate):
                            following.append(candidate)
                result.extend(following)
                frontier = following
        result.sort(key=Word.sort_key)
        return result

    def basis_counts(self, max_len, lambda_level=False):
        counts = [0] * (max_len + 1)
        for word in self.enumerate_basis(max_len, lambda_level):
            counts[len(word)] += 1
        return counts

    def letter_label(self, letter):
        """Name of a letter for dumps; cycle flavors use the aggregate names."""
        if self.flavor in (CYCLE, CYCLE_BARRED) and letter.kind in (X, XBAR):
            stem = "x" if letter.kind == X else "xbar"
            if letter.power > 0:
                return stem
            return "x^-1" if letter.kind == X else "xbarinv"
        return letter.name

    def basis_record(self, word):
        return {"start": word.start, "letters": [self.letter_label(l) for l in word.letters], "flavor": self.flavor}

    def descriptor(self, word):
        """CycleDescriptor for plain cycle words, otherwise the word itself."""
        if self.flavor != CYCLE:
            return word
        m = 0
        arrows = []
        for letter in word.letters:
            if letter.kind == X:
                if arrows:
                    return word
                m += letter.power
            elif letter.kind == ARROW:
                arrows.append(letter)
            else:
                return word
        if not arrows:
            return CycleDescriptor(word.start, m, 0, "a")
        kinds = {letter.is_star for letter in arrows}
        if len(kinds) != 1:
            return word
        return CycleDescriptor(word.start, m, len(arrows), "a*" if arrows[0].is_star else "a")

    def descriptors(self, element):
        return [(self.descriptor(word), coeff) for word, coeff in element.sorted_terms()]

    def specialize(self, assignment):
        """Rebuild with q_v replaced by the given rational numbers."""
        values = dict(self.spec.qvalues)
        for vertex, value in assignment.items():
            value = Fraction(value)
            if value == 0:
                raise ValidationError(f"q value for vertex {vertex} is zero")
            values[vertex] = value
        spec = _Spec(**{**self.spec.__dict__, "qvalues": values})
        return _build(spec)

    def describe(self):
        return {
            "flavor": self.flavor,
            "vertices": list(self.dq.vertices),
            "white": list(self.white),
            "cycle": list(self.cycle_arrows),
            "forest": list(self.forest.arrows) if self.forest else [],
            "rule_count": len(self.system.rules),
            "reoriented": sorted(self.reorientation.flipped),
            "measure": self.system.measure.name,
        }


def _has_suffix_inclusion(system, word):
    """True when some rule pattern ends at the last letter (guards respected)."""
    letters = word.letters
    size = len(letters)
    for length in range(1, min(system.max_length, size) + 1):
        rule = system.index.get(letters[size - length:])
        if rule is not None:
            previous = letters[size - length - 1] if size > length else None
            if rule.guard_allows(previous):
                return True
    return False


# barred conversion


def _convert_letter(letter, dq, barred):
    if letter.kind == X and letter.arrow in barred:
        bar = Letter(XBAR, letter.arrow, letter.power, letter.source, letter.target)
        return Element.letter(bar) + Element.idempotent(letter.source)
    return Element.letter(letter)


def _convert(element, dq, barred):
    if not barred:
        return element
    return map_letters(element, lambda letter: _convert_letter(letter, dq, barred))


def _barred_rule(name, pattern, replacement, family, dq, barred):
    """Rewrite ``pattern = replacement`` with barred letters, leading word all barred."""
    if not any(letter.kind == X and letter.arrow in barred for letter in pattern):
        return Rule(name, pattern, _convert(replacement, dq, barred), family)
    leading = tuple(
        Letter(XBAR, l.arrow, l.power, l.source, l.target) if l.kind == X and l.arrow in barred else l
        for l in pattern
    )
    lead_word = Word(pattern[0].source, leading)
    lhs = _convert(Element.from_word(Word(pattern[0].source, pattern)), dq, barred)
    rest = lhs - Element.from_word(lead_word)
    return Rule(name, leading, _convert(replacement, dq, barred) - rest, family)


# builder


def _qfun_from(values):
    cache = {}

    def qfun(vertex):
        scalar = cache.get(vertex)
        if scalar is None:
            if vertex in values:
                scalar = LaurentScalar.const(values[vertex])
            else:
                scalar = LaurentScalar.q(vertex)
            cache[vertex] = scalar
        return scalar

    return qfun


class _Assembly:
    """Builds rules and measures on the reoriented doubled quiver."""

    def __init__(self, dq, white, cycle_arrows, cycle_vertices, forest_arrows, barred, qfun, relation_vertices):
        self.dq = dq
        self.white = frozenset(white)
        self.cycle_arrows = tuple(cycle_arrows)
        self.cycle_vertices = tuple(cycle_vertices)
        self.cycle_set = frozenset(cycle_arrows) | frozenset(a + "*" for a in cycle_arrows)
        self.forest = tuple(forest_arrows)
        self.forest_set = frozenset(forest_arrows)
        self.forest_bar = self.forest_set | frozenset(a + "*" for a in forest_arrows)
        self.barred = frozenset(barred)
        self.q = qfun
        self.relation_vertices = frozenset(relation_vertices)
        self.complement = tuple(d for d in dq.order if d not in self.cycle_set)
        self.rules = []
        self.substitution = {}

    # element helpers

    def A(self, arrow_id):
        return Element.letter(arrow_letter(self.dq, arrow_id))

    def X(self, arrow_id, power=1):
        return Element.letter(x_letter(self.dq, arrow_id, power))

    def e(self, vertex, coeff=ONE):
        return Element.idempotent(vertex, coeff)

    def factor_product(self, vertex, factors):
        return product([self.X(d, self.dq.epsilon(d)) for d in factors], [vertex])

    def factor_inverse(self, vertex, factors):
        return product([self.X(d, -self.dq.epsilon(d)) for d in reversed(factors)], [vertex])

    def add(self, name, family, pattern_letters, replacement):
        self.rules.append((name, family, tuple(pattern_letters), replacement))

    def r_plus_q(self, v):
        return Element.letter(r_letter(v)) + self.e(v, self.q(v))

    def rp_plus_qinv(self, v):
        return Element.letter(rp_letter(v)) + self.e(v, self.q(v).invert_monomial())

    # cycle part

    def cycle_complement_factors(self, j_index):
        """Complement factors at v_j in the rotation starting right after c_i*."""
        n = len(self.cycle_vertices)
        vj = self.cycle_vertices[j_index]
        ci_star = self.cycle_arrows[(j_index - 1) % n] + "*"
        cj = self.cycle_arrows[j_index]
        at = list(self.dq.arrows_at_tail(vj))
        start = at.index(ci_star)
        rotated = at[start + 1:] + at[:start + 1]
        if rotated[-2:] != [cj, ci_star]:
            raise UnsupportedOrder(f"at vertex {vj} the arrow {cj} is not immediately before {ci_star}")
        return rotated[:-2]

    def build_cycle(self):
        n = len(self.cycle_vertices)
        self.cycle_p = {}
        for j_index, vj in enumerate(self.cycle_vertices):
            factors = self.cycle_complement_factors(j_index)
            p = self.factor_product(vj, factors)
            p_inv = self.factor_inverse(vj, factors)
            xj = self.X(self.cycle_arrows[j_index], 1)
            xj_inv = self.X(self.cycle_arrows[j_index], -1)
            y = self.rp_plus_qinv(vj) * p * xj
            y_inv = xj_inv * p_inv * self.r_plus_q(vj)
            self.cycle_p[vj] = {"P": p, "Pinv": p_inv, "y": y, "yinv": y_inv, "factors": factors}
        for i_index, vi in enumerate(self.cycle_vertices):
            j_index = (i_index + 1) % n
            vj = self.cycle_vertices[j_index]
            c = self.cycle_arrows[i_index]
            a_let = arrow_letter(self.dq, c)
            s_let = arrow_letter(self.dq, c + "*")
            xi = x_letter(self.dq, c, 1)
            xi_inv = x_letter(self.dq, c, -1)
            xj = x_letter(self.dq, self.cycle_arrows[j_index], 1)
            xj_inv = x_letter(self.dq, self.cycle_arrows[j_index], -1)
            a, s = Element.letter(a_let), Element.letter(s_let)
            data = self.cycle_p[vj]
            p, p_inv = data["P"], data["Pinv"]
            qj = self.q(vj)
            tag = f"({c})"
            self.add(f"C1{tag}", ("cycle", 1), (xi, xi_inv), self.e(vi))
            self.add(f"C2{tag}", ("cycle", 2), (xi_inv, xi), self.e(vi))
            self.add(f"C3{tag}", ("cycle", 3), (a_let, s_let), Element.letter(xi) - self.e(vi))
            self.add(f"C4{tag}", ("cycle", 4), (s_let, a_let), data["y"] - self.e(vj))
            self.add(f"C5{tag}", ("cycle", 5), (s_let, xi), data["y"] * s)
            rhs6 = (
                (Element.letter(xi) * a).scale(qj)
                - (a * Element.letter(rp_letter(vj)) * p * Element.letter(xj)).scale(qj)
                + a * (self.e(vj) - p) * Element.letter(xj)
            )
            self.add(f"C6{tag}", ("cycle", 6), (a_let, xj), rhs6)
            self.add(f"C7{tag}", ("cycle", 7), (a_let, xj_inv), Element.letter(xi_inv) * a * self.rp_plus_qinv(vj) * p)
            self.add(f"C8{tag}", ("cycle", 8), (s_let, xi_inv), data["yinv"] * s)

    # partial part

    def black_factors(self, vertex):
        return list(self.dq.arrows_at_tail(vertex))

    def build_substitutions(self):
        depth = {}
        heads = {self.dq.tail(a): self.dq.head(a) for a in self.forest}

        def depth_of(vertex):
            steps = 0
            while vertex in heads:
                vertex = heads[vertex]
                steps += 1
            return steps

        for a in self.forest:
            depth[a] = depth_of(self.dq.tail(a))
        self.forest_depth = depth
        self.red = {}
        self.red_inv = {}
        for a in sorted(self.forest, key=lambda a: -depth[a]):
            v = self.dq.tail(a)
            factors = self.black_factors(v)
            k = factors.index(a)
            left, right = factors[:k], factors[k + 1:]
            red = self.factor_inverse(v, left) * self.r_plus_q(v) * self.factor_inverse(v, right)
            red_inv = self.factor_product(v, right) * self.rp_plus_qinv(v) * self.factor_product(v, left)
            red = substitute_letters(red, self.substitution)
            red_inv = substitute_letters(red_inv, self.substitution)
            self.red[a] = red
            self.red_inv[a] = red_inv
            self.substitution[x_letter(self.dq, a, 1)] = red
            self.substitution[x_letter(self.dq, a, -1)] = red_inv
            star = a + "*"
            self.substitution[x_letter(self.dq, star, -1)] = self.e(self.dq.tail(star)) - self.A(star) * red_inv * self.A(a)

    def build_partial(self):
        self.build_substitutions()
        for d in self.complement:
            tag = f"({d})"
            tail = self.dq.tail(d)
            d_star = d[:-1] if is_star(d) else d + "*"
            if d not in self.forest_bar:
                xd, xd_inv = x_letter(self.dq, d, 1), x_letter(self.dq, d, -1)
                self.add(f"P1{tag}", ("partial", 1), (xd, xd_inv), self.e(tail))
                self.add(f"P2{tag}", ("partial", 2), (xd_inv, xd), self.e(tail))
                for power in (1, -1):
                    sign = "+" if power > 0 else "-"
                    self.add(
                        f"P5{sign}{tag}",
                        ("partial", 5),
                        (arrow_letter(self.dq, d), x_letter(self.dq, d_star, power)),
                        self.X(d, power) * self.A(d),
                    )
            if d in self.forest_set:
                self.add(f"P3{tag}", ("partial", 3), (arrow_letter(self.dq, d), arrow_letter(self.dq, d_star)),
                         self.red[d] - self.e(tail))
            else:
                self.add(f"P4{tag}", ("partial", 4), (arrow_letter(self.dq, d), arrow_letter(self.dq, d_star)),
                         self.X(d, 1) - self.e(tail))
        for a in self.forest:
            star = a + "*"
            tag = f"({a})"
            xs = x_letter(self.dq, star, 1)
            red = self.red[a]
            self.add(f"P6{tag}", ("partial", 6), (arrow_letter(self.dq, a), xs), red * self.A(a))
            self.add(f"P7{tag}", ("partial", 7), (xs, xs), Element.letter(xs) + self.A(star) * red * self.A(a))
            self.add(f"P8{tag}", ("partial", 8), (xs, arrow_letter(self.dq, star)), self.A(star) * red)
        for letter, image in self.substitution.items():
            self.add(f"S({letter.name})", ("partial", "S"), (letter,), image)

    def build_b_rules(self, side, vertices):
        for v in sorted(vertices):
            r, rp = r_letter(v), rp_letter(v)
            qv = self.q(v)
            rhs = Element.letter(rp).scale(-qv) - Element.letter(r).scale(qv.invert_monomial())
            self.add(f"B1@{v}", (side, "B1"), (r, rp), rhs)
            self.add(f"B2@{v}", (side, "B2"), (rp, r), rhs)

    # assembly

    def finish(self, name, measure, family_labels):
        rules = []
        for rule_name, family, pattern, replacement in self.rules:
            rules.append(_barred_rule(rule_name, pattern, replacement, family, self.dq, self.barred))
        system = ReductionSystem(rules, measure, name=name, family_labels=family_labels)
        measure.letters = system.alphabet | frozenset(self.all_letters())
        return system

    def all_letters(self):
        letters = set()
        for d in self.dq.order:
            letters.add(arrow_letter(self.dq, d))
            for power in (1, -1):
                letters.add(x_letter(self.dq, d, power))
                letters.add(xbar_letter(self.dq, d, power))
        for v in self.relation_vertices:
            letters.add(r_letter(v))
            letters.add(rp_letter(v))
        return letters

    # measures

    def cycle_measure_function(self):
        forward = frozenset(arrow_letter(self.dq, c) for c in self.cycle_arrows)
        backward = frozenset(arrow_letter(self.dq, c + "*") for c in self.cycle_arrows)
        cycle_x = frozenset(
            Letter(kind, c, power, self.dq.tail(c), self.dq.tail(c))
            for c in self.cycle_arrows for kind in (X, XBAR) for power in (1, -1)
        )
        white_r = frozenset(
            letter for v in self.cycle_vertices for letter in (r_letter(v), rp_letter(v))
        )

        def function(word):
            n_forward = arrows_seen = pairs = n_ax = n_r = 0
            previous_forward = False
            for letter in word.letters:
                if letter in forward:
                    n_forward += 1
                    arrows_seen += 1
                    previous_forward = True
                    continue
                if letter in backward:
                    arrows_seen += 1
                elif letter in cycle_x:
                    pairs += arrows_seen
                    if previous_forward:
                        n_ax += 1
                elif letter in white_r:
                    n_r += 1
                previous_forward = False
            return (n_forward, pairs, n_ax, 0, n_r)

        return function

    def partial_measure_function(self):
        edges = [a.id for a in self.dq.base.arrows if a.id not in self.cycle_arrows]
        input_rank = {d: k for k, d in enumerate(edges)}
        forest_edges = sorted(self.forest, key=lambda a: (self.forest_depth[a], input_rank[a]))
        ranked = forest_edges + [d for d in edges if d not in self.forest_set]
        slot = {d: k for k, d in enumerate(ranked)}
        info = {}
        for d in self.complement:
            k = slot[base_id(d)]
            info[arrow_letter(self.dq, d)] = (k, 2, True)
            v = self.dq.tail(d)
            for kind in (X, XBAR):
                info[Letter(kind, d, 1, v, v)] = (k, 3, False)
                info[Letter(kind, d, -1, v, v)] = (k, 6, False)
        black = frozenset(v for v in self.dq.vertices if v not in self.white)
        black_r = frozenset(letter for v in black for letter in (r_letter(v), rp_letter(v)))
        size = len(ranked)

        def function(word):
            phi = [0] * size
            arrows_seen = pairs = n_r = 0
            for letter in word.letters:
                data = info.get(letter)
                if data is None:
                    if letter in black_r:
                        n_r += 1
                    continue
                k, weight, is_arrow = data
                phi[k] += weight
                if is_arrow:
                    arrows_seen += 1
                else:
                    pairs += arrows_seen
            return tuple(phi) + (pairs, n_r)

        return function


def _orient(quiver, order, cycle, white, forest_source):
    """Reorientation making cycle arrows forward and forest arrows base arrows."""
    flips = set()
    if cycle is not None:
        for arrow_id, forward in zip(cycle.arrows, cycle.forward):
            if not forward:
                flips.add(arrow_id)
    for arrow_id in forest_source:
        if is_star(arrow_id):
            flips.add(base_id(arrow_id))
    source = build_doubled(quiver, order)
    return source, Reorientation(source, flips)


def _system_cycle_arrows(reorientation, cycle):
    arrows = []
    for arrow_id, forward in zip(cycle.arrows, cycle.forward):
        arrows.append(reorientation.rename[arrow_id] if forward else reorientation.rename[arrow_id + "*"])
    return arrows


def _complement_forest(quiver, complement_ids, white, order):
    sub = Quiver(quiver.vertices, tuple(a for a in quiver.arrows if a.id in set(complement_ids)))
    sub_order = tuple(d for d in order if base_id(d) in set(complement_ids)) if order else None
    sub_dq = build_doubled(sub, sub_order)
    return spanning_forest(sub_dq, white).arrows


def _default_combined_order(quiver, cycle, forest_source):
    """Cycle arrows, their reverses, then the complement, transported back to the source."""
    _, ro = _orient(quiver, None, cycle, cycle.white, forest_source)
    cycle_ids = _system_cycle_arrows(ro, cycle)
    target_bases = [a.id for a in ro.target.base.arrows if a.id not in set(cycle_ids)]
    target_order = cycle_ids + [c + "*" for c in cycle_ids] + target_bases + [b + "*" for b in target_bases]
    return tuple(ro.inverse_rename[d] for d in target_order)


def _build(spec):
    flavor = spec.flavor
    quiver = spec.quiver
    cycle = spec.cycle
    forest_source = tuple(spec.forest_source)
    source, ro = _orient(quiver, spec.order, cycle, spec.white, forest_source)
    dq = ro.target
    white = tuple(sorted(spec.white))
    cycle_arrows = _system_cycle_arrows(ro, cycle) if cycle is not None else []
    cycle_vertices = list(cycle.vertices) if cycle is not None else []
    forest_target = tuple(ro.rename[a] for a in forest_source)
    black = [v for v in dq.vertices if v not in set(white)]
    relation_vertices = set(black) | set(cycle_vertices)
    barred = _barred_set(spec.bar_mode, dq, cycle_arrows, white)
    qfun = _qfun_from(spec.qvalues)
    assembly = _Assembly(dq, white, cycle_arrows, cycle_vertices, forest_target, barred, qfun, relation_vertices)
    cycle_p = {}
    if flavor in (CYCLE, CYCLE_BARRED, COMBINED):
        assembly.build_cycle()
        cycle_p = assembly.cycle_p
        assembly.build_b_rules("cycle", cycle_vertices)
    if flavor in (PARTIAL, PARTIAL_BARRED, COMBINED):
        assembly.build_partial()
        assembly.build_b_rules("partial", black)
    else:
        assembly.forest_depth = {}
    if flavor in (CYCLE, CYCLE_BARRED):
        measure = Measure("N", assembly.cycle_measure_function())
        labels = _family_labels("", "")
    elif flavor in (PARTIAL, PARTIAL_BARRED):
        measure = Measure("N'", assembly.partial_measure_function())
        labels = _family_labels("", "")
    else:
        n_function = assembly.cycle_measure_function()
        p_function = assembly.partial_measure_function()
        measure = Measure("N+N'", lambda word: n_function(word) + p_function(word))
        labels = _family_labels("cycle ", "partial ")
    system = assembly.finish(flavor, measure, labels)
    if cycle_p:
        for data in cycle_p.values():
            data["y"] = _convert(data["y"], dq, barred)
            data["yinv"] = _convert(data["yinv"], dq, barred)
    forest = None
    if flavor in (PARTIAL, PARTIAL_BARRED, COMBINED):
        forest = _forest_object(dq, white, forest_target)
    return Presentation(
        spec, source, ro, dq, white, cycle_arrows, cycle_vertices, forest, system, relation_vertices, barred,
        cycle_p, qfun, {},
    )


def _forest_object(dq, white, arrows):
    from .quiver import Forest

    parent = {dq.tail(a): a for a in arrows}
    return Forest(tuple(arrows), tuple(white), parent)


def _barred_set(mode, dq, cycle_arrows, white):
    cycle_set = set(cycle_arrows) | {c + "*" for c in cycle_arrows}
    if isinstance(mode, frozenset):
        return frozenset(d for d in mode if d in dq.position)
    if mode == "complement":
        return frozenset(d for d in dq.order if d not in cycle_set)
    if mode == "none":
        return frozenset()
    if mode == "cycle":
        return frozenset(cycle_arrows)
    if mode == "all":
        return frozenset(d for d in dq.order if d not in cycle_set or not is_star(d))
    if mode == "white":
        return frozenset(d for d in dq.order if d not in cycle_set and dq.tail(d) in set(white))
    raise ValueError(f"unknown barring mode {mode!r}")


# public builders


def cycle_quiver_and_decomposition(n):
    from .fixtures import cycle_quiver

    quiver = cycle_quiver(n)
    ids = quiver.arrow_ids
    cycle = CycleDecomposition(tuple(range(n)), ids, (True,) * n, ())
    return quiver, cycle


def cycle_system(n, barred=False, qvalues=None):
    """Reduction system for the oriented cycle on ``n`` vertices (n = 1: Jordan quiver)."""
    if n < 1:
        raise ValidationError("a cycle needs at least one vertex")
    quiver, cycle = cycle_quiver_and_decomposition(n)
    spec = _Spec(
        CYCLE_BARRED if barred else CYCLE,
        quiver,
        default_order(quiver),
        tuple(range(n)),
        cycle,
        (),
        "cycle" if barred else "none",
        dict(qvalues or {}),
    )
    return _build(spec)


def partial_system(dq, white, forest=None, barred=False, qvalues=None):
    """Partial multiplicative preprojective system with white vertices ``white``."""
    white = tuple(sorted(set(white)))
    if forest is None:
        forest = spanning_forest(dq, white)
    problems = validate_forest(dq, white, forest)
    if problems:
        raise ValidationError("; ".join(problems))
    spec = _Spec(
        PARTIAL_BARRED if barred else PARTIAL,
        dq.base,
        dq.order,
        white,
        None,
        tuple(forest.arrows),
        "all" if barred else "none",
        dict(qvalues or {}),
    )
    return _build(spec)


def combined_system(quiver, dec=None, qvalues=None, order=None, bar_all=False):
    """Combined system for a connected quiver with a cycle ``dec``."""
    if not quiver.is_connected():
        from .errors import Disconnected

        raise Disconnected("quiver is not connected")
    if dec is None:
        dec = split_cycle(quiver)
    _validate_decomposition(quiver, dec)
    attempts = [dec]
    if order is not None:
        attempts.append(dec.reversed())
    last_error = None
    for attempt in attempts:
        forest_source = _complement_forest(quiver, attempt.complement, attempt.white, order)
        use_order = order if order is not None else _default_combined_order(quiver, attempt, forest_source)
        spec = _Spec(COMBINED, quiver, tuple(use_order), attempt.white, attempt, forest_source,
                     "complement" if bar_all else "white", dict(qvalues or {}), order_given=order is not None)
        try:
            return _build(spec)
        except UnsupportedOrder as exc:
            last_error = exc
    raise UnsupportedOrder(
        f"the order does not place a cycle arrow immediately before the reverse of the previous one: {last_error}"
    )


def _validate_decomposition(quiver, dec):
    count = len(dec.vertices)
    if count == 0 or len(dec.arrows) != count or len(dec.forward) != count:
        raise ValidationError("cycle decomposition has inconsistent sizes")
    if len(set(dec.vertices)) != count:
        raise ValidationError("cycle vertices repeat")
    for i, arrow_id in enumerate(dec.arrows):
        if not quiver.has_arrow(arrow_id):
            raise ValidationError(f"cycle arrow {arrow_id!r} is not in the quiver")
        arrow = quiver.arrow(arrow_id)
        a, b = dec.vertices[i], dec.vertices[(i + 1) % count]
        expected = (a, b) if dec.forward[i] else (b, a)
        if (arrow.tail, arrow.head) != expected:
            raise ValidationError(f"cycle arrow {arrow_id!r} does not join {a} and {b} as stated")
    rest = set(quiver.arrow_ids) - set(dec.arrows)
    if set(dec.complement) != rest:
        raise ValidationError("cycle complement does not match the remaining arrows")


def normal_form(presentation, element, lambda_level=False):
    return presentation.normal_form(element, lambda_level=lambda_level)


def enumerate_basis(presentation, max_len, lambda_level=False):
    return presentation.enumerate_basis(max_len, lambda_level)


# free products


def combined_components(presentation):
    """Cycle and complement presentations whose letters agree with the combined ones."""
    if presentation.flavor != COMBINED:
        raise ValidationError("components exist only for combined presentations")
    dq = presentation.dq
    white = presentation.white
    cycle_ids = presentation.cycle_arrows
    cycle_sub = Quiver(dq.vertices, tuple(a for a in dq.base.arrows if a.id in set(cycle_ids)))
    cycle_order = tuple(d for d in dq.order if base_id(d) in set(cycle_ids))
    n = len(cycle_ids)
    cycle_dec = CycleDecomposition(presentation.cycle_vertices, tuple(cycle_ids), (True,) * n, ())
    barred = presentation.barred_arrows
    cycle_spec = _Spec(CYCLE, cycle_sub, cycle_order, tuple(presentation.cycle_vertices), cycle_dec, (), "none",
                       dict(presentation.spec.qvalues))
    cycle_part = _build(cycle_spec)
    comp_sub = Quiver(dq.vertices, tuple(a for a in dq.base.arrows if a.id not in set(cycle_ids)))
    comp_order = tuple(d for d in dq.order if base_id(d) not in set(cycle_ids))
    forest = presentation.forest.arrows
    partial_spec = _Spec(PARTIAL, comp_sub, comp_order, white, None, forest, frozenset(barred),
                         dict(presentation.spec.qvalues))
    partial_part = _build(partial_spec)
    return cycle_part, partial_part



def _block_counts(presentation, max_len, lambda_level=True):
    """Nonempty basis words counted by (start, end, length)."""
    counts = {}
    for word in presentation.enumerate_basis(max_len, lambda_level):
        if word.letters:
            key = (word.start, word.end, len(word))
            counts[key] = counts.get(key, 0) + 1
    return counts


def alternating_count(vertices, block_kinds, max_len):
    """Number of words per length that alternate between nonempty blocks of different kinds.

    ``block_kinds`` maps a kind name to a dict (start, end, length) -> count.
    Returns a list indexed by length, including the idempotents at length 0.
    """
    # state: (end vertex, last kind) -> counts per length, for words with at least one block
    table = {}
    by_start = {}
    for kind, counts in block_kinds.items():
        for (start, end, length), count in counts.items():
            by_start.setdefault(kind, {}).setdefault(start, []).append((end, length, count))
    totals = [0] * (max_len + 1)
    totals[0] = len(vertices)
    frontier = {}
    for kind, starts in by_start.items():
        for start, blocks in starts.items():
            for end, length, count in blocks:
                if length <= max_len:
                    key = (end, kind, length)
                    frontier[key] = frontier.get(key, 0) + count
    while frontier:
        for (end, kind, length), count in frontier.items():
            totals[length] += count
        following = {}
        for (end, kind, length), count in frontier.items():
            for other, starts in by_start.items():
                if other == kind:
                    continue
                for next_end, block_len, block_count in starts.get(end, ()):
                    total = length + block_len
                    if total <= max_len:
                        key = (next_end, other, total)
                        following[key] = following.get(key, 0) + count * block_count
        frontier = following
    return totals


def free_product_counts(presentation, max_len):
    """Expected Lambda-level basis counts of a combined presentation from its components."""
    cycle_part, partial_part = combined_components(presentation)
    blocks = {
        "cycle": _block_counts(cycle_part, max_len),
        "complement": _block_counts(partial_part, max_len),
    }
    return alternating_count(presentation.dq.vertices, blocks, max_len)


def relation_block_counts(presentation, max_len):
    counts = {}
    for v in presentation.relation_vertices:
        for length in range(1, max_len + 1):
            counts[(v, v, length)] = 2
    return counts


def l_level_counts_from_lambda(presentation, max_len):
    """L-level counts predicted by the free product of Lambda with k[r, r']."""
    blocks = {
        "lambda": _block_counts(presentation, max_len, lambda_level=True),
        "relation": relation_block_counts(presentation, max_len),
    }
    return alternating_count(presentation.dq.vertices, blocks, max_len)


def _relation_blocks_pure(word):
    run = []
    for letter in word.letters + (None,):
        if letter is not None and letter.kind in (R, RP):
            run.append(letter)
            continue
        if run and len({l.kind for l in run}) != 1:
            return False
        run = []
    return True


def _all_words(letters, vertices, max_len):
    by_source = {}
    for letter in letters:
        by_source.setdefault(letter.source, []).append(letter)
    for start in vertices:
        frontier = [Word(start, ())]
        yield frontier[0]
        for _ in range(max_len):
            following = []
            for word in frontier:
                for letter in by_source.get(word.end, ()):
                    following.append(Word(start, word.letters + (letter,)))
            yield from following
            frontier = following


def verify_strong_free_product(presentation, max_len, product_samples=200, seed=0):
    """Bounded check that L is the free product of Lambda with the relation algebras.

    Raises ``CountMismatch`` when the L-level basis count at some length
    differs from the free-product count.
    """
    import random

    report = Report("strong-free-product", info={"flavor": presentation.flavor, "max_len": max_len})
    system = presentation.system
    letters = presentation.generators(lambda_level=False, include_substituted=True)
    normalizer = system.normalizer("append")
    checked = 0
    bad_words = []
    for word in _all_words(letters, presentation.dq.vertices, max_len):
        nf = normalizer.normalize(Element.from_word(word))
        checked += 1
        for w in nf.words():
            if not system.is_irreducible(w) or not _relation_blocks_pure(w):
                bad_words.append(format_word(word))
                break
    report.add("normal forms are alternating basis words", not bad_words, words_checked=checked,
               offending=bad_words[:5])
    basis = presentation.enumerate_basis(max_len, lambda_level=False)
    report.add("irreducible words are distinct and irreducible",
               len(set(basis)) == len(basis) and all(system.is_irreducible(w) for w in basis),
               basis_size=len(basis))
    actual = [0] * (max_len + 1)
    for word in basis:
        actual[len(word)] += 1
    expected = l_level_counts_from_lambda(presentation, max_len)
    report.add("L-level counts match the free-product formula", actual == expected, expected=expected, actual=actual)
    if actual != expected:
        for length, (e, a) in enumerate(zip(expected, actual)):
            if e != a:
                raise CountMismatch(length, e, a)
    lam_basis = [w for w in presentation.enumerate_basis(max(1, max_len // 2), lambda_level=True)]
    rng = random.Random(seed)
    pairs = [(u, v) for u in lam_basis for v in lam_basis if u.end == v.start]
    if len(pairs) > product_samples:
        pairs = rng.sample(pairs, product_samples)
    weak_ok = True
    section_ok = True
    lam_normalizer = system.normalizer("append", lambda_level=True)
    for u, v in pairs:
        prod = Element.from_word(Word(u.start, u.letters + v.letters))
        full = normalizer.normalize(prod)
        projected = Element({w: c for w, c in full.items() if not any(l.kind in (R, RP) for l in w.letters)})
        if projected != lam_normalizer.normalize(prod):
            weak_ok = False
    for w in lam_basis:
        if normalizer.normalize(Element.from_word(w)) != Element.from_word(w):
            section_ok = False
    report.add("degree-zero part reproduces Lambda multiplication", weak_ok, pairs=len(pairs))
    report.add("Lambda basis words are L-level normal forms", section_ok, words=len(lam_basis))
    return report


__all__ = [
    "COMBINED",
    "CYCLE",
    "CYCLE_BARRED",
    "CycleDescriptor",
    "FLAVORS",
    "PARTIAL",
    "PARTIAL_BARRED",
    "Presentation",
    "alternating_count",
    "combined_components",
    "combined_system",
    "cycle_system",
    "enumerate_basis",
    "free_product_counts",
    "is_extra_family",
    "l_level_counts_from_lambda",
    "normal_form",
    "partial_system",
    "verify_strong_free_product",
]
