"""Ring-theoretic checks: the affine type A center, central lifts, prime witnesses and a bounded center solver.

Affine type A here is ``affine_a_quiver(n)``: arrows a_i: i -> i+1 for
i < n and a_n: 0 -> n.  The loops at vertex 0 are

    Z = a_0 a_0*,  X = a_0 a_1 ... a_{n-1} a_n*,  Y = a_n a_{n-1}* ... a_0*.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
import random

from .errors import SearchExhausted, ValidationError, ZeroInput, ZeroParameter
from .fixtures import affine_a_quiver
from .freeword import ARROW, X, XBAR, Element, Word, arrow_letter, format_element, product, x_letter
from .presentations import combined_system
from .report import Report


# affine type A


def affine_presentation(n, qvalues=None):
    """Lambda-level presentation of affine type A on n + 1 vertices, q = 1 unless given."""
    quiver = affine_a_quiver(n)
    values = {v: 1 for v in quiver.vertices} if qvalues is None else qvalues
    return combined_system(quiver, qvalues=values)


def _source_arrow(p, arrow_id):
    return Element.letter(arrow_letter(p.source, arrow_id))


def xyz_elements(n, presentation=None):
    """The loop words X, Y, Z at vertex 0, as elements on the input quiver."""
    if n < 1:
        raise ValidationError("affine type A needs n >= 1")
    p = presentation or affine_presentation(n)
    a = lambda i: _source_arrow(p, f"a{i}")
    a_star = lambda i: _source_arrow(p, f"a{i}*")
    z = a(0) * a_star(0)
    x = product([a(i) for i in range(n)] + [a_star(n)])
    y = product([a(n)] + [a_star(i) for i in range(n - 1, -1, -1)])
    return x, y, z


def satake_lifts(n, presentation=None):
    """Central elements whose vertex-0 corners are X, Y and Z.

    z_X and z_Y sum the positive and negative windings from every vertex.
    The Z lift uses a_i a_i* at vertices i < n and a_{n-1}* a_{n-1} at n:
    at q = 1 the relation at vertex n identifies that loop with the rotated
    Z, while a_n* a_n differs from it.
    """
    p = presentation or affine_presentation(n)
    a = lambda i: _source_arrow(p, f"a{i}")
    a_star = lambda i: _source_arrow(p, f"a{i}*")

    def positive(i):
        return product([a(j) for j in range(i, n)] + [a_star(n)] + [a(j) for j in range(i)])

    def negative(i):
        if i == 0:
            return product([a(n)] + [a_star(j) for j in range(n - 1, -1, -1)])
        return product([a_star(j) for j in range(i - 1, -1, -1)] + [a(n)] + [a_star(j) for j in range(n - 1, i - 1, -1)])

    z_z = sum((a(i) * a_star(i) for i in range(n)), a_star(n - 1) * a(n - 1))
    z_x = sum((positive(i) for i in range(n + 1)), Element())
    z_y = sum((negative(i) for i in range(n + 1)), Element())
    return {"z_X": z_x, "z_Y": z_y, "z_Z": z_z}


@dataclass(frozen=True)
class CommutativeNF:
    """Polynomial in X, Y, Z reduced by Z^{n+1} -> -XY - XYZ; terms map (i, j, k) to a rational."""

    n: int
    terms: dict = field(default_factory=dict)

    @classmethod
    def reduce(cls, n, terms):
        pending = {key: Fraction(c) for key, c in terms.items() if c}
        done = {}
        while pending:
            (i, j, k), c = pending.popitem()
            if k <= n:
                total = done.get((i, j, k), 0) + c
                if total:
                    done[(i, j, k)] = total
                else:
                    done.pop((i, j, k), None)
                continue
            for key in ((i + 1, j + 1, k - n - 1), (i + 1, j + 1, k - n)):
                total = pending.get(key, 0) - c
                if total:
                    pending[key] = total
                else:
                    pending.pop(key, None)
        return cls(n, done)

    @classmethod
    def monomial(cls, n, i, j, k, coeff=1):
        return cls.reduce(n, {(i, j, k): coeff})

    def __add__(self, other):
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return CommutativeNF.reduce(self.n, terms)

    def __neg__(self):
        return CommutativeNF(self.n, {key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        terms = {}
        for (i, j, k), c in self.terms.items():
            for (i2, j2, k2), c2 in other.terms.items():
                key = (i + i2, j + j2, k + k2)
                terms[key] = terms.get(key, 0) + c * c2
        return CommutativeNF.reduce(self.n, terms)

    def is_zero(self):
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j, k), c in sorted(self.terms.items()):
            mono = "*".join(f"{name}^{e}" if e > 1 else name for name, e in (("X", i), ("Y", j), ("Z", k)) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _lambda_nf(p, element):
    return p.normalize_abstract(element, lambda_level=True)


def word_level_polynomial(poly_terms, x, y, z, vertex=0):
    """p(X, Y, Z) as a word-level element; poly_terms maps (i, j, k) to a rational."""
    total = Element()
    for (i, j, k), c in poly_terms.items():
        monomial = product([x] * i + [y] * j + [z] * k, [vertex])
        total = total + monomial.scale(c)
    return total


def verify_shaw_relation(n, samples=50, seed=0):
    """Z^{n+1} + XY + XYZ = 0 and commutativity at q = 1, with a commutative cross-check."""
    p = affine_presentation(n)
    x, y, z = xyz_elements(n, p)
    report = Report("shaw-relation", info={"n": n})
    relation = product([z] * (n + 1)) + x * y + x * y * z
    residual = _lambda_nf(p, relation)
    report.add("Z^(n+1) + XY + XYZ = 0", residual == 0, residual=format_element(residual))
    for name, u, v in (("XY - YX", x, y), ("XZ - ZX", x, z), ("YZ - ZY", y, z)):
        residual = _lambda_nf(p, u * v - v * u)
        report.add(f"{name} = 0", residual == 0, residual=format_element(residual))
    # denominator-cleared well-definedness of the endomorphism map at vertex 0
    cleared = (CommutativeNF.monomial(n, 0, 1, 0) * (CommutativeNF.monomial(n, 0, 0, 0) + CommutativeNF.monomial(n, 0, 0, 1))
               * CommutativeNF.monomial(n, 0, 0, 1)
               - CommutativeNF.monomial(n, 0, 1, 1) - CommutativeNF.monomial(n, 0, 1, 2))
    report.add("Y(1+Z)Z - YZ - YZ^2 = 0", cleared.is_zero(), residual=str(cleared))
    mismatches = commutative_cross_check(n, p, samples=samples, seed=seed)
    report.add("commutative and word-level normal forms agree", not mismatches, samples=samples, mismatches=mismatches)
    return report


def commutative_cross_check(n, presentation=None, samples=50, seed=0):
    """Compare zero tests of CommutativeNF and of Lambda on random polynomials of degree <= n + 2.

    Half of the samples are multiples of the relation so both outcomes occur.
    """
    p = presentation or affine_presentation(n)
    x, y, z = xyz_elements(n, p)
    rng = random.Random(seed)
    degree = n + 2
    monomials = [(i, j, k) for i in range(degree + 1) for j in range(degree + 1 - i) for k in range(degree + 1 - i - j)]
    relation = {(0, 0, n + 1): 1, (1, 1, 0): 1, (1, 1, 1): 1}
    mismatches = []
    for index in range(samples):
        if index % 2:
            factor = {m: rng.randint(-2, 2) for m in rng.sample([m for m in monomials if sum(m) <= 1], 2)}
            terms = {}
            for (i, j, k), c in factor.items():
                for (i2, j2, k2), c2 in relation.items():
                    key = (i + i2, j + j2, k + k2)
                    terms[key] = terms.get(key, 0) + c * c2
        else:
            terms = {m: rng.randint(-3, 3) for m in rng.sample(monomials, 3)}
        terms = {m: c for m, c in terms.items() if c}
        commutative_zero = CommutativeNF.reduce(n, terms).is_zero()
        word_zero = _lambda_nf(p, word_level_polynomial(terms, x, y, z)) == 0
        if commutative_zero != word_zero:
            mismatches.append({str(m): str(c) for m, c in sorted(terms.items())})
    return mismatches


def satake_lift_check(n):
    """The lifts commute with every generator letter and restrict to X, Y, Z at vertex 0."""
    p = affine_presentation(n)
    x, y, z = xyz_elements(n, p)
    lifts = satake_lifts(n, p)
    corners = {"z_X": x, "z_Y": y, "z_Z": z}
    generators = [Element.letter(letter) for letter in p.generators(lambda_level=True)]
    report = Report("satake-lifts", info={"n": n})
    for name, lift in lifts.items():
        system_lift = _lambda_nf(p, lift)
        for g in generators:
            residual = p.normal_form(system_lift * g - g * system_lift, lambda_level=True)
            (letter,) = next(iter(g.words())).letters
            report.add(f"{name} commutes with {letter.name}@{letter.source}", residual == 0,
                       residual=format_element(residual))
        corner = system_lift.restrict(start=0)
        residual = corner - _lambda_nf(p, corners[name])
        report.add(f"e_0 {name} = {name[2:]}", residual == 0, residual=format_element(residual))
    return report


# center solver


@dataclass
class CenterSolution:
    qvalues: dict
    bound: int
    basis: list
    dimension: int
    unknowns: int
    equations: int
    triples: list = field(default_factory=list, repr=False)

    def to_json(self, presentation=None):
        return {
            "q": {str(v): str(c) for v, c in sorted(self.qvalues.items())},
            "bound": self.bound,
            "dimension": self.dimension,
            "unknowns": self.unknowns,
            "equations": self.equations,
            "basis": [format_element(z) for z in self.basis],
        }


def nullspace(rows, columns):
    """Basis of the rational nullspace of sparse rows (dicts column -> Fraction) over ``columns``."""
    pivots = {}
    for row in rows:
        row = {c: Fraction(v) for c, v in row.items() if v}
        # pivot rows are fully reduced, so one pass per pivot column suffices
        while True:
            hits = [c for c in row if c in pivots]
            if not hits:
                break
            col = hits[0]
            factor = row[col]
            for c, v in pivots[col].items():
                total = row.get(c, 0) - factor * v
                if total:
                    row[c] = total
                else:
                    row.pop(c, None)
        if not row:
            continue
        pivot = min(row, key=columns.index)
        scale = row[pivot]
        row = {c: v / scale for c, v in row.items()}
        for other in pivots.values():
            factor = other.get(pivot)
            if factor:
                for c, v in row.items():
                    total = other.get(c, 0) - factor * v
                    if total:
                        other[c] = total
                    else:
                        other.pop(c, None)
        pivots[pivot] = row
    basis = []
    for free in columns:
        if free in pivots:
            continue
        vector = {free: Fraction(1)}
        for col, row in pivots.items():
            value = row.get(free)
            if value:
                vector[col] = -value
        basis.append(vector)
    return basis


def center_solve(p, qvals, bound, return_triples=False):
    """Central elements of Lambda spanned by basis words of length <= ``bound`` at specialized q.

    Centrality forces commuting with every idempotent, so only loop words are
    unknowns.  Every coefficient of every commutator with a generator letter
    is constrained, whatever its length.
    """
    values = {}
    for v in p.vertices:
        value = Fraction(qvals.get(v, qvals.get(str(v), 1)) if isinstance(qvals, dict) else qvals)
        if value == 0:
            raise ZeroParameter(f"q value for vertex {v} is zero")
        values[v] = value
    sp = p.specialize(values)
    words = [w for w in sp.enumerate_basis(bound, lambda_level=True) if w.end == w.start]
    generators = [Element.letter(letter) for letter in sp.generators(lambda_level=True)]
    equations = {}
    for column, word in enumerate(words):
        w = Element.from_word(word)
        for gi, g in enumerate(generators):
            commutator = sp.normal_form(w * g - g * w, lambda_level=True)
            for out_word, coeff in commutator.items():
                equations.setdefault((gi, out_word), {})[column] = coeff.constant_value()
    rows = list(equations.values())
    kernel = nullspace(rows, list(range(len(words))))
    basis = [Element({words[c]: v for c, v in vector.items()}) for vector in kernel]
    triples = []
    if return_triples:
        for r, row in enumerate(rows):
            triples.extend((r, c, str(v)) for c, v in sorted(row.items()))
    return CenterSolution(values, bound, basis, len(basis), len(words), len(rows), triples)


def recheck_center(p, solution, samples=50, max_len=3, seed=0):
    """Commutators of each basis element with random short elements vanish."""
    sp = p.specialize(solution.qvalues)
    rng = random.Random(seed)
    pool = sp.enumerate_basis(max_len, lambda_level=True)
    report = Report("center-recheck", info={"bound": solution.bound})
    for index, z in enumerate(solution.basis):
        failures = 0
        for _ in range(samples):
            m = Element({rng.choice(pool): rng.randint(-3, 3) or 1 for _ in range(rng.randint(1, 3))})
            if sp.normal_form(z * m - m * z, lambda_level=True):
                failures += 1
        report.add(f"basis element {index} commutes with {samples} random elements", failures == 0, failures=failures)
    return report


# prime witness


def _max_x_run(element):
    best = 0
    for word in element.words():
        run = 0
        for letter in word.letters:
            if letter.kind in (X, XBAR):
                run += 1
                best = max(best, run)
            else:
                run = 0
    return best


def _max_arrows(element):
    return max((sum(1 for letter in word.letters if letter.kind == ARROW) for word in element.words()), default=0)


def _path(p, start, goal):
    """Shortest path of doubled arrows from ``start`` to ``goal``, smallest ids first."""
    dq = p.dq
    previous = {start: None}
    queue = deque([start])
    while queue:
        vertex = queue.popleft()
        if vertex == goal:
            break
        for d in sorted(dq.arrows_at_tail(vertex)):
            head = dq.head(d)
            if head not in previous:
                previous[head] = (vertex, d)
                queue.append(head)
    if goal not in previous:
        raise ValidationError(f"no path from {start} to {goal}")
    arrows = []
    vertex = goal
    while previous[vertex] is not None:
        vertex, d = previous[vertex]
        arrows.append(d)
    arrows.reverse()
    return product([p.arrow(d) for d in arrows], [start])


def _cycle_power(p, start, steps):
    """a^steps along the cycle from ``start`` in system letters."""
    order = list(p.cycle_vertices)
    arrows = list(p.cycle_arrows)
    index = order.index(start)
    parts = []
    for step in range(steps):
        parts.append(p.arrow(arrows[(index + step) % len(arrows)]))
    return product(parts, [start])


def _x_power(p, vertex, power):
    arrow_id = p.cycle_arrows[list(p.cycle_vertices).index(vertex)]
    return product([p.x(arrow_id)] * power, [vertex])


def prime_witness(p, alpha, beta, max_doublings=4):
    """gamma with nf(alpha gamma beta) != 0, built as path x^M a^N a^N' x^M' path.

    ``alpha`` and ``beta`` are system elements.  Exponents start just above
    the largest x-run and arrow count in the inputs and double on failure.
    """
    if not p.cycle_arrows:
        raise ValidationError("prime witnesses need a quiver containing a cycle")
    nf = lambda e: p.normal_form(e, lambda_level=True)
    alpha, beta = nf(alpha), nf(beta)
    if not alpha or not beta:
        raise ZeroInput("prime_witness needs nonzero inputs")
    length = len(p.cycle_arrows)
    m = max(_max_x_run(alpha), _max_x_run(beta)) + 1
    winding = max(_max_arrows(alpha), _max_arrows(beta)) + 1
    n = -(-winding // length) * length
    ends = sorted({w.end for w in alpha.words()})
    starts = sorted({w.start for w in beta.words()})
    for attempt in range(max_doublings + 1):
        for u in ends:
            for v in starts:
                for w in p.cycle_vertices:
                    gamma1 = _path(p, u, w) * _x_power(p, w, m) * _cycle_power(p, w, n)
                    gamma2 = _cycle_power(p, w, n) * _x_power(p, w, m) * _path(p, w, v)
                    gamma = gamma1 * gamma2
                    result = nf(alpha * gamma * beta)
                    if result:
                        certificate = {
                            "M": m, "N": n, "M'": m, "N'": n,
                            "from": u, "cycle_vertex": w, "to": v, "attempt": attempt,
                            "terms": len(result),
                            "leading": format_element(Element(dict([max(result.items(), key=lambda t: t[0].sort_key())]))),
                        }
                        return gamma, result, certificate
        m *= 2
        n *= 2
    raise SearchExhausted("no witness found within the exponent cap; this contradicts primality")


def certificate_stable(p, alpha, gamma, beta, points=3, seed=0):
    """nf(alpha gamma beta) stays nonzero at random rational specializations of q."""
    rng = random.Random(seed)
    report = Report("certificate-stability")
    for _ in range(points):
        values = {v: Fraction(rng.choice([-1, 1]) * rng.randint(2, 9), rng.randint(1, 5)) for v in p.vertices}
        sp = p.specialize(values)
        specialized = [e.specialize(values) for e in (alpha, gamma, beta)]
        result = sp.normal_form(specialized[0] * specialized[1] * specialized[2], lambda_level=True)
        report.add(f"nonzero at q = {sorted((v, str(c)) for v, c in values.items())}", bool(result))
    return report


def random_nonzero_element(p, rng, max_len=3, terms=3):
    """Random combination of Lambda basis words with small integer coefficients."""
    pool = p.enumerate_basis(max_len, lambda_level=True)
    while True:
        element = Element({rng.choice(pool): rng.choice([-2, -1, 1, 2, 3]) for _ in range(rng.randint(1, terms))})
        if element:
            return element


__all__ = [
    "CenterSolution",
    "CommutativeNF",
    "affine_presentation",
    "center_solve",
    "certificate_stable",
    "commutative_cross_check",
    "nullspace",
    "prime_witness",
    "random_nonzero_element",
    "recheck_center",
    "satake_lift_check",
    "satake_lifts",
    "verify_shaw_relation",
    "word_level_polynomial",
    "xyz_elements",
]
