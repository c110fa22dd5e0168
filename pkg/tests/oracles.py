"""Independent oracles: exact random matrix representations and brute-force helpers."""

from fractions import Fraction
import itertools
import random

from mpa_workbench.freeword import ARROW, R, RP, X, XBAR


def mat_zero(n):
    return [[Fraction(0)] * n for _ in range(n)]


def mat_identity(n):
    m = mat_zero(n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def mat_mul(a, b):
    n = len(a)
    out = mat_zero(n)
    for i in range(n):
        row = a[i]
        for k in range(n):
            if row[k]:
                bk = b[k]
                for j in range(n):
                    if bk[j]:
                        out[i][j] += row[k] * bk[j]
    return out


def mat_add(a, b, scale=1):
    return [[x + scale * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in row] for row in a]


def mat_inverse(a):
    """Gauss-Jordan inverse, or None when singular."""
    n = len(a)
    work = [list(row) + ident for row, ident in zip(a, mat_identity(n))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            return None
        work[col], work[pivot] = work[pivot], work[col]
        inv = 1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


class MatrixRepresentation:
    """Random exact representation of the localized algebra of a presentation at specialized q.

    Vertex spaces have dimension 1 or 2 and are stacked into one block space,
    so every element evaluates to a square matrix.  Relation letters map to
    rho - q and rho^{-1} - q^{-1} with rho taken from ``relation_factors``.
    """

    def __init__(self, presentation, qvalues, seed=0, max_dim=2):
        rng = random.Random(seed)
        self.p = presentation
        self.q = {v: Fraction(qvalues[v]) for v in presentation.vertices}
        dq = presentation.dq
        while True:
            self.dims = {v: rng.randint(1, max_dim) for v in dq.vertices}
            offsets, total = {}, 0
            for v in dq.vertices:
                offsets[v] = total
                total += self.dims[v]
            self.offsets, self.size = offsets, total
            self.arrows = {}
            for d in dq.order:
                m = mat_zero(total)
                t, h = dq.tail(d), dq.head(d)
                for i in range(self.dims[t]):
                    for j in range(self.dims[h]):
                        m[offsets[t] + i][offsets[h] + j] = Fraction(rng.randint(-3, 3))
                self.arrows[d] = m
            if self._build_x():
                break

    def _block_identity(self, vertex):
        m = mat_zero(self.size)
        for i in range(self.dims[vertex]):
            m[self.offsets[vertex] + i][self.offsets[vertex] + i] = Fraction(1)
        return m

    def _build_x(self):
        dq = self.p.dq
        self.x = {}
        full = mat_identity(self.size)
        for d in dq.order:
            t = dq.tail(d)
            x = mat_add(self._block_identity(t), mat_mul(self.arrows[d], self.arrows[dq.star(d)]))
            # invert on the whole space with the other blocks set to the identity
            padded = mat_add(x, mat_add(full, self._block_identity(t), -1))
            inverse = mat_inverse(padded)
            if inverse is None:
                return False
            self.x[(d, 1)] = x
            self.x[(d, -1)] = mat_add(inverse, mat_add(full, self._block_identity(t), -1), -1)
        self.relation = {}
        for v in self.p.relation_vertices:
            rho = self._block_identity(v)
            for d in self.p.relation_factors(v):
                rho = mat_mul(rho, self.x[(d, dq.epsilon(d))])
            padded = mat_add(rho, mat_add(full, self._block_identity(v), -1))
            inverse = mat_inverse(padded)
            if inverse is None:
                return False
            rho_inv = mat_add(inverse, mat_add(full, self._block_identity(v), -1), -1)
            ident = self._block_identity(v)
            self.relation[(R, v)] = mat_add(rho, mat_scale(ident, self.q[v]), -1)
            self.relation[(RP, v)] = mat_add(rho_inv, mat_scale(ident, 1 / self.q[v]), -1)
        return True

    def letter(self, letter):
        if letter.kind == ARROW:
            return self.arrows[letter.arrow]
        if letter.kind == X:
            return self.x[(letter.arrow, letter.power)]
        if letter.kind == XBAR:
            return mat_add(self.x[(letter.arrow, letter.power)], self._block_identity(letter.source), -1)
        return self.relation[(letter.kind, letter.source)]

    def word(self, word):
        m = self._block_identity(word.start)
        for letter in word.letters:
            m = mat_mul(m, self.letter(letter))
        return m

    def element(self, element):
        total = mat_zero(self.size)
        for word, coeff in element.items():
            total = mat_add(total, self.word(word), coeff.evaluate(self.q))
        return total


def random_word(presentation, rng, max_len, lambda_level=False, letters=None):
    """Random routed word of length at most ``max_len`` over the presentation's letters."""
    letters = letters if letters is not None else presentation.generators(lambda_level=lambda_level, include_substituted=True)
    by_source = {}
    for letter in letters:
        by_source.setdefault(letter.source, []).append(letter)
    start = rng.choice(sorted(by_source))
    vertex = start
    chosen = []
    for _ in range(rng.randint(0, max_len)):
        options = by_source.get(vertex)
        if not options:
            break
        letter = rng.choice(options)
        chosen.append(letter)
        vertex = letter.target
    from mpa_workbench.freeword import Word

    return Word(start, tuple(chosen))


def random_element(presentation, rng, max_len=4, terms=3, lambda_level=False):
    from mpa_workbench.freeword import Element

    element = Element()
    for _ in range(rng.randint(1, terms)):
        element = element + Element.from_word(random_word(presentation, rng, max_len, lambda_level), rng.choice([-2, -1, 1, 2, 3]))
    return element


def brute_force_irreducible(presentation, max_len, lambda_level=False):
    """All routed words up to ``max_len`` containing no rule pattern, by exhaustive search."""
    from mpa_workbench.freeword import Word

    letters = presentation.generators(lambda_level=lambda_level)
    system = presentation.system
    found = []
    for start in presentation.vertices:
        for length in range(max_len + 1):
            for combo in itertools.product(letters, repeat=length):
                word = Word(start, combo)
                if word.is_valid() and system.is_irreducible(word):
                    found.append(word)
    return sorted(found, key=Word.sort_key)
