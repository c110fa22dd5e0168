"""The theta map between opposite arrow orders and checks of the local identities.

Elements here are abstract: letters live on the input quiver (arrows, x_d^{+-1}
for every doubled arrow d, and relation letters).  They are normalized by
embedding them in a combined presentation built for the relevant order.

With left-to-right composition, theta for the order <= is
``theta(b) = q_{t(b)}^{-1} l_b b r_{b*}`` and the map built from the
opposite order places the scalar at the head instead, ``b -> l_b b r_{b*}
q_{h(b)}^{-1}``; with this placement the two maps are mutually inverse for
arbitrary vertex parameters.
"""

import random

from .errors import UnsupportedLetter
from .freeword import ARROW, R, RP, X, XBAR, Element, arrow_letter, format_element, map_letters, product, x_letter
from .presentations import combined_system, cycle_system
from .quiver import build_doubled, star
from .report import Report
from .scalar import LaurentScalar

LE = "le"
GE = "ge"


class OrderedContext:
    """A quiver with an arrow order, its opposite, and the derived products."""

    def __init__(self, quiver, order=None, qvalues=None, dec=None):
        self.quiver = quiver
        self.qvalues = dict(qvalues or {})
        self.dec = dec
        self._presentations = {}
        if order is None:
            # the order chosen by the combined presentation is always admissible
            default = combined_system(quiver, dec, qvalues=self.qvalues)
            order = default.source.order
        self.le = build_doubled(quiver, order)
        self.ge = self.le.reversed()
        self._theta_cache = {LE: {}, GE: {}}
        self._theta_nf_cache = {LE: {}, GE: {}}

    def dq(self, side=LE):
        return self.le if side == LE else self.ge

    def q(self, vertex):
        if vertex in self.qvalues:
            return LaurentScalar.const(self.qvalues[vertex])
        return LaurentScalar.q(vertex)

    def presentation(self, side=LE):
        """Combined presentation of Lambda for the order on ``side``."""
        p = self._presentations.get(side)
        if p is None:
            p = combined_system(self.quiver, self.dec, qvalues=self.qvalues, order=self.dq(side).order)
            self._presentations[side] = p
        return p

    # abstract elements

    def e(self, vertex):
        return Element.idempotent(vertex)

    def arrow(self, arrow_id):
        return Element.letter(arrow_letter(self.le, arrow_id))

    def g(self, arrow_id, power=1):
        return Element.letter(x_letter(self.le, arrow_id, power))

    def g_expanded(self, arrow_id):
        """g_d = e + d d* as a polynomial in arrows."""
        return self.e(self.le.tail(arrow_id)) + self.arrow(arrow_id) * self.arrow(star(arrow_id))

    def _factors(self, vertex, side):
        return list(self.dq(side).arrows_at_tail(vertex))

    def _product(self, vertex, arrows, side, inverse=False):
        dq = self.dq(side)
        if inverse:
            parts = [self.g(d, -dq.epsilon(d)) for d in reversed(arrows)]
        else:
            parts = [self.g(d, dq.epsilon(d)) for d in arrows]
        return product(parts, [vertex])

    def rho(self, vertex, side=LE):
        return self._product(vertex, self._factors(vertex, side), side)

    def l(self, arrow_id, side=LE, inverse=False):
        vertex = self.le.tail(arrow_id)
        factors = self._factors(vertex, side)
        return self._product(vertex, factors[:factors.index(arrow_id)], side, inverse)

    def r(self, arrow_id, side=LE, inverse=False):
        vertex = self.le.tail(arrow_id)
        factors = self._factors(vertex, side)
        return self._product(vertex, factors[factors.index(arrow_id) + 1:], side, inverse)

    def epsilon(self, arrow_id):
        return self.le.epsilon(arrow_id)

    def normal_form(self, element, side=LE, lambda_level=True):
        return self.presentation(side).normalize_abstract(element, lambda_level=lambda_level)

    def equal(self, left, right, side=LE):
        return self.normal_form(left - right, side) == 0


def theta(ctx, element, side=LE):
    """Apply theta letterwise as a free-algebra map; ``side`` names the order whose products are used.

    ``side=LE`` gives theta: Lambda(>=) -> Lambda(<=), ``side=GE`` the map
    in the other direction.  Relation letters raise ``UnsupportedLetter``.
    """
    cache = ctx._theta_cache[side]

    def image(letter):
        cached = cache.get(letter)
        if cached is None:
            cached = _theta_letter(ctx, letter, side)
            cache[letter] = cached
        return cached

    return map_letters(element, image)


def theta_normal_form(ctx, element, side=LE):
    """Normal form of theta(element) in Lambda(side), normalizing after every letter.

    The result is in the system letters of ``ctx.presentation(side)``.
    """
    p = ctx.presentation(side)
    cache = ctx._theta_nf_cache[side]
    result = Element()
    for word, coeff in element.items():
        current = Element.idempotent(word.start, coeff)
        for letter in word.letters:
            image = cache.get(letter)
            if image is None:
                image = p.normalize_abstract(_theta_letter(ctx, letter, side), lambda_level=True)
                cache[letter] = image
            current = p.normal_form(current * image, lambda_level=True)
            if not current:
                break
        result = result + current
    return result


def theta_abstract(ctx, element, side=LE):
    """theta(element) reduced in Lambda(side) and written back in source letters."""
    return ctx.presentation(side).pullback(theta_normal_form(ctx, element, side))


def _theta_letter(ctx, letter, side):
    if letter.kind in (R, RP):
        raise UnsupportedLetter("theta is not defined on relation letters")
    if letter.kind == ARROW:
        b = letter.arrow
        core = ctx.l(b, side) * Element.letter(letter) * ctx.r(star(b), side)
        if side == LE:
            return core.scale(ctx.q(ctx.le.tail(b)).invert_monomial())
        return core.scale(ctx.q(ctx.le.head(b)).invert_monomial())
    if letter.kind == XBAR:
        plain = x_letter(ctx.le, letter.arrow, letter.power)
        return _theta_letter(ctx, plain, side) - ctx.e(letter.source)
    d = letter.arrow
    if letter.power > 0:
        da = _theta_letter(ctx, arrow_letter(ctx.le, d), side)
        db = _theta_letter(ctx, arrow_letter(ctx.le, star(d)), side)
        return ctx.e(letter.source) + da * db
    return ctx.l(d, side) * ctx.g(d, -1) * ctx.l(d, side, inverse=True)


def _compare_forms(report, name, left, right):
    passed = left == right
    detail = {} if passed else {"left": format_element(left), "right": format_element(right)}
    report.add(name, passed, **detail)
    return passed


def _compare(report, name, ctx, left, right, side):
    return _compare_forms(report, name, ctx.normal_form(left, side), ctx.normal_form(right, side))


def verify_theta_properties(ctx):
    """Behaviour of theta on r_a, l_a, rho and g_a, and theta_>= o theta = Id."""
    report = Report("theta-properties")
    other = {LE: GE, GE: LE}
    nf = ctx.normal_form
    for d in ctx.le.order:
        _compare_forms(report, f"theta(r_{d},>=) = l_{d}", theta_normal_form(ctx, ctx.r(d, GE)), nf(ctx.l(d)))
        _compare_forms(report, f"theta(l_{d},>=) = r_{d}", theta_normal_form(ctx, ctx.l(d, GE)), nf(ctx.r(d)))
        image = theta_normal_form(ctx, ctx.g(d))
        _compare_forms(report, f"theta(g_{d}) = l g l^-1", image, nf(ctx.l(d) * ctx.g(d) * ctx.l(d, inverse=True)))
        _compare_forms(report, f"theta(g_{d}) = r^-1 g r", image, nf(ctx.r(d, inverse=True) * ctx.g(d) * ctx.r(d)))
    for v in ctx.le.vertices:
        _compare_forms(report, f"theta(rho_>=) = rho at {v}", theta_normal_form(ctx, ctx.rho(v, GE)), nf(ctx.rho(v)))
    for side in (LE, GE):
        label = "theta_>= o theta" if side == LE else "theta o theta_>="
        back = other[side]
        generators = [(d, ctx.arrow(d)) for d in ctx.le.order]
        generators += [(f"g_{d}^{power}", ctx.g(d, power)) for d in ctx.le.order for power in (1, -1)]
        for name, generator in generators:
            twice = theta_normal_form(ctx, theta_abstract(ctx, generator, side), back)
            _compare_forms(report, f"{label} ({name}) = {name}", twice, nf(generator, back))
    return report


def verify_theta_multiplicative(ctx, pairs=200, max_len=3, seed=0):
    """nf(theta(u v)) = nf(theta(u) theta(v)) on random compatible arrow words."""
    rng = random.Random(seed)
    report = Report("theta-multiplicative")
    by_tail = {}
    for d in ctx.le.order:
        by_tail.setdefault(ctx.le.tail(d), []).append(d)

    def random_path(start):
        element = ctx.e(start)
        vertex = start
        for _ in range(rng.randint(0, max_len)):
            d = rng.choice(by_tail[vertex])
            element = element * ctx.arrow(d)
            vertex = ctx.le.head(d)
        return element, vertex

    failures = 0
    for _ in range(pairs):
        start = rng.choice(ctx.le.vertices)
        u, middle = random_path(start)
        v, _ = random_path(middle)
        left = theta_normal_form(ctx, u * v)
        p = ctx.presentation(LE)
        right = p.normal_form(theta_normal_form(ctx, u) * theta_normal_form(ctx, v), lambda_level=True)
        if left != right:
            failures += 1
    report.add("theta respects products", failures == 0, pairs=pairs, failures=failures)
    return report


def verify_local_identities(ctx):
    """g_a a = a g_{a*} and its relatives, then r_a l_a = q g_a^{-eps(a)} in Lambda."""
    report = Report("local-identities")
    for d in ctx.le.order:
        ds = star(d)
        a, a_star = ctx.arrow(d), ctx.arrow(ds)
        raw_left = ctx.g_expanded(d) * a - a * ctx.g_expanded(ds)
        report.add(f"g_{d} {d} = {d} g_{ds} (free)", raw_left == 0, residual=format_element(raw_left))
        raw_right = a_star * ctx.g_expanded(d) - ctx.g_expanded(ds) * a_star
        report.add(f"{ds} g_{d} = g_{ds} {ds} (free)", raw_right == 0, residual=format_element(raw_right))
        p = ctx.presentation(LE)
        localized = p.normalize_abstract(ctx.g(d, -1) * a - a * ctx.g(ds, -1))
        report.add(f"g_{d}^-1 {d} = {d} g_{ds}^-1 (localized)", localized == 0, residual=format_element(localized))
        localized = p.normalize_abstract(a_star * ctx.g(d, -1) - ctx.g(ds, -1) * a_star)
        report.add(f"{ds} g_{d}^-1 = g_{ds}^-1 {ds} (localized)", localized == 0, residual=format_element(localized))
        v = ctx.le.tail(d)
        rho_split = ctx.l(d) * ctx.g(d, ctx.epsilon(d)) * ctx.r(d) - ctx.rho(v)
        report.add(f"rho = l g^eps r at {d} (free)", rho_split == 0, residual=format_element(rho_split))
        _compare(report, f"r_{d} l_{d} = q g_{d}^-eps", ctx, ctx.r(d) * ctx.l(d),
                 ctx.g(d, -ctx.epsilon(d)).scale(ctx.q(v)), LE)
    return report


def verify_quantum_weyl(qval=None):
    """a a* - q a* a - (q - 1) vanishes in Lambda of the Jordan quiver."""
    values = {} if qval is None else {0: qval}
    p = cycle_system(1, qvalues=values)
    q = p.q(0)
    a, a_star = p.arrow("a0"), p.arrow("a0*")
    relation = a * a_star - (a_star * a).scale(q) - Element.idempotent(0, q - 1)
    residual = p.normal_form(relation, lambda_level=True)
    report = Report("quantum-weyl", info={"q": str(q)})
    report.add("a a* - q a* a - (q - 1) = 0", residual == 0, residual=format_element(residual))
    return report


__all__ = [
    "GE",
    "LE",
    "OrderedContext",
    "theta",
    "theta_abstract",
    "theta_normal_form",
    "verify_local_identities",
    "verify_quantum_weyl",
    "verify_theta_multiplicative",
    "verify_theta_properties",
]
