"""The bimodule complex P_2 -> P_1 -> P_0 -> Lambda and its theta-twisted dual, at generator level.

Bimodule elements are finite sums ``c * u (x) g (x) w`` with ``u``, ``w``
Lambda normal-form words of the combined presentation and ``g`` a generator.
With left-to-right composition, ``eta_a`` (and ``eta_a^v``, ``xi_a``) sit
between ``t(a)`` on the left and ``h(a)`` on the right.  The dual module is
written through the same symbols: ``u eta_c^v w`` is the functional sending
``eta_{c*}`` to ``w (x) u``.  Maps are generator tables (dicts from
generators to bimodule elements) extended bimodule-linearly.
"""

from typing import NamedTuple

from .errors import RoutingMismatch, ValidationError
from .freeword import Element, Word, format_word
from .identities import GE, LE, OrderedContext, theta_normal_form
from .quiver import is_star, star
from .report import Report
from .scalar import ONE

ETA_V = "eta_v"
ETA_A = "eta_a"
DUAL_V = "eta_v_dual"
DUAL_A = "eta_a_dual"
XI_V = "xi_v"
XI_A = "xi_a"

# Coefficients are twisted by the map built from the opposite order: reading
# products left to right exchanges the roles of the two orders.
TWIST_SIDE = GE
_OTHER = {LE: GE, GE: LE}

_SYMBOL = {ETA_V: "eta", ETA_A: "eta", DUAL_V: "eta^v", DUAL_A: "eta^v", XI_V: "xi", XI_A: "xi"}


class Generator(NamedTuple):
    kind: str
    key: object
    left: object
    right: object

    def __str__(self):
        return f"{_SYMBOL[self.kind]}[{self.key}]"


def vertex_generator(kind, vertex):
    return Generator(kind, vertex, vertex, vertex)


def arrow_generator(kind, dq, arrow_id):
    return Generator(kind, arrow_id, dq.tail(arrow_id), dq.head(arrow_id))


class BimoduleElement:
    """Canonical sum of ``coeff * left (x) generator (x) right`` with normal-form words."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {key: c for key, c in (terms or {}).items() if c}

    @classmethod
    def build(cls, normalize, left, generator, right, coeff=ONE):
        """Normalize ``left`` and ``right`` (system Elements) and expand the tensor."""
        left_nf, right_nf = normalize(left), normalize(right)
        terms = {}
        for lw, lc in left_nf.items():
            if lw.end != generator.left:
                raise RoutingMismatch(f"{format_word(lw)} does not end at the left anchor of {generator}")
            for rw, rc in right_nf.items():
                if rw.start != generator.right:
                    raise RoutingMismatch(f"{format_word(rw)} does not start at the right anchor of {generator}")
                _accumulate(terms, (lw, generator, rw), coeff * lc * rc)
        return cls(terms)

    @classmethod
    def generator(cls, generator, coeff=ONE):
        return cls({(Word(generator.left, ()), generator, Word(generator.right, ())): coeff})

    def __add__(self, other):
        terms = dict(self.terms)
        for key, c in other.terms.items():
            _accumulate(terms, key, c)
        return BimoduleElement(terms)

    def __neg__(self):
        return BimoduleElement({key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, scalar):
        return BimoduleElement({key: c * scalar for key, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        return isinstance(other, BimoduleElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def generators(self):
        return {g for _, g, _ in self.terms}

    def act(self, normalize, left=None, right=None):
        """left * self * right, renormalized."""
        terms = {}
        for (lw, g, rw), c in self.terms.items():
            lpart = Element.from_word(lw)
            rpart = Element.from_word(rw)
            if left is not None:
                lpart = left * lpart
            if right is not None:
                rpart = rpart * right
            lpart, rpart = normalize(lpart), normalize(rpart)
            for lw2, lc in lpart.items():
                for rw2, rc in rpart.items():
                    _accumulate(terms, (lw2, g, rw2), c * lc * rc)
        return BimoduleElement(terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: (str(item[0][1]), item[0][0].sort_key(), item[0][2].sort_key()))

    def format(self):
        if not self.terms:
            return "0"
        parts = []
        for (lw, g, rw), c in self.sorted_terms():
            parts.append(f"({c}) {format_word(lw)} (x) {g} (x) {format_word(rw)}")
        return " + ".join(parts)

    def __str__(self):
        return self.format()

    def to_json(self):
        return [
            {"coeff": str(c), "left": format_word(lw), "generator": str(g), "right": format_word(rw)}
            for (lw, g, rw), c in self.sorted_terms()
        ]


def _accumulate(terms, key, value):
    total = terms.get(key)
    total = value if total is None else total + value
    if total:
        terms[key] = total
    else:
        terms.pop(key, None)


def apply_map(normalize, table, element):
    """Bimodule-linear extension of a generator table."""
    result = BimoduleElement()
    for (lw, g, rw), c in element.terms.items():
        image = table.get(g)
        if image is None:
            raise ValidationError(f"map is not defined on {g}")
        result = result + image.act(normalize, Element.from_word(lw), Element.from_word(rw)).scale(c)
    return result


def compose(normalize, outer, inner):
    """Table of outer o inner."""
    return {g: apply_map(normalize, outer, image) for g, image in inner.items()}


def table_to_json(table):
    return {str(g): image.to_json() for g, image in sorted(table.items(), key=lambda item: str(item[0]))}


class ComplexContext:
    """Lambda with an arrow order, normalization helpers and theta twists for the complex."""

    def __init__(self, quiver, order=None, qvalues=None, dec=None):
        self.ordered = quiver if isinstance(quiver, OrderedContext) else OrderedContext(quiver, order, qvalues, dec)
        self.dq = self.ordered.le
        self.presentation = self.ordered.presentation(LE)
        self._theta_cache = {LE: {}, GE: {}}

    def normalize(self, element):
        return self.presentation.normal_form(element, lambda_level=True)

    def system(self, abstract):
        """Abstract element on the input quiver -> Lambda normal form."""
        return self.presentation.normalize_abstract(abstract, lambda_level=True)

    def q(self, vertex):
        return self.ordered.q(vertex)

    def build(self, left, generator, right, coeff=ONE):
        """Bimodule element from abstract left/right factors."""
        return BimoduleElement.build(self.normalize, self.system(left), generator, self.system(right), coeff)

    def apply(self, table, element):
        return apply_map(self.normalize, table, element)

    def compose(self, outer, inner):
        return compose(self.normalize, outer, inner)

    def theta_word(self, word, side=LE):
        """theta of a normal-form word, as a normal form of the presentation for <=."""
        cache = self._theta_cache[side]
        image = cache.get(word)
        if image is None:
            p = self.presentation
            image = theta_normal_form(self.ordered, p.pullback(Element.from_word(word)), side)
            if side == GE:
                image = p.normalize_abstract(self.ordered.presentation(GE).pullback(image), lambda_level=True)
            cache[word] = image
        return image

    def twist(self, element, side=LE):
        """Apply theta to both coefficient factors of every term."""
        terms = {}
        for (lw, g, rw), c in element.terms.items():
            for lw2, lc in self.theta_word(lw, side).items():
                for rw2, rc in self.theta_word(rw, side).items():
                    _accumulate(terms, (lw2, g, rw2), c * lc * rc)
        return BimoduleElement(terms)

    def twist_table(self, table, side=LE):
        return {g: self.twist(image, side) for g, image in table.items()}


def _requires_symmetric_order(ctx):
    dq = ctx.dq
    for v in dq.vertices:
        if len(dq.arrows_at_tail(v)) > 2:
            return False
    return True


# P_2 -> P_1 -> P_0 -> Lambda


def complex_maps(ctx):
    """Generator tables for alpha, beta and gamma (gamma as Lambda-valued dict)."""
    oc, dq = ctx.ordered, ctx.dq
    alpha = {}
    for v in dq.vertices:
        total = BimoduleElement()
        for d in dq.arrows_at_tail(v):
            total = total + _delta_term(ctx, d)
        alpha[vertex_generator(ETA_V, v)] = total
    beta = {}
    for d in dq.order:
        t, h = dq.tail(d), dq.head(d)
        a = oc.arrow(d)
        beta[arrow_generator(ETA_A, dq, d)] = (
            ctx.build(a, vertex_generator(ETA_V, h), oc.e(h)) - ctx.build(oc.e(t), vertex_generator(ETA_V, t), a)
        )
    gamma = {vertex_generator(ETA_V, v): Element.idempotent(v) for v in dq.vertices}
    return alpha, beta, gamma


def _delta_term(ctx, d):
    """l_d D(g_d^{eps}) r_d with D(g) = eta_d d* + d eta_{d*} and D(g^-1) = -g^-1 D(g) g^-1."""
    oc, dq = ctx.ordered, ctx.dq
    ds = star(d)
    left, right = oc.l(d), oc.r(d)
    if dq.epsilon(d) > 0:
        outer_left, outer_right, sign = left, right, ONE
    else:
        outer_left, outer_right, sign = left * oc.g(d, -1), oc.g(d, -1) * right, -ONE
    first = ctx.build(outer_left, arrow_generator(ETA_A, dq, d), oc.arrow(ds) * outer_right, sign)
    second = ctx.build(outer_left * oc.arrow(d), arrow_generator(ETA_A, dq, ds), outer_right, sign)
    return first + second


def gamma_apply(ctx, gamma, element):
    """gamma(u eta_v w) = u w in Lambda."""
    total = Element()
    for (lw, g, rw), c in element.terms.items():
        total = total + (Element.from_word(lw) * gamma[g] * Element.from_word(rw)).scale(c)
    return ctx.normalize(total)


def verify_complex(ctx):
    """beta o alpha = 0, gamma o beta = 0 and the relation rho - q vanishing in Lambda."""
    ctx = _as_context(ctx)
    alpha, beta, gamma = complex_maps(ctx)
    report = Report("complex")
    for g, image in alpha.items():
        residual = ctx.apply(beta, image)
        report.add(f"beta(alpha({g})) = 0", residual == 0, residual=residual.format())
    for g, image in beta.items():
        residual = gamma_apply(ctx, gamma, image)
        report.add(f"gamma(beta({g})) = 0", residual == 0, residual=str(residual))
    oc = ctx.ordered
    for v in ctx.dq.vertices:
        residual = ctx.system(oc.rho(v) - oc.e(v).scale(oc.q(v)))
        report.add(f"psi_2: rho - q = 0 at {v}", residual == 0, residual=str(residual))
    return report


# duals and the self-duality isomorphism


def mechanical_dual(table, pair):
    """Dual of a generator table through the pairing.

    ``pair`` sends a generator of the source to the dual generator it pairs
    with, and a generator of the target to its dual.  A term ``x g y`` of
    ``f(h)`` contributes ``y pair(h) x`` to the image of ``pair(g)``.
    """
    dual = {}
    for h, image in table.items():
        for (lw, g, rw), c in image.terms.items():
            key = pair(g)
            term = BimoduleElement({(rw, pair(h), lw): c})
            dual[key] = dual.get(key, BimoduleElement()) + term
    return dual


def _pair(dq):
    def pair(g):
        if g.kind == ETA_V:
            return vertex_generator(DUAL_V, g.key)
        if g.kind == ETA_A:
            return arrow_generator(DUAL_A, dq, star(g.key))
        if g.kind == DUAL_V:
            return vertex_generator(ETA_V, g.key)
        if g.kind == DUAL_A:
            return arrow_generator(ETA_A, dq, star(g.key))
        raise ValidationError(f"no pairing for {g}")

    return pair


def phi_factors(ctx, d):
    """(scalar, L, R) with phi_1(eta_d) = scalar * L eta_d^v R, L a unit at t(d) and R at h(d).

    Read left to right, the two cases are ``-r_d^{-1} eta_d^v r_{d*}`` for d
    in Q_1 and ``(q_{h(d)}/q_{t(d)}) l_d eta_d^v l_{d*}^{-1}`` for d in Q^op.
    """
    oc = ctx.ordered
    ds = star(d)
    if not is_star(d):
        return -ONE, oc.r(d, inverse=True), oc.r(ds)
    scalar = oc.q(ctx.dq.head(d)) * oc.q(ctx.dq.tail(d)).invert_monomial()
    return scalar, oc.l(d), oc.l(ds, inverse=True)


def phi_tables(ctx, factors=phi_factors):
    """phi_0, phi_1 and their inverse tables."""
    dq = ctx.dq
    oc = ctx.ordered
    phi0, phi0_inv = {}, {}
    for v in dq.vertices:
        phi0[vertex_generator(ETA_V, v)] = BimoduleElement.generator(vertex_generator(DUAL_V, v), oc.q(v))
        phi0_inv[vertex_generator(DUAL_V, v)] = BimoduleElement.generator(
            vertex_generator(ETA_V, v), oc.q(v).invert_monomial()
        )
    phi1, phi1_inv = {}, {}
    for d in dq.order:
        scalar, left, right = factors(ctx, d)
        target = arrow_generator(DUAL_A, dq, d)
        phi1[arrow_generator(ETA_A, dq, d)] = ctx.build(left, target, right, scalar)
        phi1_inv[target] = ctx.build(_inverse(oc, left), arrow_generator(ETA_A, dq, d), _inverse(oc, right),
                                     scalar.invert_monomial())
    return phi0, phi0_inv, phi1, phi1_inv


def _inverse(oc, element):
    """Inverse of a product of g^{+-1} letters (the only units used here)."""
    if len(element) != 1:
        raise ValidationError("only monomial products of g letters can be inverted")
    (word, coeff), = element.items()
    result = Element.idempotent(word.end, coeff.invert_monomial())
    for letter in word.letters:
        result = Element.letter(type(letter)(letter.kind, letter.arrow, -letter.power, letter.source, letter.target)) * result
    return result


def dual_maps(ctx, factors=phi_factors):
    """alpha^v, beta^v (mechanical), their theta twists in xi generators, phi_0 and phi_1."""
    ctx = _as_context(ctx)
    dq = ctx.dq
    alpha, beta, _ = complex_maps(ctx)
    pair = _pair(dq)
    alpha_dual = mechanical_dual(alpha, pair)
    beta_dual = mechanical_dual(beta, pair)
    phi0, phi0_inv, phi1, phi1_inv = phi_tables(ctx, factors)
    oc = ctx.ordered
    # xi_v = q eta_v^v and xi_d = phi_1(eta_d)
    to_xi = {}
    from_xi = {}
    for v in dq.vertices:
        to_xi[vertex_generator(DUAL_V, v)] = BimoduleElement.generator(vertex_generator(XI_V, v), oc.q(v).invert_monomial())
        from_xi[vertex_generator(XI_V, v)] = BimoduleElement.generator(vertex_generator(DUAL_V, v), oc.q(v))
    for d in dq.order:
        xi = arrow_generator(XI_A, dq, d)
        from_xi[xi] = phi1[arrow_generator(ETA_A, dq, d)]
        inverse = phi1_inv[arrow_generator(DUAL_A, dq, d)]
        to_xi[arrow_generator(DUAL_A, dq, d)] = _retarget(inverse, {arrow_generator(ETA_A, dq, d): xi})
    alpha_dual_xi = {}
    for xi in (g for g in from_xi if g.kind == XI_A):
        image = ctx.apply(alpha_dual, from_xi[xi])
        alpha_dual_xi[xi] = ctx.apply(to_xi, image)
    beta_dual_xi = {}
    for v in dq.vertices:
        xi = vertex_generator(XI_V, v)
        beta_dual_xi[xi] = ctx.apply(to_xi, ctx.apply(beta_dual, from_xi[xi]))
    return {
        "alpha": alpha,
        "beta": beta,
        "alpha_dual": alpha_dual,
        "beta_dual": beta_dual,
        "alpha_dual_xi": alpha_dual_xi,
        "beta_dual_xi": beta_dual_xi,
        "alpha_dual_theta": ctx.twist_table(alpha_dual_xi, TWIST_SIDE),
        "beta_dual_theta": ctx.twist_table(beta_dual_xi, TWIST_SIDE),
        "phi0": phi0,
        "phi0_inv": phi0_inv,
        "phi1": phi1,
        "phi1_inv": phi1_inv,
        "to_xi": to_xi,
        "from_xi": from_xi,
    }


def _retarget(element, renaming):
    terms = {}
    for (lw, g, rw), c in element.terms.items():
        _accumulate(terms, (lw, renaming.get(g, g), rw), c)
    return BimoduleElement(terms)


def _identity_check(report, name, ctx, composite):
    for g, image in composite.items():
        expected = BimoduleElement.generator(g)
        residual = image - expected
        report.add(f"{name} on {g}", residual == 0, residual=residual.format())


def verify_selfduality(ctx, factors=phi_factors):
    """Squares (I) and (II), invertibility of phi, twist involution and (phi_1)_theta = -(phi_1)^v."""
    ctx = _as_context(ctx)
    if not _requires_symmetric_order(ctx):
        raise ValidationError("the twisted dual complex needs Lambda(<=) = Lambda(>=); use quivers with at most two arrows per vertex")
    maps = dual_maps(ctx, factors)
    report = Report("selfduality")
    dq = ctx.dq
    from_xi = maps["from_xi"]
    to_xi = maps["to_xi"]
    # (I) alpha^v_theta o phi_1 = phi_0 o beta on eta_a, compared in xi generators
    for d in dq.order:
        g = arrow_generator(ETA_A, dq, d)
        left = maps["alpha_dual_theta"][arrow_generator(XI_A, dq, d)]
        right = ctx.apply(to_xi, ctx.apply(maps["phi0"], maps["beta"][g]))
        residual = left - right
        report.add(f"(I) on {g}", residual == 0, residual=residual.format())
    # (II) -beta^v_theta o phi_0 = phi_1 o alpha on eta_v
    for v in dq.vertices:
        g = vertex_generator(ETA_V, v)
        left = -maps["beta_dual_theta"][vertex_generator(XI_V, v)]
        right = ctx.apply(to_xi, ctx.apply(maps["phi1"], maps["alpha"][g]))
        residual = left - right
        report.add(f"(II) on {g}", residual == 0, residual=residual.format())
    # (II) again with psi_1 = -(phi_1)^v in place of phi_1 and the other twist, in eta^v generators
    psi1 = {g: -image for g, image in mechanical_dual(maps["phi1"], _pair(dq)).items()}
    other = _OTHER[TWIST_SIDE]
    for v in dq.vertices:
        g = vertex_generator(ETA_V, v)
        xi_v = BimoduleElement.generator(vertex_generator(DUAL_V, v), ctx.q(v))
        left = -ctx.twist(ctx.apply(maps["beta_dual"], xi_v), other)
        right = ctx.apply(psi1, maps["alpha"][g])
        residual = left - right
        report.add(f"(II) with psi_1 = -(phi_1)^v on {g}", residual == 0, residual=residual.format())
    normalize = ctx.normalize
    _identity_check(report, "phi_0^-1 o phi_0", ctx, compose(normalize, maps["phi0_inv"], maps["phi0"]))
    _identity_check(report, "phi_0 o phi_0^-1", ctx, compose(normalize, maps["phi0"], maps["phi0_inv"]))
    _identity_check(report, "phi_1^-1 o phi_1", ctx, compose(normalize, maps["phi1_inv"], maps["phi1"]))
    _identity_check(report, "phi_1 o phi_1^-1", ctx, compose(normalize, maps["phi1"], maps["phi1_inv"]))
    _identity_check(report, "xi change of generators", ctx, compose(normalize, to_xi, from_xi))
    for name in ("alpha_dual_xi", "beta_dual_xi", "phi1"):
        table = maps[name]
        twice = {g: ctx.twist(ctx.twist(image, TWIST_SIDE), _OTHER[TWIST_SIDE]) for g, image in table.items()}
        for g, image in table.items():
            residual = twice[g] - image
            report.add(f"theta twice on {name} at {g}", residual == 0, residual=residual.format())
    phi1_theta = ctx.twist_table(maps["phi1"], TWIST_SIDE)
    phi1_dual = mechanical_dual(maps["phi1"], _pair(dq))
    for d in dq.order:
        g = arrow_generator(ETA_A, dq, d)
        left = phi1_theta[g]
        right = -phi1_dual[g]
        residual = left - right
        report.add(f"(phi_1)_theta = -(phi_1)^v on {g}", residual == 0, residual=residual.format())
    return report


def _as_context(ctx):
    return ctx if isinstance(ctx, ComplexContext) else ComplexContext(ctx)


__all__ = [
    "BimoduleElement",
    "ComplexContext",
    "DUAL_A",
    "DUAL_V",
    "ETA_A",
    "ETA_V",
    "Generator",
    "XI_A",
    "XI_V",
    "apply_map",
    "arrow_generator",
    "complex_maps",
    "compose",
    "dual_maps",
    "gamma_apply",
    "mechanical_dual",
    "phi_factors",
    "phi_tables",
    "table_to_json",
    "verify_complex",
    "verify_selfduality",
    "vertex_generator",
]
