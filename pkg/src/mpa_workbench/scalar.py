"""Exact coefficients: Laurent polynomials over the rationals in the vertex parameters q_v.

A monomial is a sorted tuple of ``(vertex, exponent)`` pairs with nonzero
exponents; the empty tuple is the constant monomial.  Rationals are
``fractions.Fraction``, which already keeps lowest terms with a positive
denominator.
"""

from fractions import Fraction
import re

from .errors import NotAMonomial, ParseError, ZeroCoefficient, ZeroParameter

Rational = Fraction

_CONST = ()


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for var, exp in m2:
        total = exps.get(var, 0) + exp
        if total:
            exps[var] = total
        else:
            del exps[var]
    return tuple(sorted(exps.items()))


class LaurentScalar:
    """Immutable Laurent polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff:
                    clean[tuple(mono)] = Fraction(coeff)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, value):
        value = Fraction(value)
        return cls._raw({_CONST: value} if value else {})

    @classmethod
    def q(cls, vertex, exponent=1):
        if exponent == 0:
            return cls.const(1)
        return cls._raw({((vertex, exponent),): Fraction(1)})

    @classmethod
    def coerce(cls, value):
        if isinstance(value, LaurentScalar):
            return value
        return cls.const(value)

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_constant(self):
        return not self._terms or (len(self._terms) == 1 and _CONST in self._terms)

    def constant_value(self):
        """The rational value of a constant scalar."""
        if not self._terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms[_CONST]

    def variables(self):
        return sorted({var for mono in self._terms for var, _ in mono})

    def __add__(self, other):
        other = LaurentScalar.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        result = dict(self._terms)
        for mono, coeff in other._terms.items():
            total = result.get(mono, 0) + coeff
            if total:
                result[mono] = total
            else:
                result.pop(mono, None)
        return LaurentScalar._raw(result)

    __radd__ = __add__

    def __neg__(self):
        return LaurentScalar._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-LaurentScalar.coerce(other))

    def __rsub__(self, other):
        return LaurentScalar.coerce(other) - self

    def __mul__(self, other):
        other = LaurentScalar.coerce(other)
        if not self._terms or not other._terms:
            return ZERO
        if len(other._terms) == 1 and _CONST in other._terms:
            factor = other._terms[_CONST]
            if factor == 1:
                return self
            return LaurentScalar._raw({m: c * factor for m, c in self._terms.items()})
        if len(self._terms) == 1 and _CONST in self._terms:
            return other * self
        result = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                total = result.get(mono, 0) + c1 * c2
                if total:
                    result[mono] = total
                else:
                    result.pop(mono, None)
        return LaurentScalar._raw(result)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if exponent < 0:
            return self.invert_monomial() ** (-exponent)
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentScalar):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({_CONST: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def invert_monomial(self):
        if len(self._terms) != 1:
            raise NotAMonomial(f"{self} has {len(self._terms)} terms")
        ((mono, coeff),) = self._terms.items()
        if coeff == 0:
            raise ZeroCoefficient(str(self))
        return LaurentScalar._raw({tuple((v, -e) for v, e in mono): 1 / coeff})

    def evaluate(self, assignment):
        """Substitute every variable; unassigned variables raise KeyError."""
        values = _checked_assignment(assignment)
        total = Fraction(0)
        for mono, coeff in self._terms.items():
            term = coeff
            for var, exp in mono:
                term *= values[var] ** exp
            total += term
        return total

    def specialize(self, assignment):
        """Substitute the assigned variables and keep the others symbolic."""
        values = _checked_assignment(assignment)
        result = ZERO
        for mono, coeff in self._terms.items():
            factor = coeff
            rest = []
            for var, exp in mono:
                if var in values:
                    factor *= values[var] ** exp
                else:
                    rest.append((var, exp))
            result = result + LaurentScalar._raw({tuple(rest): factor} if factor else {})
        return result

    def sort_key(self):
        return sorted(self._terms.items())

    def __repr__(self):
        return f"LaurentScalar({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for mono, coeff in sorted(self._terms.items(), key=_term_order):
            negative = coeff < 0
            magnitude = -coeff if negative else coeff
            factors = [f"q{var}" if exp == 1 else f"q{var}^{exp}" for var, exp in mono]
            if magnitude != 1 or not factors:
                factors.insert(0, str(magnitude))
            body = "*".join(factors)
            if not pieces:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(pieces)

    def needs_parentheses(self):
        return len(self._terms) > 1


def _term_order(item):
    mono, _ = item
    return (-sum(e for _, e in mono), mono)


def _checked_assignment(assignment):
    values = {}
    for var, value in assignment.items():
        value = Fraction(value)
        if value == 0:
            raise ZeroParameter(f"parameter q{var} is zero")
        values[int(var)] = value
    return values


ZERO = LaurentScalar._raw({})
ONE = LaurentScalar._raw({_CONST: Fraction(1)})


def scalar_arith(op, s1, s2=None):
    """Apply ``add``, ``mul`` or ``neg``."""
    s1 = LaurentScalar.coerce(s1)
    if op == "add":
        return s1 + s2
    if op == "mul":
        return s1 * s2
    if op == "neg":
        return -s1
    raise ValueError(f"unknown scalar operation {op!r}")


def scalar_invert_monomial(s):
    return LaurentScalar.coerce(s).invert_monomial()


def scalar_eval(s, assignment):
    return LaurentScalar.coerce(s).evaluate(assignment)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|q(\d+)|(\^)\s*(-?\d+)|([-+*()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r}", pos)
        number, var, caret, power, symbol = match.groups()
        start = match.start() + (len(match.group(0)) - len(match.group(0).lstrip()))
        if number is not None:
            tokens.append(("num", Fraction(number), start))
        elif var is not None:
            tokens.append(("var", int(var), start))
        elif caret is not None:
            tokens.append(("pow", int(power), start))
        else:
            tokens.append((symbol, symbol, start))
        pos = match.end()
    return tokens


class _ScalarParser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def take(self):
        token = self.peek()
        self.index += 1
        return token

    def parse(self):
        if not self.tokens:
            raise ParseError("empty scalar", 0)
        value = self.sum()
        token = self.peek()
        if token is not None:
            raise ParseError(f"unexpected token {token[1]!r}", token[2])
        return value

    def sum(self):
        sign = 1
        token = self.peek()
        if token and token[0] in "+-":
            self.take()
            sign = -1 if token[0] == "-" else 1
        value = self.product() * sign
        while True:
            token = self.peek()
            if not token or token[0] not in "+-":
                return value
            self.take()
            term = self.product()
            value = value + term if token[0] == "+" else value - term
        return value

    def product(self):
        value = self.power()
        while True:
            token = self.peek()
            if token and token[0] == "*":
                self.take()
                value = value * self.power()
            elif token and token[0] in ("num", "var", "("):
                value = value * self.power()
            else:
                return value

    def power(self):
        token = self.take()
        if token is None:
            raise ParseError("unexpected end of scalar")
        kind, payload, pos = token
        if kind == "num":
            base = LaurentScalar.const(payload)
        elif kind == "var":
            base = LaurentScalar.q(payload)
        elif kind == "(":
            base = self.sum()
            closing = self.take()
            if closing is None or closing[0] != ")":
                raise ParseError("missing ')'", pos)
        elif kind == "-":
            return -self.power()
        else:
            raise ParseError(f"unexpected token {payload!r}", pos)
        token = self.peek()
        if token and token[0] == "pow":
            self.take()
            try:
                base = base ** token[1]
            except NotAMonomial as exc:
                raise ParseError(f"negative power of a non-monomial: {exc}", token[2]) from exc
        return base


def parse_scalar(text):
    """Parse forms such as ``-q0 - q0^-1`` or ``3/2*q1^2 + 1``."""
    return _ScalarParser(text).parse()
