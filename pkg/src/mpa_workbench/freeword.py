"""Letters, routed words and finite linear combinations of words.

Letters are interned, so equality is identity and hashing is cheap.  An
``Element`` is an immutable mapping from ``Word`` to ``LaurentScalar``.
"""

from typing import NamedTuple

from .errors import RoutingMismatch
from .quiver import base_id, is_star
from .scalar import ONE, ZERO, LaurentScalar

ARROW = "arrow"
X = "x"
XBAR = "xbar"
R = "r"
RP = "rp"


class Letter:
    """A generator routed from ``source`` to ``target``."""

    __slots__ = ("kind", "arrow", "power", "source", "target", "name", "_key")
    _registry = {}

    def __new__(cls, kind, arrow, power, source, target):
        key = (kind, arrow, power, source, target)
        existing = cls._registry.get(key)
        if existing is not None:
            return existing
        obj = super().__new__(cls)
        obj.kind = kind
        obj.arrow = arrow
        obj.power = power
        obj.source = source
        obj.target = target
        obj.name = _letter_name(kind, arrow, power)
        obj._key = (source, _KIND_RANK[kind], obj.name)
        cls._registry[key] = obj
        return obj

    def __reduce__(self):
        return (Letter, (self.kind, self.arrow, self.power, self.source, self.target))

    @property
    def is_star(self):
        return self.kind == ARROW and is_star(self.arrow)

    @property
    def base(self):
        return base_id(self.arrow) if self.arrow is not None else None

    def sort_key(self):
        return self._key

    def __repr__(self):
        return f"<{self.name}@{self.source}>"

    def __str__(self):
        return self.name


_KIND_RANK = {ARROW: 0, X: 1, XBAR: 2, R: 3, RP: 4}


def _letter_name(kind, arrow, power):
    if kind == ARROW:
        return arrow
    if kind == X:
        return f"x[{arrow}]" if power > 0 else f"xinv[{arrow}]"
    if kind == XBAR:
        return f"xbar[{arrow}]" if power > 0 else f"xbarinv[{arrow}]"
    if kind == R:
        return "r"
    return "r'"


def arrow_letter(dq, arrow_id):
    return Letter(ARROW, arrow_id, 0, dq.tail(arrow_id), dq.head(arrow_id))


def x_letter(dq, arrow_id, power=1):
    vertex = dq.tail(arrow_id)
    return Letter(X, arrow_id, power, vertex, vertex)


def xbar_letter(dq, arrow_id, power=1):
    vertex = dq.tail(arrow_id)
    return Letter(XBAR, arrow_id, power, vertex, vertex)


def r_letter(vertex):
    return Letter(R, None, 0, vertex, vertex)


def rp_letter(vertex):
    return Letter(RP, None, 0, vertex, vertex)


class Word(NamedTuple):
    start: int
    letters: tuple

    @property
    def end(self):
        return self.letters[-1].target if self.letters else self.start

    def __len__(self):
        return len(self.letters)

    def sort_key(self):
        return (self.start, len(self.letters), tuple(letter.sort_key() for letter in self.letters))

    def names(self):
        return [letter.name for letter in self.letters]

    def is_valid(self):
        current = self.start
        for letter in self.letters:
            if letter.source != current:
                return False
            current = letter.target
        return True

    def __str__(self):
        return format_word(self)


def make_word(start, letters=()):
    word = Word(start, tuple(letters))
    if not word.is_valid():
        raise RoutingMismatch(f"letters {[str(l) for l in letters]} do not route from {start}")
    return word


def idempotent_word(vertex):
    return Word(vertex, ())


def concat(w1, w2):
    """Concatenation, or ``None`` when the endpoint of w1 differs from the start of w2."""
    if w1.end != w2.start:
        return None
    if not w2.letters:
        return w1
    if not w1.letters:
        return w2
    return Word(w1.start, w1.letters + w2.letters)


def format_word(word):
    return " * ".join([f"e{word.start}"] + [letter.name for letter in word.letters])


class Element:
    """Finite formal sum of words with Laurent-polynomial coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for word, coeff in terms.items():
                coeff = LaurentScalar.coerce(coeff)
                if coeff:
                    clean[word] = clean.get(word, ZERO) + coeff
                    if not clean[word]:
                        del clean[word]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def from_word(cls, word, coeff=ONE):
        coeff = LaurentScalar.coerce(coeff)
        return cls._raw({word: coeff} if coeff else {})

    @classmethod
    def letter(cls, letter):
        return cls._raw({Word(letter.source, (letter,)): ONE})

    @classmethod
    def idempotent(cls, vertex, coeff=ONE):
        return cls.from_word(Word(vertex, ()), coeff)

    @classmethod
    def unit(cls, vertices, coeff=ONE):
        coeff = LaurentScalar.coerce(coeff)
        if not coeff:
            return ZERO_ELEMENT
        return cls._raw({Word(v, ()): coeff for v in vertices})

    @classmethod
    def vertex_scalar(cls, coefficients):
        """Sum of ``coeff * e_v`` over a mapping vertex -> scalar."""
        return cls({Word(v, ()): c for v, c in coefficients.items()})

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def words(self):
        return self._terms.keys()

    def coefficient(self, word):
        return self._terms.get(word, ZERO)

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        result = dict(self._terms)
        for word, coeff in other._terms.items():
            total = result.get(word)
            total = coeff if total is None else total + coeff
            if total:
                result[word] = total
            else:
                result.pop(word, None)
        return Element._raw(result)

    def __neg__(self):
        return Element._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-other)

    def scale(self, scalar):
        scalar = LaurentScalar.coerce(scalar)
        if not scalar:
            return ZERO_ELEMENT
        if scalar == ONE:
            return self
        return Element._raw({w: c * scalar for w, c in self._terms.items() if c * scalar})

    def __mul__(self, other):
        if isinstance(other, Element):
            return element_mul(self, other)
        if isinstance(other, (int, LaurentScalar)) or hasattr(other, "denominator"):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, LaurentScalar)) or hasattr(other, "denominator"):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, exponent):
        if exponent < 0:
            raise ValueError("elements have no general inverse")
        if exponent == 0:
            return Element.unit(sorted({w.start for w in self._terms} | {w.end for w in self._terms}))
        result = self
        for _ in range(exponent - 1):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, Element):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda item: item[0].sort_key())

    def restrict(self, start=None, end=None):
        """The sub-sum e_start * self * e_end (either side may be unconstrained)."""
        return Element._raw(
            {
                w: c
                for w, c in self._terms.items()
                if (start is None or w.start == start) and (end is None or w.end == end)
            }
        )

    def map_coefficients(self, function):
        return Element({w: function(c) for w, c in self._terms.items()})

    def specialize(self, assignment):
        return self.map_coefficients(lambda c: c.specialize(assignment))

    def max_length(self):
        return max((len(w) for w in self._terms), default=0)

    def __repr__(self):
        return f"Element({str(self)!r})"

    def __str__(self):
        return format_element(self)


ZERO_ELEMENT = Element._raw({})


def element_mul(e1, e2):
    """Bilinear extension of concatenation; incompatible pairs contribute zero."""
    if not e1._terms or not e2._terms:
        return ZERO_ELEMENT
    by_start = {}
    for word, coeff in e2._terms.items():
        by_start.setdefault(word.start, []).append((word, coeff))
    result = {}
    for w1, c1 in e1._terms.items():
        for w2, c2 in by_start.get(w1.end, ()):
            word = concat(w1, w2)
            coeff = c1 * c2
            total = result.get(word)
            total = coeff if total is None else total + coeff
            if total:
                result[word] = total
            else:
                result.pop(word, None)
    return Element._raw(result)


def product(elements, vertices=None):
    """Left-to-right product of a sequence of elements."""
    iterator = iter(elements)
    try:
        result = next(iterator)
    except StopIteration:
        if vertices is None:
            raise ValueError("empty product needs a vertex set") from None
        return Element.unit(vertices)
    for element in iterator:
        result = element_mul(result, element)
    return result


def substitute(element, letter, replacement):
    """Replace every occurrence of ``letter`` by ``replacement``."""
    for word in replacement.words():
        if word.start != letter.source or word.end != letter.target:
            raise RoutingMismatch(
                f"replacement term {format_word(word)} does not route {letter.source}->{letter.target}"
            )
    return substitute_letters(element, {letter: replacement})


def substitute_letters(element, mapping):
    """Simultaneously replace letters according to ``mapping`` (letter -> Element)."""
    result = ZERO_ELEMENT
    for word, coeff in element.items():
        if not any(letter in mapping for letter in word.letters):
            result = result + Element._raw({word: coeff})
            continue
        current = Element.idempotent(word.start, coeff)
        for letter in word.letters:
            image = mapping.get(letter)
            current = element_mul(current, image if image is not None else Element.letter(letter))
        result = result + current
    return result


def map_letters(element, function):
    """Algebra map determined by ``function(letter) -> Element`` (identity on vertices)."""
    cache = {}
    result = {}
    for word, coeff in element.items():
        current = Element.idempotent(word.start, coeff)
        for letter in word.letters:
            image = cache.get(letter)
            if image is None:
                image = function(letter)
                cache[letter] = image
            current = element_mul(current, image)
            if not current:
                break
        for w, c in current.items():
            total = result.get(w)
            total = c if total is None else total + c
            if total:
                result[w] = total
            else:
                result.pop(w, None)
    return Element._raw(result)


def format_scalar_factor(coeff):
    text = str(coeff)
    if coeff.needs_parentheses():
        return f"({text})"
    return text


def format_element(element):
    if not element:
        return "0"
    pieces = []
    for word, coeff in element.sorted_terms():
        body = format_word(word)
        if coeff == ONE:
            text = body
            negative = False
        elif coeff == -ONE:
            text = body
            negative = True
        elif not coeff.needs_parentheses() and str(coeff).startswith("-"):
            text = f"{str(-coeff)} * {body}"
            negative = True
        else:
            text = f"{format_scalar_factor(coeff)} * {body}"
            negative = False
        if not pieces:
            pieces.append(f"-{text}" if negative else text)
        else:
            pieces.append(f"- {text}" if negative else f"+ {text}")
    return " ".join(pieces)


def element_to_json(element):
    return [
        {"coefficient": str(coeff), "start": word.start, "letters": word.names()}
        for word, coeff in element.sorted_terms()
    ]
