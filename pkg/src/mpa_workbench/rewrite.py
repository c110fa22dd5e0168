"""Ground rewrite rules on routed words, normalization and confluence checks.

All rules are ground: a pattern is a concrete tuple of letters.  Every
application is checked against the system's measure; a step that does not
strictly decrease the measure (with word length as the final tie-break)
raises ``MeasureViolation``.
"""

from dataclasses import dataclass, field
import random

from .errors import ConfluenceFailure, MeasureViolation, UnknownLetter
from .freeword import R, RP, ZERO_ELEMENT, Element, Word, format_element, format_word
from .scalar import ONE


@dataclass(eq=False)
class Rule:
    """``pattern -> replacement``; ``replacement`` words route like the pattern."""

    name: str
    pattern: tuple
    replacement: Element
    family: object = None
    forbidden_before: frozenset = frozenset()

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("rule patterns must be nonempty")
        start = self.pattern[0].source
        end = self.pattern[-1].target
        for word in self.replacement.words():
            if word.start != start or word.end != end:
                raise ValueError(
                    f"rule {self.name}: replacement term {format_word(word)} does not route {start}->{end}"
                )

    @property
    def lhs_word(self):
        return Word(self.pattern[0].source, self.pattern)

    def guard_allows(self, previous):
        return previous is None or previous not in self.forbidden_before

    def __repr__(self):
        return f"Rule({self.name}: {format_word(self.lhs_word)} -> {format_element(self.replacement)})"


class Measure:
    """Named well-founded measure: a function from words to tuples of naturals."""

    def __init__(self, name, function, letters=None):
        self.name = name
        self._function = function
        self.letters = letters

    def value(self, word):
        if self.letters is not None:
            for letter in word.letters:
                if letter not in self.letters:
                    raise UnknownLetter(f"letter {letter.name} at {letter.source} is outside measure {self.name}")
        return self._function(word)

    def key(self, word):
        """Comparison key: measure value with word length as the last tie-break."""
        return self._function(word) + (len(word.letters),)


def measure_value(word, measure):
    return measure.value(word)


class ReductionSystem:
    def __init__(self, rules, measure, name="system", family_labels=None, lambda_kinds=(R, RP)):
        self.rules = tuple(rules)
        self.measure = measure
        self.name = name
        self.family_labels = dict(family_labels or {})
        self.lambda_kinds = frozenset(lambda_kinds)
        self.index = {}
        self.max_length = 0
        self._by_last = {}
        self._by_prefix = {}
        for order, rule in enumerate(self.rules):
            if rule.pattern in self.index:
                raise ValueError(f"duplicate pattern for rules {self.index[rule.pattern].name} and {rule.name}")
            rule.order = order
            self.index[rule.pattern] = rule
            self.max_length = max(self.max_length, len(rule.pattern))
            self._by_last.setdefault(rule.pattern[-1], []).append(rule)
            for cut in range(1, len(rule.pattern) + 1):
                self._by_prefix.setdefault(rule.pattern[:cut], []).append(rule)
        self.alphabet = frozenset(letter for rule in self.rules for letter in rule.pattern) | frozenset(
            letter for rule in self.rules for word in rule.replacement.words() for letter in word.letters
        )
        self._normalizers = {}

    def rule_named(self, name):
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)

    def matches(self, word):
        """All (position, rule) pairs whose pattern occurs in ``word`` with its guard satisfied."""
        letters = word.letters
        found = []
        for position in range(len(letters)):
            previous = letters[position - 1] if position else None
            for length in range(1, min(self.max_length, len(letters) - position) + 1):
                rule = self.index.get(letters[position:position + length])
                if rule is not None and rule.guard_allows(previous):
                    found.append((position, rule))
        return found

    def is_irreducible(self, word):
        return not self.matches(word)

    def suffix_match(self, word):
        letters = word.letters
        size = len(letters)
        best = None
        for rule in self._by_last.get(letters[-1], ()):
            length = len(rule.pattern)
            if length > size or letters[size - length:] != rule.pattern:
                continue
            previous = letters[size - length - 1] if size > length else None
            if rule.guard_allows(previous) and (best is None or rule.order < best.order):
                best = rule
        return best

    def apply(self, word, position, rule):
        """One rewriting step at ``position``."""
        letters = word.letters
        prefix = letters[:position]
        suffix = letters[position + len(rule.pattern):]
        result = {}
        for rhs, coeff in rule.replacement.items():
            new_word = Word(word.start, prefix + rhs.letters + suffix)
            result[new_word] = result.get(new_word, 0) + coeff
        return Element({w: c for w, c in result.items()})

    def normalizer(self, strategy="append", lambda_level=False, check_measure=True):
        key = (strategy if not isinstance(strategy, list) else tuple(strategy), lambda_level, check_measure)
        normalizer = self._normalizers.get(key)
        if normalizer is None:
            normalizer = Normalizer(self, strategy, lambda_level, check_measure)
            self._normalizers[key] = normalizer
        return normalizer

    def normalize(self, element, strategy="append", lambda_level=False, check_measure=True):
        return self.normalizer(strategy, lambda_level, check_measure).normalize(element)

    def family_label(self, first, second):
        label = self.family_labels.get((first.family, second.family))
        if label is None:
            return f"extra({first.family},{second.family})"
        return label

    def specialize(self, assignment):
        rules = [
            Rule(rule.name, rule.pattern, rule.replacement.specialize(assignment), rule.family, rule.forbidden_before)
            for rule in self.rules
        ]
        return ReductionSystem(rules, self.measure, self.name, self.family_labels, self.lambda_kinds)


def _parse_strategy(strategy):
    if isinstance(strategy, tuple) and strategy and strategy[0] == "random":
        return "random", random.Random(strategy[1])
    if isinstance(strategy, str) and strategy.startswith("random"):
        seed = int(strategy.split(":", 1)[1]) if ":" in strategy else 0
        return "random", random.Random(seed)
    if strategy in ("append", "leftmost", "rightmost"):
        return strategy, None
    raise ValueError(f"unknown strategy {strategy!r}")


class Normalizer:
    """Memoized normal forms under a fixed strategy.

    ``append`` folds letters one at a time onto an irreducible prefix, so
    only suffix matches need to be searched.  ``leftmost``, ``rightmost`` and
    ``random`` pick among all matches of the whole word.  Both run on an
    explicit stack, so deep reduction chains do not hit the recursion limit.
    ``lambda_level`` drops every word containing a relation letter.
    """

    def __init__(self, system, strategy="append", lambda_level=False, check_measure=True):
        self.system = system
        self.mode, self.rng = _parse_strategy(strategy)
        self.lambda_level = lambda_level
        self.check_measure = check_measure
        self._append_memo = {}
        self._prefix_memo = {}
        self._word_memo = {}
        self._steps = {}
        self.applications = 0

    def _dropped(self, word):
        if not self.lambda_level:
            return False
        kinds = self.system.lambda_kinds
        return any(letter.kind in kinds for letter in word.letters)

    def _check(self, rule, before, after_words):
        if not self.check_measure:
            return
        measure = self.system.measure
        before_key = measure.key(before)
        for word in after_words:
            after_key = measure.key(word)
            if not after_key < before_key:
                raise MeasureViolation(rule.name, format_word(before), before_key, after_key)

    def normalize(self, element):
        result = {}
        for word, coeff in element.items():
            if self._dropped(word):
                continue
            for w, c in self.normalize_word(word).items():
                total = result.get(w)
                total = c * coeff if total is None else total + c * coeff
                if total:
                    result[w] = total
                else:
                    result.pop(w, None)
        return Element._raw(result)

    def normalize_word(self, word):
        if self.mode == "append":
            return self._normalize_append(word)
        return self._normalize_generic(word)

    # append strategy

    def _normalize_append(self, word):
        memo = self._prefix_memo
        start, letters = word.start, word.letters
        known = len(letters)
        while known and Word(start, letters[:known]) not in memo:
            known -= 1
        current = memo[Word(start, letters[:known])] if known else {Word(start, ()): ONE}
        for index in range(known, len(letters)):
            letter = letters[index]
            following = {}
            for prefix, coeff in current.items():
                for w, c in self._append(prefix, letter).items():
                    total = following.get(w)
                    total = c * coeff if total is None else total + c * coeff
                    if total:
                        following[w] = total
                    else:
                        following.pop(w, None)
            current = following
            memo[Word(start, letters[:index + 1])] = current
        return current

    def _append(self, prefix, letter):
        key = (prefix, letter)
        cached = self._append_memo.get(key)
        if cached is not None:
            return cached
        memo = self._append_memo
        stack = [(key, self._append_task(prefix, letter))]
        value = None
        while stack:
            task_key, task = stack[-1]
            try:
                request = task.send(value)
            except StopIteration as done:
                memo[task_key] = done.value
                stack.pop()
                value = done.value
                continue
            cached = memo.get(request)
            if cached is not None:
                value = cached
            else:
                stack.append((request, self._append_task(*request)))
                value = None
        return memo[key]

    def _append_task(self, prefix, letter):
        candidate = Word(prefix.start, prefix.letters + (letter,))
        if self._dropped(candidate):
            return {}
        rule = self.system.suffix_match(candidate)
        if rule is None:
            return {candidate: ONE}
        self.applications += 1
        position = len(candidate.letters) - len(rule.pattern)
        head = prefix.letters[:position]
        if self.check_measure:
            self._check(rule, candidate, [Word(prefix.start, head + rhs.letters) for rhs in rule.replacement.words()])
        result = {}
        for rhs, coeff in rule.replacement.items():
            if self._dropped(rhs):
                continue
            current = {Word(prefix.start, head): coeff}
            for next_letter in rhs.letters:
                following = {}
                for word, c in current.items():
                    sub = yield (word, next_letter)
                    for w, c2 in sub.items():
                        total = following.get(w)
                        total = c2 * c if total is None else total + c2 * c
                        if total:
                            following[w] = total
                        else:
                            following.pop(w, None)
                current = following
            for w, c in current.items():
                total = result.get(w)
                total = c if total is None else total + c
                if total:
                    result[w] = total
                else:
                    result.pop(w, None)
        return result

    # whole-word strategies

    def _choose(self, matches):
        if self.mode == "leftmost":
            return min(matches, key=lambda m: (m[0], m[1].order))
        if self.mode == "rightmost":
            return max(matches, key=lambda m: (m[0], -m[1].order))
        return matches[self.rng.randrange(len(matches))]

    def _step(self, word):
        step = self._steps.get(word)
        if step is None:
            matches = self.system.matches(word)
            if not matches:
                step = False
            else:
                position, rule = self._choose(matches)
                self.applications += 1
                step = self.system.apply(word, position, rule)
                if self.check_measure:
                    self._check(rule, word, list(step.words()))
                step = {w: c for w, c in step.items() if not self._dropped(w)}
            self._steps[word] = step
        return step

    def _normalize_generic(self, word):
        memo = self._word_memo
        if word in memo:
            return memo[word]
        stack = [word]
        while stack:
            top = stack[-1]
            if top in memo:
                stack.pop()
                continue
            step = self._step(top)
            if step is False:
                memo[top] = {top: ONE}
                stack.pop()
                continue
            pending = [w for w in step if w not in memo]
            if pending:
                stack.extend(pending)
                continue
            result = {}
            for w, coeff in step.items():
                for w2, c2 in memo[w].items():
                    total = result.get(w2)
                    total = c2 * coeff if total is None else total + c2 * coeff
                    if total:
                        result[w2] = total
                    else:
                        result.pop(w2, None)
            memo[top] = result
            stack.pop()
        return memo[word]


def normalize(element, system, strategy="leftmost", lambda_level=False):
    return system.normalize(element, strategy=strategy, lambda_level=lambda_level)


def _check_step(measure, rule, before, after_words):
    before_key = measure.key(before)
    for word in after_words:
        after_key = measure.key(word)
        if not after_key < before_key:
            raise MeasureViolation(rule.name, format_word(before), before_key, after_key)


def reduce_stepwise(system, element, lambda_level=False, max_steps=100000, check_measure=True):
    """Reduce by parallel steps: every reducible word is rewritten once at its leftmost match.

    Returns ``(final_element, transcript)`` with transcript entries
    ``(rule_names, element_after_step)``, the names joined by commas in word order.
    """
    transcript = []
    dropped = system.lambda_kinds if lambda_level else frozenset()

    def keep(word):
        return not dropped or not any(l.kind in dropped for l in word.letters)

    current = Element({w: c for w, c in element.items() if keep(w)})
    irreducible = set()
    for _ in range(max_steps):
        result = {}
        applied = []
        for word, coeff in current.items():
            matches = () if word in irreducible else system.matches(word)
            if not matches:
                irreducible.add(word)
                pieces = ((word, coeff),)
            else:
                position, rule = min(matches, key=lambda m: (m[0], m[1].order))
                applied.append((word.sort_key(), rule.name))
                step = system.apply(word, position, rule)
                if check_measure:
                    _check_step(system.measure, rule, word, step.words())
                pieces = [(w, c * coeff) for w, c in step.items()]
            for w, c in pieces:
                if not keep(w):
                    continue
                total = result.get(w)
                total = c if total is None else total + c
                if total:
                    result[w] = total
                else:
                    result.pop(w, None)
        if not applied:
            return current, transcript
        current = Element._raw(result)
        names = []
        for _, name in sorted(applied):
            if name not in names:
                names.append(name)
        transcript.append((",".join(names), current))
    raise RuntimeError("stepwise reduction did not terminate within the step limit")


@dataclass
class Ambiguity:
    word: Word
    first: Rule
    second: Rule
    offset: int
    kind: str
    family: str

    def key(self):
        return (self.family, self.word.sort_key(), self.first.name, self.second.name)


def ambiguities(system):
    """Overlap and inclusion ambiguities between ground patterns, guards respected."""
    found = []
    seen = set()
    for first in system.rules:
        p1 = first.pattern
        for cut in range(1, len(p1)):
            overlap = p1[cut:]
            for second in system._by_prefix.get(overlap, ()):
                if len(second.pattern) <= len(overlap):
                    continue
                word = Word(p1[0].source, p1 + second.pattern[len(overlap):])
                previous = word.letters[cut - 1]
                if not second.guard_allows(previous):
                    continue
                key = (word, first.name, second.name, cut)
                if key not in seen:
                    seen.add(key)
                    found.append(Ambiguity(word, first, second, cut, "overlap", system.family_label(first, second)))
        for start in range(len(p1)):
            for length in range(1, len(p1) - start + 1):
                if start == 0 and length == len(p1):
                    continue
                second = system.index.get(p1[start:start + length])
                if second is None:
                    continue
                previous = p1[start - 1] if start else None
                if not second.guard_allows(previous):
                    continue
                word = Word(p1[0].source, p1)
                key = (word, first.name, second.name, start)
                if key not in seen:
                    seen.add(key)
                    found.append(Ambiguity(word, first, second, start, "inclusion", system.family_label(first, second)))
    found.sort(key=Ambiguity.key)
    return found


@dataclass
class AmbiguityResult:
    ambiguity: Ambiguity
    left: Element
    right: Element
    left_transcript: list = field(default_factory=list)
    right_transcript: list = field(default_factory=list)

    @property
    def resolved(self):
        return self.left == self.right

    def to_json(self):
        return {
            "word": format_word(self.ambiguity.word),
            "family": self.ambiguity.family,
            "kind": self.ambiguity.kind,
            "rules": [self.ambiguity.first.name, self.ambiguity.second.name],
            "left": format_element(self.left),
            "right": format_element(self.right),
            "left_transcript": [{"rule": name, "element": format_element(e)} for name, e in self.left_transcript],
            "right_transcript": [{"rule": name, "element": format_element(e)} for name, e in self.right_transcript],
            "resolved": self.resolved,
        }


@dataclass
class ConfluenceReport:
    system: str
    results: list

    @property
    def verdict(self):
        return all(result.resolved for result in self.results)

    def families(self):
        return sorted({result.ambiguity.family for result in self.results})

    def failures(self):
        return [result for result in self.results if not result.resolved]

    def family_counts(self):
        counts = {}
        for result in self.results:
            counts[result.ambiguity.family] = counts.get(result.ambiguity.family, 0) + 1
        return counts

    def to_json(self):
        return {
            "system": self.system,
            "ambiguity_count": len(self.results),
            "families": self.family_counts(),
            "verdict": self.verdict,
            "ambiguities": [result.to_json() for result in self.results],
        }


def check_confluence(system, transcripts=True, strict=False):
    """Resolve every ambiguity both ways; ``strict`` raises on the first failure."""
    normalizer = system.normalizer("leftmost")
    results = []
    for ambiguity in ambiguities(system):
        start = system.apply(ambiguity.word, 0, ambiguity.first)
        other = system.apply(ambiguity.word, ambiguity.offset, ambiguity.second)
        if transcripts:
            left, left_steps = reduce_stepwise(system, start)
            right, right_steps = reduce_stepwise(system, other)
            left_steps.insert(0, (ambiguity.first.name, start))
            right_steps.insert(0, (ambiguity.second.name, other))
        else:
            left, right = normalizer.normalize(start), normalizer.normalize(other)
            left_steps, right_steps = [], []
        result = AmbiguityResult(ambiguity, left, right, left_steps, right_steps)
        if strict and not result.resolved:
            raise ConfluenceFailure(
                f"ambiguity {format_word(ambiguity.word)} ({ambiguity.family}) does not resolve: "
                f"{format_element(left)} != {format_element(right)}"
            )
        results.append(result)
    return ConfluenceReport(system.name, results)


__all__ = [
    "Ambiguity",
    "AmbiguityResult",
    "ConfluenceReport",
    "Measure",
    "Normalizer",
    "ReductionSystem",
    "Rule",
    "ZERO_ELEMENT",
    "ambiguities",
    "check_confluence",
    "measure_value",
    "normalize",
    "reduce_stepwise",
]
