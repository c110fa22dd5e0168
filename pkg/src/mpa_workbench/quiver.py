"""Quivers, doubling, arrow orders, spanning forests and cycle decompositions.

Doubled arrows are named by strings: a base arrow keeps its id and its
reverse is the id with a trailing ``*``.
"""

from collections import deque
from dataclasses import dataclass, field
import json
import re

from .errors import (
    Disconnected,
    EmptyWhite,
    InvalidOrder,
    NoCycle,
    ParseError,
    ValidationError,
)
from .scalar import LaurentScalar, parse_scalar

STAR = "*"
FLIP = "~"
_ID_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_~]*$")
RESERVED_IDS = {"x", "xinv", "xbar", "xbarinv", "y", "yinv", "r", "a", "astar"}


def star(arrow_id):
    """The reverse of a doubled arrow."""
    return arrow_id[:-1] if arrow_id.endswith(STAR) else arrow_id + STAR


def base_id(arrow_id):
    return arrow_id[:-1] if arrow_id.endswith(STAR) else arrow_id


def is_star(arrow_id):
    return arrow_id.endswith(STAR)


@dataclass(frozen=True)
class Arrow:
    id: str
    tail: int
    head: int


@dataclass(frozen=True)
class Quiver:
    vertices: tuple
    arrows: tuple
    _by_id: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arrows", tuple(self.arrows))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("duplicate vertex ids")
        for vertex in self.vertices:
            if not isinstance(vertex, int) or isinstance(vertex, bool) or vertex < 0:
                raise ValidationError(f"vertex ids must be nonnegative integers, got {vertex!r}")
        by_id = {}
        vertex_set = set(self.vertices)
        for arrow in self.arrows:
            if not _ID_PATTERN.match(arrow.id) or arrow.id in RESERVED_IDS:
                raise ValidationError(f"invalid arrow id {arrow.id!r}")
            if arrow.id in by_id:
                raise ValidationError(f"duplicate arrow id {arrow.id!r}")
            if arrow.tail not in vertex_set or arrow.head not in vertex_set:
                raise ValidationError(f"arrow {arrow.id!r} refers to a missing vertex")
            by_id[arrow.id] = arrow
        object.__setattr__(self, "_by_id", by_id)

    def arrow(self, arrow_id):
        return self._by_id[arrow_id]

    def has_arrow(self, arrow_id):
        return arrow_id in self._by_id

    @property
    def arrow_ids(self):
        return tuple(arrow.id for arrow in self.arrows)

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "arrows": [{"id": a.id, "tail": a.tail, "head": a.head} for a in self.arrows],
        }

    def is_connected(self):
        if not self.vertices:
            return True
        neighbours = {v: set() for v in self.vertices}
        for arrow in self.arrows:
            neighbours[arrow.tail].add(arrow.head)
            neighbours[arrow.head].add(arrow.tail)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for other in neighbours[stack.pop()]:
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        return len(seen) == len(self.vertices)


def make_quiver(vertices, arrows):
    """Convenience constructor from ``(id, tail, head)`` triples."""
    return Quiver(tuple(vertices), tuple(Arrow(*spec) for spec in arrows))


class DoubledQuiver:
    """A quiver together with its reverse arrows and a total order on all of them."""

    def __init__(self, base, order):
        self.base = base
        self.order = tuple(order)
        self.position = {arrow_id: index for index, arrow_id in enumerate(self.order)}
        self._tail = {}
        self._head = {}
        for arrow in base.arrows:
            self._tail[arrow.id] = arrow.tail
            self._head[arrow.id] = arrow.head
            self._tail[arrow.id + STAR] = arrow.head
            self._head[arrow.id + STAR] = arrow.tail
        self._at_tail = {v: [] for v in base.vertices}
        for arrow_id in self.order:
            self._at_tail[self._tail[arrow_id]].append(arrow_id)
        self._at_tail = {v: tuple(ids) for v, ids in self._at_tail.items()}

    @property
    def vertices(self):
        return self.base.vertices

    @property
    def arrows(self):
        return self.order

    def tail(self, arrow_id):
        return self._tail[arrow_id]

    def head(self, arrow_id):
        return self._head[arrow_id]

    def star(self, arrow_id):
        return star(arrow_id)

    def epsilon(self, arrow_id):
        if arrow_id not in self._tail:
            raise KeyError(arrow_id)
        return -1 if is_star(arrow_id) else 1

    def arrows_at_tail(self, vertex):
        """Doubled arrows starting at ``vertex``, in the total order."""
        return self._at_tail[vertex]

    def with_order(self, order):
        return build_doubled(self.base, order)

    def reversed(self):
        return DoubledQuiver(self.base, tuple(reversed(self.order)))

    def __repr__(self):
        return f"DoubledQuiver(order={list(self.order)})"


def default_order(quiver):
    """Base arrows in input order followed by their reverses in the same order.

    For a cycle listed along its orientation this is the convention
    a_i < a_{i+1} < a_j* < a_{j+1}*.
    """
    ids = quiver.arrow_ids
    return ids + tuple(arrow_id + STAR for arrow_id in ids)


def build_doubled(quiver, arrow_order=None):
    if arrow_order is None:
        return DoubledQuiver(quiver, default_order(quiver))
    arrow_order = tuple(arrow_order)
    expected = set(default_order(quiver))
    if len(arrow_order) != len(expected) or set(arrow_order) != expected:
        raise InvalidOrder("arrow order is not a permutation of the doubled arrows")
    return DoubledQuiver(quiver, arrow_order)


@dataclass(frozen=True)
class Forest:
    """Spanning forest of a doubled quiver, arrows pointing toward white roots."""

    arrows: tuple
    roots: tuple
    parent: dict

    def contains(self, arrow_id):
        return arrow_id in self.arrows

    def depth(self, dq, vertex):
        steps = 0
        while vertex in self.parent:
            vertex = dq.head(self.parent[vertex])
            steps += 1
        return steps


def spanning_forest(dq, white):
    """Breadth-first forest grown from the white set with smallest-id tie-breaking."""
    white = sorted(set(white))
    if not white:
        raise EmptyWhite("the white vertex set is empty")
    for vertex in white:
        if vertex not in dq.position and vertex not in set(dq.vertices):
            raise ValidationError(f"white vertex {vertex} is not a vertex")
    arrow_rank = {}
    for index, arrow in enumerate(dq.base.arrows):
        arrow_rank[arrow.id] = (index, 0)
        arrow_rank[arrow.id + STAR] = (index, 1)
    incoming = {v: [] for v in dq.vertices}
    for arrow_id in dq.order:
        tail, head = dq.tail(arrow_id), dq.head(arrow_id)
        if tail != head:
            incoming[head].append(arrow_id)
    for vertex in incoming:
        incoming[vertex].sort(key=lambda d: (dq.tail(d), arrow_rank[d]))
    seen = set(white)
    parent = {}
    order = []
    queue = deque(white)
    while queue:
        vertex = queue.popleft()
        for arrow_id in incoming[vertex]:
            child = dq.tail(arrow_id)
            if child not in seen:
                seen.add(child)
                parent[child] = arrow_id
                order.append(arrow_id)
                queue.append(child)
    if len(seen) != len(dq.vertices):
        missing = sorted(set(dq.vertices) - seen)
        raise Disconnected(f"vertices {missing} are unreachable from the white set")
    return Forest(tuple(order), tuple(white), dict(parent))


def validate_forest(dq, white, forest):
    """Independent structural check of a forest; returns a list of problems."""
    problems = []
    white = set(white)
    if set(forest.roots) != white:
        problems.append("roots differ from the white set")
    if len(forest.arrows) != len(dq.vertices) - len(white):
        problems.append("arrow count differs from the number of black vertices")
    seen_tails = set()
    for arrow_id in forest.arrows:
        tail = dq.tail(arrow_id)
        if tail in white:
            problems.append(f"forest arrow {arrow_id} leaves a white vertex")
        if tail in seen_tails:
            problems.append(f"two forest arrows leave vertex {tail}")
        seen_tails.add(tail)
    heads = {dq.tail(a): dq.head(a) for a in forest.arrows}
    for vertex in dq.vertices:
        steps = 0
        current = vertex
        while current in heads and steps <= len(dq.vertices):
            current = heads[current]
            steps += 1
        if current not in white:
            problems.append(f"vertex {vertex} does not reach a white root")
    return problems


@dataclass(frozen=True)
class CycleDecomposition:
    """An unoriented cycle and the remaining arrows.

    ``vertices[i]`` and ``vertices[i+1]`` (cyclically) are joined by
    ``arrows[i]``; ``forward[i]`` tells whether that arrow points from
    ``vertices[i]`` to ``vertices[i+1]``.
    """

    vertices: tuple
    arrows: tuple
    forward: tuple
    complement: tuple

    @property
    def white(self):
        return tuple(sorted(self.vertices))

    def reversed(self):
        """The same cycle traversed in the opposite direction."""
        count = len(self.vertices)
        vertices = (self.vertices[0],) + tuple(reversed(self.vertices[1:]))
        arrows = tuple(self.arrows[(-i - 1) % count] for i in range(count))
        forward = tuple(not self.forward[(-i - 1) % count] for i in range(count))
        if count == 1:
            forward = (not self.forward[0],)
        return CycleDecomposition(vertices, arrows, forward, self.complement)


def split_cycle(quiver):
    """Find one unoriented cycle by depth-first search from the smallest vertex."""
    if not quiver.vertices:
        raise NoCycle("empty quiver")
    if not quiver.is_connected():
        raise Disconnected("quiver is not connected")
    index = {arrow.id: i for i, arrow in enumerate(quiver.arrows)}
    edges = {v: [] for v in quiver.vertices}
    for arrow in quiver.arrows:
        edges[arrow.tail].append((arrow.head, index[arrow.id], arrow.id))
        if arrow.tail != arrow.head:
            edges[arrow.head].append((arrow.tail, index[arrow.id], arrow.id))
    for vertex in edges:
        edges[vertex].sort()
    start = min(quiver.vertices)
    depth = {start: 0}
    via = {start: None}
    parent = {start: None}
    stack = [(start, iter(edges[start]))]
    while stack:
        vertex, iterator = stack[-1]
        advanced = False
        for other, _, arrow_id in iterator:
            if arrow_id == via[vertex]:
                continue
            if other in depth:
                if depth[other] <= depth[vertex]:
                    return _close_cycle(quiver, vertex, other, arrow_id, parent, via)
                continue
            depth[other] = depth[vertex] + 1
            via[other] = arrow_id
            parent[other] = vertex
            stack.append((other, iter(edges[other])))
            advanced = True
            break
        if not advanced:
            stack.pop()
    raise NoCycle("quiver is a tree")


def _close_cycle(quiver, vertex, ancestor, closing_arrow, parent, via):
    path = [vertex]
    arrows = []
    current = vertex
    while current != ancestor:
        arrows.append(via[current])
        current = parent[current]
        path.append(current)
    path.reverse()
    arrows.reverse()
    arrows.append(closing_arrow)
    vertices = tuple(path)
    count = len(vertices)
    forward = []
    for i, arrow_id in enumerate(arrows):
        arrow = quiver.arrow(arrow_id)
        forward.append(arrow.tail == vertices[i] and arrow.head == vertices[(i + 1) % count])
    used = set(arrows)
    complement = tuple(a.id for a in quiver.arrows if a.id not in used)
    return CycleDecomposition(vertices, tuple(arrows), tuple(forward), complement)


class Reorientation:
    """Flip a set of base arrows; b becomes ``b~`` with the opposite direction.

    The algebra isomorphism sends b* to b~, b to -x_{b~*}^{-1} b~* and
    x_b^{s} to x_{b~*}^{-s}; factor positions in the order move with it, so
    the preprojective product is preserved factor by factor.
    """

    def __init__(self, dq, flipped):
        self.source = dq
        self.flipped = frozenset(flipped)
        for arrow_id in self.flipped:
            if is_star(arrow_id) or not dq.base.has_arrow(arrow_id):
                raise ValidationError(f"cannot flip {arrow_id!r}")
        self.rename = {}
        arrows = []
        for arrow in dq.base.arrows:
            if arrow.id in self.flipped:
                new_id = arrow.id + FLIP
                if dq.base.has_arrow(new_id):
                    raise ValidationError(f"arrow id {new_id!r} already exists")
                arrows.append(Arrow(new_id, arrow.head, arrow.tail))
                self.rename[arrow.id] = new_id + STAR
                self.rename[arrow.id + STAR] = new_id
            else:
                arrows.append(arrow)
                self.rename[arrow.id] = arrow.id
                self.rename[arrow.id + STAR] = arrow.id + STAR
        self.inverse_rename = {new: old for old, new in self.rename.items()}
        target = Quiver(dq.base.vertices, tuple(arrows))
        self.target = DoubledQuiver(target, tuple(self.rename[a] for a in dq.order))

    def image_id(self, arrow_id):
        return self.rename[arrow_id]

    def is_flipped(self, arrow_id):
        return base_id(arrow_id) in self.flipped


def quiver_from_dict(data):
    """Validated quiver, white set (or None) and q assignment from parsed JSON."""
    if not isinstance(data, dict):
        raise ValidationError("quiver file must contain a JSON object")
    try:
        vertices = data["vertices"]
        arrow_specs = data.get("arrows", [])
        arrows = tuple(Arrow(str(a["id"]), a["tail"], a["head"]) for a in arrow_specs)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed quiver description: {exc}") from exc
    quiver = Quiver(tuple(vertices), arrows)
    white = data.get("white")
    if white is not None:
        white = tuple(white)
        for vertex in white:
            if vertex not in set(quiver.vertices):
                raise ValidationError(f"white vertex {vertex!r} is not a vertex")
    qvalues = {}
    for key, value in (data.get("q") or {}).items():
        try:
            vertex = int(key)
        except ValueError as exc:
            raise ValidationError(f"q key {key!r} is not a vertex id") from exc
        if vertex not in set(quiver.vertices):
            raise ValidationError(f"q refers to missing vertex {vertex}")
        scalar = parse_scalar(str(value))
        if not scalar.is_constant():
            raise ValidationError(f"q value for vertex {vertex} is not a rational number")
        if scalar.constant_value() == 0:
            raise ValidationError(f"q value for vertex {vertex} is zero")
        qvalues[vertex] = scalar.constant_value()
    return quiver, white, qvalues


def parse_quiver(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", exc.pos) from exc
    return quiver_from_dict(data)


def symbolic_q(vertex):
    return LaurentScalar.q(vertex)
