"""Standard quivers used by the CLI, the tests and the acceptance suite."""

import random

from .quiver import Arrow, Quiver, make_quiver


def cycle_quiver(vertex_count):
    """Oriented cycle on ``vertex_count`` vertices; one vertex gives the loop (Jordan) quiver."""
    if vertex_count < 1:
        raise ValueError("a cycle needs at least one vertex")
    return make_quiver(
        range(vertex_count),
        [(f"a{i}", i, (i + 1) % vertex_count) for i in range(vertex_count)],
    )


def jordan_quiver():
    return cycle_quiver(1)


def jordan_plus_pendant():
    return make_quiver([0, 1], [("a0", 0, 0), ("b0", 0, 1)])


def cycle_plus_pendant(vertex_count=3):
    """Oriented cycle with one extra vertex hanging off vertex 0."""
    arrows = [(f"a{i}", i, (i + 1) % vertex_count) for i in range(vertex_count)]
    arrows.append(("b0", 0, vertex_count))
    return make_quiver(range(vertex_count + 1), arrows)


def a2_plus_pendant():
    return cycle_plus_pendant(3)


def figure_two_quiver():
    """Triangle of white vertices 0, 1, 2 with black vertices 3, 4, 5 attached."""
    return make_quiver(
        range(6),
        [
            ("c0", 0, 1),
            ("c1", 1, 2),
            ("c2", 2, 0),
            ("d0", 0, 2),
            ("d1", 0, 3),
            ("d2", 1, 4),
            ("d3", 4, 1),
            ("f0", 3, 5),
            ("f1", 4, 5),
        ],
    )


FIGURE_TWO_WHITE = (0, 1, 2)


def affine_a_quiver(n):
    """Cycle on vertices 0..n with a_i: i -> i+1 for i < n and a_n: 0 -> n."""
    arrows = [(f"a{i}", i, i + 1) for i in range(n)]
    arrows.append((f"a{n}", 0, n))
    return make_quiver(range(n + 1), arrows)


def random_connected_quiver(rng, max_vertices=6, extra_arrows=3, require_cycle=False, allow_loops=True):
    """Random connected quiver: a random spanning tree plus a few extra arrows."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    count = rng.randint(2, max_vertices)
    arrows = []
    for vertex in range(1, count):
        other = rng.randrange(vertex)
        tail, head = (vertex, other) if rng.random() < 0.5 else (other, vertex)
        arrows.append((tail, head))
    extra = rng.randint(1 if require_cycle else 0, extra_arrows)
    for _ in range(extra):
        tail = rng.randrange(count)
        head = rng.randrange(count)
        if tail == head and not allow_loops:
            continue
        arrows.append((tail, head))
    if require_cycle and len(arrows) < count:
        arrows.append((0, count - 1) if count > 1 else (0, 0))
    return Quiver(
        tuple(range(count)),
        tuple(Arrow(f"b{i}", tail, head) for i, (tail, head) in enumerate(arrows)),
    )
