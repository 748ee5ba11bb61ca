"""Exhaustive enumeration of small connected graphs and isomorphism tests.

Underlying-graph canonical forms come from a plain individualization-refinement
search over adjacency bitmasks.  Twins inside a cell are interchangeable, so only
one representative per twin class is individualized; that keeps complete and
complete-bipartite graphs cheap.  No other automorphism pruning is done, which
is fine for the n <= 8 scope.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator
from functools import lru_cache

from .errors import ScopeTooLarge
from .graph import PortGraph, from_edges, validate_graph

MAX_STRUCTURE_N = 8
MAX_LABELING_N = 4


def _refine(masks: tuple[int, ...], cells: list[list[int]]) -> list[list[int]]:
    while True:
        cell_masks = [sum(1 << v for v in cell) for cell in cells]
        out = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            sig = {
                v: tuple(bin(masks[v] & cm).count("1") for cm in cell_masks) for v in cell
            }
            keys = sorted(set(sig.values()))
            if len(keys) == 1:
                out.append(cell)
                continue
            changed = True
            for key in keys:
                out.append([v for v in cell if sig[v] == key])
        cells = out
        if not changed:
            return cells


def _code(masks: tuple[int, ...], order: list[int]) -> int:
    pos = {v: i for i, v in enumerate(order)}
    code = 0
    n = len(order)
    for i, v in enumerate(order):
        m = masks[v]
        for j in range(i + 1, n):
            if m >> order[j] & 1:
                code |= 1 << (i * n + j)
    return code


def canonical_form(masks: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Return ``(code, order)``: the maximal adjacency code over the search
    tree, and one vertex order realizing it (``order[i]`` is the original
    vertex placed at canonical position ``i``)."""
    n = len(masks)
    best = [-1, None]

    def search(cells):
        cells = _refine(masks, cells)
        target = None
        for idx, cell in enumerate(cells):
            if len(cell) > 1 and (target is None or len(cell) < len(cells[target])):
                target = idx
        if target is None:
            order = [cell[0] for cell in cells]
            code = _code(masks, order)
            if code > best[0]:
                best[0], best[1] = code, tuple(order)
            return
        cell = cells[target]
        tried = []
        for v in cell:
            if any(_twins(masks, v, w) for w in tried):
                continue
            tried.append(v)
            rest = [w for w in cell if w != v]
            search(cells[:target] + [[v], rest] + cells[target + 1 :])

    search([list(range(n))])
    return best[0], best[1]


def _twins(masks, a, b) -> bool:
    clear = ~((1 << a) | (1 << b))
    return masks[a] & clear == masks[b] & clear


def underlying_code(g: PortGraph) -> tuple[int, int]:
    return g.n, canonical_form(g.adjacency_masks)[0]


def _port_bijection(g1: PortGraph, g2: PortGraph, start: int) -> bool:
    image = {0: start}
    stack = [0]
    while stack:
        v = stack.pop()
        w = image[v]
        if g1.degree(v) != g2.degree(w):
            return False
        for p, (u, q) in enumerate(g1.ports[v]):
            x, r = g2.ports[w][p]
            if q != r:
                return False
            if u in image:
                if image[u] != x:
                    return False
            else:
                image[u] = x
                stack.append(u)
    return len(set(image.values())) == g1.n


def are_isomorphic(g1: PortGraph, g2: PortGraph, mode: str = "underlying") -> bool:
    """Isomorphism test ignoring ports (``underlying``) or preserving every
    port table (``port-preserving``)."""
    if g1.n != g2.n or g1.m != g2.m or sorted(g1.degrees) != sorted(g2.degrees):
        return False
    if mode == "underlying":
        return underlying_code(g1) == underlying_code(g2)
    if mode == "port-preserving":
        # connected graphs: the image of node 0 pins down the whole bijection
        return any(_port_bijection(g1, g2, s) for s in range(g2.n))
    raise ValueError(f"unknown isomorphism mode {mode!r}")


def _graph_from_code(n: int, code: int) -> PortGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if code >> (i * n + j) & 1]
    return from_edges(n, edges)


@lru_cache(maxsize=None)
def _structure_codes(n: int) -> tuple[int, ...]:
    """Canonical codes of connected graphs on ``n`` nodes, grown one vertex at a
    time: every connected graph has a non-cut vertex, so attaching a new vertex
    to each nonempty subset of each (n-1)-graph reaches all of them."""
    if n == 1:
        return (0,)
    found = set()
    for code in _structure_codes(n - 1):
        k = n - 1
        base = [0] * n
        for i in range(k):
            for j in range(i + 1, k):
                if code >> (i * k + j) & 1:
                    base[i] |= 1 << j
                    base[j] |= 1 << i
        for subset in range(1, 1 << k):
            masks = list(base)
            masks[k] = subset
            for i in range(k):
                if subset >> i & 1:
                    masks[i] |= 1 << k
            found.add(canonical_form(tuple(masks))[0])
    return tuple(sorted(found, key=lambda c: (bin(c).count("1"), c)))


def _labelings(g: PortGraph) -> Iterator[PortGraph]:
    nbrs = [sorted(g.neighbors(v)) for v in range(g.n)]
    for choice in itertools.product(*(itertools.permutations(x) for x in nbrs)):
        index = [{u: p for p, u in enumerate(order)} for order in choice]
        yield validate_graph(
            [[(u, index[u][v]) for u in order] for v, order in enumerate(choice)]
        )


def enumerate_connected(n: int, mode: str = "structures") -> Iterator[PortGraph]:
    """Every connected simple graph on ``n`` nodes up to isomorphism, each with
    its canonical port labeling (``structures``), or every port labeling of every
    structure (``structures-with-all-port-labelings``)."""
    if n < 1:
        raise ValueError("n must be positive")
    if mode == "structures":
        if n > MAX_STRUCTURE_N:
            raise ScopeTooLarge(f"structure enumeration supports n <= {MAX_STRUCTURE_N}")
        for code in _structure_codes(n):
            yield _graph_from_code(n, code)
    elif mode == "structures-with-all-port-labelings":
        if n > MAX_LABELING_N:
            raise ScopeTooLarge(f"all-labelings enumeration supports n <= {MAX_LABELING_N}")
        for code in _structure_codes(n):
            yield from _labelings(_graph_from_code(n, code))
    else:
        raise ValueError(f"unknown enumeration mode {mode!r}")


def labeling_count(g: PortGraph) -> int:
    return math.prod(math.factorial(d) for d in g.degrees)
