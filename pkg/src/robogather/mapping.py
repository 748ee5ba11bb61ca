"""Map construction with a movable token.

A finder explores an anonymous graph while its helpers serve as a token it
can leave on a node and later recognise.  The finder keeps a
:class:`PartialMap` and repeatedly resolves the smallest unresolved port
``(u, p)``:

1. escort the token to ``u`` along known edges;
2. cross ``p`` with the token, note the arrival port ``q`` and the degree of
   the endpoint ``w``, leave the token there and return through ``q``;
3. tour every known node looking for the token.  If it sits on known node
   ``x`` then ``w = x``: record ``(u, p) <-> (x, q)`` and pick the token up
   there.  Otherwise ``w`` is new: cross ``p`` again, add ``w`` to the map and
   pick the token up.

When nothing is unresolved the finder escorts the token back home.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import IncompleteMap, SimulationError
from .graph import PortGraph, validate_graph
from .schedule import map_round_budget

__all__ = [
    "PartialMap",
    "map_round_budget",
    "spanning_tree_tour",
    "map_explorer",
]


@dataclass
class PartialMap:
    """Finder's knowledge: ``tables[u][p]`` is ``(x, q)`` once resolved, else None."""

    degrees: list[int] = field(default_factory=list)
    tables: list[list] = field(default_factory=list)
    paths: list[tuple[int, ...]] = field(default_factory=list)
    origin: int = 0

    def add_node(self, degree: int, path: tuple[int, ...]) -> int:
        self.degrees.append(degree)
        self.tables.append([None] * degree)
        self.paths.append(tuple(path))
        return len(self.degrees) - 1

    @property
    def size(self) -> int:
        return len(self.degrees)

    def resolve(self, u: int, p: int, x: int, q: int) -> None:
        if self.tables[u][p] is not None or self.tables[x][q] is not None:
            raise SimulationError(f"map conflict resolving ({u},{p}) <-> ({x},{q})")
        if u == x:
            raise SimulationError("map would contain a self-loop")
        self.tables[u][p] = (x, q)
        self.tables[x][q] = (u, p)

    def frontier(self) -> tuple[int, int] | None:
        """Smallest unresolved ``(node, port)`` in lexicographic order."""
        for u, table in enumerate(self.tables):
            for p, entry in enumerate(table):
                if entry is None:
                    return u, p
        return None

    @property
    def complete(self) -> bool:
        return self.frontier() is None

    @property
    def entry_count(self) -> int:
        return sum(entry is not None for table in self.tables for entry in table)

    def route(self, a: int, b: int) -> list[int]:
        """Ports of a shortest known path from ``a`` to ``b`` (lowest ports first)."""
        if a == b:
            return []
        back = {a: None}
        queue = deque([a])
        while queue:
            v = queue.popleft()
            for p, entry in enumerate(self.tables[v]):
                if entry is None or entry[0] in back:
                    continue
                back[entry[0]] = (v, p)
                if entry[0] == b:
                    out = []
                    cur = b
                    while back[cur] is not None:
                        prev, port = back[cur]
                        out.append(port)
                        cur = prev
                    return out[::-1]
                queue.append(entry[0])
        raise SimulationError(f"no known path from {a} to {b}")

    def tour(self, root: int) -> list[tuple[int, int]]:
        """Depth-first walk over resolved edges that visits every known node and
        returns to ``root``; lowest port first.  Items are ``(port, node reached)``."""
        seen = {root}
        out: list[tuple[int, int]] = []

        def visit(v):
            for p, entry in enumerate(self.tables[v]):
                if entry is None or entry[0] in seen:
                    continue
                x, q = entry
                seen.add(x)
                out.append((p, x))
                visit(x)
                out.append((q, v))

        visit(root)
        return out

    def to_port_graph(self) -> PortGraph:
        if not self.complete:
            raise IncompleteMap("map still has unresolved ports")
        return validate_graph([list(t) for t in self.tables])


def spanning_tree_tour(pm: PartialMap, root: int | None = None) -> list[int]:
    """Ports of the lowest-port-first depth-first traversal of a spanning tree
    of a complete map, from ``root`` (default: the map origin) back to it."""
    if not pm.complete:
        raise IncompleteMap("the tour needs a complete map")
    return [p for p, _ in pm.tour(pm.origin if root is None else root)]


def map_explorer(first_view, token_here):
    """Coroutine driving a finder through map construction.

    Prime it with ``next()`` after creating it with the view of the round in
    which exploration starts; afterwards ``send`` the view of each following
    round.  It yields ``(port, with_token)`` pairs and finally returns the
    finished :class:`PartialMap` (via ``StopIteration.value``).  ``token_here``
    tells whether the finder's token is at its node in a given view.
    """
    pm = PartialMap()
    pm.add_node(first_view.degree, ())
    cur = 0
    view = first_view
    while True:
        nxt = pm.frontier()
        if nxt is None:
            break
        u, p = nxt
        for port in pm.route(cur, u):
            view = yield port, True
        view = yield p, True
        w_degree, q = view.degree, view.arrival_port
        view = yield q, False
        found = None
        for port, node in pm.tour(u):
            view = yield port, False
            if token_here(view):
                found = node
                break
        if found is not None:
            pm.resolve(u, p, found, q)
            cur = found
        else:
            view = yield p, False
            w = pm.add_node(w_degree, pm.paths[u] + (p,))
            pm.resolve(u, p, w, q)
            cur = w
    for port in pm.route(cur, pm.origin):
        view = yield port, True
    return pm
