"""Anonymous port-labeled graphs.

A :class:`PortGraph` stores, for every node ``v``, a port table whose entry
``p`` is the pair ``(u, q)``: leaving ``v`` through port ``p`` arrives at ``u``
through port ``q``.  Nodes are numbered ``0..n-1`` for bookkeeping only; robots
never see these numbers.
"""

from __future__ import annotations

import random
import re
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    AsymmetricEdge,
    Disconnected,
    GraphError,
    GraphParseError,
    MultiEdge,
    PortGap,
    SelfLoop,
    UnsupportedSize,
)

Port = int
Node = int
PortTable = tuple[tuple[Node, Port], ...]

FAMILIES = ("path", "cycle", "complete", "star", "random-connected")


@dataclass(frozen=True)
class PortGraph:
    """Immutable, validated port-labeled graph.

    Use :func:`validate_graph` (or :meth:`from_text`) to build one from a raw
    description; the constructor validates as well.
    """

    ports: tuple[PortTable, ...]

    def __post_init__(self):
        _check(self.ports)

    @property
    def n(self) -> int:
        return len(self.ports)

    def degree(self, v: Node) -> int:
        return len(self.ports[v])

    def follow(self, v: Node, p: Port) -> tuple[Node, Port]:
        return self.ports[v][p]

    def neighbors(self, v: Node) -> tuple[Node, ...]:
        return tuple(u for u, _ in self.ports[v])

    @cached_property
    def m(self) -> int:
        return sum(len(t) for t in self.ports) // 2

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.ports)

    @cached_property
    def max_degree(self) -> int:
        return max(self.degrees)

    @cached_property
    def edges(self) -> frozenset[tuple[Node, Node]]:
        return frozenset(
            (v, u) for v, table in enumerate(self.ports) for u, _ in table if v < u
        )

    @cached_property
    def distances(self) -> tuple[tuple[int, ...], ...]:
        """All-pairs hop distances, one breadth-first search per node."""
        rows = []
        for s in range(self.n):
            dist = [-1] * self.n
            dist[s] = 0
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for u, _ in self.ports[v]:
                    if dist[u] < 0:
                        dist[u] = dist[v] + 1
                        queue.append(u)
            rows.append(tuple(dist))
        return tuple(rows)

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << u for u, _ in table) for table in self.ports)

    def to_text(self) -> str:
        return format_graph(self)

    @classmethod
    def from_text(cls, text: str) -> "PortGraph":
        return parse_graph(text)

    def __repr__(self):
        return f"PortGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class GraphStats:
    diameter: int
    max_degree: int
    edge_count: int


def graph_stats(g: PortGraph) -> GraphStats:
    diameter = max(max(row) for row in g.distances)
    return GraphStats(diameter=diameter, max_degree=g.max_degree, edge_count=g.m)


def _check(ports) -> None:
    n = len(ports)
    if n == 0:
        raise UnsupportedSize("a graph needs at least one node")
    for v, table in enumerate(ports):
        seen = set()
        for p, entry in enumerate(table):
            u, q = entry
            if not (0 <= u < n):
                raise GraphError(f"node {v} port {p} points to unknown node {u}")
            if u == v:
                raise SelfLoop(f"node {v} port {p} is a self-loop")
            if u in seen:
                raise MultiEdge(f"node {v} has several edges to node {u}")
            seen.add(u)
            if not (0 <= q < len(ports[u])) or tuple(ports[u][q]) != (v, p):
                raise AsymmetricEdge(
                    f"node {v} port {p} -> ({u}, {q}) has no matching reverse entry"
                )
    reached = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u, _ in ports[v]:
            if u not in reached:
                reached.add(u)
                stack.append(u)
    if len(reached) != n:
        raise Disconnected(f"only {len(reached)} of {n} nodes reachable from node 0")


def _port_table(v, raw) -> PortTable:
    if isinstance(raw, Mapping):
        keys = sorted(raw)
        if keys != list(range(len(keys))):
            raise PortGap(f"node {v} ports {keys} are not 0..{len(keys) - 1}")
        raw = [raw[p] for p in keys]
    table = []
    for p, entry in enumerate(raw):
        try:
            u, q = entry
        except (TypeError, ValueError):
            raise GraphError(f"node {v} port {p}: expected (neighbor, reverse port)")
        table.append((int(u), int(q)))
    return tuple(table)


def validate_graph(raw) -> PortGraph:
    """Build a :class:`PortGraph` from a raw per-node port description.

    ``raw`` is either a sequence indexed by node or a mapping ``node -> table``
    whose keys are exactly ``0..n-1``.  Each table is a sequence of
    ``(neighbor, reverse_port)`` pairs, or a mapping ``port -> pair`` (which is
    checked for gaps).
    """
    if isinstance(raw, PortGraph):
        return raw
    if isinstance(raw, Mapping):
        keys = sorted(raw)
        if keys != list(range(len(keys))):
            raise GraphError(f"node ids {keys} are not 0..{len(keys) - 1}")
        raw = [raw[v] for v in keys]
    return PortGraph(tuple(_port_table(v, t) for v, t in enumerate(raw)))


def from_adjacency(adjacency: Sequence[Sequence[Node]]) -> PortGraph:
    """Port graph whose ports follow the order of each adjacency list."""
    index = [{u: p for p, u in enumerate(nbrs)} for nbrs in adjacency]
    return validate_graph(
        [[(u, index[u][v]) for u in nbrs] for v, nbrs in enumerate(adjacency)]
    )


def from_edges(n: int, edges) -> PortGraph:
    """Canonical port labeling: ports in ascending neighbor order."""
    adjacency = [[] for _ in range(n)]
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    return from_adjacency([sorted(nbrs) for nbrs in adjacency])


def shortest_path_distance(g: PortGraph, u: Node, v: Node) -> int:
    return g.distances[u][v]


def generate_family(kind: str, n: int, seed: int = 0) -> PortGraph:
    """Deterministic member of a standard graph family.

    ``random-connected`` draws a random spanning tree, adds each remaining
    edge with probability 0.3 and shuffles every node's port order, all from
    ``random.Random(seed)``.
    """
    if kind not in FAMILIES:
        raise ValueError(f"unknown family {kind!r}; choose from {FAMILIES}")
    if n < 2 or (kind == "cycle" and n < 3):
        raise UnsupportedSize(f"{kind} needs more nodes than n={n}")
    if kind == "path":
        return from_edges(n, [(i, i + 1) for i in range(n - 1)])
    if kind == "cycle":
        return from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == "complete":
        return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    if kind == "star":
        return from_edges(n, [(0, i) for i in range(1, n)])
    rng = random.Random(f"random-connected:{n}:{seed}")
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < 0.3:
                edges.add((i, j))
    adjacency = [[] for _ in range(n)]
    for a, b in sorted(edges):
        adjacency[a].append(b)
        adjacency[b].append(a)
    for nbrs in adjacency:
        rng.shuffle(nbrs)
    return from_adjacency(adjacency)


def relabel_ports(g: PortGraph, perms: Sequence[Sequence[Port]]) -> PortGraph:
    """Apply a per-node port permutation: old port ``p`` at ``v`` becomes ``perms[v][p]``."""
    table = [[None] * g.degree(v) for v in range(g.n)]
    for v in range(g.n):
        for p, (u, q) in enumerate(g.ports[v]):
            table[v][perms[v][p]] = (u, perms[u][q])
    return validate_graph(table)


def random_port_labeling(g: PortGraph, seed: int) -> PortGraph:
    rng = random.Random(f"ports:{seed}")
    perms = []
    for v in range(g.n):
        perm = list(range(g.degree(v)))
        rng.shuffle(perm)
        perms.append(perm)
    return relabel_ports(g, perms)


def format_graph(g: PortGraph) -> str:
    lines = [f"n={g.n}"]
    for v, table in enumerate(g.ports):
        entries = " ".join(f"{p}->{u}/{q}" for p, (u, q) in enumerate(table))
        lines.append(f"{v}: {entries}".rstrip())
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"n=(\d+)")
_NODE = re.compile(r"(\d+):((?: \d+->\d+/\d+)*)")
_ENTRY = re.compile(r"(\d+)->(\d+)/(\d+)")


def parse_graph(text: str) -> PortGraph:
    """Strict parser for the text format written by :func:`format_graph`."""
    lines = text.splitlines()
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphParseError("empty graph description")
    header = _HEADER.fullmatch(lines[0])
    if header is None:
        raise GraphParseError(f"line 1: expected 'n=<int>', got {lines[0]!r}")
    n = int(header.group(1))
    if len(lines) != n + 1:
        raise GraphParseError(f"expected {n} node lines, found {len(lines) - 1}")
    raw = []
    for lineno, line in enumerate(lines[1:], start=2):
        match = _NODE.fullmatch(line)
        if match is None:
            raise GraphParseError(f"line {lineno}: malformed node line {line!r}")
        node = int(match.group(1))
        if node != lineno - 2:
            raise GraphParseError(f"line {lineno}: expected node {lineno - 2}, got {node}")
        table = {}
        for p, u, q in _ENTRY.findall(match.group(2)):
            if int(p) in table:
                raise GraphParseError(f"line {lineno}: port {p} listed twice")
            table[int(p)] = (int(u), int(q))
        raw.append(table)
    return validate_graph(raw)
