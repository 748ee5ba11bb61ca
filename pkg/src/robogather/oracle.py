"""Independent checkers.  They only look at graphs, placements and traces,
never at robot internals, and recompute distances on their own."""

from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass, field

from .engine import RobotSpec
from .enumeration import MAX_STRUCTURE_N, enumerate_connected
from .errors import FewerThanTwoRobots, ScopeTooLarge
from .graph import PortGraph, format_graph
from .schedule import Schedule
from .trace import Trace


def _all_pairs(g: PortGraph) -> list[list[int]]:
    """Floyd-Warshall over the underlying adjacency."""
    n = g.n
    big = n + 1
    dist = [[0 if i == j else big for j in range(n)] for i in range(n)]
    for v in range(n):
        for u, _ in g.ports[v]:
            dist[v][u] = 1
    for m in range(n):
        row_m = dist[m]
        for i in range(n):
            dim = dist[i][m]
            if dim == big:
                continue
            row_i = dist[i]
            for j in range(n):
                if dim + row_m[j] < row_i[j]:
                    row_i[j] = dim + row_m[j]
    return dist


def _nodes(placement) -> list[int]:
    if isinstance(placement, dict):
        out = []
        for node, count in placement.items():
            out.extend([node] * (count if isinstance(count, int) else len(count)))
        return out
    return [p.home if isinstance(p, RobotSpec) else int(p) for p in placement]


def min_pairwise_distance(g: PortGraph, placement) -> int:
    """Smallest hop distance between two robots.  ``placement`` is a list of
    nodes (one per robot), a list of :class:`RobotSpec`, or ``{node: count}``."""
    nodes = _nodes(placement)
    if len(nodes) < 2:
        raise FewerThanTwoRobots("need at least two robots")
    dist = _all_pairs(g)
    return min(dist[a][b] for a, b in itertools.combinations(nodes, 2))


@dataclass
class LemmaReport:
    scope: str
    bound: int
    instances: int = 0
    counterexample: tuple | None = None
    per_n: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.counterexample is None else "fail"

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def render(self) -> str:
        lines = [
            f"scope: {self.scope}",
            f"bound: {self.bound}",
            f"instances: {self.instances}",
            f"verdict: {self.verdict}",
        ]
        for n, (structures, placements) in sorted(self.per_n.items()):
            lines.append(f"n={n}: structures={structures} placements={placements}")
        if self.counterexample is not None:
            g, nodes, d = self.counterexample
            lines.append(f"counterexample: min distance {d} > {self.bound}")
            lines.append(format_graph(g).rstrip("\n"))
            lines.append("placement: " + " ".join(map(str, nodes)))
        return "\n".join(lines) + "\n"


def check_hop_lemma(n_max: int, c: int, bound: int | None = None, n_min: int = 2) -> LemmaReport:
    """Over every connected structure with ``n_min..n_max`` nodes and every set
    of ``floor(n/c)+1`` distinct nodes, check that some two chosen nodes are
    within ``bound`` hops (default ``2c-2``).  Scanning continues after a
    counterexample so the instance count stays comparable."""
    if n_max > MAX_STRUCTURE_N:
        raise ScopeTooLarge(f"hop lemma check supports n <= {MAX_STRUCTURE_N}")
    if c < 1:
        raise ValueError("c must be positive")
    bound = 2 * c - 2 if bound is None else bound
    report = LemmaReport(scope=f"n={n_min}..{n_max}, c={c}", bound=bound)
    for n in range(n_min, n_max + 1):
        k = n // c + 1
        if k < 2 or k > n:
            continue
        structures = placements = 0
        for g in enumerate_connected(n, "structures"):
            structures += 1
            dist = _all_pairs(g)
            close = [
                [dist[a][b] <= bound for b in range(n)] for a in range(n)
            ]
            for nodes in itertools.combinations(range(n), k):
                placements += 1
                if any(close[a][b] for a, b in itertools.combinations(nodes, 2)):
                    continue
                if report.counterexample is None:
                    d = min(dist[a][b] for a, b in itertools.combinations(nodes, 2))
                    report.counterexample = (g, nodes, d)
        report.per_n[n] = (structures, placements)
        report.instances += placements
    return report


def _terminate_rounds(trace: Trace) -> list[int]:
    return sorted(set(trace.termination_round.values()))


def check_detection_soundness(trace: Trace) -> bool:
    """True iff in every round where some robot terminates, all robots sit on
    one node, both when they communicate and after the moves."""
    for rnd in _terminate_rounds(trace):
        if len(set(trace.positions_at(rnd))) != 1:
            return False
        try:
            before = trace.positions_before(rnd)
        except LookupError:
            continue
        if len(set(before)) != 1:
            return False
    return True


def dichotomy_rounds(schedule: Schedule, start_step: int = 1) -> tuple[int, ...]:
    """Rounds whose end-of-round positions the dichotomy check reads."""
    return tuple(b - 1 for b in schedule.boundaries(start_step))


def check_step_dichotomy(trace: Trace, schedule: Schedule, start_step: int = 1) -> bool:
    """True iff at each step boundary the robots are either all on one node or
    all on distinct nodes.  Boundaries after the run ended are ignored."""
    for boundary in schedule.boundaries(start_step):
        if boundary > trace.last_round:
            break
        nodes = trace.positions_before(boundary)
        if len(set(nodes)) not in (1, len(nodes)):
            return False
    return True


def gathered(trace: Trace) -> bool:
    """Every robot terminated and all ended on one node."""
    return len(trace.termination_round) == trace.k and len(set(trace.final_positions)) == 1


def undispersed(nodes: Iterable[int]) -> bool:
    nodes = list(nodes)
    return len(set(nodes)) < len(nodes)
