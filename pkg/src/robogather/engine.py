"""Synchronous round engine.

Every round has two steps.  First, each robot reads the messages of the
robots sharing its node and computes an action; messages are produced from
the state robots had at the start of the round.  Second, all moves are applied
at once.  Two robots crossing one edge in opposite directions never meet.

Robots may hand the engine an *autopilot* together with their action: a
standing instruction (hold still, keep following a robot, keep walking an
exploration sequence) that the engine replays without calling the robot again.
An autopilot lapses at its ``until`` round or as soon as the set of robots at
the robot's node changes, at which point the robot is consulted again.  Agents
are written so that consulting them in those rounds would produce the same
action, which the test-suite checks by running with autopilots disabled.
When every live robot is holding still the engine jumps straight to the next
round in which one of them wakes up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

from .errors import IllegalMove, RoundLimitExceeded, SimulationError
from .graph import PortGraph
from .trace import Row, Skip, Trace

INF = math.inf


class Action(NamedTuple):
    kind: str
    arg: int = -1

    def __str__(self):
        if self.kind in ("move", "carry"):
            return f"move:{self.arg}"
        return self.kind


STAY = Action("stay")
TERMINATE = Action("terminate")
_MOVES = [Action("move", p) for p in range(256)]
_CARRIES = [Action("carry", p) for p in range(256)]


def move(port: int) -> Action:
    return _MOVES[port] if 0 <= port < 256 else Action("move", port)


def carry(port: int) -> Action:
    """Move through ``port`` taking along every robot that asked to be escorted."""
    return _CARRIES[port] if 0 <= port < 256 else Action("carry", port)


def follow(label: int) -> Action:
    """Copy the same-round action of the co-located robot ``label``."""
    return Action("follow", label)


def escorted(label: int) -> Action:
    """Move with robot ``label`` only if it announces a ``carry`` move."""
    return Action("escorted", label)


class Hold:
    """Stay put until round ``until``."""

    __slots__ = ("until",)
    static = True

    def __init__(self, until):
        self.until = until

    def act(self, rnd, degree, arrival):
        return STAY

    def __repr__(self):
        return f"Hold({self.until})"


class Tail:
    """Keep following robot ``leader``."""

    __slots__ = ("leader", "until", "_action")
    static = True

    def __init__(self, leader, until=INF):
        self.leader = leader
        self.until = until
        self._action = follow(leader)

    def act(self, rnd, degree, arrival):
        return self._action

    def __repr__(self):
        return f"Tail({self.leader}, {self.until})"


class Walk:
    """Apply ``symbols[r - start]`` in round ``r``; entry port 0 at ``start``."""

    __slots__ = ("symbols", "start", "until")
    static = False

    def __init__(self, symbols, start, until):
        self.symbols = symbols
        self.start = start
        self.until = until

    def port(self, rnd, degree, arrival):
        entry = 0 if rnd == self.start or arrival is None else arrival
        return (entry + self.symbols[rnd - self.start]) % degree

    def act(self, rnd, degree, arrival):
        return move(self.port(rnd, degree, arrival))

    def __repr__(self):
        return f"Walk(start={self.start}, until={self.until})"


class Decision(NamedTuple):
    action: Action
    autopilot: object = None
    events: tuple = ()


class LocalView(NamedTuple):
    round: int
    degree: int
    arrival_port: int | None
    inbox: tuple = ()

    @property
    def alone(self) -> bool:
        return not self.inbox

    def labels(self) -> tuple[int, ...]:
        return tuple(lab for lab, _ in self.inbox)


@dataclass(frozen=True)
class RobotSpec:
    label: int
    home: int


@dataclass(frozen=True)
class SimConfig:
    """Run options.

    ``record`` is ``"full"`` (every round kept, exportable) or ``"summary"``
    (only rounds with events, ``checkpoints`` and idle spans are kept).
    ``delta_aware`` is informational here: programs receive the maximum
    degree when they are built in that mode.
    """

    b: int = 2
    max_rounds: int | None = None
    delta_aware: bool = False
    record_messages: bool = False
    record: str = "full"
    autopilot: bool = True
    checkpoints: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be a positive integer")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.record not in ("full", "summary"):
            raise ValueError("record must be 'full' or 'summary'")


class Agent:
    """Base robot: silent waiter that never moves."""

    mode = "waiter"
    group_id = -1

    def __init__(self, label: int):
        self.label = label

    def message(self, rnd: int):
        return (self.mode, self.group_id)

    def decide(self, view: LocalView) -> Decision:
        return Decision(STAY)


class RobotProgram(Protocol):
    name: str
    n: int

    def round_bound(self) -> int: ...

    def spawn(self, label: int) -> Agent: ...


def _validate(g: PortGraph, specs, program, cfg: SimConfig) -> None:
    if not specs:
        raise ValueError("at least one robot is required")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ValueError("robot labels must be distinct")
    top = g.n ** cfg.b
    for s in specs:
        if not (1 <= s.label <= top):
            raise ValueError(f"label {s.label} outside [1, {top}]")
        if not (0 <= s.home < g.n):
            raise ValueError(f"home node {s.home} not in graph")
    if getattr(program, "n", g.n) != g.n:
        raise ValueError(f"program built for n={program.n} but graph has n={g.n}")
    if getattr(program, "b", cfg.b) != cfg.b:
        raise ValueError(f"program built for b={program.b} but config has b={cfg.b}")


def _occupancy(pos, live):
    occ: dict[int, list[int]] = {}
    for i in live:
        lst = occ.get(pos[i])
        if lst is None:
            occ[pos[i]] = [i]
        else:
            lst.append(i)
    return occ


def run_simulation(
    g: PortGraph, robots, program, config: SimConfig | None = None
) -> Trace:
    """Run ``program`` on ``g`` from the placement ``robots`` and return the trace."""
    cfg = config or SimConfig()
    specs = sorted(robots, key=lambda s: s.label)
    _validate(g, specs, program, cfg)
    k = len(specs)
    labels = tuple(s.label for s in specs)
    index = {lab: i for i, lab in enumerate(labels)}
    agents = [program.spawn(lab) for lab in labels]
    ports = g.ports
    pos = [s.home for s in specs]
    arrival: list = [None] * k
    live = list(range(k))
    alive = [True] * k
    ap: list = [None] * k
    prev_here: list = [None] * k
    modes = [a.mode for a in agents]
    gids = [a.group_id for a in agents]
    moves = [0] * k
    full = cfg.record == "full"
    use_ap = cfg.autopilot and not cfg.record_messages
    checkpoints = cfg.checkpoints
    limit = cfg.max_rounds if cfg.max_rounds is not None else 4 * program.round_bound()
    trace = Trace(labels=labels, initial=tuple(pos), complete=full)
    trace.agents = agents
    rows = trace.rows
    bits = 0
    rnd = 0
    occ = _occupancy(pos, live)

    def finish(last):
        trace.last_round = last
        trace.final_positions = tuple(pos)
        trace.move_counts = {labels[i]: moves[i] for i in range(k)}
        trace.message_bits = bits

    while live:
        if rnd >= limit:
            finish(rnd - 1)
            raise RoundLimitExceeded(
                f"{len(live)} robot(s) still running after {limit} rounds", trace
            )
        acts: list = [None] * k
        awake = []
        for i in live:
            here = occ[pos[i]]
            a = ap[i]
            if a is not None and rnd < a.until and here == prev_here[i]:
                acts[i] = a.act(rnd, len(ports[pos[i]]), arrival[i])
            else:
                ap[i] = None
                awake.append(i)
        events: list = [()] * k
        if awake:
            msgs = {}
            for i in awake:
                here = occ[pos[i]]
                if len(here) > 1:
                    for j in here:
                        if j not in msgs:
                            msgs[j] = agents[j].message(rnd)
            if cfg.record_messages:
                for payload in msgs.values():
                    bits += 8 * len(repr(payload))
            for i in awake:
                here = occ[pos[i]]
                if len(here) > 1:
                    inbox = tuple((labels[j], msgs[j]) for j in here if j != i)
                    before = prev_here[i]
                    if before is not None and any(j not in before for j in here):
                        events[i] = ("MEET",)
                else:
                    inbox = ()
                view = LocalView(rnd, len(ports[pos[i]]), arrival[i], inbox)
                d = agents[i].decide(view)
                acts[i] = d.action
                if use_ap:
                    ap[i] = d.autopilot
                if d.events:
                    events[i] = events[i] + tuple(d.events)
                agent = agents[i]
                if agent.mode != modes[i]:
                    events[i] = events[i] + ("STATE_CHANGE",)
                    modes[i] = agent.mode
                gids[i] = agent.group_id
        for i in live:
            prev_here[i] = occ[pos[i]]

        final = _resolve(acts, live, pos, index, alive)
        moved = False
        terminated = False
        for i in live:
            act = final[i]
            kind = act.kind
            if kind == "stay":
                arrival[i] = None
            elif kind == "terminate":
                terminated = True
                agents[i].mode = "terminated"
                modes[i] = "terminated"
                events[i] = events[i] + ("TERMINATE",)
                trace.termination_round[labels[i]] = rnd
                arrival[i] = None
            else:
                p = act.arg
                table = ports[pos[i]]
                if not (0 <= p < len(table)):
                    finish(rnd)
                    raise IllegalMove(
                        f"robot {labels[i]} chose port {p} at a node of degree {len(table)}"
                    )
                pos[i], arrival[i] = table[p]
                moves[i] += 1
                moved = True
        if terminated:
            for i in list(live):
                if final[i].kind == "terminate":
                    alive[i] = False
            live = [i for i in live if alive[i]]
        has_events = any(events[i] for i in range(k))
        if full or has_events or rnd in checkpoints:
            rows.append(
                Row(
                    rnd,
                    tuple(pos),
                    tuple(str(final[i]) if final[i] is not None else "stay" for i in range(k)),
                    tuple(modes),
                    tuple(gids),
                    tuple(events),
                )
            )
        rnd += 1
        occ = _occupancy(pos, live)
        if not (use_ap and live):
            continue
        if any(ap[i] is None for i in live):
            continue
        if not moved and all(ap[i].static for i in live):
            nxt = min(min(ap[i].until for i in live), limit)
            if nxt > rnd:
                rows.append(Skip(rnd, int(nxt), tuple(pos), tuple(modes), tuple(gids)))
                rnd = int(nxt)
            continue
        if any(isinstance(ap[i], Walk) for i in live):
            stop = min(ap[i].until for i in live)
            if rnd < stop and all(occ[pos[i]] == prev_here[i] for i in live):
                rnd = _fast_walk(
                    rnd, min(stop, limit), live, ap, index, pos, arrival, moves, ports,
                    rows, full, checkpoints, modes, gids, k,
                )
                occ = _occupancy(pos, live)
    finish(rnd - 1)
    return trace


def _resolve(acts, live, pos, index, alive):
    """Replace follow/escorted actions by the concrete action they stand for.

    ``follow`` copies the target's action (a terminating target takes its
    followers along); ``escorted`` moves only when the target carries.
    """
    final: list = [None] * len(acts)

    def res(i, seen):
        if final[i] is not None:
            return final[i]
        a = acts[i]
        if a.kind == "follow" or a.kind == "escorted":
            j = index.get(a.arg)
            if j is None or not alive[j] or pos[j] != pos[i]:
                raise SimulationError(
                    f"robot at index {i} follows {a.arg}, which is not beside it"
                )
            if j in seen:
                raise SimulationError("cyclic follow instructions")
            t = res(j, seen | {i})
            if t.kind == "carry":
                r = move(t.arg)
            elif a.kind == "follow":
                r = t
            else:
                r = STAY
        else:
            r = a
        final[i] = r
        return r

    for i in live:
        res(i, frozenset())
    for i in live:
        if final[i].kind == "carry":
            final[i] = move(final[i].arg)
    return final


def _fast_walk(rnd, stop, live, ap, index, pos, arrival, moves, ports, rows, full,
               checkpoints, modes, gids, k):
    """Replay walking autopilots round by round until some robot must wake."""
    heads: dict[int, list[int]] = {}
    for i in live:
        j = i
        while isinstance(ap[j], Tail):
            j = index[ap[j].leader]
        heads.setdefault(j, []).append(i)
    walkers = []
    for h, members in heads.items():
        if isinstance(ap[h], Walk):
            walkers.append((ap[h], h, members))
        else:
            for i in members:
                arrival[i] = None
    count: dict[int, int] = {}
    for i in live:
        count[pos[i]] = count.get(pos[i], 0) + 1
    r = rnd
    while r < stop:
        sources = []
        for walk, h, members in walkers:
            node = pos[h]
            table = ports[node]
            entry = 0 if r == walk.start or arrival[h] is None else arrival[h]
            p = (entry + walk.symbols[r - walk.start]) % len(table)
            u, q = table[p]
            size = len(members)
            count[node] -= size
            count[u] = count.get(u, 0) + size
            for i in members:
                pos[i] = u
                arrival[i] = q
                moves[i] += 1
            sources.append((node, u, size, p, members))
        if full or r in checkpoints:
            acts = ["stay"] * k
            for _, _, _, p, members in sources:
                for i in members:
                    acts[i] = f"move:{p}"
            rows.append(Row(r, tuple(pos), tuple(acts), tuple(modes), tuple(gids), ((),) * k))
        r += 1
        for node, u, size, _, _ in sources:
            if count[node] != 0 or count[u] != size:
                return r
    return r
