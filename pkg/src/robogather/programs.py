"""Robot programs: map-and-tour gathering from an undispersed start, radius-i
ball meeting, exploration-sequence gathering, and the staged combination.

Each ``*Program`` object is what :func:`robogather.engine.run_simulation`
expects: it knows ``n`` and ``b``, spawns one agent per label and reports its
worst-case round bound.  The per-robot logic lives in procedure classes that
can run standalone (terminating at their end round) or embedded inside the
staged program, which switches between them at fixed rounds.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import NamedTuple

from .engine import (
    INF,
    STAY,
    TERMINATE,
    Agent,
    Decision,
    Hold,
    LocalView,
    RobotSpec,
    Tail,
    Walk,
    carry,
    escorted,
    follow,
    move,
)
from .errors import BudgetExceeded, SimulationError
from .mapping import PartialMap, map_explorer, spanning_tree_tour
from .schedule import Schedule, bit_budget, compute_schedule, cycle_length, map_round_budget
from .uxs import ExplorationSequence

MODES = ("finder", "helper", "waiter", "leader", "follower", "frozen", "terminated")


class Msg(NamedTuple):
    """What a robot tells co-located robots: mode, group id, and the round
    until which it will certainly stay put (None if it may move now)."""

    mode: str
    gid: int
    hold: int | None = None


@dataclass
class RobotState:
    mode: str
    group_id: int
    bit_cursor: int | None = None
    followed_label: int | None = None


def assign_initial_states(placement) -> dict[int, RobotState]:
    """Roles from co-location: the smallest label of a shared node is the
    finder, the others its helpers, singletons are waiters.

    ``placement`` maps node -> labels, or is an iterable of :class:`RobotSpec`.
    """
    if not isinstance(placement, Mapping):
        groups: dict[int, list[int]] = {}
        for spec in placement:
            groups.setdefault(spec.home, []).append(spec.label)
        placement = groups
    out = {}
    for labels in placement.values():
        labels = sorted(labels)
        if len(labels) == 1:
            out[labels[0]] = RobotState("waiter", -1)
            continue
        out[labels[0]] = RobotState("finder", labels[0])
        for lab in labels[1:]:
            out[lab] = RobotState("helper", labels[0])
    return dict(sorted(out.items()))


def _role(label: int, others: Iterable[int]) -> tuple[str, int]:
    others = list(others)
    if not others:
        return "waiter", -1
    low = min(others)
    if label < low:
        return "finder", label
    return "helper", low


# ---------------------------------------------------------------------------
# map-and-tour gathering


class UndispersedProcedure(Agent):
    """Map building in ``[start, start+R1)``, then the capture tour in the
    following ``2n`` rounds.  With ``map_only`` the run ends after the map."""

    def __init__(self, label: int, n: int, start: int = 0, standalone: bool = True,
                 map_only: bool = False):
        super().__init__(label)
        self.n = n
        self.start = start
        self.phase2 = start + map_round_budget(n)
        self.end = self.phase2 if map_only else self.phase2 + 2 * n
        self.standalone = standalone
        self.mode = "waiter"
        self.group_id = -1
        self.assigned = False
        self.explorer = None
        self.map: PartialMap | None = None
        self.map_rounds: int | None = None
        self.tour: list[int] | None = None
        self.tour_pos = 0
        self.followed: int | None = None

    def message(self, rnd):
        if self.mode == "finder" and self.map is not None and rnd < self.phase2:
            return Msg(self.mode, self.group_id, self.phase2)
        return Msg(self.mode, self.group_id)

    def state(self) -> RobotState:
        return RobotState(self.mode, self.group_id, followed_label=self.followed)

    def decide(self, view: LocalView) -> Decision:
        r = view.round
        if r >= self.end:
            if self.standalone:
                return Decision(TERMINATE)
            raise SimulationError("procedure consulted after its end round")
        if not self.assigned:
            self.assigned = True
            self.mode, self.group_id = _role(self.label, view.labels())
        if r < self.phase2:
            return self._map_phase(view)
        return self._tour_phase(view)

    # -- phase 1 -------------------------------------------------------------

    def _token_here(self, view) -> bool:
        return any(m.mode == "helper" and m.gid == self.label for _, m in view.inbox)

    def _map_phase(self, view):
        r = view.round
        if self.mode == "waiter":
            return Decision(STAY, Hold(self.phase2))
        if self.mode == "helper":
            for lab, m in view.inbox:
                if lab == self.group_id:
                    if m.hold is not None:
                        return Decision(STAY, Hold(m.hold))
                    return Decision(escorted(lab))
            return Decision(STAY, Hold(self.phase2))
        # finder
        if r == self.start or self.map is not None:
            if self.map is not None:
                return Decision(STAY, Hold(self.phase2))
            return Decision(STAY)
        try:
            if self.explorer is None:
                self.explorer = map_explorer(view, self._token_here)
                port, with_token = next(self.explorer)
            else:
                port, with_token = self.explorer.send(view)
        except StopIteration as stop:
            self.map = stop.value
            self.map_rounds = r - self.start
            self.explorer = None
            return Decision(STAY, Hold(self.phase2))
        return Decision(carry(port) if with_token else move(port))

    # -- phase 2 -------------------------------------------------------------

    def _tour_phase(self, view):
        end = self.end
        if self.mode == "finder":
            if self.map is None:
                raise BudgetExceeded(
                    f"finder {self.label} has no complete map after {self.phase2 - self.start} rounds"
                )
            if self.tour is None:
                self.tour = spanning_tree_tour(self.map)
            others = [m.gid for _, m in view.inbox if m.mode in ("finder", "helper")]
            low = min(others, default=None)
            if low is not None and low < self.group_id:
                self.mode = "helper"
                self.group_id = low
                leaders = sorted(
                    lab for lab, m in view.inbox if m.mode == "finder" and m.gid == low
                )
                if leaders:
                    self.followed = leaders[0]
                    return Decision(follow(leaders[0]), Tail(leaders[0], end), ("MERGE",))
                self.followed = None
                return Decision(STAY, Hold(end), ("MERGE",))
            if self.tour_pos < len(self.tour):
                port = self.tour[self.tour_pos]
                self.tour_pos += 1
                return Decision(move(port))
            return Decision(STAY, Hold(end))
        finders = sorted(
            (m.gid, lab) for lab, m in view.inbox if m.mode == "finder"
        )
        if self.mode == "waiter":
            if finders:
                gid, lab = finders[0]
                self.mode, self.group_id, self.followed = "helper", gid, lab
                return Decision(follow(lab), Tail(lab, end), ("MERGE",))
            return Decision(STAY, Hold(end))
        # helper
        if finders and finders[0][0] < self.group_id:
            gid, lab = finders[0]
            self.group_id, self.followed = gid, lab
            return Decision(follow(lab), Tail(lab, end), ("MERGE",))
        if self.followed is not None:
            if any(lab == self.followed for lab, _ in view.inbox):
                return Decision(follow(self.followed), Tail(self.followed, end))
            self.followed = None
        return Decision(STAY, Hold(end))


# ---------------------------------------------------------------------------
# radius-i ball meeting


class HopProcedure(Agent):
    """Per ID bit (least significant first) one cycle of ``T`` rounds: bit 1
    walks every non-backtracking path of length <= radius and returns, bit 0
    stays home.  Robots that find company freeze until the end."""

    def __init__(self, label: int, radius: int, n: int, b: int, start: int = 0,
                 standalone: bool = True, delta: int | None = None):
        super().__init__(label)
        self.radius = radius
        self.T = cycle_length(radius, n, delta is not None, delta)
        self.cycles = bit_budget(n, b)
        self.start = start
        self.end = start + self.cycles * self.T
        self.standalone = standalone
        self.mode = "leader"
        self.group_id = label
        self.walker = None
        self.walk_cycle = -1
        self.walk_done = False

    def message(self, rnd):
        return Msg(self.mode, self.group_id)

    def state(self) -> RobotState:
        cursor = (self.walk_cycle if self.walk_cycle >= 0 else None)
        return RobotState(self.mode, self.group_id, bit_cursor=cursor)

    def _next_walk_cycle(self, c: int) -> int | None:
        for j in range(c, min(self.cycles, self.label.bit_length())):
            if self.label >> j & 1:
                return j
        return None

    def decide(self, view: LocalView) -> Decision:
        r = view.round
        if r >= self.end:
            if self.standalone:
                return Decision(TERMINATE)
            raise SimulationError("procedure consulted after its end round")
        if self.mode == "frozen":
            return Decision(STAY, Hold(self.end))
        if view.inbox:
            self.mode = "frozen"
            self.walker = None
            return Decision(STAY, Hold(self.end))
        t = r - self.start
        c, offset = divmod(t, self.T)
        if self.walker is not None:
            try:
                port = self.walker.send(view)
            except StopIteration:
                self.walker = None
                self.walk_done = True
            else:
                if c != self.walk_cycle:
                    raise SimulationError("ball walk overran its cycle")
                return Decision(move(port))
        if c == self.walk_cycle and self.walk_done:
            return self._wait(c + 1)
        nxt = self._next_walk_cycle(c)
        if nxt != c or offset != 0:
            return self._wait(c + 1 if nxt == c else c)
        self.walk_cycle, self.walk_done = c, False
        self.walker = self._ball_walk(view)
        try:
            return Decision(move(next(self.walker)))
        except StopIteration:
            self.walker = None
            self.walk_done = True
            return self._wait(c + 1)

    def _wait(self, c: int) -> Decision:
        nxt = self._next_walk_cycle(c)
        until = self.end if nxt is None else self.start + nxt * self.T
        return Decision(STAY, Hold(until))

    def _ball_walk(self, view):
        radius = self.radius

        def explore(depth, parent_port):
            nonlocal view
            for p in range(view.degree):
                if p == parent_port:
                    continue
                view = yield p
                q = view.arrival_port
                if depth + 1 < radius:
                    yield from explore(depth + 1, q)
                view = yield q

        return explore(0, None)


# ---------------------------------------------------------------------------
# exploration-sequence gathering


class UxsProcedure(Agent):
    """Groups follow their largest label.  A leader spends one ``2T`` cycle
    per ID bit (least significant first): bit 1 walks the sequence then
    waits, bit 0 waits then walks.  After its last bit it waits ``2T`` more
    rounds and terminates with its followers."""

    def __init__(self, label: int, seq: ExplorationSequence, start: int = 0):
        super().__init__(label)
        self.symbols = seq.symbols
        self.T = len(seq.symbols)
        self.start = start
        self.nbits = label.bit_length()
        self.stop = start + 2 * self.T * (self.nbits + 1)
        self.mode = "leader"
        self.group_id = label
        self.cursor = 0

    def message(self, rnd):
        return Msg(self.mode, self.group_id)

    def state(self) -> RobotState:
        cursor = self.cursor if self.mode == "leader" else None
        return RobotState(self.mode, self.group_id, bit_cursor=cursor,
                          followed_label=None if self.mode == "leader" else self.group_id)

    def decide(self, view: LocalView) -> Decision:
        events = ()
        if view.inbox:
            top = max(max(lab for lab, _ in view.inbox), self.label)
            if top != self.group_id:
                events = ("MERGE",)
                self.group_id = top
        if self.group_id != self.label:
            self.mode = "follower"
            return Decision(follow(self.group_id), Tail(self.group_id), events)
        t = view.round - self.start
        T = self.T
        c = t // (2 * T) if T else self.nbits
        self.cursor = min(c, self.nbits)
        if c < self.nbits:
            bit = self.label >> c & 1
            window = c * 2 * T + (0 if bit else T)
            if window <= t < window + T:
                j = t - window
                entry = 0 if j == 0 or view.arrival_port is None else view.arrival_port
                port = (entry + self.symbols[j]) % view.degree
                ap = Walk(self.symbols, self.start + window, self.start + window + T)
                return Decision(move(port), ap, events)
            return Decision(STAY, Hold(self.start + self._next_window(t)), events)
        if view.round < self.stop:
            return Decision(STAY, Hold(self.stop), events)
        return Decision(TERMINATE, None, events)

    def _next_window(self, t: int) -> int:
        T = self.T
        for c in range(t // (2 * T), self.nbits):
            window = c * 2 * T + (0 if self.label >> c & 1 else T)
            if window > t:
                return window
        return self.stop - self.start


# ---------------------------------------------------------------------------
# staged combination


class StagedAgent(Agent):
    """Runs the step layout of a :class:`Schedule`: step 1 is map-and-tour
    gathering, steps 2..6 a ball meeting of radius ``step-1`` followed by
    map-and-tour gathering, step 7 exploration-sequence gathering.  At the end
    of every step a robot that is not alone terminates."""

    def __init__(self, label: int, schedule: Schedule, seq: ExplorationSequence,
                 start_step: int = 1):
        super().__init__(label)
        self.schedule = schedule
        self.seq = seq
        base = schedule.step_start(start_step)
        stages = []
        for step in range(start_step, 8):
            s0 = schedule.step_start(step) - base
            if step == 7:
                stages.append(("uxs", step, s0, INF, False))
                break
            if step >= 2:
                h0, h1 = (x - base for x in schedule.hop_window(step))
                stages.append(("hop", step, h0, h1, False))
            u0 = schedule.undispersed_start(step) - base
            stages.append(("und", step, u0, schedule.S[step] - base, True))
        self.stages = stages
        self.stage = -1
        self.proc: Agent | None = None
        self.mode = "waiter"
        self.group_id = -1
        self.step = start_step

    def message(self, rnd):
        if self.proc is None:
            return Msg(self.mode, self.group_id)
        return self.proc.message(rnd)

    def _open(self, idx: int) -> None:
        kind, step, s0, s1, _ = self.stages[idx]
        sch = self.schedule
        if kind == "und":
            self.proc = UndispersedProcedure(self.label, sch.n, start=s0, standalone=False)
        elif kind == "hop":
            self.proc = HopProcedure(
                self.label, step - 1, sch.n, sch.b, start=s0, standalone=False,
                delta=sch.delta if sch.delta_aware else None,
            )
        else:
            self.proc = UxsProcedure(self.label, self.seq, start=s0)
        self.stage = idx
        self.step = step

    def decide(self, view: LocalView) -> Decision:
        r = view.round
        events: tuple = ()
        if self.stage < 0:
            self._open(0)
        else:
            kind, step, s0, s1, check = self.stages[self.stage]
            if r >= s1:
                if r != s1:
                    raise SimulationError("staged robot skipped a stage boundary")
                events = ("PHASE_BOUNDARY",)
                if check and view.inbox:
                    self.mode = "terminated"
                    return Decision(TERMINATE, None, events)
                self._open(self.stage + 1)
        d = self.proc.decide(view)
        self.mode = self.proc.mode
        self.group_id = self.proc.group_id
        if events:
            d = Decision(d.action, d.autopilot, events + tuple(d.events))
        return d


# ---------------------------------------------------------------------------
# program objects


@dataclass
class UndispersedGatheringProgram:
    n: int
    b: int = 2
    name: str = "undispersed"

    def round_bound(self) -> int:
        return map_round_budget(self.n) + 2 * self.n + 1

    def spawn(self, label: int) -> Agent:
        return UndispersedProcedure(label, self.n)


@dataclass
class TokenMapProgram:
    """Map construction only; every robot terminates when the budget ends."""

    n: int
    b: int = 2
    name: str = "token-map"

    def round_bound(self) -> int:
        return map_round_budget(self.n) + 1

    def spawn(self, label: int) -> Agent:
        return UndispersedProcedure(label, self.n, map_only=True)


@dataclass
class HopMeetingProgram:
    radius: int
    n: int
    b: int = 2
    delta: int | None = None
    name: str = "hop-meeting"

    def __post_init__(self):
        if not 1 <= self.radius <= 5:
            raise ValueError("hop radius must be in 1..5")

    @property
    def duration(self) -> int:
        T = cycle_length(self.radius, self.n, self.delta is not None, self.delta)
        return bit_budget(self.n, self.b) * T

    def round_bound(self) -> int:
        return self.duration + 1

    def spawn(self, label: int) -> Agent:
        return HopProcedure(label, self.radius, self.n, self.b, delta=self.delta)


@dataclass
class UxsGatheringProgram:
    n: int
    b: int
    seq: ExplorationSequence
    name: str = "uxs"

    def round_bound(self) -> int:
        return 2 * self.seq.T * (bit_budget(self.n, self.b) + 1) + 1

    def spawn(self, label: int) -> Agent:
        return UxsProcedure(label, self.seq)


@dataclass
class FasterGatheringProgram:
    n: int
    b: int
    seq: ExplorationSequence
    start_step: int = 1
    delta: int | None = None
    name: str = "faster"

    def __post_init__(self):
        if not 1 <= self.start_step <= 7:
            raise ValueError("start step must be in 1..7")
        self.schedule = compute_schedule(
            self.n, self.b, self.seq.T, self.delta is not None, self.delta
        )

    def round_bound(self) -> int:
        return self.schedule.total_bound(self.start_step) + 1

    def spawn(self, label: int) -> Agent:
        return StagedAgent(label, self.schedule, self.seq, self.start_step)


def undispersed_gathering_program(n: int, b: int = 2) -> UndispersedGatheringProgram:
    return UndispersedGatheringProgram(n, b)


def token_map_program(n: int, b: int = 2) -> TokenMapProgram:
    return TokenMapProgram(n, b)


def hop_meeting_program(i: int, n: int, b: int = 2, delta: int | None = None) -> HopMeetingProgram:
    return HopMeetingProgram(i, n, b, delta)


def uxs_gathering_program(n: int, b: int, seq: ExplorationSequence) -> UxsGatheringProgram:
    return UxsGatheringProgram(n, b, seq)


def faster_gathering_program(
    n: int, b: int, seq: ExplorationSequence, start_step: int = 1, delta: int | None = None
) -> FasterGatheringProgram:
    return FasterGatheringProgram(n, b, seq, start_step, delta)


def placement_specs(pairs: Iterable[tuple[int, int]]) -> list[RobotSpec]:
    """``[(label, node), ...]`` to robot specs."""
    return [RobotSpec(label, node) for label, node in pairs]
