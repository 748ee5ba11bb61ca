from dataclasses import dataclass

import pytest

from robogather.engine import (
    STAY,
    TERMINATE,
    Agent,
    Decision,
    RobotSpec,
    SimConfig,
    move,
    run_simulation,
)
from robogather.errors import IllegalMove, RoundLimitExceeded
from robogather.graph import generate_family, validate_graph
from robogather.programs import hop_meeting_program, undispersed_gathering_program
from robogather.schedule import map_round_budget
from robogather.trace import colocated_groups, read_trace

EDGE = validate_graph([[(1, 0)], [(0, 0)]])


class Scripted(Agent):
    def __init__(self, label, script, views):
        super().__init__(label)
        self.script = script
        self.views = views

    def decide(self, view):
        self.views.append((self.label, view))
        if view.round < len(self.script):
            return Decision(self.script[view.round])
        return Decision(TERMINATE)


@dataclass
class ScriptProgram:
    scripts: dict
    bound: int = 10
    name: str = "script"

    def __post_init__(self):
        self.views = []

    def round_bound(self):
        return self.bound

    def spawn(self, label):
        return Scripted(label, self.scripts.get(label, []), self.views)


def replay(g, trace):
    """Recompute end-of-round positions from the recorded actions alone."""
    pos = dict(zip(trace.labels, trace.initial))
    out = {}
    for rnd, lab, _, _, _, act, _ in trace.records():
        if act.startswith("move:"):
            pos[lab] = g.follow(pos[lab], int(act[5:]))[0]
        out[rnd] = tuple(pos[lab] for lab in trace.labels)
    return out


def test_immediate_terminate_has_length_one():
    trace = run_simulation(EDGE, [RobotSpec(1, 0)], ScriptProgram({}))
    assert trace.num_rounds == 1
    assert trace.termination_round == {1: 0}
    assert len(list(trace.records())) == 1


def test_swap_is_not_a_meeting():
    prog = ScriptProgram({1: [move(0), STAY], 2: [move(0), STAY]})
    trace = run_simulation(EDGE, [RobotSpec(1, 0), RobotSpec(2, 1)], prog)
    assert trace.positions_at(0) == (1, 0)
    # nobody ever saw company
    assert all(v.alone for _, v in prog.views)
    assert trace.event_rounds("MEET") == []


def test_meeting_is_seen_next_round():
    path = generate_family("path", 3)
    prog = ScriptProgram({1: [move(0), STAY], 2: [STAY, STAY]})
    run_simulation(path, [RobotSpec(1, 0), RobotSpec(2, 1)], prog)
    seen = {(lab, v.round): v for lab, v in prog.views}
    assert seen[(2, 0)].alone
    assert seen[(2, 1)].labels() == (1,)
    assert seen[(1, 1)].arrival_port == 0


def test_illegal_move():
    with pytest.raises(IllegalMove):
        run_simulation(EDGE, [RobotSpec(1, 0)], ScriptProgram({1: [move(1)]}))


def test_round_limit():
    prog = ScriptProgram({1: [STAY] * 50})
    with pytest.raises(RoundLimitExceeded) as info:
        run_simulation(EDGE, [RobotSpec(1, 0)], prog, SimConfig(max_rounds=5))
    assert info.value.trace.last_round == 4


def test_default_limit_is_four_bounds():
    prog = ScriptProgram({1: [STAY] * 50}, bound=3)
    with pytest.raises(RoundLimitExceeded):
        run_simulation(EDGE, [RobotSpec(1, 0)], prog)


@pytest.mark.parametrize(
    "robots",
    [
        [RobotSpec(1, 0), RobotSpec(1, 1)],
        [RobotSpec(5, 0)],
        [RobotSpec(0, 0)],
        [RobotSpec(1, 2)],
    ],
)
def test_bad_robots(robots):
    with pytest.raises(ValueError):
        run_simulation(EDGE, robots, ScriptProgram({}))


def test_hop_meeting_labels_2_and_3_on_an_edge():
    prog = hop_meeting_program(1, 2)
    trace = run_simulation(EDGE, [RobotSpec(2, 0), RobotSpec(3, 1)], prog)
    cycle = 2  # T(1) for n=2
    met = [r for r in range(trace.num_rounds) if len(set(trace.positions_at(r))) == 1]
    assert met and met[0] < 2 * cycle


def test_undispersed_gathers_at_budget_plus_2n():
    g = generate_family("cycle", 4)
    robots = [RobotSpec(3, 2), RobotSpec(7, 2), RobotSpec(11, 2)]
    trace = run_simulation(g, robots, undispersed_gathering_program(4))
    assert set(trace.termination_round.values()) == {map_round_budget(4) + 8}
    assert set(trace.final_positions) == {2}


def test_colocated_groups_and_replay():
    g = generate_family("random-connected", 6, 1)
    robots = [RobotSpec(4, 0), RobotSpec(9, 3), RobotSpec(30, 5)]
    trace = run_simulation(g, robots, hop_meeting_program(2, 6))
    groups = colocated_groups(trace, -1)
    assert sorted(groups.values()) == [(4,), (9,), (30,)]
    expected = replay(g, trace)
    for rnd in range(trace.num_rounds):
        assert trace.positions_at(rnd) == expected[rnd]
        groups = colocated_groups(trace, rnd)
        flat = sorted(lab for labs in groups.values() for lab in labs)
        assert flat == [4, 9, 30]


def test_legal_ports_in_trace():
    g = generate_family("star", 5)
    robots = [RobotSpec(2, 1), RobotSpec(17, 3)]
    trace = run_simulation(g, robots, hop_meeting_program(2, 5))
    here = dict(zip(trace.labels, trace.initial))
    for _, lab, node, _, _, act, _ in trace.records():
        if act.startswith("move:"):
            p = int(act[5:])
            assert p < g.degree(here[lab])
            assert g.follow(here[lab], p)[0] == node
        else:
            assert node == here[lab]
        here[lab] = node


def test_export_is_deterministic_and_reads_back():
    g = generate_family("cycle", 5)
    robots = [RobotSpec(6, 0), RobotSpec(13, 2)]
    a = list(run_simulation(g, robots, hop_meeting_program(2, 5)).lines({"x": 1}))
    b = list(run_simulation(g, robots, hop_meeting_program(2, 5)).lines({"x": 1}))
    assert a == b
    back = read_trace(a)
    again = run_simulation(g, robots, hop_meeting_program(2, 5))
    assert back.final_positions == again.final_positions
    assert back.termination_round == again.termination_round
    assert back.move_counts == again.move_counts
    assert list(back.lines({"x": 1})) == a


def test_records_stop_at_termination():
    prog = ScriptProgram({1: [STAY, STAY, STAY]})
    trace = run_simulation(EDGE, [RobotSpec(1, 0), RobotSpec(2, 1)], prog)
    per_label = {}
    for rec in trace.records():
        per_label[rec[1]] = per_label.get(rec[1], 0) + 1
    assert per_label == {1: 4, 2: 1}


def test_autopilot_does_not_change_traces():
    g = generate_family("random-connected", 6, 4)
    for robots in (
        [RobotSpec(5, 0), RobotSpec(8, 0), RobotSpec(21, 4)],
        [RobotSpec(2, 1), RobotSpec(35, 1)],
    ):
        on = run_simulation(g, robots, undispersed_gathering_program(6))
        off = run_simulation(g, robots, undispersed_gathering_program(6), SimConfig(autopilot=False))
        assert list(on.lines()) == list(off.lines())


def test_summary_record_keeps_outcome():
    g = generate_family("cycle", 5)
    robots = [RobotSpec(6, 0), RobotSpec(13, 0)]
    full = run_simulation(g, robots, undispersed_gathering_program(5))
    summ = run_simulation(g, robots, undispersed_gathering_program(5), SimConfig(record="summary"))
    assert summ.termination_round == full.termination_round
    assert summ.final_positions == full.final_positions
    assert len(summ.rows) < len(full.rows)
    with pytest.raises(ValueError):
        list(summ.records())


def test_message_bits_logged():
    g = generate_family("path", 3)
    robots = [RobotSpec(2, 1), RobotSpec(5, 1)]
    trace = run_simulation(g, robots, undispersed_gathering_program(3), SimConfig(record_messages=True))
    assert trace.message_bits > 0
