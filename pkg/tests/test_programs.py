import pytest

from robogather.engine import RobotSpec, SimConfig, run_simulation
from robogather.graph import generate_family
from robogather.oracle import check_detection_soundness, check_step_dichotomy, gathered
from robogather.programs import (
    RobotState,
    assign_initial_states,
    faster_gathering_program,
    hop_meeting_program,
    placement_specs,
    undispersed_gathering_program,
    uxs_gathering_program,
)
from robogather.schedule import map_round_budget
from robogather.uxs import provide_sequence


def test_initial_states():
    states = assign_initial_states({0: [5, 9], 1: [7], 2: [8, 3, 4]})
    assert states[5] == RobotState("finder", 5)
    assert states[9] == RobotState("helper", 5)
    assert states[7] == RobotState("waiter", -1)
    assert states[3].mode == "finder"
    assert states[4] == states[8] == RobotState("helper", 3)
    assert assign_initial_states(placement_specs([(5, 0), (9, 0)])) == {
        5: RobotState("finder", 5),
        9: RobotState("helper", 5),
    }


def test_undispersed_all_on_one_node():
    g = generate_family("random-connected", 5, 2)
    robots = placement_specs([(4, 3), (10, 3), (22, 3)])
    trace = run_simulation(g, robots, undispersed_gathering_program(5))
    assert set(trace.termination_round.values()) == {map_round_budget(5) + 10}
    assert set(trace.final_positions) == {3}


def test_undispersed_dispersed_start_never_moves():
    g = generate_family("cycle", 5)
    robots = placement_specs([(4, 0), (10, 2), (22, 4)])
    trace = run_simulation(g, robots, undispersed_gathering_program(5))
    assert set(trace.move_counts.values()) == {0}
    assert trace.final_positions == (0, 2, 4)


def test_undispersed_two_groups_on_c6():
    g = generate_family("cycle", 6)
    robots = placement_specs([(3, 0), (12, 0), (5, 3), (6, 3), (20, 1), (30, 4)])
    trace = run_simulation(g, robots, undispersed_gathering_program(6))
    assert gathered(trace)
    assert set(trace.final_positions) == {0}
    assert max(trace.termination_round.values()) == map_round_budget(6) + 12


def test_minimum_finder_tour_is_2n_minus_2_moves():
    g = generate_family("path", 5)
    robots = placement_specs([(2, 2), (9, 2)])
    trace = run_simulation(g, robots, undispersed_gathering_program(5))
    finder = next(a for a in trace.agents if a.label == 2)
    assert len(finder.tour) == 8 and finder.tour_pos == 8


def test_group_ids_never_increase_in_tour():
    g = generate_family("cycle", 6)
    robots = placement_specs([(3, 0), (12, 0), (5, 3), (6, 3), (20, 1), (30, 4)])
    trace = run_simulation(g, robots, undispersed_gathering_program(6))
    start = map_round_budget(6)
    last = {}
    for rnd, lab, _, _, gid, _, _ in trace.records():
        if rnd < start:
            continue
        if lab in last and last[lab] != -1:
            assert gid <= last[lab]
        last[lab] = gid


def test_uxs_adjacent_2_and_3():
    g = generate_family("path", 2)
    seq = provide_sequence(2, "brute-force")
    trace = run_simulation(g, placement_specs([(2, 0), (3, 1)]), uxs_gathering_program(2, 2, seq))
    merge = trace.event_rounds("MERGE")
    assert merge and merge[0] < 2 * seq.T
    assert gathered(trace) and check_detection_soundness(trace)


def test_uxs_single_robot():
    seq = provide_sequence(3, "brute-force")
    g = generate_family("path", 3)
    trace = run_simulation(g, placement_specs([(1, 1)]), uxs_gathering_program(3, 2, seq))
    assert trace.termination_round == {1: 2 * seq.T * 2}


def test_uxs_mixed_start_on_p4():
    seq = provide_sequence(4, "brute-force")
    g = generate_family("path", 4)
    robots = placement_specs([(4, 0), (6, 0), (5, 3)])
    trace = run_simulation(g, robots, uxs_gathering_program(4, 2, seq))
    assert gathered(trace) and check_detection_soundness(trace)
    assert trace.last_round <= 2 * seq.T * (6 .bit_length() + 1) + 2 * seq.T


def test_hop_examples():
    c6 = generate_family("cycle", 6)
    prog = hop_meeting_program(2, 6)
    for a, b in ((5, 6), (6, 5), (1, 36)):
        trace = run_simulation(c6, placement_specs([(a, 0), (b, 2)]), prog)
        assert len(set(trace.positions_at(prog.duration - 1))) == 1
    p4 = generate_family("path", 4)
    trace = run_simulation(p4, placement_specs([(2, 0), (3, 2)]), hop_meeting_program(1, 4))
    assert trace.last_round == hop_meeting_program(1, 4).duration


def test_hop_radius_range():
    with pytest.raises(ValueError):
        hop_meeting_program(6, 8)


@pytest.fixture(scope="module")
def seq4():
    return provide_sequence(4, "brute-force")


def run_faster(g, robots, seq, **kw):
    prog = faster_gathering_program(g.n, 2, seq, **kw)
    return prog, run_simulation(g, robots, prog)


def test_faster_undispersed(seq4):
    g = generate_family("cycle", 4)
    prog, trace = run_faster(g, placement_specs([(3, 1), (9, 1), (14, 2)]), seq4)
    assert set(trace.termination_round.values()) == {prog.schedule.R}
    assert gathered(trace) and check_detection_soundness(trace)


def test_faster_adjacent(seq4):
    g = generate_family("path", 4)
    prog, trace = run_faster(g, placement_specs([(3, 1), (9, 2)]), seq4)
    assert set(trace.termination_round.values()) == {prog.schedule.S[2]}
    assert check_step_dichotomy(trace, prog.schedule)


def test_faster_distance_three(seq4):
    g = generate_family("path", 4)
    prog, trace = run_faster(g, placement_specs([(3, 0), (9, 3)]), seq4)
    assert gathered(trace)
    assert max(trace.termination_round.values()) <= prog.schedule.S[4]
    assert check_detection_soundness(trace)
    assert check_step_dichotomy(trace, prog.schedule)


def test_faster_single_robot(seq4):
    g = generate_family("path", 4)
    prog, trace = run_faster(g, placement_specs([(7, 2)]), seq4)
    sch = prog.schedule
    assert trace.termination_round == {7: sch.S[7] + 2 * seq4.T * (3 + 1)}


def test_faster_start_step(seq4):
    g = generate_family("path", 4)
    prog, trace = run_faster(g, placement_specs([(3, 0), (9, 3)]), seq4, start_step=4)
    sch = prog.schedule
    assert gathered(trace)
    assert max(trace.termination_round.values()) == sch.S[4] - sch.S[3]
    assert check_step_dichotomy(trace, sch, 4)


def test_autopilot_equivalence_faster(seq4):
    g = generate_family("star", 4)
    robots = placement_specs([(3, 1), (9, 2), (13, 3)])
    prog = faster_gathering_program(4, 2, seq4)
    on = run_simulation(g, robots, prog)
    off = run_simulation(g, robots, prog, SimConfig(autopilot=False))
    assert list(on.lines()) == list(off.lines())
