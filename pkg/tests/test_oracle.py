import itertools
from math import comb

import pytest

from robogather.engine import RobotSpec, run_simulation
from robogather.enumeration import enumerate_connected
from robogather.errors import FewerThanTwoRobots, ScopeTooLarge
from robogather.graph import generate_family, parse_graph, shortest_path_distance
from robogather.oracle import (
    check_detection_soundness,
    check_hop_lemma,
    check_step_dichotomy,
    dichotomy_rounds,
    min_pairwise_distance,
)
from robogather.programs import faster_gathering_program
from robogather.schedule import compute_schedule
from robogather.trace import Row, Trace
from robogather.uxs import provide_sequence


def forged(rows, terminated):
    labels = (1, 2, 3)
    t = Trace(labels=labels, initial=rows[0][1])
    for rnd, pos in rows:
        t.rows.append(Row(rnd, pos, ("stay",) * 3, ("x",) * 3, (0,) * 3, ((),) * 3))
    t.last_round = rows[-1][0]
    t.final_positions = rows[-1][1]
    t.termination_round = terminated
    return t


def test_min_distance_examples():
    p5 = generate_family("path", 5)
    assert min_pairwise_distance(p5, [2, 2]) == 0
    assert min_pairwise_distance(p5, [RobotSpec(1, 0), RobotSpec(2, 4)]) == 4
    assert min_pairwise_distance(p5, {0: 1, 4: 1}) == 4
    assert min_pairwise_distance(p5, {3: 2}) == 0
    with pytest.raises(FewerThanTwoRobots):
        min_pairwise_distance(p5, [1])


def test_min_distance_vs_bfs():
    g = generate_family("random-connected", 8, 11)
    nodes = [1, 4, 6, 7]
    direct = min(shortest_path_distance(g, a, b) for a, b in itertools.combinations(nodes, 2))
    assert min_pairwise_distance(g, nodes) == direct


def test_detection_soundness_forged():
    ok = forged([(0, (0, 1, 1)), (1, (1, 1, 1)), (2, (1, 1, 1))], {1: 2, 2: 2, 3: 2})
    assert check_detection_soundness(ok)
    early = forged([(0, (0, 1, 1)), (1, (1, 1, 2)), (2, (1, 1, 1))], {1: 1, 2: 2, 3: 2})
    assert not check_detection_soundness(early)


def test_dichotomy_forged():
    sch = compute_schedule(2, 2, 1)
    rows_ok = [(r, (0, 1, 2)) for r in range(sch.S[1] + 1)]
    assert check_step_dichotomy(forged(rows_ok, {}), sch)
    rows_bad = [(r, (0, 1, 1)) for r in range(sch.S[1] + 1)]
    assert not check_step_dichotomy(forged(rows_bad, {}), sch)
    assert dichotomy_rounds(sch) == tuple(s - 1 for s in sch.S[1:7])


def test_real_traces_pass():
    seq = provide_sequence(4, "brute-force")
    g = generate_family("path", 4)
    prog = faster_gathering_program(4, 2, seq)
    for robots in ([RobotSpec(3, 1), RobotSpec(9, 1)], [RobotSpec(3, 1), RobotSpec(9, 2)]):
        trace = run_simulation(g, robots, prog)
        assert check_detection_soundness(trace)
        assert check_step_dichotomy(trace, prog.schedule)


def test_hop_lemma_small_and_count():
    for c in (2, 3):
        report = check_hop_lemma(6, c)
        assert report.passed and report.verdict == "pass"
        expected = 0
        for n in range(2, 7):
            k = n // c + 1
            if 2 <= k <= n:
                expected += comb(n, k) * sum(1 for _ in enumerate_connected(n, "structures"))
        assert report.instances == expected


def test_hop_lemma_tightness():
    report = check_hop_lemma(6, 2, bound=1)
    assert not report.passed
    g, nodes, d = report.counterexample
    assert d == 2 and min_pairwise_distance(g, nodes) == 2
    text = report.render()
    assert "verdict: fail" in text
    block = text.split("counterexample:")[1].split("\n", 1)[1].split("placement:")[0]
    assert parse_graph(block) == g


def test_hop_lemma_scope():
    with pytest.raises(ScopeTooLarge):
        check_hop_lemma(9, 2)
