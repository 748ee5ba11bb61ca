import itertools
import math

import networkx as nx
import pytest

from robogather.enumeration import (
    are_isomorphic,
    enumerate_connected,
    labeling_count,
)
from robogather.errors import ScopeTooLarge
from robogather.graph import from_edges, generate_family, random_port_labeling, relabel_ports

KNOWN_COUNTS = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853}


def connected_by_matrix_filtering(n):
    """Every labeled edge set on n nodes, kept if connected, deduped by trying
    all vertex permutations."""
    pairs = list(itertools.combinations(range(n), 2))
    classes = set()
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        g = nx.Graph(edges)
        g.add_nodes_from(range(n))
        if not nx.is_connected(g):
            continue
        key = min(
            tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges))
            for perm in itertools.permutations(range(n))
        )
        classes.add(key)
    return classes


@pytest.mark.parametrize("n,count", sorted(KNOWN_COUNTS.items()))
def test_structure_counts(n, count):
    assert sum(1 for _ in enumerate_connected(n)) == count


def test_n4_matches_matrix_filtering():
    ours = list(enumerate_connected(4))
    theirs = connected_by_matrix_filtering(4)
    assert len(ours) == len(theirs) == 6


def test_n6_against_networkx_atlas():
    atlas = [g for g in nx.graph_atlas_g() if g.number_of_nodes() == 6 and nx.is_connected(g)]
    ours = [nx.Graph(list(g.edges)) for g in enumerate_connected(6)]
    assert len(ours) == len(atlas)
    for h in atlas:
        assert sum(nx.is_isomorphic(h, g) for g in ours) == 1


def test_structures_are_pairwise_non_isomorphic():
    graphs = list(enumerate_connected(5))
    for a, b in itertools.combinations(graphs, 2):
        assert not are_isomorphic(a, b)


def test_all_labelings_count_n3():
    got = sum(1 for _ in enumerate_connected(3, "structures-with-all-port-labelings"))
    # path: 1! * 2! * 1!; triangle: 2!^3
    assert got == 2 + 8
    assert got == sum(labeling_count(g) for g in enumerate_connected(3))


def test_all_labelings_distinct_n4():
    seen = set()
    for g in enumerate_connected(4, "structures-with-all-port-labelings"):
        assert g.ports not in seen
        seen.add(g.ports)
    assert len(seen) == sum(
        math.prod(math.factorial(d) for d in g.degrees) for g in enumerate_connected(4)
    )


def test_scope_caps():
    with pytest.raises(ScopeTooLarge):
        next(enumerate_connected(9))
    with pytest.raises(ScopeTooLarge):
        next(enumerate_connected(5, "structures-with-all-port-labelings"))


def test_isomorphism_basics():
    g = generate_family("random-connected", 7, 1)
    assert are_isomorphic(g, g)
    assert are_isomorphic(g, g, "port-preserving")
    p3 = generate_family("path", 3)
    k3 = generate_family("complete", 3)
    assert not are_isomorphic(p3, k3)


def test_c5_labelings_underlying_vs_port_preserving():
    c5 = generate_family("cycle", 5)
    a = random_port_labeling(c5, 1)
    b = random_port_labeling(c5, 2)
    assert are_isomorphic(a, b)
    # brute-force bijection search as an independent check
    def brute(g1, g2):
        e2 = {frozenset(e) for e in g2.edges}
        return any(
            all(frozenset((perm[u], perm[v])) in e2 for u, v in g1.edges)
            for perm in itertools.permutations(range(5))
        )
    assert brute(a, b)


def test_port_preserving_detects_relabeling():
    g = from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    swapped = relabel_ports(g, [[1, 0], [0, 1], [0, 1], [0, 1]])
    assert are_isomorphic(g, swapped)
    # renumbering nodes keeps port tables: node v -> (v+1) mod 4
    perm = [1, 2, 3, 0]
    table = [None] * 4
    for v in range(4):
        table[perm[v]] = [(perm[u], q) for u, q in g.ports[v]]
    from robogather.graph import validate_graph
    assert are_isomorphic(g, validate_graph(table), "port-preserving")


def test_isomorphism_is_equivalence_on_n3_labelings():
    graphs = list(enumerate_connected(3, "structures-with-all-port-labelings"))
    for mode in ("underlying", "port-preserving"):
        rel = {(i, j): are_isomorphic(a, b, mode) for i, a in enumerate(graphs) for j, b in enumerate(graphs)}
        idx = range(len(graphs))
        assert all(rel[i, i] for i in idx)
        assert all(rel[i, j] == rel[j, i] for i in idx for j in idx)
        assert all(not (rel[i, j] and rel[j, k]) or rel[i, k] for i in idx for j in idx for k in idx)
