"""Test directed edge duplication and Euler circuits in euler."""
import itertools

import networkx as nx
import numpy as np
import pytest

from scorenet.euler import (Circuit, EulerizedGraph, check_circuit,
                            circuit_lengths, euler_circuit, eulerize_directed,
                            optimal_circuit, walk_stats)
from scorenet.network import ScoreNetwork, build_network
from scorenet.pcset_core import normal_order, pcset_name
from scorenet.score_ingest import ChordEvent, ChordSequence
from scorenet.sequence import build_series

PCSETS = [normal_order(c) for c in itertools.combinations(range(12), 3)][:40]


def graph_network(edges):
    graph = nx.DiGraph()
    for node in sorted({n for edge in edges for n in edge}):
        graph.add_node(node, pcset=PCSETS[node], label=pcset_name(PCSETS[node]),
                       count=1)
    graph.add_edges_from(edges, weight=1)
    return ScoreNetwork(graph)


def series_of(ids):
    return build_series(ChordSequence(tuple(
        ChordEvent(idx, idx + 1, PCSETS[value]) for idx, value in enumerate(ids))))


def oracle_duplications(edges):
    """Fewest support edges to add, with repetition, to balance every node."""
    nodes = sorted({n for edge in edges for n in edge})
    balance = {node: 0 for node in nodes}
    for source, target in edges:
        balance[source] += 1
        balance[target] -= 1
    k = 0
    while True:
        for extra in itertools.combinations_with_replacement(edges, k):
            shifted = dict(balance)
            for source, target in extra:
                shifted[source] += 1
                shifted[target] -= 1
            if not any(shifted.values()):
                return k
        k += 1


def strongly_connected(edges):
    graph = nx.DiGraph(edges)
    return graph.number_of_nodes() > 1 and nx.is_strongly_connected(graph)


def check_against_oracle(edges):
    net = graph_network(edges)
    eulerized = eulerize_directed(net)
    assert eulerized.total_duplications == oracle_duplications(edges), edges
    circuit = euler_circuit(eulerized)
    assert check_circuit(circuit, eulerized)
    assert circuit.edges_traversed == len(edges) + eulerized.total_duplications


def test_walk_stats():
    assert walk_stats(series_of([0, 1, 0])) == (3, 2, 2, 0)
    assert walk_stats(series_of([0, 1, 0, 1, 0])) == (5, 4, 2, 2)


def test_three_cycle():
    eulerized = eulerize_directed(graph_network([(0, 1), (1, 2), (2, 0)]))
    assert eulerized.total_duplications == 0
    circuit = euler_circuit(eulerized, 0)
    assert circuit.nodes == (0, 1, 2, 0)
    assert circuit.edges_traversed == 3
    assert circuit.nodes_visited == 4
    assert circuit.rotate(1).nodes == (1, 2, 0, 1)


def test_balanced_two_cycles():
    edges = [(0, 1), (1, 0), (0, 2), (2, 0)]
    assert eulerize_directed(graph_network(edges)).total_duplications == 0


def test_two_triangles():
    """Two triangles sharing node 0, successors in ascending order."""
    edges = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]
    eulerized = eulerize_directed(graph_network(edges))
    circuit = euler_circuit(eulerized, 0)
    assert circuit.nodes == (0, 1, 2, 0, 3, 4, 0)
    assert check_circuit(circuit, eulerized)


def test_self_loops_are_covered():
    edges = [(0, 0), (0, 1), (1, 0)]
    eulerized = eulerize_directed(graph_network(edges))
    circuit = euler_circuit(eulerized, 0)
    assert circuit.edges_traversed == 3
    assert check_circuit(circuit, eulerized)


def test_not_strongly_connected():
    """a->b, b->c, a->c needs the closing edge to be walked."""
    net = graph_network([(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ValueError):
        eulerize_directed(net)
    eulerized = eulerize_directed(net, closure=(2, 0))
    assert eulerized.closure == (2, 0)
    assert eulerized.total_duplications == 1
    assert eulerized.duplications == {(2, 0): 1}
    assert check_circuit(euler_circuit(eulerized, 0), eulerized)


def test_eulerize_errors():
    with pytest.raises(ValueError):
        eulerize_directed(graph_network([(0, 1), (1, 0), (2, 3), (3, 2)]))
    empty = nx.DiGraph()
    empty.add_node(0, pcset=PCSETS[0], label='', count=1)
    with pytest.raises(ValueError):
        eulerize_directed(ScoreNetwork(empty))


def test_euler_circuit_errors():
    unbalanced = EulerizedGraph(base=((0, 1),), duplications={})
    with pytest.raises(ValueError):
        euler_circuit(unbalanced)
    cycle = eulerize_directed(graph_network([(0, 1), (1, 0)]))
    with pytest.raises(ValueError):
        euler_circuit(cycle, start=7)


@pytest.mark.slow
def test_exhaustive_small_graphs():
    """Every strongly connected 3-node graph and 4-node graphs up to 8 edges."""
    for n_nodes, max_edges in ((3, 6), (4, 8)):
        possible = list(itertools.permutations(range(n_nodes), 2))
        for size in range(n_nodes, max_edges + 1):
            for edges in itertools.combinations(possible, size):
                if strongly_connected(edges):
                    check_against_oracle(list(edges))


@pytest.mark.slow
def test_exhaustive_five_node_graphs():
    """Every 5-node graph with at most 8 edges.

    Strongly connected supports match the oracle; weakly connected ones
    that are not strongly connected are refused without a closure.
    """
    possible = list(itertools.permutations(range(5), 2))
    for size in range(4, 9):
        for edges in itertools.combinations(possible, size):
            edges = list(edges)
            graph = nx.DiGraph(edges)
            if graph.number_of_nodes() < 5 or not nx.is_weakly_connected(graph):
                continue
            if nx.is_strongly_connected(graph):
                check_against_oracle(edges)
            else:
                with pytest.raises(ValueError):
                    eulerize_directed(graph_network(edges))


def test_optimal_circuit_closed_walk():
    """A closed walk is itself a covering, the circuit is no longer."""
    rng = np.random.default_rng(1)
    for _ in range(30):
        walk = [int(v) for v in rng.integers(0, 6, 40)]
        walk.append(walk[0])
        series = series_of(walk)
        net = build_network(series)
        eulerized, circuit = optimal_circuit(net, series)
        assert circuit.nodes[0] == int(series.values[0])
        assert check_circuit(circuit, eulerized)
        assert circuit.edges_traversed <= walk_stats(series).edges_traversed


def test_optimal_circuit_open_walk():
    """An open walk plus its way back bounds the circuit."""
    rng = np.random.default_rng(2)
    for _ in range(30):
        walk = [int(v) for v in rng.integers(0, 6, 40)]
        series = series_of(walk)
        net = build_network(series)
        first, last = int(series.values[0]), int(series.values[-1])
        eulerized, circuit = optimal_circuit(net, series)
        assert check_circuit(circuit, eulerized)
        length = walk_stats(series).edges_traversed
        if eulerized.closure is not None:
            assert circuit.edges_traversed <= length + 1
        else:
            back = nx.shortest_path_length(net.graph, last, first)
            assert circuit.edges_traversed <= length + back


def test_circuit_lengths():
    series = series_of([0, 1, 2, 0])
    _, circuit = optimal_circuit(build_network(series), series)
    assert circuit_lengths(series, circuit) == {
        'original': {'nodes': 4, 'edges': 3},
        'circuit': {'nodes': 4, 'edges': 3}}


def test_check_circuit_rejects():
    eulerized = eulerize_directed(graph_network([(0, 1), (1, 2), (2, 0)]))
    assert not check_circuit(Circuit((0, 1, 2), 0), eulerized)
    assert not check_circuit(Circuit((0, 1, 0), 0), eulerized)
