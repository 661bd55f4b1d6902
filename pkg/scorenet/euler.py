"""
.. module:: euler
   :platform: Unix
   :synopsis: Directed route optimization on score networks: minimal edge
              duplication and deterministic Eulerian circuits.

"""
import logging
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Dict, Tuple

import networkx as nx

logger = logging.getLogger(__name__)

WalkStats = namedtuple('WalkStats', ['nodes_visited', 'edges_traversed',
                                     'distinct_edges', 'duplicated'])


@dataclass(frozen=True)
class EulerizedGraph:
    """
    Edge support of a network with the extra traversals that balance it.

    Every support edge is required once; ``duplications`` holds the
    additional traversal count of the duplicated edges.
    """

    base: Tuple[Tuple[int, int], ...]
    duplications: Dict[Tuple[int, int], int]
    labels: Dict[int, object] = field(default_factory=dict)
    closure: Tuple[int, int] = None

    @property
    def total_duplications(self):
        return sum(self.duplications.values())

    def multiplicity(self, edge):
        return 1 + self.duplications.get(edge, 0)

    @property
    def n_edges(self):
        return len(self.base) + self.total_duplications

    @property
    def nodes(self):
        return sorted({node for edge in self.base for node in edge})

    def edge_multiset(self):
        return {edge: self.multiplicity(edge) for edge in self.base}


@dataclass(frozen=True)
class Circuit:
    """A closed walk; ``nodes`` starts and ends at ``start``."""

    nodes: Tuple[int, ...]
    start: int
    duplicated_edges: int = 0

    @property
    def edges_traversed(self):
        return len(self.nodes) - 1

    @property
    def nodes_visited(self):
        return len(self.nodes)

    def transitions(self):
        return list(zip(self.nodes[:-1], self.nodes[1:]))

    def rotate(self, offset):
        """Same closed walk started offset steps later."""
        body = list(self.nodes[:-1])
        if not body:
            return self
        offset %= len(body)
        body = body[offset:] + body[:offset]
        return Circuit(tuple(body + body[:1]), body[0], self.duplicated_edges)


def walk_stats(series) -> WalkStats:
    """Counts of the composer's own walk through the network."""
    values = [int(v) for v in series.values]
    edges_traversed = max(len(values) - 1, 0)
    distinct_edges = len(set(zip(values[:-1], values[1:])))

    return WalkStats(len(values), edges_traversed, distinct_edges,
                     edges_traversed - distinct_edges)


def eulerize_directed(net, closure=None) -> EulerizedGraph:
    """
    Duplicate the fewest edges so that every node is balanced.

    The surplus and deficit nodes are matched by a min-cost flow with
    unit hop cost on the edge support; the flow on an edge is the
    number of times it is duplicated.

    Parameters
    ----------
    net: ScoreNetwork
        Network whose distinct edges must all be covered.
    closure: tuple, optional
        A (last, first) edge added to the support when the support is
        not strongly connected, e.g. the return from the final chord of
        a walk to its first chord.
    """
    support = nx.DiGraph()
    support.add_nodes_from(net.nodes)
    support.add_edges_from(net.edges)
    if not support.number_of_edges():
        raise ValueError("eulerize_directed:\tnetwork has no edges")
    if not nx.is_weakly_connected(support):
        raise ValueError("eulerize_directed:\tsupport is not weakly connected")

    added = None
    if not nx.is_strongly_connected(support) and closure is not None:
        if not support.has_edge(*closure):
            support.add_edge(*closure)
            added = tuple(closure)
            logger.info("eulerize_directed:\tclosing the walk with %s -> %s",
                        *closure)
    if not nx.is_strongly_connected(support):
        raise ValueError("eulerize_directed:\tunbalanceable graph, some "
                         "nodes cannot be reached back along the support")

    flow_graph = nx.DiGraph()
    for node in support.nodes:
        flow_graph.add_node(node, demand=support.out_degree(node)
                            - support.in_degree(node))
    for source, target in support.edges:
        if source != target:
            flow_graph.add_edge(source, target, weight=1)

    try:
        flow = nx.min_cost_flow(flow_graph)
    except nx.NetworkXUnfeasible as exc:
        raise ValueError(f"eulerize_directed:\tunbalanceable graph: {exc}")

    duplications = {(source, target): int(amount)
                    for source, targets in flow.items()
                    for target, amount in targets.items() if amount > 0}
    base = tuple(sorted(support.edges))
    eulerized = EulerizedGraph(base, dict(sorted(duplications.items())),
                               labels=net.labels, closure=added)
    logger.info("eulerize_directed:\t%d support edges, %d duplications",
                len(base), eulerized.total_duplications)

    return eulerized


def euler_circuit(g: EulerizedGraph, start=None) -> Circuit:
    """
    Hierholzer traversal of the balanced multigraph.

    Successors are taken in ascending target order, so the circuit is
    deterministic for a given start.
    """
    successors = {}
    for (source, target), count in sorted(g.edge_multiset().items()):
        successors.setdefault(source, []).extend([target] * count)
    for source in successors:
        successors[source].sort()

    in_count, out_count = {}, {}
    for (source, target), count in g.edge_multiset().items():
        out_count[source] = out_count.get(source, 0) + count
        in_count[target] = in_count.get(target, 0) + count
    unbalanced = [node for node in g.nodes
                  if in_count.get(node, 0) != out_count.get(node, 0)]
    if unbalanced:
        raise ValueError(f"euler_circuit:\tunbalanced nodes {unbalanced}")

    if start is None:
        start = g.nodes[0]
    if start not in successors:
        raise ValueError(f"euler_circuit:\tstart node {start} has no edges")

    position = {node: 0 for node in successors}
    stack, circuit = [start], []
    while stack:
        node = stack[-1]
        targets = successors.get(node, [])
        if position.get(node, 0) < len(targets):
            stack.append(targets[position[node]])
            position[node] += 1
        else:
            circuit.append(stack.pop())
    circuit.reverse()

    if len(circuit) - 1 != g.n_edges:
        raise ValueError(f"euler_circuit:\tcircuit covers {len(circuit) - 1} "
                         f"of {g.n_edges} edges, graph is disconnected")

    return Circuit(tuple(circuit), start, g.total_duplications)


def circuit_lengths(series, circuit: Circuit):
    """Lengths of the original walk and the circuit in both conventions."""
    stats = walk_stats(series)
    return {
        'original': {'nodes': stats.nodes_visited,
                     'edges': stats.edges_traversed},
        'circuit': {'nodes': circuit.nodes_visited,
                    'edges': circuit.edges_traversed},
    }


def check_circuit(circuit: Circuit, g: EulerizedGraph) -> bool:
    """True when the circuit is closed and uses every edge its multiplicity."""
    if circuit.nodes[0] != circuit.nodes[-1]:
        return False
    used = {}
    for edge in circuit.transitions():
        used[edge] = used.get(edge, 0) + 1
    return used == g.edge_multiset()


def optimal_circuit(net, series=None):
    """
    Eulerize a score network and walk it from the series' first chord.

    When the support is not strongly connected the return from the last
    chord of the series to the first one closes the walk.
    """
    start, closure = None, None
    if series is not None and len(series):
        start = int(series.values[0])
        closure = (int(series.values[-1]), start)
    eulerized = eulerize_directed(net, closure=closure)
    return eulerized, euler_circuit(eulerized, start)
