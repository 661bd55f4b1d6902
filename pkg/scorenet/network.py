"""
.. module:: network
   :platform: Unix
   :synopsis: Directed weighted score networks, their layers per segment,
              degree statistics, communities, power-law fits and
              maximal common subgraph similarity.

"""
import logging
from collections import Counter, namedtuple
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .pcset_core import pcset_name

logger = logging.getLogger(__name__)

RANKING_KEYS = ('total', 'out', 'in', 'weighted')

DegreeRecord = namedtuple('DegreeRecord',
                          ['in_degree', 'out_degree', 'total', 'weighted'])


class ScoreNetwork:
    """
    Directed weighted graph of chord successions.

    Nodes are pitch-class-set ids carrying ``pcset``, ``label`` and
    ``count`` attributes; edges carry the traversal count as ``weight``.
    """

    def __init__(self, graph, name=''):
        self.graph = graph
        self.name = name

    def __len__(self):
        return self.graph.number_of_nodes()

    def __repr__(self):
        return (f"{type(self).__name__}({self.name!r}, nodes={len(self)}, "
                f"edges={self.n_edges})")

    @property
    def nodes(self):
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> Dict[Tuple[int, int], int]:
        return {(u, v): data['weight']
                for u, v, data in sorted(self.graph.edges(data=True))}

    @property
    def n_edges(self):
        return self.graph.number_of_edges()

    @property
    def total_weight(self):
        return sum(self.edges.values())

    @property
    def labels(self):
        return {node: self.graph.nodes[node]['pcset'] for node in self.nodes}

    @property
    def counts(self):
        return {node: self.graph.nodes[node]['count'] for node in self.nodes}

    def pcset(self, node):
        return self.graph.nodes[node]['pcset']


class LayerNetwork(ScoreNetwork):
    """The score network of the events of one segment."""

    def __init__(self, graph, segment_id, event_range, bars, name=''):
        super().__init__(graph, name=name)
        self.segment_id = segment_id
        self.event_range = event_range
        self.bars = tuple(int(bar) for bar in bars)

    @property
    def bar_range(self):
        return (self.bars[0], self.bars[-1])


@dataclass(frozen=True)
class DegreeStats:
    per_node: Dict[int, DegreeRecord]
    mean_degree: float

    def ranking(self, key='total', counts=None):
        """Nodes by descending degree, ties by count then lower id."""
        if key not in RANKING_KEYS:
            raise ValueError(f"DegreeStats.ranking:\tunknown ranking key {key}, "
                             f"choose from {RANKING_KEYS}")
        field = {'in': 'in_degree', 'out': 'out_degree'}.get(key, key)
        counts = counts or {}
        return sorted(self.per_node,
                      key=lambda node: (-getattr(self.per_node[node], field),
                                        -counts.get(node, 0), node))


@dataclass(frozen=True)
class CommunityPartition:
    membership: Dict[int, int]
    modularity: float
    communities: Tuple[frozenset, ...]
    resolution: float = 1.0

    @property
    def n_communities(self):
        return len(self.communities)


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    xmin: int
    ks_stat: float
    n_tail: int
    method: str = 'mle'

    def to_dict(self):
        return {'alpha': self.alpha, 'xmin': self.xmin,
                'ks_stat': self.ks_stat, 'n_tail': self.n_tail,
                'method': self.method}


def _make_graph(walk, labels, counts):
    graph = nx.DiGraph()
    for node in sorted(set(walk)):
        pcset = labels[node]
        graph.add_node(node, pcset=pcset, label=pcset_name(pcset),
                       count=int(counts[node]))
    for source, target in zip(walk[:-1], walk[1:]):
        if graph.has_edge(source, target):
            graph[source][target]['weight'] += 1
        else:
            graph.add_edge(source, target, weight=1)

    return graph


def build_network(series) -> ScoreNetwork:
    """One directed edge increment per consecutive pair of the series."""
    if len(series) < 2:
        raise ValueError(f"build_network:\tneed at least 2 events, "
                         f"got {len(series)}")
    walk = [int(v) for v in series.values]
    net = ScoreNetwork(_make_graph(walk, series.dictionary, series.counts))
    logger.info("build_network:\t%d nodes, %d distinct edges", len(net),
                net.n_edges)

    return net


def network_from_walk(walk, labels, counts=None, name='') -> ScoreNetwork:
    """
    Score network of any node walk, an Euler circuit included.

    Counts default to node visits; the repeated end of a closed walk is
    not counted twice.
    """
    walk = [int(node) for node in walk]
    if len(walk) < 2:
        raise ValueError("network_from_walk:\tneed at least 2 nodes")
    if counts is None:
        visits = walk[:-1] if walk[0] == walk[-1] else walk
        counts = Counter(visits)
        counts.setdefault(walk[-1], 1)

    return ScoreNetwork(_make_graph(walk, labels, counts), name=name)


def degree_stats(net: ScoreNetwork) -> DegreeStats:
    """Unweighted in, out and total degree over distinct edges, plus strength."""
    graph = net.graph
    per_node = {}
    for node in net.nodes:
        in_degree = graph.in_degree(node)
        out_degree = graph.out_degree(node)
        weighted = (graph.in_degree(node, weight='weight')
                    + graph.out_degree(node, weight='weight'))
        per_node[node] = DegreeRecord(in_degree, out_degree,
                                      in_degree + out_degree, weighted)
    mean_degree = net.n_edges / len(net) if len(net) else 0.0

    return DegreeStats(per_node, mean_degree)


def rank_nodes(net: ScoreNetwork, key='total'):
    """Nodes of net by descending degree under key."""
    return degree_stats(net).ranking(key, net.counts)


def degree_distribution(net: ScoreNetwork, key='total'):
    """(degree, number of nodes, probability) rows of the degree histogram."""
    stats = degree_stats(net)
    field = {'in': 'in_degree', 'out': 'out_degree'}.get(key, key)
    histogram = Counter(getattr(rec, field) for rec in stats.per_node.values())
    size = len(net)
    return [(degree, count, count / size)
            for degree, count in sorted(histogram.items())]


def undirected_projection(net: ScoreNetwork) -> nx.Graph:
    """Undirected graph with w(u, v) + w(v, u) as edge weight."""
    projection = nx.Graph()
    projection.add_nodes_from(net.nodes)
    for (source, target), weight in net.edges.items():
        if projection.has_edge(source, target):
            projection[source][target]['weight'] += weight
        else:
            projection.add_edge(source, target, weight=weight)

    return projection


def detect_communities(net: ScoreNetwork, seed: int = 0,
                       resolution: float = 1.0) -> CommunityPartition:
    """Louvain communities of the symmetrized network and their modularity."""
    if not len(net):
        raise ValueError("detect_communities:\tempty network")
    projection = undirected_projection(net)

    if projection.number_of_edges() == 0:
        found = [{node} for node in projection.nodes]
        quality = 0.0
    else:
        found = nx.community.louvain_communities(projection, weight='weight',
                                                 resolution=resolution,
                                                 seed=seed)
        quality = nx.community.modularity(projection, found, weight='weight',
                                          resolution=resolution)

    communities = tuple(sorted((frozenset(comm) for comm in found),
                               key=lambda comm: (-len(comm), min(comm))))
    membership = {node: idx for idx, comm in enumerate(communities)
                  for node in comm}
    logger.info("detect_communities:\t%d communities, Q = %.3f",
                len(communities), quality)

    return CommunityPartition(membership, float(quality), communities,
                              resolution)


def _alpha_closed_form(tail, xmin):
    return 1.0 + len(tail) / np.sum(np.log(tail / (xmin - 0.5)))


def _alpha_mle(tail, xmin):
    """Maximize the discrete power-law likelihood over alpha."""
    log_sum = np.sum(np.log(tail))
    size = len(tail)

    def negative_log_likelihood(alpha):
        return size * np.log(zeta(alpha, xmin)) + alpha * log_sum

    start = _alpha_closed_form(tail, xmin)
    upper = max(10.0, 2 * start)
    result = minimize_scalar(negative_log_likelihood, bounds=(1.0 + 1e-6, upper),
                             method='bounded', options={'xatol': 1e-8})
    return float(result.x)


def _ks_distance(tail, xmin, alpha):
    support = np.arange(xmin, tail[-1] + 1)
    fitted = 1.0 - zeta(alpha, support + 1) / zeta(alpha, xmin)
    empirical = np.searchsorted(tail, support, side='right') / len(tail)
    return float(np.max(np.abs(empirical - fitted)))


def fit_power_law(degrees, xmin=None, method='mle') -> PowerLawFit:
    """
    Discrete power-law fit p(x) ~ x^-alpha of the tail x >= xmin.

    Unless given, xmin is the observed value minimizing the
    Kolmogorov-Smirnov distance between the empirical and fitted tail
    distributions. ``method='approx'`` uses the closed form
    ``1 + n / sum(ln(x / (xmin - 1/2)))``; the default ``'mle'`` maximizes
    the exact likelihood (Hurwitz zeta normalization) starting from it,
    so its alpha differs slightly from the closed form. Use
    ``method='approx'`` to get the closed-form value.
    """
    data = np.sort(np.asarray(list(degrees), dtype=float))
    if method not in ('mle', 'approx'):
        raise ValueError(f"fit_power_law:\tunknown method {method}")
    if data.size < 2:
        raise ValueError("fit_power_law:\tneed at least 2 values")
    if data[0] < 1 or np.any(data != np.round(data)):
        raise ValueError("fit_power_law:\tvalues must be positive integers")
    if data[0] == data[-1]:
        raise ValueError(f"fit_power_law:\tall values equal {int(data[0])}")

    estimator = _alpha_mle if method == 'mle' else _alpha_closed_form
    if xmin is not None:
        candidates = [float(xmin)]
    else:
        candidates = np.unique(data)[:-1]

    best = None
    for candidate in candidates:
        tail = data[data >= candidate]
        if tail.size < 2:
            continue
        alpha = float(estimator(tail, candidate))
        ks_stat = _ks_distance(tail, candidate, alpha)
        if best is None or ks_stat < best.ks_stat:
            best = PowerLawFit(alpha, int(candidate), ks_stat, int(tail.size),
                               method)

    if best is None:
        raise ValueError("fit_power_law:\tfewer than 2 tail points")
    logger.info("fit_power_law:\talpha %.3f, xmin %d, ks %.4f, n_tail %d",
                best.alpha, best.xmin, best.ks_stat, best.n_tail)

    return best


def layer_networks(series, seg) -> List[LayerNetwork]:
    """One network per segment; no edges cross a breakpoint."""
    if seg.breakpoints[-1] != len(series):
        raise ValueError(f"layer_networks:\tsegmentation covers "
                         f"{seg.breakpoints[-1]} events, series has "
                         f"{len(series)}")
    layers = []
    for segment_id, (start, end) in enumerate(seg.segments):
        walk = [int(v) for v in series.values[start:end]]
        counts = Counter(walk)
        graph = _make_graph(walk, series.dictionary, counts)
        layers.append(LayerNetwork(graph, segment_id, (start, end),
                                   series.bars[start:end],
                                   name=f"section {segment_id}"))

    return layers


def _pcset_graph(net):
    """The network relabelled by pitch-class set."""
    return nx.relabel_nodes(net.graph, {node: net.pcset(node)
                                        for node in net.nodes})


def mcs_similarity(g1: ScoreNetwork, g2: ScoreNetwork) -> float:
    """
    Maximal common subgraph similarity of two labelled networks.

    Nodes are matched by pitch-class set; the common subgraph is the
    largest weakly connected component of the shared nodes and shared
    directed edges, measured against the larger node count.
    """
    if not len(g1) or not len(g2):
        raise ValueError("mcs_similarity:\tempty graph")
    first, second = _pcset_graph(g1), _pcset_graph(g2)
    common = nx.DiGraph()
    common.add_nodes_from(set(first.nodes) & set(second.nodes))
    common.add_edges_from(edge for edge in first.edges
                          if second.has_edge(*edge))
    if not common.number_of_nodes():
        return 0.0
    largest = max(len(comp) for comp in nx.weakly_connected_components(common))

    return largest / max(len(g1), len(g2))


def similarity_matrix(layers) -> np.ndarray:
    """All pairwise mcs similarities of the layers."""
    size = len(layers)
    matrix = np.eye(size)
    for i in range(size):
        for j in range(i + 1, size):
            matrix[i, j] = matrix[j, i] = mcs_similarity(layers[i], layers[j])

    return matrix


def layer_summary(layer: ScoreNetwork, key='total'):
    """Node and edge counts, mean degree, hub and tail fit of a layer."""
    stats = degree_stats(layer)
    hub = stats.ranking(key, layer.counts)[0]
    totals = [rec.total for rec in stats.per_node.values()]
    power_law = None
    if len(set(totals)) >= 2 and min(totals) >= 1:
        try:
            power_law = fit_power_law(totals).to_dict()
        except ValueError as exc:
            logger.debug("layer_summary:\tno power-law fit: %s", exc)

    return {
        'nodes': len(layer),
        'edges': layer.n_edges,
        'total_weight': layer.total_weight,
        'mean_degree': stats.mean_degree,
        'hub': str(layer.pcset(hub)),
        'hub_label': pcset_name(layer.pcset(hub)),
        'power_law': power_law,
    }
