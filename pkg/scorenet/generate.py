"""
.. module:: generate
   :platform: Unix
   :synopsis: Barabasi-Albert score networks with degree-ranked chords,
              their Eulerian traversal and voice leading statistics.

"""
import logging
import os
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict

import networkx as nx
import numpy as np

from .euler import Circuit, circuit_lengths, optimal_circuit, walk_stats
from .network import build_network, rank_nodes
from .pcset_core import (DOMINANT_SEVENTH, MINOR_TRIAD, classify_chord,
                         pcset_name, vl_operator_between)
from .score_ingest import ingest
from .sequence import build_series, filter_series
from .tonal import MAJOR, MINOR, Key, is_key_chord, region_label

logger = logging.getLogger(__name__)

EXACT_MATCHING_LIMIT = 14


@dataclass(frozen=True)
class GenConfig:
    n: int
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"GenConfig:\tm must be >= 1, got {self.m}")
        if self.m >= self.n:
            raise ValueError(f"GenConfig:\tm must be < n, got m={self.m}, "
                             f"n={self.n}")


@dataclass
class GeneratedScoreNetwork:
    """Undirected generated graph with one reference pcset per node."""

    graph: nx.Graph
    labels: Dict[int, object]
    provenance: Dict[str, object] = field(default_factory=dict)

    def __len__(self):
        return self.graph.number_of_nodes()

    def assignment(self):
        """(pcset name, reference degree, generated degree) by rank."""
        rows = []
        for node in sorted(self.graph.nodes,
                           key=lambda node: self.graph.nodes[node]['rank']):
            data = self.graph.nodes[node]
            rows.append((pcset_name(self.labels[node]),
                         data['reference_degree'], self.graph.degree(node)))
        return rows


@dataclass
class EulerizedUndirected:
    multigraph: nx.MultiGraph
    duplicated: int
    method: str
    pairs: tuple = ()


class OperatorHistogram:
    """Relative frequency of each canonical voice leading operator."""

    def __init__(self, frequencies, transitions):
        self.frequencies = dict(frequencies)
        self.transitions = transitions

    def __getitem__(self, operator):
        return self.frequencies.get(tuple(operator), 0.0)

    def __iter__(self):
        return iter(self.frequencies)

    def __len__(self):
        return len(self.frequencies)

    def items(self):
        return self.frequencies.items()

    def most_common(self, count=None):
        ranked = sorted(self.frequencies.items(),
                        key=lambda item: (-item[1], item[0]))
        return ranked[:count] if count else ranked

    def to_dict(self):
        return {'(' + ','.join(str(step) for step in operator) + ')': freq
                for operator, freq in self.most_common()}


def barabasi_albert(cfg: GenConfig) -> nx.Graph:
    """
    Preferential attachment growth from m isolated seed nodes.

    Each arriving node links to m distinct existing nodes drawn with
    probability proportional to their degree; nodes still without
    edges weigh 1.
    """
    rng = np.random.default_rng(cfg.seed)
    degree = np.zeros(cfg.n, dtype=int)
    graph = nx.Graph()
    graph.add_nodes_from(range(cfg.n))

    for new_node in range(cfg.m, cfg.n):
        existing = np.arange(new_node)
        weights = np.maximum(degree[:new_node], 1).astype(float)
        weights /= weights.sum()
        targets = rng.choice(existing, size=cfg.m, replace=False, p=weights)
        for target in sorted(int(t) for t in targets):
            graph.add_edge(new_node, target)
            degree[new_node] += 1
            degree[target] += 1

    return graph


def choose_m(reference) -> int:
    """m = max(1, round(distinct edges / nodes)), kept below the node count."""
    size = len(reference)
    if size < 2:
        raise ValueError("choose_m:\treference network needs at least 2 nodes")
    m = max(1, int(np.floor(reference.n_edges / size + 0.5)))
    if m >= size:
        logger.warning("choose_m:\tm=%d lowered to %d for %d nodes", m,
                       size - 1, size)
        m = size - 1
    return m


def assign_chords(graph, reference, key='total') -> GeneratedScoreNetwork:
    """Pair generated nodes and reference pcsets rank to rank by degree."""
    if graph.number_of_nodes() != len(reference):
        raise ValueError(f"assign_chords:\tgenerated graph has "
                         f"{graph.number_of_nodes()} nodes, reference has "
                         f"{len(reference)}")
    reference_order = rank_nodes(reference, key)
    reference_degree = {node: reference.graph.in_degree(node)
                        + reference.graph.out_degree(node)
                        for node in reference.nodes}
    generated_order = sorted(graph.nodes,
                             key=lambda node: (-graph.degree(node), node))

    labelled = graph.copy()
    labels = {}
    for rank, (node, ref_node) in enumerate(zip(generated_order,
                                                reference_order)):
        pcset = reference.pcset(ref_node)
        labels[node] = pcset
        labelled.nodes[node].update(pcset=str(pcset), label=pcset_name(pcset),
                                    rank=rank, reference_node=ref_node,
                                    reference_degree=reference_degree[ref_node])

    return GeneratedScoreNetwork(labelled, labels,
                                 {'reference': reference.name,
                                  'ranking_key': key})


def _odd_pairs_exact(distances, odd):
    complete = nx.Graph()
    for i, u in enumerate(odd):
        for v in odd[i + 1:]:
            complete.add_edge(u, v, weight=distances[u][v])
    matching = nx.min_weight_matching(complete, weight='weight')
    return sorted(tuple(sorted(pair)) for pair in matching)


def _odd_pairs_greedy(distances, odd):
    candidates = sorted((distances[u][v], u, v)
                        for i, u in enumerate(odd) for v in odd[i + 1:])
    matched, pairs = set(), []
    for _, u, v in candidates:
        if u not in matched and v not in matched:
            matched.update((u, v))
            pairs.append((u, v))
    return sorted(pairs)


def eulerize_undirected(graph, max_exact=EXACT_MATCHING_LIMIT) -> EulerizedUndirected:
    """
    Make every degree even by duplicating shortest paths between odd nodes.

    Odd nodes are paired by a minimum total hop matching, exactly up to
    ``max_exact`` odd nodes and greedily (closest pair first) above.
    """
    if not graph.number_of_nodes() or not nx.is_connected(graph):
        raise ValueError("eulerize_undirected:\tgraph is disconnected")
    odd = sorted(node for node, degree in graph.degree() if degree % 2)
    distances = {node: nx.single_source_shortest_path_length(graph, node)
                 for node in odd}

    if len(odd) <= max_exact:
        pairs, method = _odd_pairs_exact(distances, odd), 'exact'
    else:
        logger.warning("eulerize_undirected:\t%d odd nodes, greedy pairing "
                       "instead of exact matching", len(odd))
        pairs, method = _odd_pairs_greedy(distances, odd), 'greedy'

    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(graph.nodes(data=True))
    multigraph.add_edges_from(sorted(tuple(sorted(edge))
                                     for edge in graph.edges))
    duplicated = 0
    for u, v in pairs:
        path = nx.shortest_path(graph, u, v)
        for a, b in zip(path[:-1], path[1:]):
            multigraph.add_edge(a, b)
            duplicated += 1

    return EulerizedUndirected(multigraph, duplicated, method, tuple(pairs))


def undirected_circuit(multigraph, start=None, duplicated=0) -> Circuit:
    """
    Hierholzer circuit of an all-even multigraph.

    Neighbours are visited in ascending order; the traversal order gives
    every undirected edge its direction.
    """
    odd = [node for node, degree in multigraph.degree() if degree % 2]
    if odd:
        raise ValueError(f"undirected_circuit:\todd degree nodes {odd}")
    edges = sorted(tuple(sorted((u, v))) for u, v in multigraph.edges())
    if not edges:
        raise ValueError("undirected_circuit:\tgraph has no edges")
    adjacency = {}
    for idx, (u, v) in enumerate(edges):
        adjacency.setdefault(u, []).append((v, idx))
        if u != v:
            adjacency.setdefault(v, []).append((u, idx))
    for node in adjacency:
        adjacency[node].sort()
    if start is None:
        start = edges[0][0]
    if start not in adjacency:
        raise ValueError(f"undirected_circuit:\tstart node {start} has no edges")

    used = [False] * len(edges)
    position = {node: 0 for node in adjacency}
    stack, circuit = [start], []
    while stack:
        node = stack[-1]
        neighbours = adjacency[node]
        pos = position[node]
        while pos < len(neighbours) and used[neighbours[pos][1]]:
            pos += 1
        position[node] = pos
        if pos < len(neighbours):
            neighbour, idx = neighbours[pos]
            used[idx] = True
            stack.append(neighbour)
        else:
            circuit.append(stack.pop())
    circuit.reverse()

    if len(circuit) - 1 != len(edges):
        raise ValueError("undirected_circuit:\tgraph is disconnected")

    return Circuit(tuple(circuit), start, duplicated)


def vl_histogram(circuit: Circuit, labels) -> OperatorHistogram:
    """Relative occurrence of the voice leading operators along a circuit."""
    counts = {}
    transitions = circuit.transitions()
    for source, target in transitions:
        operator = vl_operator_between(labels[source], labels[target])
        key = operator.canonical()
        counts[key] = counts.get(key, 0) + 1
    total = len(transitions)
    frequencies = {key: count / total for key, count in counts.items()}

    return OperatorHistogram(frequencies, total)


def compare_histograms(a: OperatorHistogram, b: OperatorHistogram) -> float:
    """Total variation distance 1/2 sum |a_k - b_k|."""
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a[key] - b[key]) for key in keys)


def aggregate_histograms(histograms, weights=None) -> OperatorHistogram:
    """Weighted mean of histograms, by transition count unless given."""
    histograms = list(histograms)
    if weights is None:
        weights = [hist.transitions for hist in histograms]
    total_weight = float(sum(weights))
    if not total_weight:
        raise ValueError("aggregate_histograms:\tzero total weight")
    merged = {}
    for hist, weight in zip(histograms, weights):
        for key, freq in hist.items():
            merged[key] = merged.get(key, 0.0) + weight * freq / total_weight

    return OperatorHistogram(merged, sum(hist.transitions for hist in histograms))


def _numeral(chord, key):
    if not is_key_chord(chord):
        return '?'
    quality, root = classify_chord(chord)
    mode = MINOR if quality == MINOR_TRIAD else MAJOR
    numeral = region_label(key, Key(root, mode))
    if quality == DOMINANT_SEVENTH:
        numeral += '7'
    return numeral


def progression_name(x, y, key: Key) -> str:
    """
    Roman numeral name of a transition, e.g. ``V-I`` or ``V7-I``.

    >>> from scorenet.pcset_core import normal_order
    >>> progression_name(normal_order([7, 11, 2]), normal_order([0, 4, 7]), Key(0))
    'V-I'
    """
    return f"{_numeral(x, key)}-{_numeral(y, key)}"


@dataclass
class GenerationResult:
    generated: GeneratedScoreNetwork
    eulerized: EulerizedUndirected
    circuit: Circuit
    histogram: OperatorHistogram
    original_circuit: Circuit
    original_histogram: OperatorHistogram
    tv_distance: float
    lengths: dict
    config: GenConfig

    def to_dict(self):
        labels = self.generated.labels
        return {
            'config': {'n': self.config.n, 'm': self.config.m,
                       'seed': self.config.seed},
            'circuit': [str(labels[node]) for node in self.circuit.nodes],
            'duplicated_edges': self.eulerized.duplicated,
            'matching': self.eulerized.method,
            'histogram': self.histogram.to_dict(),
            'original_histogram': self.original_histogram.to_dict(),
            'tv_distance_vs_original': self.tv_distance,
            'lengths': self.lengths,
            'assignment': [list(row) for row in self.generated.assignment()],
        }


def generate_from_reference(series, seed=0, m=None, key='total',
                            max_exact=EXACT_MATCHING_LIMIT) -> GenerationResult:
    """
    Degree-matched Barabasi-Albert counterpart of a score and its circuit.

    The generated circuit starts at the node holding the score's first
    chord and its operator histogram is compared with the one of the
    optimal circuit on the score network.
    """
    reference = build_network(series)
    if m is None:
        m = choose_m(reference)
    cfg = GenConfig(len(reference), m, seed)
    generated = assign_chords(barabasi_albert(cfg), reference, key)
    generated.provenance.update(seed=seed, m=m)

    eulerized = eulerize_undirected(generated.graph, max_exact)
    first_chord = series.dictionary[int(series.values[0])]
    start = next(node for node, pcset in generated.labels.items()
                 if pcset == first_chord)
    circuit = undirected_circuit(eulerized.multigraph, start,
                                 eulerized.duplicated)
    histogram = vl_histogram(circuit, generated.labels)

    _, original_circuit = optimal_circuit(reference, series)
    original_histogram = vl_histogram(original_circuit, reference.labels)

    lengths = circuit_lengths(series, original_circuit)
    lengths['generated'] = {'nodes': circuit.nodes_visited,
                            'edges': circuit.edges_traversed}
    logger.info("generate_from_reference:\tn=%d m=%d seed=%d, generated "
                "circuit %d edges", cfg.n, cfg.m, seed,
                circuit.edges_traversed)

    return GenerationResult(generated, eulerized, circuit, histogram,
                            original_circuit, original_histogram,
                            compare_histograms(histogram, original_histogram),
                            lengths, cfg)


def _length_row(job):
    """Length comparison of one score; runs in a worker process."""
    path, seed, m, keep_repeats, threshold, key = job
    series = build_series(ingest(path, merge_repeats=not keep_repeats))
    if threshold:
        series = filter_series(series, threshold)
    result = generate_from_reference(series, seed=seed, m=m, key=key)
    stats = walk_stats(series)

    return {
        'file': os.path.basename(path),
        'original_nodes': stats.nodes_visited,
        'original_edges': stats.edges_traversed,
        'distinct_edges': stats.distinct_edges,
        'circuit_nodes': result.original_circuit.nodes_visited,
        'circuit_edges': result.original_circuit.edges_traversed,
        'generated_nodes': result.circuit.nodes_visited,
        'generated_edges': result.circuit.edges_traversed,
        'tv_distance': result.tv_distance,
        'histogram': result.histogram,
        'original_histogram': result.original_histogram,
    }


def length_comparison(reference_files, config, jobs=1):
    """
    Original, optimal-circuit and generated-circuit lengths per score.

    Scores are processed in a multiprocessing pool when jobs > 1.
    """
    work = [(str(path), config.get('seed', 0), config.get('m'),
             config.get('keep-repeats', False), config.get('filter', 0.0),
             config.get('ranking-key', 'total'))
            for path in sorted(reference_files)]
    if jobs > 1 and len(work) > 1:
        with Pool(processes=jobs) as pool:
            rows = pool.map(_length_row, work)
    else:
        rows = [_length_row(job) for job in work]

    return rows
