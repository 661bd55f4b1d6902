"""Test score networks, communities, power-law fits and layers."""
import itertools

import networkx as nx
import numpy as np
import pytest
from scipy import stats

from scorenet.network import (ScoreNetwork, build_network, degree_distribution,
                              degree_stats, detect_communities, fit_power_law,
                              layer_networks, layer_summary, mcs_similarity,
                              network_from_walk, rank_nodes,
                              similarity_matrix, undirected_projection)
from scorenet.pcset_core import normal_order, pcset_name
from scorenet.score_ingest import ChordEvent, ChordSequence
from scorenet.segmentation import Segmentation
from scorenet.sequence import build_series

PCSETS = [normal_order(c) for c in itertools.combinations(range(12), 3)][:40]
LABELS = dict(enumerate(PCSETS))


def series_of(ids, bars=None):
    """LabeledSeries whose ids are the given ones (ids ranked by count)."""
    bars = bars or list(range(1, len(ids) + 1))
    seq = ChordSequence(tuple(ChordEvent(idx, bar, PCSETS[value])
                              for idx, (bar, value) in enumerate(zip(bars, ids))))
    return build_series(seq)


def graph_network(edges, nodes=None):
    """ScoreNetwork from a plain edge list, unit weights."""
    graph = nx.DiGraph()
    for node in sorted(set(nodes or []) | {n for edge in edges for n in edge}):
        graph.add_node(node, pcset=LABELS[node], label=pcset_name(LABELS[node]),
                       count=1)
    graph.add_edges_from(edges, weight=1)
    return ScoreNetwork(graph)


def random_walk(seed, size=200, alphabet=12):
    """Walk without immediate repeats."""
    rng = np.random.default_rng(seed)
    walk = [int(rng.integers(alphabet))]
    while len(walk) < size:
        step = int(rng.integers(alphabet))
        if step != walk[-1]:
            walk.append(step)
    return walk


def modularity_by_hand(projection, communities):
    """Q = 1/2m sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j]."""
    nodes = sorted(projection.nodes)
    index = {node: idx for idx, node in enumerate(nodes)}
    adjacency = np.zeros((len(nodes), len(nodes)))
    for u, v, data in projection.edges(data=True):
        adjacency[index[u], index[v]] = data['weight']
        adjacency[index[v], index[u]] = data['weight']
    strength = adjacency.sum(axis=1)
    two_m = adjacency.sum()
    label = np.empty(len(nodes), dtype=int)
    for idx, comm in enumerate(communities):
        for node in comm:
            label[index[node]] = idx
    same = label[:, None] == label[None, :]
    return float(((adjacency - np.outer(strength, strength) / two_m) * same).sum()
                 / two_m)


def test_build_network_edges():
    assert build_network(series_of([0, 1, 0])).edges == {(0, 1): 1, (1, 0): 1}
    net = build_network(series_of([0, 1, 0, 1]))
    assert net.edges == {(0, 1): 2, (1, 0): 1}
    assert net.counts == {0: 2, 1: 2}
    assert net.labels == {0: PCSETS[0], 1: PCSETS[1]}
    assert net.total_weight == 3
    with pytest.raises(ValueError):
        build_network(series_of([0]))


def test_build_network_weights_sum():
    """Edge weights add up to length - 1."""
    series = series_of(random_walk(0))
    net = build_network(series)
    assert net.total_weight == len(series) - 1
    assert sum(net.counts.values()) == len(series)


def test_degree_stats_star():
    net = graph_network([(1, 2), (1, 3), (1, 4)])
    stats = degree_stats(net)
    assert stats.per_node[1].out_degree == 3
    assert stats.per_node[1].in_degree == 0
    assert stats.per_node[2].total == 1
    assert stats.mean_degree == 0.75
    assert rank_nodes(net)[0] == 1
    assert rank_nodes(net, 'in') == [2, 3, 4, 1]
    assert degree_distribution(net) == [(1, 3, 0.75), (3, 1, 0.25)]
    with pytest.raises(ValueError):
        rank_nodes(net, 'betweenness')


def test_degree_stats_against_hand_count():
    """Degrees over distinct edges; strength over weights."""
    series = series_of(random_walk(1, size=80, alphabet=8))
    net = build_network(series)
    pairs = list(zip(series.values[:-1].tolist(), series.values[1:].tolist()))
    distinct = set(pairs)
    stats = degree_stats(net)
    for node in net.nodes:
        assert stats.per_node[node].out_degree == len({t for s, t in distinct if s == node})
        assert stats.per_node[node].in_degree == len({s for s, t in distinct if t == node})
        assert stats.per_node[node].weighted == sum(
            (s == node) + (t == node) for s, t in pairs)
    assert len(net) == len(set(series.values.tolist()))


def test_undirected_projection():
    projection = undirected_projection(build_network(series_of([0, 1, 0, 1])))
    assert projection[0][1]['weight'] == 3


def test_two_cliques():
    """Two 4-cliques joined by one edge split in two."""
    edges = [(u, v) for u, v in itertools.permutations(range(4), 2)]
    edges += [(u, v) for u, v in itertools.permutations(range(4, 8), 2)]
    edges.append((3, 4))
    partition = detect_communities(graph_network(edges), seed=0)
    assert partition.n_communities == 2
    assert partition.modularity >= 0.35
    assert set(partition.communities) == {frozenset(range(4)),
                                          frozenset(range(4, 8))}
    assert partition.membership[0] != partition.membership[7]


def test_modularity_recomputed():
    """Returned Q equals the modularity formula on the returned partition."""
    for seed in range(5):
        net = build_network(series_of(random_walk(seed)))
        partition = detect_communities(net, seed=seed)
        expected = modularity_by_hand(undirected_projection(net),
                                      partition.communities)
        assert abs(partition.modularity - expected) <= 1e-9
        assert -0.5 <= partition.modularity <= 1
        assert set(partition.membership) == set(net.nodes)


def test_communities_deterministic():
    net = build_network(series_of(random_walk(3)))
    assert detect_communities(net, seed=4) == detect_communities(net, seed=4)


def test_communities_without_edges():
    single = graph_network([], nodes=[0])
    partition = detect_communities(single)
    assert partition.n_communities == 1
    assert partition.modularity == 0.0

    edgeless = graph_network([], nodes=[0, 1, 2])
    partition = detect_communities(edgeless)
    assert partition.n_communities == 3
    assert partition.modularity == 0.0


def test_power_law_zipf():
    """alpha of zipf(2.5) samples is recovered at xmin = 1."""
    for seed in range(20):
        sample = stats.zipf(2.5).rvs(size=10000, random_state=seed)
        fit = fit_power_law(sample, xmin=1)
        assert 2.4 <= fit.alpha <= 2.6
        assert fit.xmin == 1
        assert fit.n_tail == 10000


def test_power_law_xmin_minimizes_ks():
    sample = stats.zipf(2.2).rvs(size=400, random_state=11)
    fit = fit_power_law(sample)
    assert sample.min() <= fit.xmin <= sample.max()
    assert np.isfinite(fit.alpha)
    for candidate in np.unique(sample)[:-1]:
        if (sample >= candidate).sum() < 2:
            continue
        assert fit_power_law(sample, xmin=int(candidate)).ks_stat >= fit.ks_stat


def test_power_law_approx():
    sample = stats.zipf(2.5).rvs(size=5000, random_state=2)
    approx = fit_power_law(sample, xmin=1, method='approx')
    assert approx.method == 'approx'
    assert np.isfinite(approx.alpha)
    assert approx.to_dict()['xmin'] == 1
    closed_form = 1 + sample.size / np.sum(np.log(sample / 0.5))
    assert approx.alpha == pytest.approx(closed_form)
    mle = fit_power_law(sample, xmin=1)
    assert mle.alpha == pytest.approx(2.5, abs=0.1)
    assert abs(mle.alpha - approx.alpha) > 0.01


def test_power_law_errors():
    with pytest.raises(ValueError):
        fit_power_law([3, 3, 3, 3])
    with pytest.raises(ValueError):
        fit_power_law([0, 1, 2])
    with pytest.raises(ValueError):
        fit_power_law([1.5, 2, 3])
    with pytest.raises(ValueError):
        fit_power_law([1, 2, 3], method='ols')
    with pytest.raises(ValueError):
        fit_power_law([1, 2, 3], xmin=3)


def test_layer_networks():
    """Layers hold the pairs inside their segment only."""
    series = series_of([0, 1, 0, 2, 3, 2, 3], bars=[1, 1, 2, 2, 3, 3, 4])
    seg = Segmentation(breakpoints=(3, 7), penalty=1.0)
    parent = build_network(series)
    layers = layer_networks(series, seg)
    assert len(layers) == 2
    for layer, (start, end) in zip(layers, seg.segments):
        assert set(layer.nodes) <= set(parent.nodes)
        assert layer.total_weight == end - start - 1
        assert layer.event_range == (start, end)
    assert layers[0].bar_range == (1, 2)
    assert layers[1].bar_range == (2, 4)
    # no edge across the breakpoint
    first_end = int(series.values[2])
    second_start = int(series.values[3])
    assert not any(layer.graph.has_edge(first_end, second_start)
                   for layer in layers)

    whole = layer_networks(series, Segmentation(breakpoints=(7,), penalty=1.0))
    assert whole[0].edges == parent.edges

    with pytest.raises(ValueError):
        layer_networks(series, Segmentation(breakpoints=(3, 6), penalty=1.0))


def test_mcs_similarity_example():
    """a->b->c against a->b->d plus e shares the component {a, b}."""
    g1 = network_from_walk([0, 1, 2], LABELS)
    g2 = network_from_walk([0, 1, 3], LABELS)
    g2.graph.add_node(4, pcset=LABELS[4], label=pcset_name(LABELS[4]), count=1)
    assert mcs_similarity(g1, g2) == 0.5
    assert mcs_similarity(g2, g1) == 0.5
    assert mcs_similarity(g1, g1) == 1.0
    disjoint = network_from_walk([5, 6], LABELS)
    assert mcs_similarity(g1, disjoint) == 0.0


def test_mcs_matches_by_pcset():
    """Node ids do not matter, pitch-class sets do."""
    g1 = network_from_walk([0, 1], {0: PCSETS[7], 1: PCSETS[8]})
    g2 = network_from_walk([5, 3], {5: PCSETS[7], 3: PCSETS[8]})
    assert mcs_similarity(g1, g2) == 1.0


def test_similarity_matrix():
    layers = [network_from_walk(walk, LABELS)
              for walk in ([0, 1, 2], [0, 1, 3], [5, 6])]
    matrix = similarity_matrix(layers)
    assert matrix.shape == (3, 3)
    assert np.allclose(matrix, matrix.T)
    assert np.allclose(np.diag(matrix), 1.0)
    assert matrix[0, 1] == pytest.approx(2 / 3)
    assert matrix[0, 2] == 0.0


def test_network_from_walk_counts():
    net = network_from_walk([0, 1, 2, 0], LABELS)
    assert net.counts == {0: 1, 1: 1, 2: 1}
    assert net.edges == {(0, 1): 1, (1, 2): 1, (2, 0): 1}


def test_layer_summary():
    net = build_network(series_of([0, 1, 0, 2, 0, 1]))
    summary = layer_summary(net)
    assert summary['nodes'] == 3
    assert summary['edges'] == 4
    assert summary['total_weight'] == 5
    assert summary['hub'] == str(net.pcset(0))


def test_layer_weights_add_up():
    """Layer weights plus the pairs across breakpoints give the network."""
    for seed in range(10):
        walk = random_walk(seed, size=120)
        series = series_of(walk)
        seg = Segmentation(breakpoints=(17, 40, 41 + seed, 90, 120),
                           penalty=1.0)
        total = {}
        for layer in layer_networks(series, seg):
            for edge, weight in layer.edges.items():
                total[edge] = total.get(edge, 0) + weight
        for bkp in seg.change_points:
            edge = (int(series.values[bkp - 1]), int(series.values[bkp]))
            total[edge] = total.get(edge, 0) + 1
        assert total == build_network(series).edges
