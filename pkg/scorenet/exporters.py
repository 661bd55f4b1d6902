"""
.. module:: exporters
   :platform: Unix
   :synopsis: Output folders and the CSV, JSON, GraphML and DOT writers.

Every writer sorts its keys and rows so that identical inputs give
byte-identical files.
"""
import csv
import json
import logging
import os

import jsonschema
import networkx as nx
import numpy as np

from .pcset_core import pcset_name

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA = {
    'type': 'object',
    'required': ['scorenet_version', 'input', 'config', 'artifacts'],
    'properties': {
        'scorenet_version': {'type': 'string'},
        'input': {'type': 'string'},
        'config': {'type': 'object'},
        'artifacts': {
            'type': 'object',
            'additionalProperties': {'type': 'string'},
        },
        'summary': {'type': 'object'},
        'agreement': {'type': ['number', 'null'], 'minimum': 0, 'maximum': 1},
    },
}

CORPUS_MANIFEST_SCHEMA = {
    'type': 'object',
    'required': ['scorenet_version', 'runs'],
    'properties': {
        'scorenet_version': {'type': 'string'},
        'runs': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['input', 'manifest'],
                'properties': {'input': {'type': 'string'},
                               'manifest': {'type': 'string'}},
            },
        },
    },
}


def folder(name):
    """
    Make the folder if needed and return its path with a trailing slash.

    Also accepts a list of path components.
    """
    if isinstance(name, (list, tuple)):
        name = os.path.join(*name)
    name = str(name)
    if name[-1] != '/':
        name = name + '/'
    if not os.path.exists(name):
        os.makedirs(name)
        logger.info("folder:\tmakedirs %s", name)
    return name


def _plain(value):
    """numpy scalars, tuples and sets as plain json values."""
    if isinstance(value, dict):
        return {str(key): _plain(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(val) for val in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(val) for val in value)
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def to_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def write_json(obj, path):
    with open(path, 'w') as file:
        file.write(to_json(obj) + '\n')
    return str(path)


def write_csv(rows, path, header=None):
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        if header:
            writer.writerow(header)
        writer.writerows(rows)
    return str(path)


def _export_graph(net, degrees=None, partition=None):
    """Copy of the network graph with only scalar attributes."""
    graph = nx.DiGraph() if net.graph.is_directed() else nx.Graph()
    for node in sorted(net.graph.nodes):
        data = net.graph.nodes[node]
        attrs = {'pcset': str(data['pcset']),
                 'label': pcset_name(data['pcset']),
                 'count': int(data.get('count', 0))}
        if degrees is not None:
            attrs['degree'] = int(degrees.per_node[node].total)
        if partition is not None:
            attrs['community'] = int(partition.membership[node])
        graph.add_node(node, **attrs)
    for source, target, data in sorted(net.graph.edges(data=True)):
        graph.add_edge(source, target, weight=int(data.get('weight', 1)))
    return graph


def write_graphml(net, path, degrees=None, partition=None):
    """
    GraphML with pcset, label, count, degree and community on the nodes
    and the traversal count as edge weight.
    """
    nx.write_graphml(_export_graph(net, degrees, partition), str(path))
    return str(path)


def write_dot(net, path, degrees=None, partition=None):
    """Graphviz DOT export of the same graph, written through pydot."""
    nx.nx_pydot.write_dot(_export_graph(net, degrees, partition), str(path))
    return str(path)


def write_generated_graphml(generated, path):
    """GraphML of an undirected generated network with its chord labels."""
    graph = nx.Graph()
    for node in sorted(generated.graph.nodes):
        data = generated.graph.nodes[node]
        graph.add_node(node, pcset=data['pcset'], label=data['label'],
                       degree=int(generated.graph.degree(node)),
                       reference_degree=int(data['reference_degree']))
    graph.add_edges_from(sorted(tuple(sorted(edge))
                                for edge in generated.graph.edges))
    nx.write_graphml(graph, str(path))
    return str(path)


def write_similarity_csv(matrix, path, names=None):
    """Square similarity matrix with a header row of section names."""
    size = len(matrix)
    names = names or [str(idx) for idx in range(size)]
    rows = [[names[i]] + [f"{matrix[i][j]:.6f}" for j in range(size)]
            for i in range(size)]
    return write_csv(rows, path, header=['section'] + list(names))


def write_degree_csv(distribution, path):
    """(degree, count, probability) rows, the log-log plot data."""
    rows = [(degree, count, f"{prob:.6f}")
            for degree, count, prob in distribution]
    return write_csv(rows, path, header=['degree', 'count', 'probability'])


def write_series_csv(rows, path):
    return write_csv(rows, path, header=['index', 'bar', 'id', 'pcset'])


def write_histogram_csv(histogram, dictionary, path):
    rows = [(idx, count, str(dictionary[idx]))
            for idx, count in sorted(histogram.items())]
    return write_csv(rows, path, header=['id', 'count', 'pcset'])


def write_circuit_csv(circuit, labels, path):
    rows = [(step, node, str(labels[node]), pcset_name(labels[node]))
            for step, node in enumerate(circuit.nodes)]
    return write_csv(rows, path, header=['step', 'id', 'pcset', 'label'])


def validate_manifest(manifest, schema=None):
    """Raise ValueError when a manifest does not match its schema."""
    try:
        jsonschema.validate(instance=_plain(manifest),
                            schema=schema or MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValueError(f"validate_manifest:\t{exc.message}") from exc
    return manifest
