#!/usr/bin/env python
"""
scorenet: dynamical chord networks of symbolic scores.

Subcommands
-----------
ingest      chord sequence of a MusicXML file as JSON lines
series      integer time series and occurrence histogram (CSV)
segment     change points of the series (JSON)
network     static score network, degree, communities, power law
regions     tonal region table of the segmented score (CSV)
euler       optimal closed circuit over every chord progression (JSON)
generate    degree-matched Barabasi-Albert score network and its circuit
compare     layer similarity matrix and agreement with an annotation
analyze     the whole pipeline on one or more files, with manifests
corpus      circuit length comparison and operator histograms of many files

Settings come from the packaged defaults, then the -c/--config-file
yaml, then --preset, then the command line flags.
"""
import argparse
import json
import logging
import os
import sys
from multiprocessing import Pool

from ._runtime_config import get_run_configuration, load_preset
from ._version import __version__
from .euler import optimal_circuit, walk_stats
from .exporters import (CORPUS_MANIFEST_SCHEMA, folder, to_json,
                        validate_manifest, write_circuit_csv, write_csv,
                        write_degree_csv, write_dot, write_generated_graphml,
                        write_graphml, write_histogram_csv, write_json,
                        write_series_csv, write_similarity_csv)
from .generate import (aggregate_histograms, compare_histograms,
                       generate_from_reference, length_comparison)
from .network import (build_network, degree_distribution, degree_stats,
                      detect_communities, fit_power_law, layer_networks,
                      layer_summary, network_from_walk, similarity_matrix)
from .pcset_core import pcset_name
from .score_ingest import ingest
from .segmentation import (binary_segmentation, choose_gamma,
                           penalty_from_preset, single_segment)
from .sequence import (build_series, filter_series, occurrence_histogram,
                       series_to_rows)
from .tonal import (agreement, build_region_table, global_key, parse_key,
                    read_annotation, write_region_table)

logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config-file',
                        default='defaults',
                        help='User configuration yaml file.')
    common.add_argument('--preset',
                        help='Named preset from the key_files directory, '
                             'e.g. op127_mov1.')
    common.add_argument('-o', '--output-dir',
                        default='.',
                        help='Folder for the written tables and graphs.')
    common.add_argument('--log-level',
                        choices=LOG_LEVELS,
                        default='WARNING',
                        help='Logging level.')
    common.add_argument('-v', '--verbose',
                        action='store_true',
                        help='Same as --log-level INFO.')
    common.add_argument('--jobs',
                        type=int,
                        default=1,
                        help='Number of files processed in parallel.')
    common.add_argument('--seed',
                        type=int,
                        help='Seed for gamma subsampling, Louvain and '
                             'Barabasi-Albert generation.')
    common.add_argument('--keep-repeats',
                        action='store_true',
                        default=None,
                        help='Keep consecutive identical chord slices.')
    return common


def _add_filter(parser, default=None):
    parser.add_argument('--filter',
                        type=float,
                        default=default,
                        help='Occurrence threshold as a fraction of the '
                             'most frequent chord count.')


def _add_segmentation(parser):
    parser.add_argument('--penalty',
                        type=float,
                        help='Stopping penalty of the binary segmentation.')
    parser.add_argument('--min-size',
                        type=int,
                        help='Shortest admissible segment.')


def _add_annotations(parser):
    parser.add_argument('--annotations',
                        help='Annotation csv (start_bar,end_bar,region) with '
                             'a global_key= header line.')


def get_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog='scorenet',
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version',
                        version=f"scorenet {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_parser()

    def command(name, help_text, many=False):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        if many:
            sub.add_argument('files', nargs='+', help='MusicXML score files.')
        else:
            sub.add_argument('file', help='MusicXML score file.')
        return sub

    command('ingest', 'Chord sequence as JSON lines.')
    _add_filter(command('series', 'Time series and histogram csv.'))
    sub = command('segment', 'Change points as JSON.')
    _add_filter(sub)
    _add_segmentation(sub)
    _add_filter(command('network', 'Static network and its statistics.'))
    sub = command('regions', 'Tonal region table.')
    _add_filter(sub)
    _add_segmentation(sub)
    _add_filter(command('euler', 'Optimal circuit as JSON.'), default=0.0)
    sub = command('generate', 'Barabasi-Albert counterpart of a score.')
    _add_filter(sub, default=0.0)
    sub.add_argument('--m', type=int, help='Attachment edges per new node.')
    sub = command('compare', 'Layer similarity and annotation agreement.')
    _add_filter(sub)
    _add_segmentation(sub)
    _add_annotations(sub)
    sub = command('analyze', 'Whole pipeline with manifests.', many=True)
    _add_filter(sub)
    _add_segmentation(sub)
    _add_annotations(sub)
    sub = command('corpus', 'Circuit lengths over many scores.', many=True)
    _add_filter(sub, default=0.0)
    sub.add_argument('--m', type=int, help='Attachment edges per new node.')

    return parser.parse_args(argv)


def resolve_config(args):
    """Merge defaults, config file, preset and flags into one dict."""
    cfg = get_run_configuration(args.config_file)
    if args.preset:
        preset = load_preset(args.preset)
        penalty = preset.get('penalty')
        if penalty is None:
            penalty = penalty_from_preset(args.preset, cfg)
        cfg['penalty'] = float(penalty)
        for key in ('filter', 'annotation', 'global-key'):
            if preset.get(key) is not None:
                cfg[key] = preset[key]
        cfg['preset'] = args.preset

    flags = {
        'seed': args.seed,
        'keep-repeats': args.keep_repeats,
        'filter': getattr(args, 'filter', None),
        'penalty': getattr(args, 'penalty', None),
        'min-size': getattr(args, 'min_size', None),
        'annotation': getattr(args, 'annotations', None),
        'm': getattr(args, 'm', None),
    }
    for key, value in flags.items():
        if value is not None:
            cfg[key] = value

    return cfg


def _series(path, cfg, apply_filter=True):
    """Chord sequence, raw series and filtered series of one file."""
    seq = ingest(path, merge_repeats=not cfg['keep-repeats'], tet=cfg['tet'])
    raw = build_series(seq)
    series = raw
    if apply_filter and cfg['filter']:
        series = filter_series(raw, cfg['filter'])
    return seq, raw, series


def _segment(series, cfg):
    """Segmentation of the series; one section when there is nothing to split."""
    n_events, n_ids = len(series), len(set(series.values.tolist()))
    model = None
    if n_ids > 1:
        model = choose_gamma(series, seed=cfg['seed'],
                             max_pairs=cfg['gamma-max-pairs'],
                             rule=cfg['gamma-rule'])
    if n_events < 2 * cfg['min-size'] or model is None:
        logger.warning("segment:\t%d events with %d distinct ids, "
                       "reporting a single section", n_events, n_ids)
        return single_segment(series, cfg['penalty'], model, cfg['min-size'])
    return binary_segmentation(series, cfg['penalty'], model, cfg['min-size'])


def _global_key(net, cfg):
    if cfg.get('global-key'):
        return parse_key(str(cfg['global-key']))
    return global_key(net)


def _regions(series, net, seg, cfg):
    layers = layer_networks(series, seg)
    key = _global_key(net, cfg)
    table = build_region_table(layers, seg, key, cfg['spelling-table'])
    return layers, table


def _agreement(table, cfg):
    if not cfg.get('annotation'):
        return None
    return agreement(table, read_annotation(cfg['annotation']))


def _power_law(net):
    totals = [rec.total for rec in degree_stats(net).per_node.values()]
    try:
        return fit_power_law(totals).to_dict()
    except ValueError as exc:
        logger.warning("power law:\tno fit for %s: %s", net.name, exc)
        return None


def _network_summary(net, cfg):
    stats = degree_stats(net)
    partition = detect_communities(net, seed=cfg['seed'],
                                   resolution=cfg['community-resolution'])
    return stats, partition, {
        'nodes': len(net),
        'edges': net.n_edges,
        'total_weight': net.total_weight,
        'mean_degree': stats.mean_degree,
        'communities': partition.n_communities,
        'modularity': partition.modularity,
        'power_law': _power_law(net),
    }


def _write_graphs(net, out, stats, partition, cfg, stem='network'):
    artifacts = {}
    if 'graphml' in cfg['export-formats']:
        artifacts['network.graphml'] = write_graphml(
            net, os.path.join(out, f"{stem}.graphml"), stats, partition)
    if 'dot' in cfg['export-formats']:
        artifacts['network.dot'] = write_dot(
            net, os.path.join(out, f"{stem}.dot"), stats, partition)
    return artifacts


def run_ingest(args, cfg):
    seq = ingest(args.file, merge_repeats=not cfg['keep-repeats'],
                 tet=cfg['tet'])
    logger.info("ingest:\t%d events, %d raw slices", len(seq),
                seq.n_raw_slices)
    for record in seq.to_records():
        print(json.dumps(record, sort_keys=True))


def run_series(args, cfg):
    _, raw, series = _series(args.file, cfg)
    out = folder(args.output_dir)
    report = {
        'events': len(raw),
        'distinct': raw.alphabet_size,
        'filtered_events': len(series),
        'filtered_distinct': series.alphabet_size,
        'filter': cfg['filter'],
        'series': write_series_csv(series_to_rows(series),
                                   os.path.join(out, 'series.csv')),
        'histogram': write_histogram_csv(occurrence_histogram(series),
                                         series.dictionary,
                                         os.path.join(out, 'histogram.csv')),
    }
    print(to_json(report))


def run_segment(args, cfg):
    _, _, series = _series(args.file, cfg)
    seg = _segment(series, cfg)
    report = seg.to_dict()
    report['n_events'] = len(series)
    print(to_json(report))


def run_network(args, cfg):
    _, _, series = _series(args.file, cfg)
    net = build_network(series)
    stats, partition, summary = _network_summary(net, cfg)
    out = folder(args.output_dir)
    artifacts = _write_graphs(net, out, stats, partition, cfg)
    artifacts['degree_distribution.csv'] = write_degree_csv(
        degree_distribution(net), os.path.join(out, 'degree_distribution.csv'))
    summary['artifacts'] = artifacts
    print(to_json(summary))


def run_regions(args, cfg):
    _, _, series = _series(args.file, cfg)
    net = build_network(series)
    seg = _segment(series, cfg)
    _, table = _regions(series, net, seg, cfg)
    out = folder(args.output_dir)
    write_region_table(table, os.path.join(out, 'regions.csv'))
    print(to_json({'global_key': str(table.global_key),
                   'regions': [list(row) for row in table.to_rows()]}))


def run_euler(args, cfg):
    _, _, series = _series(args.file, cfg)
    net = build_network(series)
    eulerized, circuit = optimal_circuit(net, series)
    circuit_net = network_from_walk(circuit.nodes, net.labels, name='circuit')
    _, _, circuit_summary = _network_summary(circuit_net, cfg)
    stats = walk_stats(series)
    out = folder(args.output_dir)
    write_circuit_csv(circuit, net.labels, os.path.join(out, 'circuit.csv'))
    report = {
        'walk_stats': stats._asdict(),
        'duplications': [{'edge': [str(net.pcset(u)), str(net.pcset(v))],
                          'count': count}
                         for (u, v), count in eulerized.duplications.items()],
        'total_duplications': eulerized.total_duplications,
        'closure': ([str(net.pcset(node)) for node in eulerized.closure]
                    if eulerized.closure else None),
        'circuit': [str(net.pcset(node)) for node in circuit.nodes],
        'lengths': {
            'original': {'nodes': stats.nodes_visited,
                         'edges': stats.edges_traversed},
            'circuit': {'nodes': circuit.nodes_visited,
                        'edges': circuit.edges_traversed},
        },
        'circuit_network': circuit_summary,
    }
    print(to_json(report))


def run_generate(args, cfg):
    _, _, series = _series(args.file, cfg)
    result = generate_from_reference(series, seed=cfg['seed'], m=cfg['m'],
                                     key=cfg['ranking-key'],
                                     max_exact=cfg['exact-matching-limit'])
    out = folder(args.output_dir)
    report = result.to_dict()
    report['artifacts'] = {
        'generated.graphml': write_generated_graphml(
            result.generated, os.path.join(out, 'generated.graphml')),
    }
    write_json(report, os.path.join(out, 'generate.json'))
    print(to_json(report))


def run_compare(args, cfg):
    _, _, series = _series(args.file, cfg)
    net = build_network(series)
    seg = _segment(series, cfg)
    layers, table = _regions(series, net, seg, cfg)
    out = folder(args.output_dir)
    report = {
        'sections': len(layers),
        'similarity': write_similarity_csv(
            similarity_matrix(layers), os.path.join(out, 'similarity.csv'),
            [str(layer.segment_id) for layer in layers]),
        'agreement': _agreement(table, cfg),
    }
    print(to_json(report))


def analyze(path, cfg, output_dir):
    """
    Run the whole pipeline on one score and write its manifest.

    ingest, series, filter, segmentation, static and layer networks,
    power law, communities, region table, optional agreement, exports.
    """
    out = folder(output_dir)
    seq, raw, series = _series(path, cfg)
    net = build_network(series)
    stats, partition, network_summary = _network_summary(net, cfg)
    seg = _segment(series, cfg)
    layers, table = _regions(series, net, seg, cfg)
    score_agreement = _agreement(table, cfg)

    artifacts = {
        'series.csv': write_series_csv(series_to_rows(series),
                                       os.path.join(out, 'series.csv')),
        'histogram.csv': write_histogram_csv(
            occurrence_histogram(series), series.dictionary,
            os.path.join(out, 'histogram.csv')),
        'segmentation.json': write_json(seg.to_dict(),
                                        os.path.join(out, 'segmentation.json')),
        'regions.csv': write_region_table(table,
                                          os.path.join(out, 'regions.csv')),
        'degree_distribution.csv': write_degree_csv(
            degree_distribution(net),
            os.path.join(out, 'degree_distribution.csv')),
        'similarity.csv': write_similarity_csv(
            similarity_matrix(layers), os.path.join(out, 'similarity.csv'),
            [str(layer.segment_id) for layer in layers]),
        'layers.json': write_json(
            [dict(layer_summary(layer, cfg['ranking-key']),
                  section=layer.segment_id, bars=list(layer.bar_range))
             for layer in layers], os.path.join(out, 'layers.json')),
        'points.csv': write_csv(
            [(idx, value, int(series.bars[idx]))
             for idx, value in enumerate(series.values.tolist())],
            os.path.join(out, 'points.csv'), header=['index', 'id', 'bar']),
    }
    artifacts.update(_write_graphs(net, out, stats, partition, cfg))
    artifacts = {name: os.path.basename(path_)
                 for name, path_ in sorted(artifacts.items())}

    manifest = {
        'scorenet_version': __version__,
        'input': os.path.basename(str(path)),
        'config': cfg,
        'artifacts': artifacts,
        'summary': {
            'events': len(seq),
            'raw_slices': seq.n_raw_slices,
            'distinct': raw.alphabet_size,
            'filtered_events': len(series),
            'filtered_distinct': series.alphabet_size,
            'global_key': str(table.global_key),
            'sections': len(table),
            'breakpoint_bars': list(seg.bar_breaks),
            'hub': pcset_name(net.pcset(stats.ranking(cfg['ranking-key'],
                                                      net.counts)[0])),
            'network': network_summary,
        },
        'agreement': score_agreement,
    }
    validate_manifest(manifest)
    write_json(manifest, os.path.join(out, 'manifest.json'))
    logger.info("analyze:\t%s done, %d sections", path, len(table))

    return manifest


def _analyze_job(job):
    path, cfg, output_dir = job
    analyze(path, cfg, output_dir)
    return str(path), os.path.join(output_dir, 'manifest.json')


def run_analyze(args, cfg):
    stems = [os.path.splitext(os.path.basename(path))[0] for path in args.files]
    if len(set(stems)) != len(stems):
        raise ValueError("analyze:\ttwo input files share a name")
    jobs = [(path, cfg, os.path.join(args.output_dir, stem))
            for path, stem in zip(args.files, stems)]
    if args.jobs > 1 and len(jobs) > 1:
        with Pool(processes=args.jobs) as pool:
            finished = pool.map(_analyze_job, jobs)
    else:
        finished = [_analyze_job(job) for job in jobs]

    top = {
        'scorenet_version': __version__,
        'runs': [{'input': os.path.basename(path),
                  'manifest': os.path.relpath(manifest, args.output_dir)}
                 for path, manifest in finished],
    }
    validate_manifest(top, CORPUS_MANIFEST_SCHEMA)
    write_json(top, os.path.join(folder(args.output_dir), 'manifest.json'))
    print(to_json(top))


def run_corpus(args, cfg):
    rows = length_comparison(args.files, cfg, jobs=args.jobs)
    generated = aggregate_histograms(row['histogram'] for row in rows)
    original = aggregate_histograms(row['original_histogram'] for row in rows)
    columns = ['file', 'original_nodes', 'original_edges', 'distinct_edges',
               'circuit_nodes', 'circuit_edges', 'generated_nodes',
               'generated_edges', 'tv_distance']
    out = folder(args.output_dir)
    write_csv([[row[col] for col in columns] for row in rows],
              os.path.join(out, 'lengths.csv'), header=columns)
    report = {
        'lengths': [{col: row[col] for col in columns} for row in rows],
        'generated_histogram': generated.to_dict(),
        'original_histogram': original.to_dict(),
        'tv_distance': compare_histograms(generated, original),
    }
    write_json(report, os.path.join(out, 'corpus.json'))
    print(to_json(report))


RUNNERS = {
    'ingest': run_ingest,
    'series': run_series,
    'segment': run_segment,
    'network': run_network,
    'regions': run_regions,
    'euler': run_euler,
    'generate': run_generate,
    'compare': run_compare,
    'analyze': run_analyze,
    'corpus': run_corpus,
}


def _setup_logging(args):
    level = 'INFO' if args.verbose and args.log_level == 'WARNING' \
        else args.log_level
    logging.basicConfig(level=getattr(logging, level),
                        format='%(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)


def main(argv=None):
    """Run the main routine."""
    args = get_args(argv)
    _setup_logging(args)
    logger.info("scorenet: %s", __version__)

    try:
        cfg = resolve_config(args)
        RUNNERS[args.command](args, cfg)
    except Exception as exc:
        message = ' '.join(str(exc).split())
        print(f"scorenet: error: {type(exc).__name__}: {message}",
              file=sys.stderr)
        sys.exit(1)

    return 0


if __name__ == "__main__":
    sys.exit(main())
