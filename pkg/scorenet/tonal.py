"""
.. module:: tonal
   :platform: Unix
   :synopsis: Keys of layers from their prevalent chord, region labels
              relative to the global key and agreement with annotations.

"""
import csv
import logging
import os
import re
from dataclasses import dataclass
from typing import Tuple

from .network import degree_stats
from .pcset_core import (DOMINANT_SEVENTH, MAJOR_DYAD, MAJOR_TRIAD,
                         MINOR_TRIAD, NOTE_NAMES, OTHER, TET, PitchClassSet,
                         classify_chord, pcset_name)

logger = logging.getLogger(__name__)

MAJOR = 'major'
MINOR = 'minor'
NO_REGION = '@none'

DEFAULT_SPELLING = {0: 'I', 1: 'bII', 2: 'II', 3: 'bIII', 4: 'III', 5: 'IV',
                    6: '#IV', 7: 'V', 8: '#V', 9: 'VI', 10: 'bVII',
                    11: 'VII'}

KEY_CHORDS = (MAJOR_TRIAD, MINOR_TRIAD, DOMINANT_SEVENTH, MAJOR_DYAD)

TONIC_NAMES = {'C': 0, 'D': 2, 'E': 4, 'F': 5, 'G': 7, 'A': 9, 'B': 11}
KEY_PATTERN = re.compile(r'^\s*([A-Ga-g])([#b]*)\s*:?\s*(major|minor|maj|min)?'
                         r'\s*:?\s*$', re.IGNORECASE)


@dataclass(frozen=True)
class Key:
    tonic: int
    mode: str = MAJOR

    def __post_init__(self):
        if not 0 <= self.tonic < TET:
            raise ValueError(f"Key:\ttonic {self.tonic} outside [0, 12)")
        if self.mode not in (MAJOR, MINOR):
            raise ValueError(f"Key:\tunknown mode {self.mode}")

    def transpose(self, k):
        return Key((self.tonic + k) % TET, self.mode)

    def __str__(self):
        return key_name(self)


@dataclass(frozen=True)
class RegionRow:
    section: int
    start_bar: int
    end_bar: int
    chord: PitchClassSet
    key: Key
    label: str

    @property
    def classified(self):
        return self.label != NO_REGION


class RegionTable:
    """Rows of (section, bar range, prevalent chord, key, region label)."""

    def __init__(self, rows, global_key, bar_votes):
        self.rows = list(rows)
        self.global_key = global_key
        # bar -> label of the section holding the bar's first event
        self.bar_votes = dict(bar_votes)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def bar_labels(self):
        """Label of every bar, bars without events keep the previous label."""
        if not self.bar_votes:
            return {}
        labels, current = {}, None
        for bar in range(min(self.bar_votes), max(self.bar_votes) + 1):
            current = self.bar_votes.get(bar, current)
            labels[bar] = current
        return labels

    def to_rows(self):
        """Four-column table rows; the first region carries the key prefix."""
        rows = []
        for idx, row in enumerate(self.rows):
            label = row.label
            if idx == 0 and row.classified:
                label = f"{key_token(self.global_key)}:{label}"
            rows.append((row.section, f"{row.start_bar}-{row.end_bar}",
                         '[' + ', '.join(pcset_name(row.chord).split()) + ']',
                         label))
        return rows


@dataclass(frozen=True)
class AnnotationFile:
    """Expert regions (start bar, end bar, label) under a global key."""

    global_key: Key
    rows: Tuple[Tuple[int, int, str], ...]

    def bar_labels(self):
        """Each bar takes the last region whose range covers it."""
        labels = {}
        for start, end, label in sorted(self.rows):
            for bar in range(start, end + 1):
                labels[bar] = label
        return labels


def key_name(key: Key) -> str:
    """
    >>> key_name(Key(3, 'major'))
    'Eb major'
    >>> key_name(Key(0, 'minor'))
    'c minor'
    """
    tonic = NOTE_NAMES[key.tonic]
    if key.mode == MINOR:
        tonic = tonic[0].lower() + tonic[1:]
    return f"{tonic} {key.mode}"


def key_token(key: Key) -> str:
    """Compact key token, upper case for major (``Eb``, ``c``)."""
    return key_name(key).split()[0]


def parse_key(text: str) -> Key:
    """
    Parse ``Eb``, ``Ebmajor``, ``c``, ``cminor`` or ``Ab:`` key tokens.

    Without a mode word an upper-case tonic is major and a lower-case
    one minor.

    >>> parse_key('Ebmajor')
    Key(tonic=3, mode='major')
    >>> parse_key('c')
    Key(tonic=0, mode='minor')
    """
    match = KEY_PATTERN.match(text or '')
    if match is None:
        raise ValueError(f"parse_key:\tcannot read key {text!r}")
    letter, accidentals, mode_word = match.groups()
    tonic = TONIC_NAMES[letter.upper()]
    tonic += accidentals.count('#') - accidentals.count('b')
    if mode_word:
        mode = MINOR if mode_word.lower().startswith('min') else MAJOR
    else:
        mode = MINOR if letter.islower() else MAJOR

    return Key(tonic % TET, mode)


def _spelling(spelling):
    if spelling is None:
        return DEFAULT_SPELLING
    table = {int(dist): str(label) for dist, label in spelling.items()}
    missing = set(range(TET)) - set(table)
    if missing:
        raise ValueError(f"region_label:\tspelling table misses {sorted(missing)}")
    return table


def region_label(global_key: Key, local_key: Key, spelling=None) -> str:
    """
    Roman numeral of local_key relative to global_key.

    >>> region_label(Key(3), Key(0, 'minor'))
    'vi'
    >>> region_label(Key(8), Key(4))
    '#V'
    """
    numeral = _spelling(spelling)[(local_key.tonic - global_key.tonic) % TET]
    if local_key.mode == MINOR:
        numeral = numeral.lower()
    return numeral


def is_key_chord(chord: PitchClassSet) -> bool:
    """True for major/minor triads, dominant sevenths and major dyads."""
    return chord.tet == TET and classify_chord(chord).quality in KEY_CHORDS


def prevalent_chord(layer) -> PitchClassSet:
    """
    Most visited key chord of a (layer) network.

    Ties go to the higher total degree, then the lower id. Without any
    key chord the most visited node is returned.
    """
    if not len(layer):
        raise ValueError("prevalent_chord:\tempty layer")
    stats = degree_stats(layer).per_node
    counts = layer.counts

    def rank(node):
        return (-counts[node], -stats[node].total, node)

    candidates = [node for node in layer.nodes
                  if is_key_chord(layer.pcset(node))]
    if not candidates:
        candidates = layer.nodes
    return layer.pcset(min(candidates, key=rank))


def chord_to_key(chord: PitchClassSet) -> Key:
    """
    Key implied by a key chord; a dominant seventh points a fourth up.

    >>> chord_to_key(PitchClassSet((3, 7, 10, 1)))
    Key(tonic=8, mode='major')
    """
    quality, root = classify_chord(chord)
    if quality == OTHER:
        raise ValueError(f"chord_to_key:\t{chord} is not a triad, dominant "
                         "seventh or major dyad")
    if quality == MINOR_TRIAD:
        return Key(root, MINOR)
    if quality == DOMINANT_SEVENTH:
        return Key((root + 5) % TET, MAJOR)
    return Key(root, MAJOR)


def global_key(net) -> Key:
    """Key of the prevalent chord of the whole network."""
    chord = prevalent_chord(net)
    key = chord_to_key(chord)
    logger.info("global_key:\tprevalent chord %s -> %s", pcset_name(chord),
                key_name(key))
    return key


def build_region_table(layers, segmentation, global_key: Key,
                       spelling=None) -> RegionTable:
    """One row per layer: bar range, prevalent chord, key and region label."""
    if len(layers) != len(segmentation.segments):
        raise ValueError(f"build_region_table:\t{len(layers)} layers for "
                         f"{len(segmentation.segments)} segments")
    rows, bar_votes = [], {}
    for layer in layers:
        chord = prevalent_chord(layer)
        if is_key_chord(chord):
            key = chord_to_key(chord)
            label = region_label(global_key, key, spelling)
        else:
            logger.warning("build_region_table:\tsection %d prevalent chord "
                           "%s is unclassified", layer.segment_id, chord)
            key, label = None, NO_REGION
        start_bar, end_bar = layer.bar_range
        rows.append(RegionRow(layer.segment_id, start_bar, end_bar, chord, key,
                              label))
        for bar in layer.bars:
            bar_votes.setdefault(bar, label)

    return RegionTable(rows, global_key, bar_votes)


def _strip_key_prefix(label):
    return label.split(':', 1)[-1] if label else label


def agreement(ours, reference) -> float:
    """
    Fraction of shared bars on which the two region labels agree.

    Either side may be a RegionTable or an AnnotationFile; a leading
    ``<key>:`` prefix is ignored on both.
    """
    if ours.global_key != reference.global_key:
        raise ValueError(f"agreement:\tglobal keys differ, "
                         f"{ours.global_key} vs {reference.global_key}")
    our_labels = ours.bar_labels()
    ref_labels = reference.bar_labels()
    shared = sorted(set(our_labels) & set(ref_labels))
    if not shared:
        raise ValueError("agreement:\tthe two tables share no bars")
    agreeing = sum(_strip_key_prefix(our_labels[bar])
                   == _strip_key_prefix(ref_labels[bar]) for bar in shared)

    return agreeing / len(shared)


def read_annotation(path) -> AnnotationFile:
    """
    Read an annotation csv.

    The first line is ``global_key=<tonic><mode>``, followed by a
    ``start_bar,end_bar,region`` header and one row per region.
    """
    path = str(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"read_annotation:\t{path} does not exist")
    with open(path, newline='') as file:
        header = file.readline().strip()
        if not header.startswith('global_key='):
            raise ValueError(f"read_annotation:\t{path} must start with "
                             f"global_key=<key>, found {header!r}")
        key = parse_key(header.split('=', 1)[1])
        rows = []
        for record in csv.DictReader(file):
            start, end = int(record['start_bar']), int(record['end_bar'])
            if end < start:
                raise ValueError(f"read_annotation:\tbad bar range "
                                 f"{start}-{end} in {path}")
            rows.append((start, end, record['region'].strip()))

    return AnnotationFile(key, tuple(sorted(rows)))


def write_region_table(table: RegionTable, path):
    """Write the four-column region table as csv."""
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(['section', 'measures', 'prevalent_chord', 'region'])
        writer.writerows(table.to_rows())

    return path
