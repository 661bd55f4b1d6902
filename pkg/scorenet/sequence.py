"""
.. module:: sequence
   :platform: Unix
   :synopsis: Integer encoding of chord sequences and the occurrence filter.

"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .pcset_core import PitchClassSet

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.10


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    """
    A chord sequence as integer ids.

    Ids run 0..K-1 by descending occurrence count, ties by first
    appearance, so id 0 is the most frequent pitch-class set.
    """

    values: np.ndarray
    dictionary: Dict[int, PitchClassSet]
    bars: np.ndarray
    counts: Dict[int, int]
    # dictionary of the unfiltered series this one was derived from
    source_dictionary: Dict[int, PitchClassSet] = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    @property
    def ids(self):
        """Reverse lookup pcset -> id."""
        return {pcset: idx for idx, pcset in self.dictionary.items()}

    @property
    def alphabet_size(self):
        return len(self.dictionary)

    def pcsets(self):
        return [self.dictionary[int(v)] for v in self.values]


def _encode(pcsets, bars, source_dictionary=None):
    counts = Counter(pcsets)
    first_seen = {}
    for idx, pcset in enumerate(pcsets):
        first_seen.setdefault(pcset, idx)
    ranked = sorted(counts, key=lambda pcset: (-counts[pcset],
                                               first_seen[pcset]))
    ids = {pcset: idx for idx, pcset in enumerate(ranked)}
    dictionary = {idx: pcset for pcset, idx in ids.items()}
    values = np.array([ids[pcset] for pcset in pcsets], dtype=int)

    return LabeledSeries(values=values,
                         dictionary=dictionary,
                         bars=np.asarray(bars, dtype=int),
                         counts={ids[pcset]: counts[pcset] for pcset in ranked},
                         source_dictionary=dict(source_dictionary or dictionary))


def build_series(seq) -> LabeledSeries:
    """Encode a ChordSequence as a LabeledSeries."""
    if not len(seq):
        raise ValueError("build_series:\tempty chord sequence")
    pcsets = [event.pcset for event in seq]
    bars = [event.bar for event in seq]
    series = _encode(pcsets, bars)
    logger.info("build_series:\t%d events, %d distinct pcsets",
                len(series), series.alphabet_size)

    return series


def occurrence_histogram(series: LabeledSeries) -> Dict[int, int]:
    """Occurrences per id, in id order."""
    return dict(series.counts)


def filter_series(series: LabeledSeries,
                  threshold: float = DEFAULT_THRESHOLD) -> LabeledSeries:
    """
    Drop events whose pcset occurs less than threshold x max count.

    Survivors are re-indexed with the same descending-count rule; the
    original dictionary stays available as ``source_dictionary``.
    """
    if not 0 <= threshold <= 1:
        raise ValueError(f"filter_series:\tthreshold {threshold} "
                         "outside [0, 1]")
    if not len(series):
        raise ValueError("filter_series:\tempty series")

    max_count = max(series.counts.values())
    kept = {idx for idx, count in series.counts.items()
            if count >= threshold * max_count}
    mask = np.array([int(v) in kept for v in series.values], dtype=bool)
    if not mask.any():
        raise ValueError(f"filter_series:\tnothing left at threshold {threshold}")

    pcsets = [series.dictionary[int(v)] for v in series.values[mask]]
    filtered = _encode(pcsets, series.bars[mask],
                       source_dictionary=series.source_dictionary)
    logger.info("filter_series:\t%d -> %d events, %d -> %d distinct pcsets "
                "at threshold %s", len(series), len(filtered),
                series.alphabet_size, filtered.alphabet_size, threshold)

    return filtered


def series_to_rows(series: LabeledSeries):
    """Rows (index, bar, id, pcset) for the series table."""
    return [(idx, int(bar), int(value), str(series.dictionary[int(value)]))
            for idx, (bar, value) in enumerate(zip(series.bars, series.values))]


def series_points(series: LabeledSeries):
    """(event index, id) pairs of the time-series scatter."""
    return [(idx, int(value)) for idx, value in enumerate(series.values)]
