"""
.. module:: pcset_core
   :platform: Unix
   :synopsis: Pitch-class-set arithmetic: normal order, minimal voice
              leading distance and voice leading operators.

Pitch classes are plain integers in ``[0, tet)`` with C = 0 in 12-TET.
"""
import itertools
import logging
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

logger = logging.getLogger(__name__)

TET = 12

NOTE_NAMES = ('C', 'C#', 'D', 'Eb', 'E', 'F', 'F#', 'G', 'Ab', 'A', 'Bb',
              'B')

MAJOR_TRIAD = 'major-triad'
MINOR_TRIAD = 'minor-triad'
DOMINANT_SEVENTH = 'dominant-seventh'
MAJOR_DYAD = 'major-dyad'
OTHER = 'other'

# interval content matched under transposition, root first
CHORD_TEMPLATES = (
    (MAJOR_TRIAD, (0, 4, 7)),
    (MINOR_TRIAD, (0, 3, 7)),
    (DOMINANT_SEVENTH, (0, 4, 7, 10)),
    (MAJOR_DYAD, (0, 4)),
)

ChordQuality = namedtuple('ChordQuality', ['quality', 'root'])


@dataclass(frozen=True)
class PitchClassSet:
    """A normal-ordered set of pitch classes.

    Build instances with :func:`normal_order`; the constructor does not
    reorder its input.
    """

    pcs: Tuple[int, ...]
    tet: int = TET

    def __post_init__(self):
        if self.tet < 1:
            raise ValueError(f"PitchClassSet:\ttet must be >= 1, got {self.tet}")
        if len(set(self.pcs)) != len(self.pcs):
            raise ValueError(f"PitchClassSet:\trepeated pitch class in {self.pcs}")
        for pc in self.pcs:
            if not 0 <= pc < self.tet:
                raise ValueError(
                    f"PitchClassSet:\t{pc} outside [0, {self.tet})")

    def __len__(self):
        return len(self.pcs)

    def __iter__(self):
        return iter(self.pcs)

    def __str__(self):
        return '[' + ','.join(str(pc) for pc in self.pcs) + ']'

    def as_list(self):
        return list(self.pcs)


@dataclass(frozen=True)
class VoiceLeadingVector:
    """Signed semitone steps, one per voice of the source set."""

    steps: Tuple[int, ...]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def norm(self):
        return operator_norm(self)

    def canonical(self):
        """Sorted step multiset, signs kept; the histogram key."""
        return tuple(sorted(self.steps))


def normal_order(pitches: Iterable[int], tet: int = TET) -> PitchClassSet:
    """
    Reduce pitches to the normal order of their pitch-class set.

    Rotations of the ascending circular ordering are compared by span
    (first to last), then by the intervals from the first element to the
    second, third and so on, then by the lowest first pitch class.

    >>> normal_order([7, 4, 0]).pcs
    (0, 4, 7)
    >>> normal_order([11, 2, 7]).pcs
    (7, 11, 2)
    >>> normal_order([]).pcs
    ()
    """
    if tet < 1:
        raise ValueError(f"normal_order:\ttet must be >= 1, got {tet}")
    pcs = sorted({int(p) % tet for p in pitches})
    size = len(pcs)
    if size < 2:
        return PitchClassSet(tuple(pcs), tet)

    best_key, best = None, None
    for i in range(size):
        rotated = pcs[i:] + [p + tet for p in pcs[:i]]
        from_first = [p - rotated[0] for p in rotated]
        key = (from_first[-1], tuple(from_first[1:-1]), rotated[0])
        if best_key is None or key < best_key:
            best_key, best = key, rotated

    return PitchClassSet(tuple(p % tet for p in best), tet)


def transpose(x: PitchClassSet, k: int) -> PitchClassSet:
    """T_k of a normal-ordered set, renormalized."""
    return normal_order([p + k for p in x.pcs], x.tet)


def pcset_name(x: PitchClassSet) -> str:
    """
    Note-name spelling of a 12-TET set.

    >>> pcset_name(normal_order([7, 11, 2]))
    'G B D'
    """
    if x.tet != TET:
        return str(x)
    return ' '.join(NOTE_NAMES[pc] for pc in x.pcs)


def operator_norm(v) -> float:
    """Euclidean norm sqrt(sum n_i^2) of a voice leading vector."""
    return math.sqrt(sum(step * step for step in v))


def _circular_step(source, target, tet):
    """Shortest signed path from source to target, in (-tet/2, tet/2]."""
    step = (target - source) % tet
    if step > tet / 2:
        step -= tet
    return step


def _check_pair(x, y, caller):
    if x.tet != y.tet:
        raise ValueError(f"{caller}:\tmismatched tet {x.tet} and {y.tet}")
    if not len(x) or not len(y):
        raise ValueError(f"{caller}:\tvoice leading to or from the empty set")


def _expansions(pcs, size):
    """Every way of doubling voices of pcs until it holds size voices."""
    extra = size - len(pcs)
    for doubled in itertools.combinations_with_replacement(range(len(pcs)),
                                                           extra):
        positions = sorted(list(range(len(pcs))) + list(doubled))
        yield [pcs[i] for i in positions]


def _best_voice_leading(x, y):
    """
    Minimal voice leading from x to y.

    Returns the squared size and the steps aligned to the (possibly
    doubled) voices of x.
    """
    tet = x.tet
    size = max(len(x), len(y))
    best_cost, best_steps = None, None
    x_options = list(_expansions(x.pcs, size))
    y_options = list(_expansions(y.pcs, size))
    for sources in x_options:
        for targets in y_options:
            steps = np.array([[_circular_step(s, t, tet) for t in targets]
                              for s in sources])
            cost = steps ** 2
            rows, cols = linear_sum_assignment(cost)
            total = int(cost[rows, cols].sum())
            if best_cost is None or total < best_cost:
                best_cost = total
                best_steps = tuple(int(steps[r, c]) for r, c in zip(rows, cols))

    return best_cost, best_steps


def vl_distance(x: PitchClassSet, y: PitchClassSet) -> float:
    """
    Minimal Euclidean voice leading distance between two sets.

    Voices move along the shortest circular path; sets of different
    size are matched by doubling voices of the smaller one in every
    possible way.

    >>> round(vl_distance(normal_order([0, 4, 7]), normal_order([7, 11, 2])), 4)
    2.2361
    """
    _check_pair(x, y, 'vl_distance')
    cost, _ = _best_voice_leading(x, y)
    return math.sqrt(cost)


def vl_operator_between(x: PitchClassSet, y: PitchClassSet) -> VoiceLeadingVector:
    """
    The steps realizing :func:`vl_distance`, aligned to the voices of x.

    >>> vl_operator_between(normal_order([0, 4, 7]), normal_order([7, 11, 2])).steps
    (-1, -2, 0)
    """
    _check_pair(x, y, 'vl_operator_between')
    _, steps = _best_voice_leading(x, y)
    return VoiceLeadingVector(steps)


def apply_distance_operator(x: PitchClassSet, magnitudes) -> set:
    """
    All sets reachable by moving distinct voices of x by the magnitudes.

    Each magnitude is applied up or down to one voice; voices without a
    magnitude stay put.
    """
    magnitudes = [int(m) for m in magnitudes]
    if not len(x):
        raise ValueError("apply_distance_operator:\tempty pitch-class set")
    if len(magnitudes) > len(x):
        raise ValueError(
            f"apply_distance_operator:\t{len(magnitudes)} magnitudes for "
            f"{len(x)} voices")

    reached = set()
    for positions in itertools.permutations(range(len(x)), len(magnitudes)):
        for signs in itertools.product((1, -1), repeat=len(magnitudes)):
            moved = list(x.pcs)
            for pos, sign, mag in zip(positions, signs, magnitudes):
                moved[pos] += sign * mag
            reached.add(normal_order(moved, x.tet))

    return reached


def classify_chord(x: PitchClassSet) -> ChordQuality:
    """
    Tag major/minor triads, dominant sevenths and major dyads with a root.

    >>> classify_chord(normal_order([3, 7, 10, 1]))
    ChordQuality(quality='dominant-seventh', root=3)
    """
    if x.tet != TET:
        raise ValueError(f"classify_chord:\tonly 12-TET sets, got tet={x.tet}")
    content = set(x.pcs)
    for quality, template in CHORD_TEMPLATES:
        if len(template) != len(content):
            continue
        for root in x.pcs:
            if {(root + i) % TET for i in template} == content:
                return ChordQuality(quality, root)

    return ChordQuality(OTHER, None)
