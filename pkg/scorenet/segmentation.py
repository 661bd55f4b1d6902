"""
.. module:: segmentation
   :platform: Unix
   :synopsis: Change point detection on a LabeledSeries with a Gaussian
              kernel cost and greedy binary segmentation.

The ids of the series are treated as one-dimensional reals.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .sequence import LabeledSeries

logger = logging.getLogger(__name__)

DEFAULT_PENALTY = 3.0
DEFAULT_MIN_SIZE = 2
GAMMA_MAX_PAIRS = 100000
GAMMA_RULES = ('median', 'nearest')
DEFAULT_GAMMA_RULE = 'nearest'
# gains this close are treated as equal; the earliest index wins
GAIN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CostModel:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"CostModel:\tgamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class Segmentation:
    """
    Breakpoints of a series.

    ``breakpoints`` are exclusive segment ends; the last one is the
    series length.
    """

    breakpoints: Tuple[int, ...]
    penalty: float
    bar_breaks: Tuple[int, ...] = ()
    gamma: float = None
    min_size: int = DEFAULT_MIN_SIZE
    # gain of each accepted split, keyed by breakpoint
    gains: dict = field(default_factory=dict)
    costs: Tuple[float, ...] = ()

    @property
    def segments(self):
        starts = (0,) + self.breakpoints[:-1]
        return list(zip(starts, self.breakpoints))

    @property
    def change_points(self):
        """Breakpoints without the closing series length."""
        return self.breakpoints[:-1]

    def to_dict(self):
        return {
            'breakpoints': list(self.change_points),
            'bar_breaks': list(self.bar_breaks),
            'segments': [list(seg) for seg in self.segments],
            'gamma': self.gamma,
            'penalty': self.penalty,
            'min_size': self.min_size,
            'costs': {
                'segments': list(self.costs),
                'gains': {str(bkp): self.gains[bkp]
                          for bkp in sorted(self.gains)},
            },
        }


def _values(series):
    if isinstance(series, LabeledSeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(series, dtype=float)


def rbf_cost(series, a: int, b: int, model: CostModel) -> float:
    """
    Gaussian kernel cost of the window ``[a, b)``.

    (b - a) - 1/(b - a) * sum_{s,t} exp(-gamma (y_s - y_t)^2)

    >>> rbf_cost([0, 1], 0, 2, CostModel(1e6))
    1.0
    >>> rbf_cost([4, 4, 4], 0, 3, CostModel(0.5))
    0.0
    """
    values = _values(series)
    if not 0 <= a < b <= len(values):
        raise ValueError(f"rbf_cost:\tempty or invalid window [{a}, {b}) "
                         f"for a series of length {len(values)}")
    window = values[a:b]
    kernel = np.exp(-model.gamma * np.subtract.outer(window, window) ** 2)
    cost = (b - a) - kernel.sum() / (b - a)

    return float(max(cost, 0.0))


def _is_constant(values):
    return len(values) < 2 or bool(np.all(values == values[0]))


def choose_gamma(series, seed: int = 0, max_pairs: int = GAMMA_MAX_PAIRS,
                 rule: str = 'median') -> CostModel:
    """
    Kernel bandwidth of a series.

    ``median``: gamma = 1 / median nonzero squared difference. All pairs
    are used for short series; longer series use a seeded uniform
    subsample of ``max_pairs`` pairs.

    ``nearest``: gamma = 1 / smallest nonzero squared difference between
    distinct values, so the two closest ids get a kernel value of
    exp(-1) and every other pair less. Segmentation without an explicit
    model uses ``nearest``.

    >>> choose_gamma([0, 2, 4, 10], rule='nearest').gamma
    0.25
    """
    values = _values(series)
    if _is_constant(values):
        raise ValueError("choose_gamma:\tseries is constant, the kernel "
                         "bandwidth is undefined and segmentation is vacuous")
    if rule not in GAMMA_RULES:
        raise ValueError(f"choose_gamma:\tunknown gamma rule {rule}, "
                         f"choose from {list(GAMMA_RULES)}")
    if rule == 'nearest':
        gaps = np.diff(np.unique(values))
        return CostModel(gamma=float(1.0 / gaps.min() ** 2))

    size = len(values)
    n_pairs = size * (size - 1) // 2
    if n_pairs <= max_pairs:
        first, second = np.triu_indices(size, k=1)
    else:
        logger.warning("choose_gamma:\tsubsampling %d of %d pairs (seed %d)",
                    max_pairs, n_pairs, seed)
        rng = np.random.default_rng(seed)
        first = rng.integers(0, size, max_pairs)
        second = rng.integers(0, size, max_pairs)
    sq_diffs = (values[first] - values[second]) ** 2
    sq_diffs = sq_diffs[sq_diffs > 0]
    if not sq_diffs.size:
        raise ValueError("choose_gamma:\tno distinct pairs sampled, "
                         "segmentation is vacuous")

    return CostModel(gamma=float(1.0 / np.median(sq_diffs)))


class _KernelCosts:
    """Window costs from cumulative sums of the Gram matrix."""

    def __init__(self, values, gamma):
        gram = np.exp(-gamma * np.subtract.outer(values, values) ** 2)
        self.integral = np.zeros((len(values) + 1, len(values) + 1))
        self.integral[1:, 1:] = gram.cumsum(axis=0).cumsum(axis=1)

    def cost(self, a, b):
        """Cost of [a, b); a and b may be integer arrays."""
        integral = self.integral
        total = integral[b, b] - integral[a, b] - integral[b, a] + integral[a, a]
        return np.maximum((b - a) - total / (b - a), 0.0)


def _best_split(costs, a, b, min_size):
    """Admissible split of [a, b) with the largest gain, or None."""
    candidates = np.arange(a + min_size, b - min_size + 1)
    if not candidates.size:
        return None, None
    gains = costs.cost(a, b) - costs.cost(a, candidates) - costs.cost(candidates, b)
    best = int(np.flatnonzero(gains >= gains.max() - GAIN_TOLERANCE)[0])

    return int(candidates[best]), float(gains[best])


def binary_segmentation(series: LabeledSeries, penalty: float = DEFAULT_PENALTY,
                        model: CostModel = None,
                        min_size: int = DEFAULT_MIN_SIZE) -> Segmentation:
    """
    Greedy binary segmentation.

    The split of a segment with the largest gain
    ``cost(a, b) - cost(a, t) - cost(t, b)`` is accepted when the gain
    exceeds the penalty; both halves are then searched again.

    Parameters
    ----------
    series: LabeledSeries or array
        The signal.
    penalty: float
        Positive stopping threshold on the gain.
    model: CostModel
        Kernel bandwidth; chosen with :func:`choose_gamma` and the
        ``nearest`` rule when None.
    min_size: int
        Shortest admissible segment, at least 2.

    Returns
    -------
    Segmentation
        A constant series gives the single segment ``[0, size)``.
    """
    values = _values(series)
    size = len(values)
    if not penalty > 0:
        raise ValueError(f"binary_segmentation:\tpenalty must be positive, "
                         f"got {penalty}")
    if min_size < 2 or size < 2 * min_size:
        raise ValueError(f"binary_segmentation:\tmin_size {min_size} needs "
                         f"min_size >= 2 and a series of at least "
                         f"{2 * min_size} events, got {size}")
    if model is None:
        if _is_constant(values):
            logger.info("binary_segmentation:\tconstant series, one segment")
            return single_segment(series, penalty, min_size=min_size)
        model = choose_gamma(values, rule=DEFAULT_GAMMA_RULE)

    costs = _KernelCosts(values, model.gamma)
    breakpoints, gains = [], {}
    pending = deque([(0, size)])
    while pending:
        a, b = pending.popleft()
        split, gain = _best_split(costs, a, b, min_size)
        if split is None or not gain > penalty:
            continue
        logger.debug("binary_segmentation:\tsplit accepted at %d, gain %.3f",
                     split, gain)
        breakpoints.append(split)
        gains[split] = gain
        pending.append((a, split))
        pending.append((split, b))

    breakpoints = tuple(sorted(breakpoints)) + (size,)
    starts = (0,) + breakpoints[:-1]
    segment_costs = tuple(float(costs.cost(a, b))
                          for a, b in zip(starts, breakpoints))
    bar_breaks = ()
    if isinstance(series, LabeledSeries):
        bar_breaks = tuple(int(series.bars[bkp]) for bkp in breakpoints[:-1])
    logger.info("binary_segmentation:\t%d breakpoints at penalty %s",
                len(breakpoints) - 1, penalty)

    return Segmentation(breakpoints=breakpoints, penalty=penalty,
                        bar_breaks=bar_breaks, gamma=model.gamma,
                        min_size=min_size, gains=gains, costs=segment_costs)


def breakpoints_to_bars(seg: Segmentation, series: LabeledSeries):
    """Bar of the first event of every segment after the first."""
    return [int(series.bars[bkp]) for bkp in seg.change_points]


def single_segment(series, penalty: float = DEFAULT_PENALTY,
                   model: CostModel = None,
                   min_size: int = DEFAULT_MIN_SIZE) -> Segmentation:
    """
    The whole series as one segment.

    For series that are constant or shorter than two segments of
    ``min_size``.

    >>> single_segment([5, 5, 5]).breakpoints
    (3,)
    """
    values = _values(series)
    size = len(values)
    if not size:
        raise ValueError("single_segment:\tempty series")
    gamma, cost = None, 0.0
    if not _is_constant(values):
        if model is None:
            model = choose_gamma(values, rule=DEFAULT_GAMMA_RULE)
        gamma, cost = model.gamma, rbf_cost(values, 0, size, model)

    return Segmentation(breakpoints=(size,), penalty=penalty, gamma=gamma,
                        min_size=min_size, costs=(cost,))


def penalty_from_preset(name, config):
    """Calibrated penalty stored under ``penalty-presets`` in the config."""
    presets = config.get('penalty-presets', {})
    if name not in presets:
        raise KeyError(f"penalty_from_preset:\tunknown preset {name}, "
                       f"choose from {sorted(presets)}")
    return float(presets[name])


def penalty_sweep(series, penalties, model=None, min_size=DEFAULT_MIN_SIZE):
    """Number of breakpoints found at each penalty."""
    if model is None:
        model = choose_gamma(series, rule=DEFAULT_GAMMA_RULE)
    return {float(penalty): len(binary_segmentation(series, penalty, model,
                                                    min_size).change_points)
            for penalty in penalties}
