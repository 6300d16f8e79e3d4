"""
Segmented ranks
Per-segment empirical c.d.f.s and the pseudo-observations every downstream
statistic consumes.

A window k..l is cut at every known marginal break falling strictly inside
it; each column of each piece is ranked on its own with the "<=" count, so
tied values share the maximal rank and no randomness is involved.
"""
import logging
import warnings
from typing import List, Optional, Tuple, Union

import numpy as np

from estimate.errors import EmptySegmentError, EmptyWindowError, SampleError, SegmentWarning
from estimate.types import BreakSpec, PseudoSample, SampleMatrix

logger = logging.getLogger(__name__)

ArrayLike = Union[SampleMatrix, np.ndarray, list]


def as_matrix(sample: ArrayLike) -> np.ndarray:
    """Observation values as a read-only float matrix (a 1-D input is one column)"""
    if isinstance(sample, SampleMatrix):
        return sample.values
    values = np.array(sample, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2 or values.shape[0] == 0:
        raise SampleError("expected a non-empty 2-D matrix")
    if not np.all(np.isfinite(values)):
        raise SampleError("all values must be finite")
    return values


def segment_ecdf(x, t: float) -> float:
    """(1/L) * #{i : x_i <= t} over one segment column"""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise EmptySegmentError()
    return np.count_nonzero(x <= t) / x.size


def window_pieces(spec: BreakSpec, k: int, l: int) -> List[Tuple[int, int]]:
    """
    Cut the 1-based window k..l at the breaks inside it.

    Returns 0-based half-open row ranges. A break m with k <= m < l splits
    the window into ..m and m+1..; a break equal to l leaves the window whole
    (its right part would be empty).
    """
    if k > l:
        raise EmptyWindowError()
    start, stop = k - 1, l
    cuts = [m for m in spec.breaks if start < m < stop]
    edges = [start, *cuts, stop]
    return [(a, c) for a, c in zip(edges, edges[1:])]


def column_ranks(block: np.ndarray) -> np.ndarray:
    """Integer "<=" ranks of every column of block, O(L log L) per column"""
    block = np.asarray(block, dtype=float)
    if block.shape[0] == 0:
        raise EmptySegmentError()
    ranks = np.empty(block.shape, dtype=np.int64)
    for j in range(block.shape[1]):
        ordered = np.sort(block[:, j])
        ranks[:, j] = np.searchsorted(ordered, block[:, j], side="right")
    return ranks


def piece_pseudo_values(values: np.ndarray, pieces: List[Tuple[int, int]]) -> np.ndarray:
    """Stack rank/L of every piece, rows in window order"""
    out = []
    for a, c in pieces:
        out.append(column_ranks(values[a:c]) / (c - a))
    return np.vstack(out)


def segment_bounds(spec: BreakSpec, i: int) -> Tuple[int, int]:
    """1-based inclusive bounds of the break segment holding 1-based row i"""
    if not 1 <= i <= spec.n:
        raise SampleError(f"row {i} outside 1..{spec.n}")
    a, c = spec.segments()[spec.segment_of(i - 1)]
    return a + 1, c


def warn_short_segments(spec: BreakSpec) -> None:
    for a, c in spec.segments():
        if c - a == 1:
            message = f"break segment {a + 1}..{c} has a single observation; its pseudo-observation is forced to 1.0"
            logger.warning(message)
            warnings.warn(message, SegmentWarning, stacklevel=3)


def pseudo_observations(
    sample: ArrayLike,
    spec: BreakSpec,
    window: Optional[Tuple[int, int]] = None,
) -> PseudoSample:
    """
    Segmented pseudo-observations of rows k..l.

    Row i is ranked within the intersection of [k, l] and the break segment
    holding i; column j gets the segment e.c.d.f. evaluated at X_ij.
    With window=None the full range 1..n is used.
    """
    values = as_matrix(sample)
    n = values.shape[0]
    if spec.n != n:
        raise SampleError(f"break spec is for n={spec.n}, sample has n={n}")
    k, l = window if window is not None else (1, n)
    if k > l:
        raise EmptyWindowError()
    if k < 1 or l > n:
        raise SampleError(f"window {k}..{l} outside 1..{n}")
    if (k, l) == (1, n):
        warn_short_segments(spec)

    pieces = window_pieces(spec, k, l)
    pseudo = piece_pseudo_values(values, pieces)
    pseudo.setflags(write=False)
    return PseudoSample(values=pseudo, break_spec=spec, window=(k, l), pieces=tuple(pieces))


def rank_thresholds(size: int, points: np.ndarray) -> np.ndarray:
    """Largest integer r with r/size <= u, for every coordinate u of points"""
    ladder = np.arange(size + 1) / size
    return np.searchsorted(ladder, points, side="right") - 1


def _move_threshold(count, theta, j, target, window_positions, column_order, position):
    """Shift column j of every threshold to target, adjusting count by the rows crossed"""
    old = theta[:, j]
    lo = np.minimum(old, target)
    first = np.searchsorted(window_positions, lo, side="left")
    sizes = np.searchsorted(window_positions, np.maximum(old, target), side="left") - first
    total = int(sizes.sum())
    if total:
        point = np.repeat(np.arange(theta.shape[0]), sizes)
        offset = np.arange(total) - np.repeat(np.cumsum(sizes) - sizes, sizes)
        rows = column_order[window_positions[np.repeat(first, sizes) + offset]]
        others = np.delete(np.arange(theta.shape[1]), j)
        inside = np.all(position[rows][:, others] < theta[point][:, others], axis=1)
        sign = np.where(target > old, 1, -1)[point]
        np.add.at(count, point, sign * inside)
    theta[:, j] = target


def prefix_dominance_counts(block, points) -> np.ndarray:
    """
    counts[L, e] = number of the first L rows of block whose pseudo-observation
    within those L rows is <= points[e] componentwise, for L = 0 .. len(block).

    A rank in column j is at most r exactly when the value lies below the
    (r+1)-th smallest value of the window, so every point keeps one threshold
    per column as a position in that column's sort order. Adding a row moves
    each threshold to a neighbouring order statistic and only the rows in
    between change status: a step costs O(E * d) plus one sorted insertion.
    """
    block = np.asarray(block, dtype=float)
    points = np.asarray(points, dtype=float)
    length, d = block.shape
    n_points = points.shape[0]
    order = np.argsort(block, axis=0, kind="stable")
    ordered = np.take_along_axis(block, order, axis=0)
    position = np.empty((length, d), dtype=np.int64)
    tie_start = np.empty((length, d), dtype=np.int64)
    for j in range(d):
        position[order[:, j], j] = np.arange(length)
        tie_start[:, j] = np.searchsorted(ordered[:, j], ordered[:, j], side="left")

    counts = np.zeros((length + 1, n_points), dtype=np.int64)
    count = np.zeros(n_points, dtype=np.int64)
    theta = np.zeros((n_points, d), dtype=np.int64)
    members = [np.empty(0, dtype=np.int64) for _ in range(d)]
    for size in range(1, length + 1):
        row = position[size - 1]
        grown = [np.insert(members[j], np.searchsorted(members[j], row[j]), row[j]) for j in range(d)]
        ranks = rank_thresholds(size, points)
        for j in range(d):
            target = np.full(n_points, length, dtype=np.int64)
            below = ranks[:, j] < size
            target[below] = tie_start[grown[j][ranks[below, j]], j]
            _move_threshold(count, theta, j, target, members[j], order[:, j], position)
        count += np.all(row[None, :] < theta, axis=1)
        members = grown
        counts[size] = count
    return counts
