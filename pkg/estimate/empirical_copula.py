"""
Empirical copulas of sub-samples
C_{k:l}, the break-aware C_{k:l,m} / C_{k:l,m⃗} and the finite-difference
estimator of the partial derivatives.

The break-aware copula of a window is the empirical c.d.f. of its segmented
pseudo-observations, which is the length-weighted mixture of the empirical
copulas of the window's pieces. Evaluators store every column sorted
together with each row's position in that order, so the rows dominated by a
point are found by integer comparisons only.
"""
from typing import Tuple

import numpy as np

from estimate.errors import DomainError
from estimate.segmented_ranks import ArrayLike, as_matrix, pseudo_observations, segment_ecdf, window_pieces
from estimate.types import BreakSpec


def derivative_bandwidth(length: int) -> float:
    """h_{k:l} = min((l-k+1)^{-1/2}, 1/2)"""
    return min(length ** -0.5, 0.5)


class CopulaEval:
    """
    Immutable evaluator of C_{k:l,spec} for the 1-based window (k, l).

    A window with k > l evaluates to zero everywhere (empty sub-samples are
    null by convention).
    """

    def __init__(self, sample: ArrayLike, spec: BreakSpec, window: Tuple[int, int]):
        values = as_matrix(sample)
        self.spec = spec
        self.window = (int(window[0]), int(window[1]))
        self.d = values.shape[1]
        k, l = self.window
        if k > l:
            self.length = 0
            self.pseudo = np.empty((0, self.d))
        else:
            self.length = l - k + 1
            self.pseudo = pseudo_observations(values, spec, (k, l)).values
        self._sorted = np.sort(self.pseudo, axis=0)
        order = np.argsort(self.pseudo, axis=0, kind="stable")
        self._position = np.empty_like(order)
        rows = np.arange(self.length)
        for j in range(self.d):
            self._position[order[:, j], j] = rows

    @property
    def bandwidth(self) -> float:
        return derivative_bandwidth(self.length) if self.length else 0.5

    def marginal_indicators(self, points: np.ndarray) -> np.ndarray:
        """Boolean (L, E, d): pseudo-observation i is <= point e in coordinate j"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((self.length, points.shape[0], self.d), dtype=bool)
        for j in range(self.d):
            below = np.searchsorted(self._sorted[:, j], points[:, j], side="right")
            out[:, :, j] = self._position[:, j][:, None] < below[None, :]
        return out

    def count_many(self, points: np.ndarray) -> np.ndarray:
        """Number of pseudo-observations dominated by each point"""
        if self.length == 0:
            return np.zeros(np.atleast_2d(points).shape[0], dtype=np.int64)
        return self.marginal_indicators(points).all(axis=2).sum(axis=0)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        if self.length == 0:
            return np.zeros(np.atleast_2d(points).shape[0])
        return self.count_many(points) / self.length

    def evaluate(self, u) -> float:
        return float(self.evaluate_many(np.asarray(u, dtype=float)[None, :])[0])

    def partials_many(self, points: np.ndarray) -> np.ndarray:
        """Divided differences at bandwidth h for every point and coordinate, shape (E, d)"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape)
        if self.length == 0:
            return out
        h = self.bandwidth
        for j in range(self.d):
            upper = points.copy()
            lower = points.copy()
            upper[:, j] = np.minimum(points[:, j] + h, 1.0)
            lower[:, j] = np.maximum(points[:, j] - h, 0.0)
            out[:, j] = (self.evaluate_many(upper) - self.evaluate_many(lower)) / (upper[:, j] - lower[:, j])
        return out


def _check_point(ev: CopulaEval, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (ev.d,) or not np.all((u >= 0.0) & (u <= 1.0)):
        raise DomainError()
    return u


def eval_copula(ev: CopulaEval, u) -> float:
    """C_{k:l,spec}(u) for u in the unit cube"""
    return ev.evaluate(_check_point(ev, u))


def copula_partial(ev: CopulaEval, j: int, u) -> float:
    """
    Estimate of the j-th partial derivative (j is zero-based) by simple
    differencing at h = min((l-k+1)^{-1/2}, 1/2); u_j +- h is clipped to [0, 1].
    """
    u = _check_point(ev, u)
    if not 0 <= j < ev.d:
        raise DomainError(f"coordinate {j} outside 0..{ev.d - 1}")
    return float(ev.partials_many(u[None, :])[0, j])


def naive_eval_copula(sample: ArrayLike, spec: BreakSpec, window: Tuple[int, int], u) -> float:
    """Row-by-row oracle for CopulaEval.evaluate; recomputes every e.c.d.f."""
    values = as_matrix(sample)
    k, l = window
    if k > l:
        return 0.0
    count = 0
    for a, c in window_pieces(spec, k, l):
        for i in range(a, c):
            if all(segment_ecdf(values[a:c, j], values[i, j]) <= u[j] for j in range(values.shape[1])):
                count += 1
    return count / (l - k + 1)


def lattice_grid(d: int, size: int) -> np.ndarray:
    """Regular grid of size**d points of [0, 1]^d, endpoints included"""
    axis = np.linspace(0.0, 1.0, size)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def mixture_weights(spec: BreakSpec, window: Tuple[int, int]) -> Tuple[Tuple[Tuple[int, int], float], ...]:
    """Pieces of the window (1-based, inclusive) and their length weights"""
    k, l = window
    total = l - k + 1
    return tuple(((a + 1, c), (c - a) / total) for a, c in window_pieces(spec, k, l))
