"""
Sequential processes and Cramér–von Mises statistics

D(k, u) = sqrt(n) * (k/n) * ((n-k)/n) * (C_{1:k,spec}(u) - C_{k+1:n,spec}(u))
compares the break-aware copulas of the two sides of split k. The statistic
is the maximum over k of the mean squared D over the n full-window
pseudo-observations; with no breaks it is the plain S_n.

Splits are addressed by their integer index k = floor(n*s). Both statistic
paths count dominated rows as integers and share the float arithmetic that
turns counts into D values, so they agree bit for bit.
"""
import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from estimate.empirical_copula import CopulaEval
from estimate.errors import BreakSpecError, SampleError
from estimate.segmented_ranks import (
    ArrayLike,
    as_matrix,
    prefix_dominance_counts,
    pseudo_observations,
    segment_ecdf,
    window_pieces,
)
from estimate.types import BreakSpec, StatisticValue

logger = logging.getLogger(__name__)

Reference = Union[None, float, CopulaEval]


def split_index(n: int, s: float) -> int:
    """floor(n*s), absorbing the rounding of k/n back onto k"""
    scaled = n * s
    k = math.floor(scaled)
    if math.isclose(scaled, k + 1, rel_tol=0.0, abs_tol=1e-9):
        k += 1
    return k


def split_weight(n: int, s: float, t: float) -> float:
    """lambda_n(s, t) = (floor(nt) - floor(ns)) / n for 0 <= s <= t <= 1"""
    if not 0.0 <= s <= t <= 1.0:
        raise ValueError(f"need 0 <= s <= t <= 1, got s={s}, t={t}")
    return (split_index(n, t) - split_index(n, s)) / n


def _check_spec(values: np.ndarray, spec: BreakSpec) -> int:
    n = values.shape[0]
    if spec.n != n:
        raise SampleError(f"break spec is for n={spec.n}, sample has n={n}")
    return n


def _scale(n: int, k: int) -> float:
    return math.sqrt(n) * (k / n) * ((n - k) / n)


def _d_values(n: int, k: int, left_counts, right_counts) -> np.ndarray:
    """D at every evaluation point from the dominated-row counts of both sides"""
    left_counts = np.asarray(left_counts, dtype=np.int64)
    right_counts = np.asarray(right_counts, dtype=np.int64)
    return _scale(n, k) * (left_counts / k - right_counts / (n - k))


def _window_copula(values: np.ndarray, spec: BreakSpec, lo: int, hi: int, u) -> float:
    """C_{lo+1:hi,spec}(u); zero for an empty window"""
    if lo >= hi:
        return 0.0
    return CopulaEval(values, spec, (lo + 1, hi)).evaluate(u)


def c_process(sample: ArrayLike, spec: BreakSpec, lo: int, hi: int, u, reference: Reference = None) -> float:
    """
    sqrt(n) * lambda_n(s, t) * (C_{lo+1:hi,spec}(u) - reference(u)) for the
    split indices lo = floor(ns) <= hi = floor(nt).

    reference defaults to the full-window copula C_{1:n,spec}; a float is
    taken as the reference value at u.
    """
    values = as_matrix(sample)
    n = _check_spec(values, spec)
    if not 0 <= lo <= hi <= n:
        raise ValueError(f"need 0 <= lo <= hi <= {n}, got {lo}, {hi}")
    u = np.asarray(u, dtype=float)
    if reference is None:
        ref = _window_copula(values, spec, 0, n, u)
    elif isinstance(reference, CopulaEval):
        ref = reference.evaluate(u)
    else:
        ref = float(reference)
    if lo == hi:
        return 0.0
    return math.sqrt(n) * ((hi - lo) / n) * (_window_copula(values, spec, lo, hi, u) - ref)


def _single_break_copula(values: np.ndarray, m: Optional[int], k: int, l: int, u) -> float:
    """((m-k+1) C_{k:m}(u) + (l-m) C_{m+1:l}(u)) / (l-k+1) for k <= m < l, else C_{k:l}(u)"""
    if k > l:
        return 0.0
    plain = BreakSpec.none(values.shape[0])
    if m is None or not k <= m < l:
        return CopulaEval(values, plain, (k, l)).evaluate(u)
    left = CopulaEval(values, plain, (k, m)).evaluate(u)
    right = CopulaEval(values, plain, (m + 1, l)).evaluate(u)
    return ((m - k + 1) * left + (l - m) * right) / (l - k + 1)


def d_process(sample: ArrayLike, spec: BreakSpec, k: int, u) -> float:
    """
    D_{n,m}(k/n, u) for at most one marginal break, built from the explicit
    two-piece mixture of plain sub-sample copulas.
    """
    values = as_matrix(sample)
    n = _check_spec(values, spec)
    if spec.p > 1:
        raise BreakSpecError(f"d_process takes at most one break, got {spec.p}; use d_process_multi")
    if k <= 0 or k >= n:
        return 0.0
    u = np.asarray(u, dtype=float)
    m = spec.breaks[0] if spec.p else None
    left = _single_break_copula(values, m, 1, k, u)
    right = _single_break_copula(values, m, k + 1, n, u)
    return _scale(n, k) * (left - right)


def d_process_multi(sample: ArrayLike, spec: BreakSpec, k: int, u) -> float:
    """
    D_{n,spec}(k/n, u) for any number of breaks through the segment sums

        lambda(s,1) * (sum_{j<q} C_n(b_j, b_{j+1}) + C_n(b_q, s))
        - lambda(0,s) * (C_n(s, b_{q+1}) + sum_{j>q} C_n(b_j, b_{j+1}))

    where q is the segment holding split row k and C_n is c_process against
    the full-window copula (the reference cancels).
    """
    values = as_matrix(sample)
    n = _check_spec(values, spec)
    if k <= 0 or k >= n:
        return 0.0
    u = np.asarray(u, dtype=float)
    reference = _window_copula(values, spec, 0, n, u)
    segments = spec.segments()
    q = spec.segment_of(k - 1)

    left = sum(c_process(values, spec, a, c, u, reference) for a, c in segments[:q])
    left += c_process(values, spec, segments[q][0], k, u, reference)
    right = c_process(values, spec, k, segments[q][1], u, reference)
    right += sum(c_process(values, spec, a, c, u, reference) for a, c in segments[q + 1 :])
    return ((n - k) / n) * left - (k / n) * right


def _profile_value(d_values) -> float:
    return math.fsum(float(x) * float(x) for x in d_values)


def _statistic_from_profile(profile: np.ndarray) -> StatisticValue:
    argmax = int(np.argmax(profile))
    return StatisticValue(value=float(profile[argmax]), argmax_k=argmax + 1, profile=profile)


def cvm_statistic(sample: ArrayLike, spec: BreakSpec) -> StatisticValue:
    """
    S_{n,spec} = max_k (1/n) sum_i D(k/n, U_i)^2 over the full-window
    segmented pseudo-observations U_i.

    Rows of the window 1..k are the whole segments before q plus a prefix of
    segment q, and rows k+1..n a suffix of q plus the segments after it. One
    forward and one backward dominance sweep per segment give the counts of
    every such prefix and suffix.
    """
    values = as_matrix(sample)
    n = _check_spec(values, spec)
    if n < 2:
        raise SampleError("need at least 2 observations")

    points = pseudo_observations(values, spec).values
    segments = spec.segments()
    prefix = [prefix_dominance_counts(values[a:c], points) for a, c in segments]
    suffix = [prefix_dominance_counts(values[a:c][::-1], points) for a, c in segments]
    full_counts = [counts[-1] for counts in prefix]
    zeros = np.zeros(n, dtype=np.int64)

    profile = np.empty(n - 1)
    for k in range(1, n):
        q = spec.segment_of(k - 1)
        a, c = segments[q]
        left = sum(full_counts[:q], zeros) + prefix[q][k - a]
        right = sum(full_counts[q + 1 :], zeros) + suffix[q][c - k]
        profile[k - 1] = _profile_value(_d_values(n, k, left, right)) / n

    logger.debug("statistic over %d splits, %d segment(s)", n - 1, len(segments))
    return _statistic_from_profile(profile)


def _naive_pseudo(values: np.ndarray, spec: BreakSpec, k: int, l: int) -> List[Tuple[float, ...]]:
    """Pseudo-observations of 1-based rows k..l, one e.c.d.f. call per cell"""
    rows = []
    for a, c in window_pieces(spec, k, l):
        for i in range(a, c):
            rows.append(tuple(segment_ecdf(values[a:c, j], values[i, j]) for j in range(values.shape[1])))
    return rows


def cvm_statistic_naive(sample: ArrayLike, spec: BreakSpec) -> StatisticValue:
    """Triple loop over splits, evaluation points and rows; reference for cvm_statistic"""
    values = as_matrix(sample)
    n = _check_spec(values, spec)
    d = values.shape[1]
    points = _naive_pseudo(values, spec, 1, n)

    profile = []
    for k in range(1, n):
        left = _naive_pseudo(values, spec, 1, k)
        right = _naive_pseudo(values, spec, k + 1, n)
        left_counts = []
        right_counts = []
        for u in points:
            left_counts.append(sum(1 for row in left if all(row[j] <= u[j] for j in range(d))))
            right_counts.append(sum(1 for row in right if all(row[j] <= u[j] for j in range(d))))
        profile.append(_profile_value(_d_values(n, k, left_counts, right_counts)) / n)
    return _statistic_from_profile(np.asarray(profile))
