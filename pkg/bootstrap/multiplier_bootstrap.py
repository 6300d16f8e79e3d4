"""
Multiplier bootstrap of the break-aware Cramér–von Mises statistic.

For a window W with pseudo-observations P and multipliers xi,

    B(W, u)  = n^{-1/2} sum_{i in W} xi_i (1{P_i <= u} - C_W(u))
    C~(W, u) = B(W, u) - factor * sum_j dC_W/du_j(u) * B(W, u^{(j)})

where u^{(j)} keeps u_j and sets the other coordinates to 1, and factor is
n^{-1/2} ("printed") or 1 ("standard"). C~ is linear in the multipliers, so
each window reduces to one weight matrix and all replicates of a chunk go
through one matrix product per window. The resampled difference process of
split k sums C~ over the pieces of 1..k and of k+1..n exactly like the
statistic splits its windows.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bootstrap.multipliers import MultiplierConfig, draw_multipliers
from estimate.empirical_copula import CopulaEval
from estimate.errors import BreakSpecError, CopulaBreakError, NoReplicatesError, SampleError
from estimate.segmented_ranks import ArrayLike, as_matrix
from estimate.seq_process import cvm_statistic
from estimate.types import BreakSpec, StatisticValue

logger = logging.getLogger(__name__)

DERIVATIVE_SCALINGS = ("printed", "standard")
CHUNK_REPLICATES = 64
# split kernels above this size are rebuilt per chunk instead of kept
KERNEL_CACHE_BYTES = 512 * 2 ** 20


def correction_factor(n: int, derivative_scaling: str) -> float:
    if derivative_scaling == "printed":
        return 1.0 / math.sqrt(n)
    if derivative_scaling == "standard":
        return 1.0
    raise CopulaBreakError(f"unknown derivative scaling '{derivative_scaling}', expected one of {DERIVATIVE_SCALINGS}")


class WindowKernel:
    """
    Everything C~ needs from one window, independent of the multipliers.

    With I the joint indicators 1{P_i <= u_e}, M_j the marginal ones
    1{P_ij <= u_ej} and dC_j the partial derivative estimates of the window
    copula, weights = I - factor * sum_j dC_j M_j and
    C~(u_e) = n^{-1/2} sum_i xi_i (weights_ie - centre_e).
    """

    def __init__(self, ev: CopulaEval, start: int, points: np.ndarray, factor: float):
        self.start = start
        self.length = ev.length
        self.points = points.shape[0]
        if self.length == 0:
            return
        marginal = ev.marginal_indicators(points)
        weights = marginal.all(axis=2).astype(float)
        if factor:
            partials = ev.partials_many(points)
            for j in range(ev.d):
                weights -= factor * marginal[:, :, j] * partials[None, :, j]
        self.weights = weights
        self.centre = weights.mean(axis=0)

    def resample(self, xi: np.ndarray) -> np.ndarray:
        """C~ at the points for every multiplier row, shape (rows, E)"""
        if self.length == 0:
            return np.zeros((xi.shape[0], self.points))
        window = xi[:, self.start : self.start + self.length]
        centred = window @ self.weights - window.sum(axis=1)[:, None] * self.centre[None, :]
        return centred / math.sqrt(xi.shape[1])


def window_kernel(values: np.ndarray, spec: BreakSpec, lo: int, hi: int, points: np.ndarray, factor: float) -> WindowKernel:
    """Kernel of the window of rows lo+1..hi (split indices lo <= hi)"""
    return WindowKernel(CopulaEval(values, spec, (lo + 1, hi)), lo, points, factor)


class SplitKernels:
    """
    Window kernels of every split k = 1..n-1: the full segments, and for each
    k the prefix of its segment ending at row k and the suffix after it.

    Built once per test and shared read-only by every chunk. When all split
    kernels together would exceed KERNEL_CACHE_BYTES they are rebuilt on
    demand instead.
    """

    def __init__(self, sample: ArrayLike, spec: BreakSpec, factor: float, cache: Optional[bool] = None):
        self.values = as_matrix(sample)
        self.spec = spec
        self.factor = factor
        self.n = self.values.shape[0]
        self.segments = spec.segments()
        evals = [CopulaEval(self.values, spec, (a + 1, c)) for a, c in self.segments]
        self.points = np.vstack([ev.pseudo for ev in evals])
        self.full = [WindowKernel(ev, a, self.points, factor) for ev, (a, _) in zip(evals, self.segments)]
        if cache is None:
            cache = self.footprint() <= KERNEL_CACHE_BYTES
        self.cached = cache
        self._splits = [self._build(k) for k in range(1, self.n)] if cache else None
        logger.debug("split kernels for n=%d %s", self.n, "cached" if cache else "built per chunk")

    def footprint(self) -> int:
        """Bytes held by the weight matrices of every prefix and suffix"""
        rows = sum((c - a) * (c - a - 1) for a, c in self.segments)
        return rows * self.points.shape[0] * 8

    def _build(self, k: int) -> Tuple[int, Optional[WindowKernel], Optional[WindowKernel]]:
        q = self.spec.segment_of(k - 1)
        a, c = self.segments[q]
        if k == c:
            return q, None, None
        prefix = window_kernel(self.values, self.spec, a, k, self.points, self.factor)
        suffix = window_kernel(self.values, self.spec, k, c, self.points, self.factor)
        return q, prefix, suffix

    def split(self, k: int) -> Tuple[int, Optional[WindowKernel], Optional[WindowKernel]]:
        """Segment q of split k and its prefix / suffix kernels (None: the whole segment / nothing)"""
        return self._splits[k - 1] if self.cached else self._build(k)


@dataclass(frozen=True)
class BootstrapResult:
    statistic: float
    replicates: np.ndarray
    p_value: float
    argmax_k: int
    B: int
    seed: int
    mode: str
    bandwidth: Optional[int]
    breaks: Tuple[int, ...]
    profile: np.ndarray
    derivative_scaling: str = "printed"

    def __post_init__(self):
        if np.any(self.replicates < 0):
            raise ValueError("replicate statistics must be nonnegative")

    def rejects(self, alpha: float) -> bool:
        return self.p_value < alpha


def p_value(statistic: float, replicates: Sequence[float]) -> float:
    """(1/B) #{beta : S_beta >= S}"""
    replicates = np.asarray(replicates, dtype=float)
    if replicates.size == 0:
        raise NoReplicatesError()
    return int(np.count_nonzero(replicates >= statistic)) / replicates.size


def _check_row(values: np.ndarray, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (values.shape[0],):
        raise SampleError(f"multiplier row must have length {values.shape[0]}, got shape {xi.shape}")
    return xi[None, :]


def _point_kernel(values: np.ndarray, spec: BreakSpec, lo: int, hi: int, u, factor: float) -> WindowKernel:
    u = np.asarray(u, dtype=float)[None, :]
    return window_kernel(values, spec, lo, hi, u, factor)


def resampled_b(sample: ArrayLike, spec: BreakSpec, xi, lo: int, hi: int, u) -> float:
    """B for the window of rows lo+1..hi (split indices lo <= hi) at u"""
    values = as_matrix(sample)
    row = _check_row(values, xi)
    return float(_point_kernel(values, spec, lo, hi, u, 0.0).resample(row)[0, 0])


def resampled_c(
    sample: ArrayLike, spec: BreakSpec, xi, lo: int, hi: int, u, derivative_scaling: str = "printed"
) -> float:
    """C~ for the window of rows lo+1..hi at u; zero for an empty window"""
    values = as_matrix(sample)
    row = _check_row(values, xi)
    factor = correction_factor(values.shape[0], derivative_scaling)
    return float(_point_kernel(values, spec, lo, hi, u, factor).resample(row)[0, 0])


def resampled_d(sample: ArrayLike, spec: BreakSpec, xi, k: int, u, derivative_scaling: str = "printed") -> float:
    """
    Resampled difference process at split k for any number of breaks:

        lambda(s,1) (sum_{j<q} C~(b_j, b_{j+1}) + C~(b_q, s))
        - lambda(0,s) (C~(s, b_{q+1}) + sum_{j>q} C~(b_j, b_{j+1}))
    """
    values = as_matrix(sample)
    n = values.shape[0]
    if k <= 0 or k >= n:
        return 0.0
    segments = spec.segments()
    q = spec.segment_of(k - 1)

    def c(lo, hi):
        return resampled_c(values, spec, xi, lo, hi, u, derivative_scaling)

    left = sum(c(a, b) for a, b in segments[:q]) + c(segments[q][0], k)
    right = c(k, segments[q][1]) + sum(c(a, b) for a, b in segments[q + 1 :])
    return ((n - k) / n) * left - (k / n) * right


def resampled_d_single(
    sample: ArrayLike, spec: BreakSpec, xi, k: int, u, derivative_scaling: str = "printed"
) -> float:
    """Resampled difference process at split k for at most one break m"""
    values = as_matrix(sample)
    n = values.shape[0]
    if spec.p > 1:
        raise BreakSpecError(f"resampled_d_single takes at most one break, got {spec.p}; use resampled_d")
    if k <= 0 or k >= n:
        return 0.0

    def c(lo, hi):
        return resampled_c(values, spec, xi, lo, hi, u, derivative_scaling)

    before, after = (n - k) / n, k / n
    if spec.p == 0:
        return before * c(0, k) - after * c(k, n)
    m = spec.breaks[0]
    if k >= m:
        return before * (c(0, m) + c(m, k)) - after * c(k, n)
    return before * c(0, k) - after * (c(k, m) + c(m, n))


def replicate_statistics(kernels: SplitKernels, xi: np.ndarray) -> np.ndarray:
    """max_k (1/n) sum_e D~(k, u_e)^2 for every multiplier row of xi"""
    rows, n = xi.shape
    full = [kernel.resample(xi) for kernel in kernels.full]
    zeros = np.zeros((rows, kernels.points.shape[0]))
    best = np.zeros(rows)
    for k in range(1, n):
        q, prefix, suffix = kernels.split(k)
        left = sum(full[:q], zeros) + (full[q] if prefix is None else prefix.resample(xi))
        right = sum(full[q + 1 :], zeros)
        if suffix is not None:
            right = right + suffix.resample(xi)
        diff = ((n - k) / n) * left - (k / n) * right
        np.maximum(best, np.sum(diff * diff, axis=1) / n, out=best)
    return best


def _chunks(B: int) -> List[Tuple[int, int]]:
    return [(start, min(start + CHUNK_REPLICATES, B)) for start in range(0, B, CHUNK_REPLICATES)]


def bootstrap_test(
    sample: ArrayLike,
    spec: BreakSpec,
    cfg: MultiplierConfig,
    derivative_scaling: str = "printed",
    threads: Optional[int] = None,
    statistic: Optional[StatisticValue] = None,
) -> BootstrapResult:
    """
    Statistic, B replicate statistics and the approximate p-value.

    Replicates are drawn in fixed-size chunks from their own streams and put
    back by index, so the result does not depend on the thread count.
    """
    values = as_matrix(sample)
    n = values.shape[0]
    if n < 4:
        raise SampleError(f"bootstrap test needs at least 4 observations, got {n}")
    if spec.n != n:
        raise SampleError(f"break spec is for n={spec.n}, sample has n={n}")
    if cfg.B < 1:
        raise NoReplicatesError()
    factor = correction_factor(n, derivative_scaling)

    observed = statistic if statistic is not None else cvm_statistic(values, spec)
    kernels = SplitKernels(values, spec, factor)

    def run_chunk(bounds):
        xi = draw_multipliers(cfg, n, *bounds)
        return replicate_statistics(kernels, xi)

    chunks = _chunks(cfg.B)
    replicates = np.empty(cfg.B)
    workers = max(1, min(threads or 1, len(chunks)))
    logger.debug("bootstrap: n=%d, B=%d in %d chunk(s), %d worker(s)", n, cfg.B, len(chunks), workers)

    if workers == 1:
        for bounds in chunks:
            replicates[bounds[0] : bounds[1]] = run_chunk(bounds)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(run_chunk, bounds): bounds for bounds in chunks}
            for future in as_completed(futures):
                start, stop = futures[future]
                replicates[start:stop] = future.result()

    return BootstrapResult(
        statistic=observed.value,
        replicates=replicates,
        p_value=p_value(observed.value, replicates),
        argmax_k=observed.argmax_k,
        B=cfg.B,
        seed=cfg.seed,
        mode=cfg.mode,
        bandwidth=cfg.resolved_bandwidth(n),
        breaks=spec.breaks,
        profile=observed.profile,
        derivative_scaling=derivative_scaling,
    )
