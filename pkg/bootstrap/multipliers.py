"""
Multiplier sequences for the bootstrap.

Every replicate beta owns the counter-based stream (seed, beta), so replicates
can be drawn in any order or in parallel and still reproduce. Normal variates
come from the inverse normal c.d.f. applied to 53-bit open uniforms.

Dependent multipliers are a moving average of i.i.d. normals with Parzen
kernel weights normalized to unit sum of squares, which keeps the variance
at 1 and gives lag-h correlation sum_r w_r w_{r+h}.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import ndtri

from estimate.errors import BandwidthError, CopulaBreakError, NoReplicatesError

logger = logging.getLogger(__name__)

MULTIPLIER_MODES = ("iid", "dependent")
_UNIT = 2.0 ** -53


@dataclass(frozen=True)
class MultiplierConfig:
    mode: str = "iid"
    B: int = 1000
    bandwidth: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MULTIPLIER_MODES:
            raise CopulaBreakError(f"unknown multiplier mode '{self.mode}', expected one of {MULTIPLIER_MODES}")
        if self.B < 1:
            raise NoReplicatesError()
        if self.bandwidth is not None and self.bandwidth < 1:
            raise BandwidthError(f"bandwidth must be at least 1, got {self.bandwidth}")
        if not 0 <= self.seed < 2 ** 64:
            raise CopulaBreakError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def resolved_bandwidth(self, n: int) -> Optional[int]:
        """Bandwidth in use for series length n (None for iid multipliers)"""
        if self.mode == "iid":
            return None
        return self.bandwidth if self.bandwidth is not None else default_bandwidth(n)


def parzen_kernel(x) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    inner = 1.0 - 6.0 * x ** 2 + 6.0 * x ** 3
    outer = 2.0 * (1.0 - x) ** 3
    return np.where(x <= 0.5, inner, np.where(x <= 1.0, outer, 0.0))


def parzen_weights(bandwidth: int) -> np.ndarray:
    """w_r proportional to parzen((r - l) / l), r = 1 .. 2l-1, with sum w_r^2 = 1"""
    if bandwidth < 1:
        raise BandwidthError(f"bandwidth must be at least 1, got {bandwidth}")
    r = np.arange(1, 2 * bandwidth)
    raw = parzen_kernel((r - bandwidth) / bandwidth)
    return raw / math.sqrt(float(np.sum(raw ** 2)))


def weight_autocorrelation(weights: np.ndarray, lag: int) -> float:
    """Exact lag correlation of the moving average: sum_r w_r w_{r+lag}"""
    if lag >= weights.size:
        return 0.0
    return float(np.dot(weights[: weights.size - lag], weights[lag:]))


def default_bandwidth(n: int) -> int:
    """max(2, ceil(n^(1/3))), computed on integers"""
    c = max(1, round(n ** (1.0 / 3.0)))
    while c ** 3 < n:
        c += 1
    while c > 1 and (c - 1) ** 3 >= n:
        c -= 1
    return max(2, c)


def replicate_stream(seed: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate,))))


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open grid (j + 1/2) 2^-53, j = 0 .. 2^53 - 1"""
    bits = rng.integers(0, 1 << 53, size=size, dtype=np.uint64)
    return (bits + 0.5) * _UNIT


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    return ndtri(open_uniforms(rng, size))


def draw_multipliers(cfg: MultiplierConfig, n: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """
    Multiplier rows for replicates start .. stop-1 (default: all B), shape (rows, n).
    """
    if n < 1:
        raise CopulaBreakError("series length must be at least 1")
    stop = cfg.B if stop is None else stop
    if not 0 <= start <= stop <= cfg.B:
        raise CopulaBreakError(f"replicate range {start}..{stop} outside 0..{cfg.B}")

    bandwidth = cfg.resolved_bandwidth(n)
    if bandwidth is not None and bandwidth >= n:
        raise BandwidthError()
    weights = parzen_weights(bandwidth) if bandwidth is not None else None
    if weights is not None:
        logger.debug("dependent multipliers: bandwidth %d, %d weights", bandwidth, weights.size)

    out = np.empty((stop - start, n))
    for row, beta in enumerate(range(start, stop)):
        rng = replicate_stream(cfg.seed, beta)
        if weights is None:
            out[row] = standard_normals(rng, n)
        else:
            z = standard_normals(rng, n + weights.size - 1)
            out[row] = sliding_window_view(z, weights.size) @ weights
    return out
