"""
Domain types: the observation matrix, the known marginal breaks and the
segmented pseudo-observations derived from them.

Indices exposed to users are 1-based and inclusive, exactly like the break
times m_1 < ... < m_p of the test (segment j is rows m_{j-1}+1 .. m_j with
m_0 = 0 and m_{p+1} = n). Internally rows are addressed 0-based and
half-open, so segment j is rows [m_{j-1}, m_j).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from estimate.errors import BreakSpecError, SampleError


@dataclass(frozen=True)
class SampleMatrix:
    """n x d time-ordered observations, row i is X_i"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise SampleError(f"expected a 2-D matrix, got {values.ndim} dimension(s)")
        n, d = values.shape
        if n < 2:
            raise SampleError(f"need at least 2 observations, got {n}")
        if d < 2:
            raise SampleError(f"need at least 2 columns, got {d}")
        if not np.all(np.isfinite(values)):
            raise SampleError("all values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BreakSpec:
    """Known marginal break indices m_1 < ... < m_p inside [1, n-1]"""

    breaks: Tuple[int, ...]
    n: int

    def __post_init__(self):
        breaks = tuple(int(m) for m in self.breaks)
        if self.n < 2:
            raise BreakSpecError(f"series length must be at least 2, got {self.n}")
        for m in breaks:
            if not 1 <= m <= self.n - 1:
                raise BreakSpecError(f"break {m} outside [1, {self.n - 1}]")
        for prev, cur in zip(breaks, breaks[1:]):
            if cur <= prev:
                raise BreakSpecError(f"breaks must be strictly increasing, got {prev} then {cur}")
        object.__setattr__(self, "breaks", breaks)

    @classmethod
    def none(cls, n: int) -> "BreakSpec":
        return cls((), n)

    @classmethod
    def from_fractions(cls, fractions: Sequence[float], n: int) -> "BreakSpec":
        """Breaks m_j = floor(n * b_j), with b_j read as exact decimals"""
        return cls(tuple(fraction_index(n, b) for b in fractions), n)

    @property
    def p(self) -> int:
        return len(self.breaks)

    def segments(self) -> List[Tuple[int, int]]:
        """0-based half-open row ranges of the break segments"""
        edges = [0, *self.breaks, self.n]
        return [(a, c) for a, c in zip(edges, edges[1:])]

    def segment_of(self, row: int) -> int:
        """Index of the segment holding 0-based row"""
        return int(np.searchsorted(np.asarray(self.breaks, dtype=int), row, side="right"))


@dataclass(frozen=True)
class PseudoSample:
    """Segmented-rank pseudo-observations of rows k..l (1-based, inclusive)"""

    values: np.ndarray
    break_spec: BreakSpec
    window: Tuple[int, int]
    pieces: Tuple[Tuple[int, int], ...] = field(default=())

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StatisticValue:
    """Cramér–von Mises statistic: max of the per-split profile"""

    value: float
    argmax_k: int
    profile: np.ndarray

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("statistic must be nonnegative")


def fraction_index(n: int, fraction: float) -> int:
    """floor(n * fraction) computed on the decimal value of fraction"""
    return int(Fraction(repr(float(fraction))) * n // 1)
