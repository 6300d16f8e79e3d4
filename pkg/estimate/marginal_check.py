"""
Marginal break diagnostic: two-sample Cramér–von Mises tests of every column
between the segments on each side of every known break. Informational only;
small p-values support the declared marginal breaks.
"""
from dataclasses import dataclass
from typing import List

from scipy.stats import cramervonmises_2samp

from estimate.segmented_ranks import ArrayLike, as_matrix, segment_bounds
from estimate.types import BreakSpec


@dataclass(frozen=True)
class MarginalCheck:
    break_index: int
    column: int
    statistic: float
    p_value: float


def check_marginal_breaks(sample: ArrayLike, spec: BreakSpec) -> List[MarginalCheck]:
    """One result per (break, column), comparing the two adjacent segments"""
    values = as_matrix(sample)
    results = []
    for m in spec.breaks:
        first, _ = segment_bounds(spec, m)
        _, last = segment_bounds(spec, m + 1)
        for column in range(values.shape[1]):
            left = values[first - 1 : m, column]
            right = values[m:last, column]
            if left.size < 2 or right.size < 2:
                continue
            res = cramervonmises_2samp(left, right)
            results.append(MarginalCheck(m, column, float(res.statistic), float(res.pvalue)))
    return results
