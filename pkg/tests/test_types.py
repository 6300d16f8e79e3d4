import numpy as np
import pytest

from estimate.errors import BreakSpecError, SampleError
from estimate.types import BreakSpec, SampleMatrix, StatisticValue, fraction_index


def test_sample_matrix_checks_shape_and_values() -> None:
    sample = SampleMatrix([[1, 2], [3, 4]])
    assert (sample.n, sample.d) == (2, 2)
    assert not sample.values.flags.writeable
    with pytest.raises(SampleError):
        SampleMatrix([[1.0], [2.0]])
    with pytest.raises(SampleError):
        SampleMatrix([[1.0, np.nan], [2.0, 3.0]])
    with pytest.raises(SampleError):
        SampleMatrix([1.0, 2.0])


def test_break_spec_segments() -> None:
    spec = BreakSpec((3, 7), 10)
    assert spec.p == 2
    assert spec.segments() == [(0, 3), (3, 7), (7, 10)]
    assert [spec.segment_of(i) for i in (0, 2, 3, 6, 7, 9)] == [0, 0, 1, 1, 2, 2]
    assert BreakSpec.none(10).segments() == [(0, 10)]


@pytest.mark.parametrize("breaks", [(0,), (10,), (5, 5), (6, 2)])
def test_break_spec_rejects_bad_breaks(breaks) -> None:
    with pytest.raises(BreakSpecError):
        BreakSpec(breaks, 10)


def test_fraction_index_reads_decimals_exactly() -> None:
    assert fraction_index(100, 0.29) == 29
    assert fraction_index(50, 0.1) == 5
    assert fraction_index(200, 0.25) == 50
    assert BreakSpec.from_fractions([0.1, 0.5], 50).breaks == (5, 25)


def test_statistic_value_is_nonnegative() -> None:
    with pytest.raises(ValueError):
        StatisticValue(value=-1.0, argmax_k=1, profile=np.zeros(3))
