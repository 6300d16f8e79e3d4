import numpy as np

from estimate.marginal_check import check_marginal_breaks
from estimate.types import BreakSpec


def test_shifted_margins_are_flagged(rng) -> None:
    values = rng.standard_normal((120, 2))
    values[60:, 0] += 3.0
    checks = check_marginal_breaks(values, BreakSpec((60,), 120))
    assert [(c.break_index, c.column) for c in checks] == [(60, 0), (60, 1)]
    assert checks[0].p_value < 0.001
    assert checks[1].p_value > checks[0].p_value


def test_each_break_compares_adjacent_segments(rng) -> None:
    values = rng.standard_normal((90, 3))
    checks = check_marginal_breaks(values, BreakSpec((30, 60), 90))
    assert len(checks) == 6
    assert all(0.0 <= c.p_value <= 1.0 for c in checks)


def test_no_breaks_and_single_row_segments() -> None:
    values = np.arange(20.0).reshape(10, 2)
    assert check_marginal_breaks(values, BreakSpec.none(10)) == []
    assert check_marginal_breaks(values, BreakSpec((1,), 10)) == []
