import numpy as np
import pytest

from estimate.empirical_copula import (
    CopulaEval,
    copula_partial,
    derivative_bandwidth,
    eval_copula,
    lattice_grid,
    mixture_weights,
    naive_eval_copula,
)
from estimate.errors import DomainError
from estimate.types import BreakSpec


def test_evaluator_matches_row_by_row_oracle(rng) -> None:
    values = np.round(rng.standard_normal((20, 3)), 1)
    spec = BreakSpec((6, 13), 20)
    grid = lattice_grid(3, 5)
    for window in [(1, 20), (3, 11), (7, 13), (13, 14), (5, 5)]:
        ev = CopulaEval(values, spec, window)
        for u in grid:
            assert ev.evaluate(u) == naive_eval_copula(values, spec, window, u)


def test_break_aware_copula_is_the_mixture_of_its_pieces(rng) -> None:
    values = rng.standard_normal((30, 2))
    spec = BreakSpec((9, 20), 30)
    plain = BreakSpec.none(30)
    grid = lattice_grid(2, 9)
    window = (4, 27)
    ev = CopulaEval(values, spec, window)
    pieces = mixture_weights(spec, window)
    assert [w for _, w in pieces] == pytest.approx([6 / 24, 11 / 24, 7 / 24])

    counts = sum(CopulaEval(values, plain, piece).count_many(grid) for piece, _ in pieces)
    assert np.array_equal(ev.count_many(grid), counts)
    mixture = sum(w * CopulaEval(values, plain, piece).evaluate_many(grid) for piece, w in pieces)
    assert ev.evaluate_many(grid) == pytest.approx(mixture)


def test_copula_is_one_at_the_upper_corner(small_sample) -> None:
    ev = CopulaEval(small_sample, BreakSpec((10,), 24), (1, 24))
    assert eval_copula(ev, [1.0, 1.0]) == 1.0
    assert eval_copula(ev, [0.0, 0.7]) == 0.0


def test_empty_window_is_zero(small_sample) -> None:
    ev = CopulaEval(small_sample, BreakSpec.none(24), (8, 7))
    assert ev.evaluate([0.5, 0.5]) == 0.0
    assert copula_partial(ev, 0, [0.5, 0.5]) == 0.0


def test_points_outside_the_cube_are_rejected(small_sample) -> None:
    ev = CopulaEval(small_sample, BreakSpec.none(24), (1, 24))
    with pytest.raises(DomainError):
        eval_copula(ev, [1.2, 0.5])
    with pytest.raises(DomainError):
        eval_copula(ev, [0.5, 0.5, 0.5])
    with pytest.raises(DomainError):
        copula_partial(ev, 2, [0.5, 0.5])


def test_derivative_bandwidth() -> None:
    assert derivative_bandwidth(1) == 0.5
    assert derivative_bandwidth(4) == 0.5
    assert derivative_bandwidth(100) == pytest.approx(0.1)


def test_partial_of_comonotone_sample() -> None:
    x = np.arange(100, dtype=float)
    ev = CopulaEval(np.column_stack([x, x]), BreakSpec.none(100), (1, 100))
    # C(u) = min(u1, u2) on the rank grid
    assert copula_partial(ev, 0, [0.355, 0.805]) == pytest.approx(1.0)
    assert copula_partial(ev, 1, [0.355, 0.805]) == pytest.approx(0.0)


def test_partial_clips_at_the_boundary() -> None:
    x = np.arange(100, dtype=float)
    ev = CopulaEval(np.column_stack([x, x]), BreakSpec.none(100), (1, 100))
    # lower point clipped to 0: (C(0.155, 0.805) - C(0, 0.805)) / 0.155
    assert copula_partial(ev, 0, [0.055, 0.805]) == pytest.approx(0.15 / 0.155)


def test_lattice_grid_shape() -> None:
    grid = lattice_grid(3, 4)
    assert grid.shape == (64, 3)
    assert grid.min() == 0.0 and grid.max() == 1.0
