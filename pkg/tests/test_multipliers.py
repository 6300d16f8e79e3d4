import numpy as np
import pytest

from bootstrap.multipliers import (
    MultiplierConfig,
    default_bandwidth,
    draw_multipliers,
    open_uniforms,
    parzen_kernel,
    parzen_weights,
    replicate_stream,
    standard_normals,
    weight_autocorrelation,
)
from estimate.errors import BandwidthError, CopulaBreakError, NoReplicatesError


def test_parzen_kernel_values() -> None:
    x = np.array([0.0, 0.25, 0.5, 0.75, 1.0, -0.5, 2.0])
    expected = [1.0, 1.0 - 6 * 0.0625 + 6 * 0.015625, 0.25, 0.03125, 0.0, 0.25, 0.0]
    assert parzen_kernel(x) == pytest.approx(expected)


@pytest.mark.parametrize("bandwidth", [1, 2, 5, 9])
def test_parzen_weights_have_unit_norm(bandwidth: int) -> None:
    w = parzen_weights(bandwidth)
    assert w.size == 2 * bandwidth - 1
    assert np.sum(w ** 2) == pytest.approx(1.0)
    assert np.allclose(w, w[::-1])
    assert weight_autocorrelation(w, 0) == pytest.approx(1.0)
    assert weight_autocorrelation(w, w.size) == 0.0


@pytest.mark.parametrize(
    "n, expected",
    [(1, 2), (8, 2), (9, 3), (27, 3), (28, 4), (64, 4), (100, 5), (200, 6), (1000, 10)],
)
def test_default_bandwidth(n: int, expected: int) -> None:
    assert default_bandwidth(n) == expected


def test_config_validation() -> None:
    with pytest.raises(NoReplicatesError, match="no replicates"):
        MultiplierConfig(B=0)
    with pytest.raises(CopulaBreakError):
        MultiplierConfig(mode="block")
    with pytest.raises(CopulaBreakError):
        MultiplierConfig(seed=-1)
    with pytest.raises(BandwidthError):
        MultiplierConfig(mode="dependent", bandwidth=0)


def test_resolved_bandwidth() -> None:
    assert MultiplierConfig().resolved_bandwidth(200) is None
    assert MultiplierConfig(mode="dependent").resolved_bandwidth(200) == 6
    assert MultiplierConfig(mode="dependent", bandwidth=3).resolved_bandwidth(200) == 3


def test_bandwidth_must_be_below_series_length() -> None:
    cfg = MultiplierConfig(mode="dependent", B=2, bandwidth=10)
    with pytest.raises(BandwidthError, match="bandwidth exceeds series length"):
        draw_multipliers(cfg, 10)


def test_open_uniforms_stay_inside_the_interval() -> None:
    u = open_uniforms(replicate_stream(1, 0), 100000)
    assert u.min() > 0.0
    assert u.max() < 1.0
    assert np.all(np.isfinite(standard_normals(replicate_stream(1, 0), 1000)))


@pytest.mark.parametrize("mode", ["iid", "dependent"])
def test_replicate_rows_do_not_depend_on_the_range_drawn(mode: str) -> None:
    cfg = MultiplierConfig(mode=mode, B=12, seed=7)
    everything = draw_multipliers(cfg, 30)
    assert everything.shape == (12, 30)
    assert np.array_equal(draw_multipliers(cfg, 30, 3, 8), everything[3:8])
    assert np.array_equal(draw_multipliers(cfg, 30), everything)
    assert not np.array_equal(draw_multipliers(MultiplierConfig(mode=mode, B=12, seed=8), 30), everything)


def test_iid_multipliers_are_standard_normal() -> None:
    xi = draw_multipliers(MultiplierConfig(B=400, seed=3), 500)
    assert abs(xi.mean()) < 0.02
    assert xi.var() == pytest.approx(1.0, abs=0.03)


def test_dependent_multipliers_follow_the_kernel_correlation() -> None:
    cfg = MultiplierConfig(mode="dependent", B=4000, bandwidth=4, seed=11)
    xi = draw_multipliers(cfg, 40)
    weights = parzen_weights(4)
    assert xi.var() == pytest.approx(1.0, abs=0.05)
    for lag in (1, 3, 8):
        observed = np.mean(xi[:, 10] * xi[:, 10 + lag])
        assert observed == pytest.approx(weight_autocorrelation(weights, lag), abs=0.06)
