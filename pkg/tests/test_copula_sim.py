import numpy as np
import pytest
from scipy.stats import kstest

from estimate.errors import CopulaParameterError, ScenarioError
from estimate.types import SampleMatrix
from simulate import copula_sim
from simulate.copula_sim import (
    CopulaFamily,
    MarginSpec,
    ScenarioSpec,
    ar1_recursion,
    empirical_kendall_tau,
    generate_scenario,
    sample_copula,
    tau_to_theta,
)


def _philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def test_tau_to_theta() -> None:
    assert tau_to_theta("clayton", 0.5) == pytest.approx(2.0)
    assert tau_to_theta("gumbel", 0.5) == pytest.approx(2.0)
    assert tau_to_theta("clayton", 0.2) == pytest.approx(0.5)
    assert tau_to_theta("gumbel", 0.0) == 1.0
    with pytest.raises(CopulaParameterError):
        tau_to_theta("clayton", 1.0)
    with pytest.raises(CopulaParameterError):
        tau_to_theta("frank", 0.3)


def test_family_round_trips_kendall_tau() -> None:
    for family in ("clayton", "gumbel"):
        for tau in (0.2, 0.25, 0.6, 0.75):
            assert CopulaFamily.from_tau(family, tau).tau == pytest.approx(tau)


def test_clayton_at_zero_tau_is_independence() -> None:
    copula = CopulaFamily.from_tau("clayton", 0.0)
    assert copula.family == "independence"
    assert copula.cdf([[0.3, 0.5]])[0] == pytest.approx(0.15)


def test_family_parameter_ranges() -> None:
    with pytest.raises(CopulaParameterError):
        CopulaFamily("clayton", 0.0)
    with pytest.raises(CopulaParameterError):
        CopulaFamily("gumbel", 0.5)


def test_gumbel_cdf_closed_form() -> None:
    assert CopulaFamily("gumbel", 2.0).cdf([[0.5, 0.5]])[0] == pytest.approx(2.0 ** -np.sqrt(2.0))


@pytest.mark.parametrize("family", ["clayton", "gumbel"])
def test_sampler_reproduces_kendall_tau(family: str) -> None:
    draws = sample_copula(CopulaFamily(family, 2.0), 2, 100000, _philox(17))
    assert draws.min() > 0.0 and draws.max() < 1.0
    assert empirical_kendall_tau(draws) == pytest.approx(0.5, abs=0.01)


def test_gumbel_sample_matches_cdf_at_the_centre() -> None:
    draws = sample_copula(CopulaFamily("gumbel", 2.0), 2, 100000, _philox(5))
    observed = np.mean(np.all(draws <= 0.5, axis=1))
    assert observed == pytest.approx(0.3753, abs=0.01)


def test_three_dimensional_clayton_pairs() -> None:
    draws = sample_copula(CopulaFamily.from_tau("clayton", 0.25), 3, 20000, _philox(3))
    assert draws.shape == (20000, 3)
    assert empirical_kendall_tau(draws) == pytest.approx(0.25, abs=0.02)


def test_margin_transform() -> None:
    margin = MarginSpec(2.0, 3.0)
    assert margin.transform(np.array([0.5]))[0] == pytest.approx(2.0)
    with pytest.raises(ScenarioError):
        MarginSpec(0.0, 0.0)


def test_scenario_break_indices() -> None:
    gh = CopulaFamily.from_tau("gumbel", 0.25)
    spec = ScenarioSpec(n=200, d=2, copula_before=gh, copula_after=gh, t=0.25, b=0.1)
    assert spec.copula_break == 50
    assert spec.marginal_break == 20
    with pytest.raises(ScenarioError):
        ScenarioSpec(n=5, d=2, copula_before=gh, copula_after=gh, b=0.1)
    with pytest.raises(ScenarioError):
        ScenarioSpec(n=50, d=2, copula_before=gh, copula_after=gh, mode="garch")


def test_iid_scenario_shifts_the_margins() -> None:
    cl = CopulaFamily.from_tau("clayton", 0.5)
    spec = ScenarioSpec(n=200, d=2, copula_before=cl, copula_after=cl, b=0.5)
    sample = generate_scenario(spec, _philox(8))
    assert isinstance(sample, SampleMatrix)
    assert sample.values.shape == (200, 2)
    assert np.all(np.abs(sample.values[:100].mean(axis=0) - 2.0) < 0.3)
    assert np.all(np.abs(sample.values[100:].mean(axis=0)) < 0.3)


def test_scenario_is_reproducible() -> None:
    cl = CopulaFamily.from_tau("clayton", 0.2)
    after = CopulaFamily.from_tau("clayton", 0.6)
    spec = ScenarioSpec(n=100, d=3, copula_before=cl, copula_after=after, t=0.5, b=0.25, mode="ar1")
    a = generate_scenario(spec, _philox(1)).values
    b = generate_scenario(spec, _philox(1)).values
    assert np.array_equal(a, b)


def test_ar1_stationary_variance() -> None:
    noise = _philox(21).standard_normal((100100, 1))
    series = ar1_recursion(noise, 0.5)[100:]
    assert series.var() == pytest.approx(4.0 / 3.0, rel=0.02)


def test_ar1_restart_begins_from_the_innovation() -> None:
    noise = _philox(2).standard_normal((10, 2))
    series = ar1_recursion(noise, 0.5, restart_index=6)
    assert np.array_equal(series[0], noise[0])
    assert np.array_equal(series[6], noise[6])
    assert series[7] == pytest.approx(0.5 * noise[6] + noise[7])
    assert series[5] == pytest.approx(0.5 * series[4] + noise[5])


def test_ar1_scenario_has_a_variance_break() -> None:
    gh = CopulaFamily.from_tau("gumbel", 0.5)
    spec = ScenarioSpec(n=200, d=2, copula_before=gh, copula_after=gh, b=0.5, mode="ar1")
    values = generate_scenario(spec, _philox(4)).values
    assert values.shape == (200, 2)
    ratio = values[100:].var(axis=0) / values[:100].var(axis=0)
    assert np.all(ratio > 4.0)


@pytest.mark.parametrize("copula", [CopulaFamily("clayton", 2.0), CopulaFamily("gumbel", 2.0), CopulaFamily.from_tau("clayton", 0.0)])
def test_sampler_margins_are_uniform(copula: CopulaFamily) -> None:
    count = 10000
    draws = sample_copula(copula, 3, count, _philox(31))
    bound = 1.36 / np.sqrt(count) * 1.5
    for j in range(3):
        assert kstest(draws[:, j], "uniform").statistic < bound


def test_independence_sample_has_no_concordance() -> None:
    draws = sample_copula(CopulaFamily.from_tau("clayton", 0.0), 2, 100000, _philox(12))
    assert empirical_kendall_tau(draws) == pytest.approx(0.0, abs=0.01)


def test_ar1_rows_after_the_break_ignore_earlier_innovations(monkeypatch) -> None:
    gh = CopulaFamily.from_tau("gumbel", 0.25)
    spec = ScenarioSpec(n=60, d=2, copula_before=gh, copula_after=gh, b=0.5, mode="ar1", burn_in=10)
    # n + two burn-in blocks; the recursion restarts at raw row 30 + 10
    base = _philox(6).uniform(0.05, 0.95, size=(80, 2))
    altered = base.copy()
    altered[:40] = _philox(7).uniform(0.05, 0.95, size=(40, 2))
    frames = iter([base, altered])
    monkeypatch.setattr(copula_sim, "_copula_rows", lambda *args: next(frames))

    first = generate_scenario(spec, _philox(0)).values
    second = generate_scenario(spec, _philox(0)).values
    assert not np.array_equal(first[:30], second[:30])
    assert np.array_equal(first[30:], second[30:])
