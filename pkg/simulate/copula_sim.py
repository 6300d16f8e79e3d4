"""
Copula simulation

Clayton and Gumbel–Hougaard samples by frailty mixing (Gamma(1/theta) for
Clayton, positive stable of index 1/theta for Gumbel–Hougaard), Kendall's
tau parameterization, normal marginal transforms and the scenario generator
with an i.i.d. mode and an AR(1) strong-mixing mode.

The Clayton copula sampled here is the standard
(sum_j u_j^-theta - d + 1)^(-1/theta) with theta > 0, and Gumbel–Hougaard
requires theta >= 1.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri
from scipy.stats import kendalltau, levy_stable

from bootstrap.multipliers import open_uniforms
from estimate.errors import CopulaParameterError, ScenarioError
from estimate.types import SampleMatrix, fraction_index

logger = logging.getLogger(__name__)

FAMILIES = ("clayton", "gumbel", "independence")
TEMPORAL_MODES = ("iid", "ar1")

_TINY = np.finfo(float).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)


def tau_to_theta(family: str, tau: float) -> float:
    """Clayton theta = 2 tau / (1 - tau); Gumbel–Hougaard theta = 1 / (1 - tau)"""
    if family == "clayton":
        if not 0.0 < tau < 1.0:
            raise CopulaParameterError(f"Clayton needs 0 < tau < 1, got {tau}")
        return 2.0 * tau / (1.0 - tau)
    if family == "gumbel":
        if not 0.0 <= tau < 1.0:
            raise CopulaParameterError(f"Gumbel-Hougaard needs 0 <= tau < 1, got {tau}")
        return 1.0 / (1.0 - tau)
    if family == "independence":
        if tau != 0.0:
            raise CopulaParameterError(f"independence copula has tau = 0, got {tau}")
        return 0.0
    raise CopulaParameterError(f"unknown copula family '{family}', expected one of {FAMILIES}")


@dataclass(frozen=True)
class CopulaFamily:
    family: str
    theta: float = 0.0

    def __post_init__(self):
        if self.family == "clayton" and not self.theta > 0:
            raise CopulaParameterError(f"Clayton needs theta > 0, got {self.theta}")
        if self.family == "gumbel" and not self.theta >= 1:
            raise CopulaParameterError(f"Gumbel-Hougaard needs theta >= 1, got {self.theta}")
        if self.family not in FAMILIES:
            raise CopulaParameterError(f"unknown copula family '{self.family}', expected one of {FAMILIES}")

    @classmethod
    def from_tau(cls, family: str, tau: float) -> "CopulaFamily":
        if family == "clayton" and tau == 0.0:
            return cls("independence")
        return cls(family, tau_to_theta(family, tau))

    @property
    def tau(self) -> float:
        if self.family == "clayton":
            return self.theta / (self.theta + 2.0)
        if self.family == "gumbel":
            return 1.0 - 1.0 / self.theta
        return 0.0

    def cdf(self, u) -> np.ndarray:
        """Closed-form copula c.d.f. at the rows of u"""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.family == "clayton":
            total = np.sum(u ** -self.theta, axis=1) - u.shape[1] + 1.0
            return np.maximum(total, 0.0) ** (-1.0 / self.theta)
        if self.family == "gumbel":
            return np.exp(-np.sum((-np.log(u)) ** self.theta, axis=1) ** (1.0 / self.theta))
        return np.prod(u, axis=1)


@dataclass(frozen=True)
class MarginSpec:
    """Normal margin N(mean, sd^2)"""

    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not self.sd > 0:
            raise ScenarioError(f"margin standard deviation must be positive, got {self.sd}")

    def transform(self, u: np.ndarray) -> np.ndarray:
        return self.mean + self.sd * ndtri(u)


def sample_copula(copula: CopulaFamily, d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """count x d draws from the copula, every entry strictly inside (0, 1)"""
    if d < 1 or count < 0:
        raise ScenarioError(f"cannot draw {count} x {d} copula sample")
    if copula.family == "independence":
        return np.clip(open_uniforms(rng, (count, d)), _TINY, _BELOW_ONE)
    exponentials = rng.standard_exponential(size=(count, d))
    with np.errstate(over="ignore", divide="ignore", under="ignore"):
        if copula.family == "clayton":
            frailty = rng.gamma(1.0 / copula.theta, 1.0, size=(count, 1))
            u = (1.0 + exponentials / frailty) ** (-1.0 / copula.theta)
        elif copula.family == "gumbel" and copula.theta > 1.0:
            alpha = 1.0 / copula.theta
            scale = math.cos(math.pi * alpha / 2.0) ** copula.theta
            frailty = levy_stable.rvs(alpha, 1.0, loc=0.0, scale=scale, size=(count, 1), random_state=rng)
            u = np.exp(-((exponentials / frailty) ** alpha))
        else:
            u = np.exp(-exponentials)
    return np.clip(u, _TINY, _BELOW_ONE)


def empirical_kendall_tau(sample: np.ndarray) -> float:
    """Mean Kendall tau over all column pairs"""
    sample = np.asarray(sample, dtype=float)
    pairs = list(itertools.combinations(range(sample.shape[1]), 2))
    return float(np.mean([kendalltau(sample[:, i], sample[:, j])[0] for i, j in pairs]))


def ar1_recursion(innovations: np.ndarray, coefficient: float, restart_index: Optional[int] = None) -> np.ndarray:
    """
    X_0 = e_0, X_{i+1} = coefficient * X_i + e_{i+1}, per column; with a
    restart index r the recursion starts afresh at X_r = e_r.
    """
    innovations = np.asarray(innovations, dtype=float)
    if restart_index is None or restart_index <= 0 or restart_index >= innovations.shape[0]:
        return lfilter([1.0], [1.0, -coefficient], innovations, axis=0)
    head = lfilter([1.0], [1.0, -coefficient], innovations[:restart_index], axis=0)
    tail = lfilter([1.0], [1.0, -coefficient], innovations[restart_index:], axis=0)
    return np.vstack([head, tail])


@dataclass(frozen=True)
class ScenarioSpec:
    """
    One simulation scenario.

    The copula changes from copula_before to copula_after at row floor(n*t)
    (t = 1 means no copula change); the margins change at floor(n*b). In ar1
    mode the marginal change is the innovation scale change noise_before ->
    noise_after and margin_before/margin_after are not used.
    """

    n: int
    d: int
    copula_before: CopulaFamily
    copula_after: CopulaFamily
    t: float = 1.0
    b: float = 0.5
    margin_before: MarginSpec = field(default_factory=lambda: MarginSpec(2.0, 1.0))
    margin_after: MarginSpec = field(default_factory=MarginSpec)
    mode: str = "iid"
    ar_coefficient: float = 0.5
    noise_before: float = 1.0
    noise_after: float = 4.0
    burn_in: int = 100

    def __post_init__(self):
        if self.n < 2 or self.d < 2:
            raise ScenarioError(f"need n >= 2 and d >= 2, got n={self.n}, d={self.d}")
        if self.mode not in TEMPORAL_MODES:
            raise ScenarioError(f"unknown temporal mode '{self.mode}', expected one of {TEMPORAL_MODES}")
        if not 0.0 <= self.t <= 1.0:
            raise ScenarioError(f"copula break fraction must be in [0, 1], got {self.t}")
        if not 0.0 < self.b < 1.0:
            raise ScenarioError(f"marginal break fraction must be in (0, 1), got {self.b}")
        k = self.copula_break
        if 0 < self.t < 1 and not 1 <= k <= self.n - 1:
            raise ScenarioError(f"copula break floor(n*t) = {k} outside [1, {self.n - 1}]")
        if not 1 <= self.marginal_break <= self.n - 1:
            raise ScenarioError(f"marginal break floor(n*b) = {self.marginal_break} outside [1, {self.n - 1}]")
        if self.burn_in < 0:
            raise ScenarioError(f"burn-in must be nonnegative, got {self.burn_in}")

    @property
    def copula_break(self) -> int:
        return fraction_index(self.n, self.t)

    @property
    def marginal_break(self) -> int:
        return fraction_index(self.n, self.b)


def _copula_rows(spec: ScenarioSpec, rows: int, switch: int, rng: np.random.Generator) -> np.ndarray:
    """rows x d uniforms, copula_before for rows < switch and copula_after after"""
    switch = min(max(switch, 0), rows)
    before = sample_copula(spec.copula_before, spec.d, switch, rng)
    after = sample_copula(spec.copula_after, spec.d, rows - switch, rng)
    return np.vstack([before, after])


def _generate_iid(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    u = _copula_rows(spec, spec.n, spec.copula_break, rng)
    m = spec.marginal_break
    return np.vstack([spec.margin_before.transform(u[:m]), spec.margin_after.transform(u[m:])])


def _generate_ar1(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    burn = spec.burn_in
    m = spec.marginal_break
    k = spec.copula_break
    total = spec.n + 2 * burn
    # raw index of kept row k: both burn-in blocks precede it when m <= k
    switch = k + 2 * burn if m <= k else k + burn
    u = _copula_rows(spec, total, switch, rng)

    restart = m + burn
    noise = ndtri(u)
    noise[:restart] *= spec.noise_before
    noise[restart:] *= spec.noise_after
    series = ar1_recursion(noise, spec.ar_coefficient, restart)
    return np.vstack([series[burn:restart], series[restart + burn :]])


def generate_scenario(spec: ScenarioSpec, rng: np.random.Generator) -> SampleMatrix:
    logger.debug("scenario %s: n=%d, copula break %d, marginal break %d", spec.mode, spec.n, spec.copula_break, spec.marginal_break)
    if spec.mode == "ar1":
        values = _generate_ar1(spec, rng)
    else:
        values = _generate_iid(spec, rng)
    return SampleMatrix(values)
