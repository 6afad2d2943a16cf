"""Statistical diagnostics and closed-form oracles.

The ARCH LM test screens series for conditional heteroskedasticity
before volatility modeling; the SV second-moment oracle gives the exact
unconditional variance factor of the stationary stochastic-volatility
process and doubles as an independent check on the simulators; the
local-stationarity probe measures how fast the structural process
collapses onto its frozen-coefficient approximations as T grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._special import chi2_sf
from .errors import DegenerateInputError, InvalidArgumentError
from .processes import NoiseStream, Series, approximation_gap


@dataclass(frozen=True)
class ArchTestResult:
    """T R^2 Lagrange-multiplier statistic with its chi-square p-value."""

    statistic: float
    dof: int
    pvalue: float
    lags: int


@dataclass(frozen=True)
class GapDecayTable:
    """Mean structural-vs-stationary gap per sample size, with decay ratios."""

    T_list: tuple
    mean_gaps: np.ndarray
    ratios: np.ndarray  # mean_gaps[i + 1] / mean_gaps[i]


def arch_lm_test(series: Series, lags: int = 5) -> ArchTestResult:
    """Engle's LM test: regress squared centered values on their own lags.

    The statistic is ``T_eff * R^2`` from the auxiliary regression of
    ``y_t^2`` on an intercept and ``lags`` own lags, referred to the
    chi-square distribution with ``lags`` degrees of freedom.
    """
    if lags < 1:
        raise InvalidArgumentError(f"lags must be >= 1, got {lags}")
    y = series.values
    T = y.size
    if T <= lags + 10:
        raise InvalidArgumentError(f"need T > lags + 10, got T={T}, lags={lags}")
    sq = (y - y.mean()) ** 2
    response = sq[lags:]
    design = np.column_stack(
        [np.ones(T - lags)] + [sq[lags - k : T - k] for k in range(1, lags + 1)]
    )
    sst = float(np.sum((response - response.mean()) ** 2))
    if sst <= 1e-30 * max(1.0, float(response.mean()) ** 2):
        raise DegenerateInputError("near-constant squared series; R^2 undefined")
    coef, _, _, _ = np.linalg.lstsq(design, response, rcond=None)
    resid = response - design @ coef
    r_squared = 1.0 - float(np.sum(resid**2)) / sst
    t_eff = response.size
    statistic = t_eff * max(r_squared, 0.0)
    return ArchTestResult(
        statistic=float(statistic),
        dof=lags,
        pvalue=chi2_sf(float(statistic), lags),
        lags=lags,
    )


def sv_moment_oracle(phi: float, sigma: float, gamma_nu: float, mu: float) -> float:
    """Closed-form ``E[nu1^2 exp(h)]`` for jointly normal (nu1, h).

    Here ``Var(nu1) = 1``, ``h ~ N(mu/(1-phi), sigma^2/(1-phi^2))`` and
    ``Cov(nu1, h) = gamma_nu * sd(h)``, giving
    ``exp(m_h + s_h^2/2) (1 + gamma_nu^2 s_h^2)``.
    """
    if abs(phi) >= 1.0:
        raise InvalidArgumentError(f"|phi| must be < 1, got {phi}")
    s_h2 = sigma * sigma / (1.0 - phi * phi)
    m_h = mu / (1.0 - phi)
    return math.exp(m_h + 0.5 * s_h2) * (1.0 + gamma_nu * gamma_nu * s_h2)


def local_stationarity_probe(
    params, T_list, seeds, u: float = 0.5
) -> GapDecayTable:
    """Mean approximation gap per T over seeds, with gap(T_next)/gap(T).

    Wraps :func:`lsii.processes.approximation_gap`; a vanishing ratio
    pattern is the finite-sample signature of local stationarity.
    """
    T_list = tuple(int(T) for T in T_list)
    if any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise InvalidArgumentError("T_list must be strictly ascending")
    means = np.array(
        [
            np.mean(
                [approximation_gap(params, u, T, NoiseStream(int(s))) for s in seeds]
            )
            for T in T_list
        ]
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = means[1:] / means[:-1]
    return GapDecayTable(T_list=T_list, mean_gaps=means, ratios=ratios)
