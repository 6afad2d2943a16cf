"""Auxiliary-model estimators.

The matching engine summarizes data through simple auxiliary fits: a
kernel-weighted local AR(1) for the moving-average model, and a
multiplicative GJR-GARCH for the stochastic volatility model.  The GJR
route follows a two-pass scheme: a local log-level fit pins down the
shape of the slowly varying variance component, the data are normalized
by it, and a global quasi-MLE then estimates the short-run dynamics so
that the long-run level satisfies the unit-unconditional-variance
identification restriction ``omega = 1 - alpha - beta - gamma/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._gjr import (
    SMAX,
    gjr_neg_loglik,
    nm_minimize_gjr,
    params_from_z,
    z_from_params,
)
from .errors import ConvergenceFailure, DegenerateInputError, InvalidArgumentError
from .kernels import KernelSpec, local_weights
from .processes import DELTA_TRIM, Series

# fixed multi-start points for the quasi-MLE, as (alpha, beta, gamma)
_QMLE_STARTS = ((0.70, 0.15, 0.05), (0.30, 0.25, 0.10), (0.05, 0.05, 0.0))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoAr1:
    """AR(1) auxiliary coefficient, clamped to [-1+delta, 1-delta]."""

    rho: float
    clamped: bool = False

    def as_vector(self) -> np.ndarray:
        return np.array([self.rho])


@dataclass(frozen=True)
class RhoGjr:
    """Multiplicative GJR-GARCH auxiliary parameters (tau, omega, alpha, beta, gamma).

    ``alpha`` multiplies the lagged conditional variance and ``beta`` the
    lagged squared return, matching the structural recursion used
    throughout this package.
    """

    tau: float
    omega: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        ok = (
            self.tau > 0.0
            and self.omega > 0.0
            and self.alpha >= 0.0
            and self.beta >= 0.0
            and self.beta + self.gamma >= -1e-12
            and self.persistence < 1.0
        )
        if not ok:
            raise InvalidArgumentError(f"inadmissible GJR parameters: {self}")

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta + 0.5 * self.gamma

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)

    def as_vector(self) -> np.ndarray:
        return np.array([self.tau, self.omega, self.alpha, self.beta, self.gamma])


@dataclass(frozen=True)
class TauGrid:
    """Long-run variance level on a grid of rescaled time points."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size == 0:
            raise InvalidArgumentError("TauGrid needs equal-length 1-D grid and values")
        if np.any(np.diff(g) <= 0):
            raise InvalidArgumentError("TauGrid grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        """Trapezoid integral over [0, 1], extending the end values
        constantly to 0 and 1."""
        g = np.concatenate(([0.0], self.grid, [1.0]))
        v = np.concatenate(([self.values[0]], self.values, [self.values[-1]]))
        return float(np.trapezoid(v, g))

    def interpolate(self, u) -> np.ndarray:
        """Linear interpolation, constant beyond the grid ends."""
        return np.interp(np.asarray(u, dtype=float), self.grid, self.values)


# ---------------------------------------------------------------------------
# AR(1) auxiliary estimators
# ---------------------------------------------------------------------------


def _clamped_ratio(num: float, den: float, delta: float) -> RhoAr1:
    if not den > 0.0:
        raise DegenerateInputError("zero denominator in AR(1) ratio (degenerate series)")
    rho = num / den
    hi = 1.0 - delta
    if rho > hi:
        return RhoAr1(hi, clamped=True)
    if rho < -hi:
        return RhoAr1(-hi, clamped=True)
    return RhoAr1(float(rho))


def local_ar1_estimate(
    series: Series, u: float, kernel: KernelSpec, delta: float = DELTA_TRIM
) -> RhoAr1:
    """Kernel-weighted lag-1 ratio sum(w Y_{t-1} Y_t) / sum(w Y_{t-1}^2)."""
    y = series.values
    if y.size < 3:
        raise InvalidArgumentError(f"need T >= 3, got {y.size}")
    w = local_weights(kernel, u, y.size, "raw").weights[1:]
    num = float(np.dot(w, y[:-1] * y[1:]))
    den = float(np.dot(w, y[:-1] * y[:-1]))
    return _clamped_ratio(num, den, delta)


def global_ar1_estimate(series: Series, delta: float = DELTA_TRIM) -> RhoAr1:
    """Unweighted lag-1 regression-through-origin coefficient."""
    y = series.values
    if y.size < 3:
        raise InvalidArgumentError(f"need T >= 3, got {y.size}")
    num = float(np.dot(y[:-1], y[1:]))
    den = float(np.dot(y[:-1], y[:-1]))
    return _clamped_ratio(num, den, delta)


def pseudo_true_rho_ma1(theta: float) -> float:
    """Probability limit of the AR(1) fit on a stationary MA(1):
    ``theta / (1 + theta^2)``."""
    return theta / (1.0 + theta * theta)


# ---------------------------------------------------------------------------
# local least squares
# ---------------------------------------------------------------------------


def local_least_squares(
    response: Series, regressors: np.ndarray, u: float, kernel: KernelSpec
) -> np.ndarray:
    """Kernel-weighted least squares of the response on T x p regressors."""
    y = response.values
    x = np.asarray(regressors, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != y.size:
        raise InvalidArgumentError(
            f"regressors have {x.shape[0]} rows for a length-{y.size} response"
        )
    w = local_weights(kernel, u, y.size, "raw").weights
    xw = x * w[:, None]
    gram = x.T @ xw
    svals = np.linalg.svd(gram, compute_uv=False)
    if svals[-1] <= svals[0] * 1e-12 or svals[0] == 0.0:
        raise DegenerateInputError("singular weighted Gram matrix")
    return np.linalg.solve(gram, xw.T @ y)


def local_loglevel_estimate(series: Series, u: float, kernel: KernelSpec) -> float:
    """Kernel-weighted mean of log(y_t^2): the log long-run variance level.

    Squared values are floored at ``1e-12 * var(y)`` so zeros never raise.
    """
    y = series.values
    floor = 1e-12 * float(np.var(y))
    if floor <= 0.0:
        floor = 1e-300
    w = local_weights(kernel, u, y.size, "nadaraya_watson").weights
    return float(np.dot(w, np.log(np.maximum(y * y, floor))))


def normalize_tau(tau_star: TauGrid) -> TauGrid:
    """Divide a level grid by its trapezoid integral over [0, 1]."""
    if np.any(tau_star.values <= 0.0):
        raise InvalidArgumentError("tau values must be strictly positive")
    return TauGrid(tau_star.grid, tau_star.values / tau_star.integral())


# ---------------------------------------------------------------------------
# GJR-GARCH quasi-MLE
# ---------------------------------------------------------------------------


def gjr_quasi_loglik(rho: RhoGjr, series: Series) -> float:
    """Gaussian quasi-log-likelihood -0.5 sum(log s2_t + y_t^2/s2_t)
    with tau = 1 and s2_1 = the sample variance."""
    y = np.ascontiguousarray(series.values)
    s2_init = float(np.var(y))
    return -gjr_neg_loglik(rho.omega, rho.alpha, rho.beta, rho.gamma, y, s2_init)


def gjr_qmle(
    series: Series,
    restricted: bool = False,
    init: RhoGjr | None = None,
    xatol: float = 1e-8,
    fatol: float = 1e-7,
    maxiter: int = 1500,
) -> RhoGjr:
    """Quasi-MLE of the GJR recursion on (already scaled) data.

    Optimizes over a smooth reparameterization of the stationarity
    region with a derivative-free simplex, from three fixed starting
    points plus the optional ``init``.  In the restricted fit ``omega``
    is eliminated through ``omega = 1 - alpha - beta - gamma/2``.

    ``fatol`` sits at the statistical noise floor of the
    quasi-likelihood on purpose: data without volatility feedback leave
    a flat ridge in (omega, alpha) on which parameter-space convergence
    is unattainable, while any likelihood movement below ``fatol`` is
    far inside sampling noise.
    """
    y = np.ascontiguousarray(series.values)
    if y.size < 50:
        raise InvalidArgumentError(f"need T >= 50 for the quasi-MLE, got {y.size}")
    s2_init = float(np.var(y))
    if s2_init <= 0.0:
        raise DegenerateInputError("constant series has no GARCH likelihood")

    starts = []
    for a, b, g in _QMLE_STARTS:
        s = a + b + 0.5 * g
        omega0 = max((1.0 - s) * s2_init, 1e-10)
        starts.append(z_from_params(omega0, a, b, g, restricted))
    if init is not None:
        starts.append(z_from_params(init.omega, init.alpha, init.beta, init.gamma, restricted))

    runs = []
    any_conv = False
    for z0 in starts:
        z, f, conv = nm_minimize_gjr(z0, restricted, y, s2_init, xatol, fatol, maxiter)
        any_conv = any_conv or conv
        runs.append((f, params_from_z(z, restricted)))

    # data without volatility feedback leave an (omega, alpha) likelihood
    # ridge on which the runs scatter, with a well-known spurious
    # high-persistence mode; among fits whose likelihood deficit is below
    # the BIC charge for one parameter, prefer the least persistent one
    best_f = min(f for f, _ in runs)
    tie_tol = 0.5 * math.log(y.size)
    tied = [p for f, p in runs if f <= best_f + tie_tol]
    omega, alpha, beta, gamma = min(tied, key=lambda p: p[1] + p[2] + 0.5 * p[3])

    fit = RhoGjr(tau=1.0, omega=float(omega), alpha=float(alpha),
                 beta=float(beta), gamma=float(gamma))
    if not any_conv:
        raise ConvergenceFailure(
            f"GJR quasi-MLE failed to converge after {len(starts)} starts", best=fit
        )
    return fit


def simulated_gjr_fit(series: Series, **qmle_kwargs) -> RhoGjr:
    """Auxiliary fit for a stationary path at a fixed rescaled time.

    The level is read off the unrestricted fit as the implied
    unconditional variance, the data are renormalized by it, and the
    refit then delivers dynamics compatible with the identification
    restriction.  Returns the full parameter vector including the level.
    """
    first = gjr_qmle(series, restricted=False, **qmle_kwargs)
    tau_hat = first.unconditional_variance
    rescaled = Series(series.values / np.sqrt(tau_hat))
    init = replace(first, omega=first.omega / tau_hat)
    second = gjr_qmle(rescaled, restricted=False, init=init, **qmle_kwargs)
    return replace(second, tau=float(tau_hat))


def multiplicative_gjr_fit(
    series: Series,
    kernel: KernelSpec,
    grid,
    delta: float = DELTA_TRIM,
    **qmle_kwargs,
) -> tuple[TauGrid, RhoGjr]:
    """Two-pass fit of the multiplicative GJR model on observed data.

    1. local log-level fit of log y^2 on the grid -> tau*(u)
    2. normalize tau* to unit integral -> tau_check(u)
    3. unrestricted quasi-MLE on y / sqrt(tau_check(t/T))
    4. absorb the implied unconditional variance:
       tau_hat(u) = tau_check(u) * omega / (1 - alpha - beta - gamma/2)
    5. refit on y / sqrt(tau_hat(t/T)) -> final (omega, alpha, beta, gamma)

    Returns the tau_hat grid and the final parameters (whose ``tau``
    field is 1: the returned level lives in the grid).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("grid must be a non-empty ascending 1-D array")
    if grid[0] < delta - 1e-9 or grid[-1] > 1.0 - delta + 1e-9:
        raise InvalidArgumentError(
            f"grid must lie within [{delta}, {1.0 - delta}] (boundary trimming)"
        )
    y = series.values
    T = y.size
    t_over_T = np.arange(1, T + 1, dtype=float) / T

    log_tau_star = np.array(
        [local_loglevel_estimate(series, u, kernel) for u in grid]
    )
    tau_check = normalize_tau(TauGrid(grid, np.exp(log_tau_star)))

    scaled1 = Series(y / np.sqrt(tau_check.interpolate(t_over_T)))
    first = gjr_qmle(scaled1, restricted=False, **qmle_kwargs)

    level = first.unconditional_variance
    tau_hat = TauGrid(grid, tau_check.values * level)

    scaled2 = Series(y / np.sqrt(tau_hat.interpolate(t_over_T)))
    init = replace(first, omega=first.omega / level)
    final = gjr_qmle(scaled2, restricted=False, init=init, **qmle_kwargs)
    return tau_hat, final
