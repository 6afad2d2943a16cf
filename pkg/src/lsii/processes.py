"""Simulators for the structural locally stationary models.

Two structural families are provided -- the moving-average model with a
slowly varying MA coefficient and the multiplicative stochastic
volatility (SV) model -- together with their frozen-coefficient
stationary approximations and a GJR-GARCH generator used as a test
fixture.  All randomness flows through :class:`NoiseStream`, keyed by a
``(seed, replication_id, path_id)`` triple, so that identical keys
reproduce bit-identical paths and the raw shocks can be drawn once and
reused across candidate parameter values (common random numbers).

Draw-order contract (per fresh generator from one stream):

* MA(1): ``T + 1`` standard normals, index 0 being the presample
  innovation.
* SV: one standard normal for the initial log-volatility state, then
  ``burnin + T`` return shocks ``nu1``, then ``burnin + T`` auxiliary
  shocks ``eta``.
* GJR-GARCH: ``burnin + T`` standard normals.

The SV state is updated with the volatility innovation that is paired
contemporaneously with the return innovation: the observation at ``t``
uses the log-volatility that has just absorbed ``nu2_t``.  With leverage
``gamma_nu < 0`` a negative return shock therefore raises volatility at
``t`` and, through persistence, at ``t+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidArgumentError, OutOfBoundsError

DELTA_TRIM = 0.05

_U64 = (1 << 64) - 1

PathSpec = Union[Callable[[float], float], tuple]


# ---------------------------------------------------------------------------
# noise streams and series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseStream:
    """Deterministic source of standard normal variates.

    ``path_id`` is the simulation index ``j = 1..H`` (0 for observed-data
    streams).  Each call to :meth:`generator` restarts the stream, so a
    simulator always sees the same variates for the same key.
    """

    seed: int
    replication_id: int = 0
    path_id: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.seed & _U64, self.replication_id & _U64, self.path_id & _U64)
        return np.random.default_rng(np.random.SeedSequence(key))


@dataclass(frozen=True)
class Series:
    """A length-T observation path on the rescaled-time grid t/T."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InvalidArgumentError("Series requires a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("Series entries must be finite")
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return self.values.size


def _as_path_fn(path: PathSpec, name: str) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize a parameter path to a vectorized callable on [0, 1].

    Accepts a callable ``u -> value`` or a ``(grid, values)`` pair that is
    linearly interpolated (constant beyond the grid ends).
    """
    if callable(path):
        def fn(u):
            return np.asarray(path(np.asarray(u, dtype=float)), dtype=float)
        return fn
    try:
        grid, values = path
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(
            f"{name} must be a callable or a (grid, values) pair"
        ) from exc
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.shape != values.shape or grid.size == 0:
        raise InvalidArgumentError(f"{name} grid and values must be equal-length 1-D arrays")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError(f"{name} grid must be strictly increasing")

    def fn(u):
        return np.interp(np.asarray(u, dtype=float), grid, values)

    return fn


_CHECK_GRID = np.linspace(0.0, 1.0, 2001)


class LsMaParams:
    """Locally stationary MA(1) parameters: the coefficient path theta0(u).

    The path must satisfy ``sup_u |theta0(u)| <= 1 - delta`` so every
    frozen-coefficient approximation stays invertible.
    """

    def __init__(self, theta_path: PathSpec, delta: float = DELTA_TRIM):
        self.theta_path = theta_path
        self.delta = float(delta)
        self._fn = _as_path_fn(theta_path, "theta_path")
        sup = float(np.max(np.abs(self._fn(_CHECK_GRID))))
        if sup > 1.0 - self.delta + 1e-12:
            raise InvalidArgumentError(
                f"sup |theta0(u)| = {sup:.4f} exceeds 1 - delta = {1.0 - self.delta}"
            )

    def theta_at(self, u):
        return self._fn(u)


class LsSvParams:
    """Locally stationary multiplicative SV parameters.

    ``xi_path`` is the slowly varying long-run variance level (positive),
    ``mu``/``phi``/``sigma`` drive the AR(1) log-volatility state and
    ``gamma_nu`` is the leverage correlation between the return shock and
    the volatility shock.
    """

    def __init__(
        self,
        xi_path: PathSpec,
        mu: float = 0.0,
        phi: float = 0.0,
        sigma: float = 1.0,
        gamma_nu: float = 0.0,
        delta: float = DELTA_TRIM,
    ):
        self.xi_path = xi_path
        self.mu = float(mu)
        self.phi = float(phi)
        self.sigma = float(sigma)
        self.gamma_nu = float(gamma_nu)
        self.delta = float(delta)
        self._fn = _as_path_fn(xi_path, "xi_path")
        if np.min(self._fn(_CHECK_GRID)) <= 0.0:
            raise InvalidArgumentError("xi(u) must be strictly positive on [0, 1]")
        if abs(self.phi) > 1.0 - self.delta + 1e-12:
            raise InvalidArgumentError(f"|phi| = {abs(self.phi)} exceeds 1 - delta")
        if self.sigma < 0.0:
            raise InvalidArgumentError("sigma must be non-negative")
        if abs(self.gamma_nu) > 1.0:
            raise InvalidArgumentError("|gamma_nu| must not exceed 1")

    def xi_at(self, u):
        return self._fn(u)


# ---------------------------------------------------------------------------
# raw draws and pure path transforms (reused by the L-II engine for CRN)
# ---------------------------------------------------------------------------


def draw_ma1_innovations(T: int, noise: NoiseStream) -> np.ndarray:
    """T + 1 standard normals; index 0 is the presample innovation."""
    if T < 2:
        raise InvalidArgumentError(f"T must be >= 2, got {T}")
    return noise.generator().standard_normal(T + 1)


def ma1_path(theta, eps: np.ndarray) -> np.ndarray:
    """MA(1) output ``y_t = eps_t + theta_t * eps_{t-1}`` for t = 1..T.

    ``theta`` is a scalar or a length-T array aligned with the output.
    """
    return eps[1:] + np.asarray(theta, dtype=float) * eps[:-1]


@dataclass(frozen=True)
class SvShocks:
    """Raw normal draws backing one SV path (theta-independent)."""

    h0_z: float
    nu1: np.ndarray
    eta: np.ndarray


def draw_sv_shocks(T: int, burnin: int, noise: NoiseStream) -> SvShocks:
    if T < 1:
        raise InvalidArgumentError(f"T must be >= 1, got {T}")
    if burnin < 0:
        raise InvalidArgumentError(f"burnin must be >= 0, got {burnin}")
    gen = noise.generator()
    h0_z = float(gen.standard_normal())
    total = burnin + T
    nu1 = gen.standard_normal(total)
    eta = gen.standard_normal(total)
    return SvShocks(h0_z=h0_z, nu1=nu1, eta=eta)


def sv_transform_shocks(sigma: float, gamma_nu: float, shocks: SvShocks) -> np.ndarray:
    """Volatility innovations ``nu2 = sigma * (gamma_nu nu1 + sqrt(1-gamma_nu^2) eta)``.

    Gives Cov(nu1, nu2) = gamma_nu * sigma and Var(nu2) = sigma^2.
    """
    return sigma * (gamma_nu * shocks.nu1 + math.sqrt(1.0 - gamma_nu**2) * shocks.eta)


def sv_path(
    xi,
    mu: float,
    phi: float,
    sigma: float,
    gamma_nu: float,
    shocks: SvShocks,
    burnin: int,
) -> np.ndarray:
    """SV output path of length ``len(shocks.nu1) - burnin``.

    The state starts at its stationary law, evolves as
    ``h_t = mu + phi h_{t-1} + nu2_t`` and the observation at ``t`` is
    ``sqrt(xi_t) exp(h_t / 2) nu1_t``; the first ``burnin`` observations
    are discarded.  ``xi`` is a scalar or an array matching the output
    length.
    """
    if abs(phi) >= 1.0:
        raise InvalidArgumentError(f"|phi| must be < 1 for a stationary state, got {phi}")
    nu2 = sv_transform_shocks(sigma, gamma_nu, shocks)
    m_h = mu / (1.0 - phi)
    sd_h = sigma / math.sqrt(1.0 - phi * phi)
    h0 = m_h + sd_h * shocks.h0_z
    # h_t = (mu + nu2_t) + phi h_{t-1}, run at C speed via an IIR filter
    h, _ = lfilter([1.0], [1.0, -phi], mu + nu2, zi=np.array([phi * h0]))
    unit = np.exp(0.5 * h[burnin:]) * shocks.nu1[burnin:]
    # scale last, so multiplying xi by c scales the output by sqrt(c) exactly
    return np.sqrt(np.asarray(xi, dtype=float)) * unit


# ---------------------------------------------------------------------------
# public simulators
# ---------------------------------------------------------------------------


def simulate_ls_ma1(params: LsMaParams, T: int, noise: NoiseStream) -> Series:
    """Locally stationary MA(1): ``Y_t = eps_t + eps_{t-1} theta0(t/T)``."""
    eps = draw_ma1_innovations(T, noise)
    t_over_T = np.arange(1, T + 1, dtype=float) / T
    return Series(ma1_path(params.theta_at(t_over_T), eps))


def simulate_stationary_ma1(theta: float, T: int, noise: NoiseStream) -> Series:
    """Stationary MA(1) with fixed coefficient, same noise contract."""
    if abs(theta) > 1.0 - DELTA_TRIM + 1e-12:
        raise OutOfBoundsError(f"|theta| = {abs(theta)} exceeds 1 - delta")
    eps = draw_ma1_innovations(T, noise)
    return Series(ma1_path(float(theta), eps))


def simulate_ls_sv(
    params: LsSvParams, T: int, noise: NoiseStream, burnin: int = 500
) -> Series:
    """Locally stationary SV: ``Y_t = sqrt(xi(t/T)) exp(h_t/2) nu1_t``."""
    shocks = draw_sv_shocks(T, burnin, noise)
    t_over_T = np.arange(1, T + 1, dtype=float) / T
    xi = params.xi_at(t_over_T)
    return Series(
        sv_path(xi, params.mu, params.phi, params.sigma, params.gamma_nu, shocks, burnin)
    )


def simulate_stationary_sv(
    xi: float,
    phi: float,
    gamma_nu: float,
    sigma: float,
    T: int,
    noise: NoiseStream,
    burnin: int = 500,
) -> Series:
    """Stationary SV path at a fixed rescaled time point, with mu = 0.

    The zero level pins the scale of the short-run component so that
    ``xi`` is identified; this is the simulator used on the simulated
    side of the LS-SV matching.
    """
    if xi <= 0.0:
        raise InvalidArgumentError(f"xi must be positive, got {xi}")
    if abs(phi) >= 1.0:
        raise InvalidArgumentError(f"|phi| must be < 1, got {phi}")
    if abs(gamma_nu) > 1.0:
        raise InvalidArgumentError(f"|gamma_nu| must not exceed 1, got {gamma_nu}")
    if sigma < 0.0:
        raise InvalidArgumentError(f"sigma must be non-negative, got {sigma}")
    shocks = draw_sv_shocks(T, burnin, noise)
    return Series(sv_path(float(xi), 0.0, phi, sigma, gamma_nu, shocks, burnin))


def simulate_gjr_garch(rho, T: int, noise: NoiseStream, burnin: int = 500) -> Series:
    """Stationary GJR-GARCH path scaled by ``sqrt(tau)`` (test fixture).

    The variance recursion is
    ``s2_{t+1} = omega + alpha s2_t + (beta + gamma 1{x_t < 0}) x_t^2``
    on the standardized process ``x = y / sqrt(tau)``, started at the
    unconditional variance ``omega / (1 - alpha - beta - gamma/2)``.
    """
    from ._gjr import gjr_simulate_core  # local import to defer numba compile

    tau = float(getattr(rho, "tau", 1.0))
    omega, alpha, beta, gamma = (
        float(rho.omega), float(rho.alpha), float(rho.beta), float(rho.gamma),
    )
    if not (omega > 0.0 and alpha >= 0.0 and beta >= 0.0 and beta + gamma >= 0.0):
        raise InvalidArgumentError(
            "GJR parameters must satisfy omega > 0, alpha >= 0, beta >= 0, beta + gamma >= 0"
        )
    s = alpha + beta + 0.5 * gamma
    if s >= 1.0:
        raise InvalidArgumentError(f"alpha + beta + gamma/2 = {s} is not < 1")
    if tau <= 0.0:
        raise InvalidArgumentError(f"tau must be positive, got {tau}")
    if T < 1:
        raise InvalidArgumentError(f"T must be >= 1, got {T}")
    if burnin < 0:
        raise InvalidArgumentError(f"burnin must be >= 0, got {burnin}")
    z = noise.generator().standard_normal(burnin + T)
    x = gjr_simulate_core(omega, alpha, beta, gamma, z)
    return Series(math.sqrt(tau) * x[burnin:])


def approximation_gap(params, u: float, T: int, noise: NoiseStream) -> float:
    """Max gap between the structural path and its frozen-u twin near u.

    Both paths are driven by identical shocks; the window is
    ``|t/T - u| <= 1/sqrt(T)``.
    """
    if not 0.0 < u < 1.0:
        raise InvalidArgumentError(f"u must lie in (0, 1), got {u}")
    t_over_T = np.arange(1, T + 1, dtype=float) / T
    window = np.abs(t_over_T - u) <= 1.0 / math.sqrt(T)
    if isinstance(params, LsMaParams):
        eps = draw_ma1_innovations(T, noise)
        y_ls = ma1_path(params.theta_at(t_over_T), eps)
        y_st = ma1_path(float(params.theta_at(u)), eps)
    elif isinstance(params, LsSvParams):
        burnin = 500
        shocks = draw_sv_shocks(T, burnin, noise)
        common = (params.mu, params.phi, params.sigma, params.gamma_nu, shocks, burnin)
        y_ls = sv_path(params.xi_at(t_over_T), *common)
        y_st = sv_path(float(params.xi_at(u)), *common)
    else:
        raise InvalidArgumentError(
            f"params must be LsMaParams or LsSvParams, got {type(params).__name__}"
        )
    return float(np.max(np.abs(y_ls[window] - y_st[window])))
