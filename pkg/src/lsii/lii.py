"""The local indirect-inference matching engine.

At each rescaled time point ``u`` the engine matches a kernel-local
auxiliary fit on the observed data against the average auxiliary fit on
``H`` stationary paths simulated under a candidate parameter vector,
minimizing the weighted squared distance over the parameter box.  All
simulated paths ride on raw shocks drawn once per ``(seed,
replication_id, path_id)`` key, so the objective is a deterministic
function of the candidate (common random numbers) and results do not
depend on grid order or scheduling.

Supported model kinds:

* ``ls_ma1``       structural MA(1), auxiliary AR(1)
* ``ls_sv``        structural multiplicative SV, auxiliary multiplicative
                   GJR-GARCH (level + dynamics, 5 auxiliary parameters)
* ``ar1_identity`` sanity mode whose binding map is the identity, so the
                   estimate must reproduce the observed auxiliary fit up
                   to optimizer tolerance
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .auxiliary import (
    global_ar1_estimate,
    local_ar1_estimate,
    multiplicative_gjr_fit,
    simulated_gjr_fit,
)
from .diagnostics import sv_moment_oracle
from .errors import ConvergenceFailure, DegenerateInputError, InvalidArgumentError
from .kernels import KernelSpec
from .processes import (
    DELTA_TRIM,
    NoiseStream,
    Series,
    draw_ma1_innovations,
    draw_sv_shocks,
    ma1_path,
    sv_path,
)

DEFAULT_GRID = np.array([0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95])

MODEL_KINDS = ("ls_ma1", "ls_sv", "ar1_identity")

_GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightMatrix:
    """Diagonal positive-definite weighting of the matching residual."""

    diagonal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diagonal, dtype=float)
        if d.ndim != 1 or d.size == 0 or np.any(d <= 0.0):
            raise InvalidArgumentError("WeightMatrix diagonal must be positive")
        object.__setattr__(self, "diagonal", d)


@dataclass(frozen=True)
class ThetaPoint:
    """Named structural parameter vector at one time point."""

    names: tuple
    values: np.ndarray

    def as_dict(self) -> dict:
        return dict(zip(self.names, (float(v) for v in self.values)))

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


@dataclass(frozen=True)
class ThetaPath:
    """Structural parameter estimates over a grid of time points."""

    grid: np.ndarray
    names: tuple
    values: np.ndarray  # shape (len(grid), len(names))

    def component(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


@dataclass
class LiiConfig:
    """Settings for the matching engine.

    ``sim_length`` defaults to the observed length.  ``bounds`` may
    override the per-component parameter boxes by name.  ``tolerance``
    is the optimizer's parameter tolerance (golden-section interval
    width for scalar models, simplex spread for vector models).
    """

    grid: np.ndarray = field(default_factory=lambda: DEFAULT_GRID.copy())
    H: int = 2
    sim_length: Optional[int] = None
    seed: int = 0
    replication_id: int = 0
    omega: Optional[WeightMatrix] = None
    bounds: Optional[dict] = None
    tolerance: float = 1e-5
    max_iterations: int = 300
    restarts: int = 3
    burnin: int = 500
    coarse_points: int = 21

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) <= 0):
            raise InvalidArgumentError("grid must be non-empty and strictly increasing")
        if np.any(g <= 0.0) or np.any(g >= 1.0):
            raise InvalidArgumentError("grid points must lie strictly inside (0, 1)")
        if self.H < 1:
            raise InvalidArgumentError(f"H must be >= 1, got {self.H}")
        if self.restarts < 1:
            raise InvalidArgumentError("restarts must be >= 1")
        self.grid = g


@dataclass(frozen=True)
class LiiFitPoint:
    """Estimation record for one grid point."""

    u: float
    theta_hat: ThetaPoint
    rho_obs: np.ndarray
    rho_sim_at_opt: np.ndarray
    objective_value: float
    converged: bool
    clamped: bool


@dataclass(frozen=True)
class LiiFit:
    """Per-grid-point estimation records for a whole path."""

    model_kind: str
    theta_names: tuple
    rho_names: tuple
    points: list

    @property
    def grid(self) -> np.ndarray:
        return np.array([p.u for p in self.points])

    def theta_path(self) -> ThetaPath:
        values = np.array([p.theta_hat.values for p in self.points])
        return ThetaPath(grid=self.grid, names=self.theta_names, values=values)

    def component(self, name: str) -> np.ndarray:
        return self.theta_path().component(name)


# ---------------------------------------------------------------------------
# model kinds
# ---------------------------------------------------------------------------


class _Ma1Kind:
    scalar = True
    theta_names = ("theta",)
    rho_names = ("rho",)
    default_bounds = {"theta": (-1.0 + DELTA_TRIM, 1.0 - DELTA_TRIM)}

    def draw(self, sim_length, burnin, stream):
        return draw_ma1_innovations(sim_length, stream)

    def binding_one(self, theta_values, raw, burnin):
        y = ma1_path(float(theta_values[0]), raw)
        return global_ar1_estimate(Series(y)).as_vector()

    def observed_precompute(self, series, kernel, config):
        return None

    def observed_point(self, series, u, kernel, precomp):
        fit = local_ar1_estimate(series, u, kernel)
        return fit.as_vector(), fit.clamped


class _Ar1IdentityKind(_Ma1Kind):
    """Structural model == auxiliary model; the binding map is exact."""

    def draw(self, sim_length, burnin, stream):
        return None

    def binding_one(self, theta_values, raw, burnin):
        return np.array([float(theta_values[0])])


class _SvKind:
    scalar = False
    theta_names = ("xi", "phi", "gamma_nu", "sigma")
    rho_names = ("tau", "omega", "alpha", "beta", "gamma")
    default_bounds = {
        "xi": (1e-4, 10.0),
        "phi": (-0.95, 0.95),
        "gamma_nu": (-0.95, 0.95),
        "sigma": (1e-3, 4.0),
    }
    # restart archetypes for (phi, gamma_nu, sigma); xi starts at the
    # observed level inverted through the second-moment map
    _start_dynamics = ((0.0, 0.0, 1.0), (0.5, -0.4, 1.5), (-0.3, 0.3, 0.5))

    def draw(self, sim_length, burnin, stream):
        return draw_sv_shocks(sim_length, burnin, stream)

    def binding_one(self, theta_values, raw, burnin):
        xi, phi, gamma_nu, sigma = (float(v) for v in theta_values)
        y = sv_path(xi, 0.0, phi, sigma, gamma_nu, raw, burnin)
        return simulated_gjr_fit(Series(y)).as_vector()

    def observed_precompute(self, series, kernel, config):
        return multiplicative_gjr_fit(series, kernel, config.grid)

    def observed_point(self, series, u, kernel, precomp):
        tau_grid, params = precomp
        vec = np.array(
            [float(tau_grid.interpolate(u)), params.omega, params.alpha,
             params.beta, params.gamma]
        )
        return vec, False

    def starts(self, rho_obs):
        out = []
        for phi0, gnu0, sig0 in self._start_dynamics:
            xi0 = float(rho_obs[0]) / sv_moment_oracle(phi0, sig0, gnu0, 0.0)
            out.append(np.array([xi0, phi0, gnu0, sig0]))
        return out


_KINDS = {"ls_ma1": _Ma1Kind(), "ls_sv": _SvKind(), "ar1_identity": _Ar1IdentityKind()}


def _kind(model_kind: str):
    try:
        return _KINDS[model_kind]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown model kind {model_kind!r}; expected one of {MODEL_KINDS}"
        ) from None


def _resolve_bounds(kind, config: LiiConfig):
    bounds = dict(kind.default_bounds)
    if config.bounds:
        for name, box in config.bounds.items():
            if name not in bounds:
                raise InvalidArgumentError(f"unknown bound name {name!r}")
            lo, hi = float(box[0]), float(box[1])
            if not lo < hi:
                raise InvalidArgumentError(f"empty bound for {name!r}: ({lo}, {hi})")
            bounds[name] = (lo, hi)
    return [bounds[n] for n in kind.theta_names]


def _draw_raws(kind, config: LiiConfig, sim_length: int):
    """One raw shock bundle per simulated path, keyed by the path index."""
    return [
        kind.draw(sim_length, config.burnin, NoiseStream(config.seed, config.replication_id, j))
        for j in range(1, config.H + 1)
    ]


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------


def simulated_binding(model_kind, theta, u, config: LiiConfig, raws=None, sim_length=None):
    """Average auxiliary fit across H simulated stationary paths at theta."""
    kind = _kind(model_kind)
    values = theta.values if isinstance(theta, ThetaPoint) else np.asarray(theta, float)
    if raws is None:
        if sim_length is None:
            sim_length = config.sim_length
        if sim_length is None:
            raise InvalidArgumentError("sim_length (or config.sim_length) is required")
        raws = _draw_raws(kind, config, int(sim_length))
    vecs = [kind.binding_one(values, raw, config.burnin) for raw in raws]
    return np.mean(vecs, axis=0)


def lii_objective(model_kind, theta, rho_obs, u, config: LiiConfig, raws=None, sim_length=None):
    """Weighted squared matching distance ``(rho_obs - rho_sim)' Omega (.)``."""
    rho_obs = np.asarray(rho_obs, dtype=float)
    rho_sim = simulated_binding(model_kind, theta, u, config, raws=raws, sim_length=sim_length)
    if rho_obs.shape != rho_sim.shape:
        raise InvalidArgumentError(
            f"rho dimension mismatch: observed {rho_obs.shape} vs simulated {rho_sim.shape}"
        )
    diag = config.omega.diagonal if config.omega is not None else np.ones(rho_obs.size)
    if diag.size != rho_obs.size:
        raise InvalidArgumentError(
            f"weight matrix dimension {diag.size} does not match rho dimension {rho_obs.size}"
        )
    r = rho_obs - rho_sim
    return float(np.dot(r, diag * r))


class _Tracker:
    """Evaluates the match objective and keeps the best point seen.

    Simulated-side convergence failures count as an infinite penalty so
    the optimizer routes around pathological candidates.
    """

    def __init__(self, kind, rho_obs, diag, raws, burnin):
        self.kind = kind
        self.rho_obs = rho_obs
        self.diag = diag
        self.raws = raws
        self.burnin = burnin
        self.best_f = np.inf
        self.best_theta = None
        self.best_rho_sim = None
        self.n_evals = 0

    def __call__(self, theta_values):
        self.n_evals += 1
        try:
            vecs = [
                self.kind.binding_one(theta_values, raw, self.burnin) for raw in self.raws
            ]
        except (ConvergenceFailure, DegenerateInputError):
            return np.inf
        rho_sim = np.mean(vecs, axis=0)
        r = self.rho_obs - rho_sim
        f = float(np.dot(r, self.diag * r))
        if f < self.best_f:
            self.best_f = f
            self.best_theta = np.array(theta_values, dtype=float)
            self.best_rho_sim = rho_sim
        return f


def _golden_section(f, a, b, tol, maxiter):
    """Golden-section descent on [a, b]; the caller's tracker retains the
    best point, so boundary minima need no special casing."""
    c = b - _GOLDEN_RATIO * (b - a)
    d = a + _GOLDEN_RATIO * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > tol and it < maxiter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN_RATIO * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN_RATIO * (b - a)
            fd = f(d)
        it += 1
    f(0.5 * (a + b))


def _logit(p):
    return math.log(p / (1.0 - p))


def _box_transform(z, lows, highs):
    zc = np.clip(z, -60.0, 60.0)
    return lows + (highs - lows) / (1.0 + np.exp(-zc))


# ---------------------------------------------------------------------------
# point and path estimation
# ---------------------------------------------------------------------------


def estimate_point(
    series: Series,
    u: float,
    model_kind: str,
    kernel: KernelSpec,
    config: LiiConfig,
    observed=None,
    raws=None,
) -> LiiFitPoint:
    """L-II estimate of the structural parameters at one time point.

    ``observed`` and ``raws`` let a path-level caller reuse the
    observed-data auxiliary fit and the simulated raw shocks; both are
    computed on the fly when omitted, with identical results.
    """
    kind = _kind(model_kind)
    boxes = _resolve_bounds(kind, config)
    sim_length = config.sim_length if config.sim_length is not None else series.T
    if raws is None:
        raws = _draw_raws(kind, config, int(sim_length))
    if observed is None:
        observed = kind.observed_precompute(series, kernel, config)
    rho_obs, obs_clamped = kind.observed_point(series, u, kernel, observed)
    diag = config.omega.diagonal if config.omega is not None else np.ones(rho_obs.size)
    if diag.size != rho_obs.size:
        raise InvalidArgumentError("weight matrix dimension does not match rho dimension")

    tracker = _Tracker(kind, rho_obs, diag, raws, config.burnin)

    if kind.scalar:
        lo, hi = boxes[0]
        xs = np.linspace(lo, hi, config.coarse_points)
        fs = [tracker(np.array([x])) for x in xs]
        i = int(np.argmin(fs))
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        _golden_section(
            lambda x: tracker(np.array([x])), a, b, config.tolerance, config.max_iterations
        )
        converged = bool(np.isfinite(tracker.best_f))
    else:
        lows = np.array([b[0] for b in boxes])
        highs = np.array([b[1] for b in boxes])

        def z_obj(z):
            return tracker(_box_transform(z, lows, highs))

        converged = False
        for theta0 in kind.starts(rho_obs)[: config.restarts]:
            frac = np.clip((theta0 - lows) / (highs - lows), 1e-6, 1.0 - 1e-6)
            z0 = np.array([_logit(p) for p in frac])
            simplex = np.vstack([z0] + [z0 + 0.25 * e for e in np.eye(z0.size)])
            res = minimize(
                z_obj,
                z0,
                method="Nelder-Mead",
                options={
                    "xatol": config.tolerance,
                    "fatol": np.inf,
                    "maxiter": config.max_iterations,
                    "maxfev": 20 * config.max_iterations,
                    "initial_simplex": simplex,
                },
            )
            converged = converged or bool(res.success)
        converged = converged and bool(np.isfinite(tracker.best_f))

    if tracker.best_theta is None:
        raise ConvergenceFailure(f"no admissible candidate found at u={u}")

    theta_hat = ThetaPoint(names=kind.theta_names, values=tracker.best_theta)
    at_edge = any(
        v <= lo + 1e-9 or v >= hi - 1e-9
        for v, (lo, hi) in zip(tracker.best_theta, boxes)
    )
    return LiiFitPoint(
        u=float(u),
        theta_hat=theta_hat,
        rho_obs=rho_obs,
        rho_sim_at_opt=tracker.best_rho_sim,
        objective_value=tracker.best_f,
        converged=bool(converged),
        clamped=bool(obs_clamped or at_edge),
    )


def estimate_path(
    series: Series, model_kind: str, kernel: KernelSpec, config: LiiConfig
) -> LiiFit:
    """Run :func:`estimate_point` over the whole grid with shared shocks.

    The observed-data auxiliary fit and the simulated raw shocks are
    computed once and reused at every grid point; per-point failures are
    flagged in the output rather than aborting the path.
    """
    kind = _kind(model_kind)
    sim_length = config.sim_length if config.sim_length is not None else series.T
    raws = _draw_raws(kind, config, int(sim_length))
    try:
        observed = kind.observed_precompute(series, kernel, config)
        observed_ok = True
    except (ConvergenceFailure, DegenerateInputError):
        observed = None
        observed_ok = False

    nan_theta = ThetaPoint(kind.theta_names, np.full(len(kind.theta_names), np.nan))
    d_rho = len(kind.rho_names)

    def failed_row(u):
        return LiiFitPoint(float(u), nan_theta, np.full(d_rho, np.nan),
                           np.full(d_rho, np.nan), np.inf, False, False)

    points = []
    for u in config.grid:
        if not observed_ok:
            points.append(failed_row(u))
            continue
        try:
            points.append(
                estimate_point(series, u, model_kind, kernel, config,
                               observed=observed, raws=raws)
            )
        except Exception:
            points.append(failed_row(u))
    return LiiFit(
        model_kind=model_kind,
        theta_names=kind.theta_names,
        rho_names=kind.rho_names,
        points=points,
    )
