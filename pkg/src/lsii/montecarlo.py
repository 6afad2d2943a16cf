"""Replication harness for the simulation studies.

Named designs pin the truth paths of the studies this package
reproduces: three MA-coefficient shapes at T = 1000 and the
stochastic-volatility design at T = 200 with a sinusoidal long-run
variance level.  Replications are embarrassingly parallel with
per-replication derived seeds, and summaries do not depend on
execution order or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, StudyFailure
from .kernels import KernelSpec, rule_of_thumb_bandwidth
from .lii import DEFAULT_GRID, LiiConfig, estimate_path
from .processes import LsMaParams, LsSvParams, NoiseStream, simulate_ls_ma1, simulate_ls_sv


def truth_ma1_a(u):
    return 0.5 * np.asarray(u, dtype=float) ** 2


def truth_ma1_b(u):
    u = np.asarray(u, dtype=float)
    return 0.25 + u - u * u


def truth_ma1_c(u):
    return np.full_like(np.asarray(u, dtype=float), 0.5)


def truth_sv_xi(u):
    u = np.asarray(u, dtype=float)
    return 0.2 * np.sin(0.5 * np.pi * u) + 0.8 * np.cos(0.5 * np.pi * u)


_NAMED = {
    "ls_ma1_a": ("ls_ma1", truth_ma1_a),
    "ls_ma1_b": ("ls_ma1", truth_ma1_b),
    "ls_ma1_c": ("ls_ma1", truth_ma1_c),
    "ls_sv": ("ls_sv", truth_sv_xi),
}

# headline component summarized across replications, per estimation model
_HEADLINE = {"ls_ma1": "theta", "ls_sv": "xi", "ar1_identity": "theta"}


@dataclass
class McDesign:
    """One simulation study: a truth path, sample size, and L-II settings.

    ``model_kind`` is a named design or ``custom``; custom designs supply
    ``truth`` (the headline parameter path, picklable for parallel runs)
    plus ``estimation_model``.  The SV designs use the fixed short-run
    dynamics ``(phi, gamma_nu, sigma) = (sv_phi, sv_gamma_nu, sv_sigma)``
    with a zero log-volatility level.  ``kernel=None`` means a Gaussian
    kernel with the rule-of-thumb bandwidth for ``T``.
    """

    model_kind: str
    T: int
    replications: int
    seed: int = 0
    grid: np.ndarray = field(default_factory=lambda: DEFAULT_GRID.copy())
    lii: Optional[LiiConfig] = None
    kernel: Optional[KernelSpec] = None
    truth: Optional[Callable] = None
    estimation_model: Optional[str] = None
    sv_phi: float = 0.2
    sv_gamma_nu: float = -0.5
    sv_sigma: float = 1.0
    data_burnin: int = 500

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidArgumentError("replications must be >= 1")
        if self.T < 10:
            raise InvalidArgumentError(f"T must be >= 10, got {self.T}")
        if self.model_kind in _NAMED:
            est, truth = _NAMED[self.model_kind]
            self.estimation_model = est
            self.truth = truth
        elif self.model_kind == "custom":
            if self.truth is None or self.estimation_model is None:
                raise InvalidArgumentError(
                    "custom designs require truth and estimation_model"
                )
        else:
            raise InvalidArgumentError(
                f"unknown design {self.model_kind!r}; expected one of "
                f"{tuple(_NAMED) + ('custom',)}"
            )
        self.grid = np.asarray(self.grid, dtype=float)
        if self.lii is None:
            self.lii = LiiConfig(grid=self.grid.copy(), seed=self.seed)
        else:
            self.lii = replace(self.lii, grid=self.grid.copy(), seed=self.seed)
        if self.kernel is None:
            self.kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(self.T))


@dataclass(frozen=True)
class McSummary:
    """Per-grid-point quantiles, bias and RMSE of the headline estimate."""

    model_kind: str
    headline: str
    theta_names: tuple
    grid: np.ndarray
    truth: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray
    bias: np.ndarray
    rmse: np.ndarray
    n_replications: int
    n_failures: int
    estimates: np.ndarray  # (successful replications, grid, d_theta)


def quantile_bands(estimates: np.ndarray, probs) -> np.ndarray:
    """Column-wise empirical quantiles (linear / type-7 interpolation)."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size == 0:
        raise InvalidArgumentError("empty estimates matrix")
    if estimates.ndim == 1:
        estimates = estimates[:, None]
    return np.quantile(estimates, np.asarray(probs, dtype=float), axis=0)


def _simulate_design_path(design: McDesign, r: int):
    stream = NoiseStream(design.seed, r, 0)
    if design.estimation_model == "ls_sv":
        params = LsSvParams(
            xi_path=design.truth,
            mu=0.0,
            phi=design.sv_phi,
            sigma=design.sv_sigma,
            gamma_nu=design.sv_gamma_nu,
        )
        return simulate_ls_sv(params, design.T, stream, burnin=design.data_burnin)
    params = LsMaParams(theta_path=design.truth)
    return simulate_ls_ma1(params, design.T, stream)


def _run_replication(design: McDesign, r: int):
    """One replication: simulate, estimate, return the theta matrix.

    Returns None on failure (counted, never retried, never imputed).
    """
    try:
        series = _simulate_design_path(design, r)
        config = replace(design.lii, replication_id=r)
        fit = estimate_path(series, design.estimation_model, design.kernel, config)
        values = fit.theta_path().values
        if not np.all(np.isfinite(values)):
            return None
        return values
    except Exception:
        return None


def run_study(design: McDesign, workers: int = 1) -> McSummary:
    """Run all replications of a design and summarize the headline path."""
    reps = range(design.replications)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replication, [design] * design.replications, reps))
    else:
        results = [_run_replication(design, r) for r in reps]

    kept = [v for v in results if v is not None]
    n_fail = design.replications - len(kept)
    headline = _HEADLINE[design.estimation_model]
    truth = np.asarray(design.truth(design.grid), dtype=float)

    if kept:
        estimates = np.array(kept)  # (R_ok, m, d)
        from .lii import _kind  # theta component order

        names = _kind(design.estimation_model).theta_names
        head = estimates[:, :, names.index(headline)]
        q05, q50, q95 = quantile_bands(head, [0.05, 0.50, 0.95])
        bias = head.mean(axis=0) - truth
        rmse = np.sqrt(np.mean((head - truth[None, :]) ** 2, axis=0))
    else:
        names = ()
        m = design.grid.size
        estimates = np.empty((0, m, 0))
        q05 = q50 = q95 = bias = rmse = np.full(m, np.nan)

    summary = McSummary(
        model_kind=design.model_kind,
        headline=headline,
        theta_names=tuple(names),
        grid=design.grid,
        truth=truth,
        q05=q05,
        q50=q50,
        q95=q95,
        bias=bias,
        rmse=rmse,
        n_replications=design.replications,
        n_failures=n_fail,
        estimates=estimates,
    )
    if n_fail > design.replications // 10:
        raise StudyFailure(
            f"{n_fail} of {design.replications} replications failed (>10%)",
            partial=summary,
        )
    return summary
