import math

import numpy as np
import pytest

from lsii import (
    DegenerateInputError,
    InvalidArgumentError,
    KernelSpec,
    NoiseStream,
    RhoGjr,
    Series,
    TauGrid,
    gjr_qmle,
    gjr_quasi_loglik,
    global_ar1_estimate,
    local_ar1_estimate,
    local_least_squares,
    local_loglevel_estimate,
    multiplicative_gjr_fit,
    normalize_tau,
    pseudo_true_rho_ma1,
    rule_of_thumb_bandwidth,
    simulate_gjr_garch,
    simulate_stationary_ma1,
    simulate_stationary_sv,
    simulated_gjr_fit,
)
from lsii.auxiliary import _QMLE_STARTS

GAUSS = KernelSpec("gaussian", 0.1)


# ---------------------------------------------------------------------------
# AR(1) estimators
# ---------------------------------------------------------------------------


def test_local_ar1_constant_series_clamps_to_upper():
    fit = local_ar1_estimate(Series(np.full(200, 3.0)), 0.5, GAUSS)
    assert fit.rho == pytest.approx(0.95)
    assert fit.clamped


def test_local_ar1_stationary_ma1_matches_binding():
    y = simulate_stationary_ma1(0.5, 200000, NoiseStream(41))
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(200000))
    fit = local_ar1_estimate(y, 0.5, kernel)
    assert fit.rho == pytest.approx(0.4, abs=0.01)


def test_local_ar1_white_noise():
    y = Series(NoiseStream(42).generator().standard_normal(200000))
    fit = local_ar1_estimate(y, 0.4, KernelSpec("gaussian", rule_of_thumb_bandwidth(200000)))
    assert abs(fit.rho) < 0.02


def test_local_ar1_scale_invariance():
    y = simulate_stationary_ma1(0.3, 5000, NoiseStream(43))
    base = local_ar1_estimate(y, 0.5, GAUSS).rho
    doubled = local_ar1_estimate(Series(2.0 * y.values), 0.5, GAUSS).rho
    assert doubled == base  # powers of two scale exactly
    tripled = local_ar1_estimate(Series(3.0 * y.values), 0.5, GAUSS).rho
    assert tripled == pytest.approx(base, rel=1e-12)


def test_local_ar1_zero_series_degenerate():
    with pytest.raises(DegenerateInputError):
        local_ar1_estimate(Series(np.zeros(100)), 0.5, GAUSS)


def test_global_ar1_matches_binding():
    y = simulate_stationary_ma1(0.5, 20000, NoiseStream(44))
    assert global_ar1_estimate(y).rho == pytest.approx(0.4, abs=0.015)


def test_global_ar1_white_noise():
    y = Series(NoiseStream(45).generator().standard_normal(20000))
    assert abs(global_ar1_estimate(y).rho) < 0.02


def test_global_ar1_alternating_series_clamps():
    y = Series(np.resize([2.0, -2.0], 100))
    fit = global_ar1_estimate(y)
    assert fit.rho == pytest.approx(-0.95)
    assert fit.clamped


@pytest.mark.parametrize("theta,expected", [(0.0, 0.0), (0.5, 0.4), (-0.5, -0.4)])
def test_pseudo_true_rho(theta, expected):
    assert pseudo_true_rho_ma1(theta) == pytest.approx(expected, abs=1e-15)


def test_pseudo_true_rho_strictly_increasing():
    grid = np.linspace(-0.95, 0.95, 381)
    vals = np.array([pseudo_true_rho_ma1(t) for t in grid])
    assert np.all(np.diff(vals) > 0.0)


# ---------------------------------------------------------------------------
# local least squares / log-level
# ---------------------------------------------------------------------------


def test_lls_intercept_only_is_weighted_mean():
    rng = NoiseStream(50).generator()
    y = Series(rng.standard_normal(500))
    wide = KernelSpec("gaussian", 1e6)  # effectively uniform weights
    coef = local_least_squares(y, np.ones((500, 1)), 0.5, wide)
    assert coef[0] == pytest.approx(y.values.mean(), abs=1e-10)


def test_lls_exact_linear_fit():
    rng = NoiseStream(51).generator()
    x = rng.standard_normal(300)
    y = Series(2.0 + 3.0 * x)
    coef = local_least_squares(y, np.column_stack([np.ones(300), x]), 0.3, GAUSS)
    assert coef == pytest.approx([2.0, 3.0], abs=1e-10)


def test_lls_time_varying_slope():
    # b(u) = u recovered at u = 0.5 against a long-sample simulation
    rng = NoiseStream(52).generator()
    T = 50000
    x = rng.standard_normal(T)
    u_t = np.arange(1, T + 1) / T
    y = Series(u_t * x + rng.standard_normal(T))
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(T))
    coef = local_least_squares(y, x[:, None], 0.5, kernel)
    assert coef[0] == pytest.approx(0.5, abs=0.02)


def test_lls_singular_gram():
    with pytest.raises(DegenerateInputError):
        local_least_squares(
            Series(np.ones(100)), np.column_stack([np.ones(100), np.ones(100)]), 0.5, GAUSS
        )


def test_loglevel_constant_series():
    est = local_loglevel_estimate(Series(np.full(400, 3.0)), 0.5, GAUSS)
    assert est == pytest.approx(math.log(9.0), abs=1e-12)


def test_loglevel_chi_square_mean():
    # E log chi2_1 = -gamma_euler - log 2 = -1.2703628...
    y = Series(NoiseStream(53).generator().standard_normal(200000))
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(200000))
    est = local_loglevel_estimate(y, 0.5, kernel)
    assert est == pytest.approx(-1.2703628454614782, abs=0.02)


def test_loglevel_scale_shift():
    y = Series(NoiseStream(54).generator().standard_normal(1000))
    a = local_loglevel_estimate(y, 0.5, GAUSS)
    b = local_loglevel_estimate(Series(2.0 * y.values), 0.5, GAUSS)
    assert b - a == pytest.approx(math.log(4.0), abs=1e-9)


def test_loglevel_handles_zeros():
    vals = NoiseStream(55).generator().standard_normal(500)
    vals[::7] = 0.0
    est = local_loglevel_estimate(Series(vals), 0.5, GAUSS)
    assert np.isfinite(est)


# ---------------------------------------------------------------------------
# tau normalization
# ---------------------------------------------------------------------------


def test_normalize_tau_constant():
    grid = np.linspace(0.05, 0.95, 19)
    out = normalize_tau(TauGrid(grid, np.full(19, 5.0)))
    assert np.allclose(out.values, 1.0, atol=1e-12)
    assert out.integral() == pytest.approx(1.0, abs=1e-10)


def test_normalize_tau_linear():
    grid = np.linspace(0.05, 0.95, 101)
    out = normalize_tau(TauGrid(grid, grid.copy()))
    assert np.max(np.abs(out.values - 2.0 * grid)) < 1e-3
    assert out.integral() == pytest.approx(1.0, abs=1e-10)


def test_normalize_tau_idempotent():
    grid = np.linspace(0.05, 0.95, 51)
    once = normalize_tau(TauGrid(grid, np.exp(grid)))
    twice = normalize_tau(once)
    assert np.max(np.abs(twice.values - once.values)) < 1e-12


def test_normalize_tau_rejects_nonpositive():
    with pytest.raises(InvalidArgumentError):
        normalize_tau(TauGrid(np.array([0.2, 0.8]), np.array([1.0, 0.0])))


# ---------------------------------------------------------------------------
# GJR quasi-MLE
# ---------------------------------------------------------------------------


TRUTH = RhoGjr(tau=1.0, omega=0.2, alpha=0.6, beta=0.1, gamma=0.2)


def test_qmle_restricted_recovery():
    y = simulate_gjr_garch(TRUTH, 20000, NoiseStream(60))
    fit = gjr_qmle(y, restricted=True)
    assert fit.alpha == pytest.approx(0.6, abs=0.05)
    assert fit.beta == pytest.approx(0.1, abs=0.05)
    assert fit.gamma == pytest.approx(0.2, abs=0.05)


def test_qmle_restricted_identity_exact():
    y = simulate_gjr_garch(TRUTH, 2000, NoiseStream(61))
    fit = gjr_qmle(y, restricted=True)
    assert abs(fit.omega - (1.0 - fit.alpha - fit.beta - 0.5 * fit.gamma)) < 1e-10


def test_qmle_iid_has_no_arch_terms():
    y = Series(NoiseStream(62).generator().standard_normal(20000))
    fit = gjr_qmle(y, restricted=False)
    assert abs(fit.beta) < 0.03
    assert abs(fit.gamma) < 0.03


def test_qmle_likelihood_ascent():
    y = simulate_gjr_garch(TRUTH, 5000, NoiseStream(63))
    fit = gjr_qmle(y, restricted=False)
    best = gjr_quasi_loglik(fit, y)
    s2 = float(np.var(y.values))
    for a, b, g in _QMLE_STARTS:
        s = a + b + 0.5 * g
        start = RhoGjr(1.0, max((1.0 - s) * s2, 1e-10), a, b, g)
        assert best >= gjr_quasi_loglik(start, y)


def test_qmle_rejects_short_series():
    with pytest.raises(InvalidArgumentError):
        gjr_qmle(Series(np.ones(30) + np.arange(30) * 0.01))


def test_qmle_constant_series_degenerate():
    with pytest.raises(DegenerateInputError):
        gjr_qmle(Series(np.full(100, 2.0)))


# ---------------------------------------------------------------------------
# simulated-side fit
# ---------------------------------------------------------------------------


def test_simulated_fit_level_near_one_for_weak_vol():
    # E[y^2] = (1 + g^2 s^2) exp(s_h^2 / 2) = 1.0247 at these settings
    y = simulate_stationary_sv(1.0, 0.2, -0.3, 0.2, 20000, NoiseStream(64))
    fit = simulated_gjr_fit(y)
    assert fit.tau == pytest.approx(1.0, abs=0.15)


def test_simulated_fit_scale_separation():
    y = simulate_stationary_sv(1.0, 0.2, -0.3, 0.2, 20000, NoiseStream(64))
    a = simulated_gjr_fit(y)
    b = simulated_gjr_fit(Series(2.0 * y.values))
    assert b.tau / a.tau == pytest.approx(4.0, rel=0.02)
    assert np.allclose(
        [b.alpha, b.beta, b.gamma], [a.alpha, a.beta, a.gamma], atol=0.02
    )


def test_simulated_fit_white_noise_persistence():
    y = Series(NoiseStream(65).generator().standard_normal(20000))
    fit = simulated_gjr_fit(y)
    assert 0.0 <= fit.persistence <= 0.15


# ---------------------------------------------------------------------------
# two-pass multiplicative fit
# ---------------------------------------------------------------------------


def _tau_path_data(seed, T):
    """Restricted multiplicative GJR with tau(u) = 0.5 + u (unit integral)."""
    core = simulate_gjr_garch(TRUTH, T, NoiseStream(seed)).values
    u = np.arange(1, T + 1) / T
    return Series(np.sqrt(0.5 + u) * core)


def test_multiplicative_fit_self_consistency():
    T = 20000
    y = _tau_path_data(66, T)
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(T))
    grid = np.linspace(0.05, 0.95, 19)
    tau_hat, params = multiplicative_gjr_fit(y, kernel, grid)
    mid = float(tau_hat.interpolate(0.5))
    assert mid == pytest.approx(1.0, abs=0.1)
    assert params.alpha == pytest.approx(0.6, abs=0.07)
    assert params.beta == pytest.approx(0.1, abs=0.07)
    assert params.gamma == pytest.approx(0.2, abs=0.07)


def test_multiplicative_fit_unit_unconditional_variance():
    T = 20000
    y = Series(simulate_gjr_garch(TRUTH, T, NoiseStream(67)).values)
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(T))
    _, params = multiplicative_gjr_fit(y, kernel, np.linspace(0.05, 0.95, 19))
    assert params.unconditional_variance == pytest.approx(1.0, abs=0.1)


def test_multiplicative_fit_rescaling():
    T = 8000
    y = _tau_path_data(68, T)
    kernel = KernelSpec("gaussian", rule_of_thumb_bandwidth(T))
    grid = np.linspace(0.05, 0.95, 19)
    tau_a, pa = multiplicative_gjr_fit(y, kernel, grid)
    tau_b, pb = multiplicative_gjr_fit(Series(3.0 * y.values), kernel, grid)
    assert np.allclose(tau_b.values, 9.0 * tau_a.values, rtol=1e-6)
    assert np.allclose(
        [pb.alpha, pb.beta, pb.gamma], [pa.alpha, pa.beta, pa.gamma], atol=1e-4
    )


def test_multiplicative_fit_rejects_grid_outside_trim():
    y = _tau_path_data(69, 1000)
    with pytest.raises(InvalidArgumentError):
        multiplicative_gjr_fit(y, GAUSS, np.array([0.01, 0.5]))
