import math

import numpy as np
import pytest

from lsii import (
    InvalidArgumentError,
    LsMaParams,
    LsSvParams,
    NoiseStream,
    OutOfBoundsError,
    RhoGjr,
    Series,
    approximation_gap,
    simulate_gjr_garch,
    simulate_ls_ma1,
    simulate_ls_sv,
    simulate_stationary_ma1,
    simulate_stationary_sv,
    sv_moment_oracle,
)
from lsii.processes import draw_sv_shocks, sv_transform_shocks


def constant_path(c):
    return lambda u: np.full_like(np.asarray(u, dtype=float), c)


def quadratic_path(u):
    return 0.5 * np.asarray(u, dtype=float) ** 2


# ---------------------------------------------------------------------------
# noise stream contract
# ---------------------------------------------------------------------------


def test_stream_determinism():
    a = NoiseStream(123, 4, 5).generator().standard_normal(64)
    b = NoiseStream(123, 4, 5).generator().standard_normal(64)
    assert np.array_equal(a, b)


def test_stream_independence_across_ids():
    base = NoiseStream(123, 4, 5).generator().standard_normal(4096)
    for other in (NoiseStream(123, 4, 6), NoiseStream(123, 5, 5), NoiseStream(124, 4, 5)):
        draw = other.generator().standard_normal(4096)
        assert not np.array_equal(draw, base)
        assert abs(np.corrcoef(base, draw)[0, 1]) < 0.08


# ---------------------------------------------------------------------------
# MA(1)
# ---------------------------------------------------------------------------


def test_ma1_zero_coefficient_is_white_noise():
    noise = NoiseStream(7)
    y = simulate_ls_ma1(LsMaParams(constant_path(0.0)), 500, noise).values
    eps = NoiseStream(7).generator().standard_normal(501)
    assert np.array_equal(y, eps[1:])


def test_ma1_lag1_autocorrelation_matches_binding():
    # closed form theta/(1+theta^2) = 0.4, checked with an independent
    # autocorrelation routine
    y = simulate_stationary_ma1(0.5, 100000, NoiseStream(21)).values
    acf1 = np.corrcoef(y[:-1], y[1:])[0, 1]
    assert acf1 == pytest.approx(0.4, abs=0.01)


def test_ma1_negative_coefficient_flips_sign():
    y = simulate_stationary_ma1(-0.5, 100000, NoiseStream(22)).values
    acf1 = np.corrcoef(y[:-1], y[1:])[0, 1]
    assert acf1 == pytest.approx(-0.4, abs=0.01)


def test_ls_ma1_variance_integrates_theta_path():
    # Var(Y_t) = 1 + theta0(t/T)^2 pointwise, between 1 and 1.25 here
    y = simulate_ls_ma1(LsMaParams(quadratic_path), 100000, NoiseStream(3)).values
    assert 1.0 <= y.var() <= 1.5


def test_crn_coupling_constant_path():
    stream = NoiseStream(99, 1, 2)
    a = simulate_ls_ma1(LsMaParams(constant_path(0.5)), 300, stream).values
    b = simulate_stationary_ma1(0.5, 300, NoiseStream(99, 1, 2)).values
    assert np.array_equal(a, b)


def test_stationary_ma1_out_of_bounds():
    with pytest.raises(OutOfBoundsError):
        simulate_stationary_ma1(0.97, 100, NoiseStream(0))


def test_ls_ma1_params_validation():
    with pytest.raises(InvalidArgumentError):
        LsMaParams(constant_path(0.99))


def test_grid_theta_path_interpolation():
    params = LsMaParams((np.array([0.0, 1.0]), np.array([0.2, 0.4])))
    assert params.theta_at(0.5) == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# stochastic volatility
# ---------------------------------------------------------------------------


def test_sv_degenerate_volatility_returns_shocks():
    params = LsSvParams(constant_path(1.0), mu=0.0, phi=0.0, sigma=0.0, gamma_nu=0.0)
    y = simulate_ls_sv(params, 400, NoiseStream(11), burnin=100).values
    shocks = draw_sv_shocks(400, 100, NoiseStream(11))
    assert np.array_equal(y, shocks.nu1[100:])


def test_sv_variance_no_leverage():
    # lognormal moment E exp(h) = exp(Var(h)/2)
    params = LsSvParams(constant_path(1.0), mu=0.0, phi=0.2, sigma=1.0, gamma_nu=0.0)
    y = simulate_ls_sv(params, 200000, NoiseStream(5), burnin=500).values
    target = math.exp(1.0 / (2.0 * (1.0 - 0.04)))
    assert y.var() == pytest.approx(target, rel=0.02)


def test_sv_shock_correlation():
    shocks = draw_sv_shocks(100000, 0, NoiseStream(1))
    nu2 = sv_transform_shocks(1.0, -0.5, shocks)
    assert np.corrcoef(shocks.nu1, nu2)[0, 1] == pytest.approx(-0.5, abs=0.01)


def test_stationary_sv_second_moment_matches_oracle():
    # with leverage the raw second moment matches the closed-form oracle
    y = simulate_stationary_sv(1.0, 0.2, -0.5, 1.0, 200000, NoiseStream(8)).values
    oracle = sv_moment_oracle(0.2, 1.0, -0.5, 0.0)
    assert np.mean(y * y) == pytest.approx(oracle, rel=0.02)


def test_stationary_sv_scale():
    a = simulate_stationary_sv(1.0, 0.2, 0.0, 1e-8, 5000, NoiseStream(4)).values
    b = simulate_stationary_sv(4.0, 0.2, 0.0, 1e-8, 5000, NoiseStream(4)).values
    assert np.allclose(b, 2.0 * a)
    assert a.var() == pytest.approx(1.0, rel=0.05)
    assert b.var() == pytest.approx(4.0, rel=0.05)


def test_ls_sv_scale_equivariance_exact():
    pa = LsSvParams(constant_path(1.0), 0.0, 0.2, 1.0, -0.5)
    pb = LsSvParams(constant_path(2.0), 0.0, 0.2, 1.0, -0.5)
    a = simulate_ls_sv(pa, 500, NoiseStream(9, 1, 1)).values
    b = simulate_ls_sv(pb, 500, NoiseStream(9, 1, 1)).values
    assert np.array_equal(b, math.sqrt(2.0) * a)


def test_sv_params_validation():
    with pytest.raises(InvalidArgumentError):
        LsSvParams(constant_path(-1.0))
    with pytest.raises(InvalidArgumentError):
        LsSvParams(constant_path(1.0), phi=0.99)
    with pytest.raises(InvalidArgumentError):
        simulate_stationary_sv(0.0, 0.2, 0.0, 1.0, 100, NoiseStream(0))


# ---------------------------------------------------------------------------
# GJR-GARCH fixture generator
# ---------------------------------------------------------------------------


def test_gjr_iid_case():
    rho = RhoGjr(tau=1.0, omega=1.0, alpha=0.0, beta=0.0, gamma=0.0)
    y = simulate_gjr_garch(rho, 2000, NoiseStream(13), burnin=0).values
    z = NoiseStream(13).generator().standard_normal(2000)
    assert np.array_equal(y, z)


def test_gjr_restricted_unit_variance():
    rho = RhoGjr(tau=1.0, omega=0.2, alpha=0.6, beta=0.1, gamma=0.2)
    y = simulate_gjr_garch(rho, 100000, NoiseStream(17)).values
    assert y.var() == pytest.approx(1.0, abs=0.05)


def test_gjr_tau_scaling():
    rho1 = RhoGjr(tau=1.0, omega=0.2, alpha=0.6, beta=0.1, gamma=0.2)
    rho9 = RhoGjr(tau=9.0, omega=0.2, alpha=0.6, beta=0.1, gamma=0.2)
    a = simulate_gjr_garch(rho1, 100000, NoiseStream(17)).values
    b = simulate_gjr_garch(rho9, 100000, NoiseStream(17)).values
    assert np.allclose(b, 3.0 * a)
    assert b.var() == pytest.approx(9.0, abs=0.5)


def test_gjr_rejects_nonstationary():
    with pytest.raises(InvalidArgumentError):
        simulate_gjr_garch(
            type("R", (), {"tau": 1.0, "omega": 0.1, "alpha": 0.9, "beta": 0.2, "gamma": 0.0})(),
            100,
            NoiseStream(0),
        )


# ---------------------------------------------------------------------------
# approximation gap
# ---------------------------------------------------------------------------


def test_gap_zero_for_constant_path():
    params = LsMaParams(constant_path(0.3))
    assert approximation_gap(params, 0.5, 2000, NoiseStream(31)) == 0.0


def test_gap_shrinks_with_T():
    params = LsMaParams(quadratic_path)
    wins = 0
    for s in range(100):
        g1 = approximation_gap(params, 0.5, 1000, NoiseStream(s))
        g2 = approximation_gap(params, 0.5, 4000, NoiseStream(s))
        wins += g2 < g1
    assert wins >= 90


def test_gap_nonnegative_sv():
    params = LsSvParams(lambda u: 0.5 + 0.5 * np.asarray(u, float), 0.0, 0.2, 1.0, -0.5)
    gap = approximation_gap(params, 0.5, 1000, NoiseStream(2))
    assert gap >= 0.0


def test_series_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        Series(np.array([1.0, np.nan]))
