import math

import numpy as np
import pytest

from lsii import InvalidArgumentError, KernelSpec, kernel_eval, local_weights, rule_of_thumb_bandwidth


def test_gaussian_at_zero():
    spec = KernelSpec("gaussian", 0.1)
    assert kernel_eval(spec, 0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-12)


def test_gaussian_at_one():
    # independent evaluation of exp(-1/2)/sqrt(2*pi)
    expected = math.exp(-0.5) / math.sqrt(2.0 * math.pi)
    assert kernel_eval(KernelSpec("gaussian", 1.0), 1.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.24197072451914337, abs=1e-12)


def test_epanechnikov_outside_support():
    spec = KernelSpec("epanechnikov", 0.5)
    assert kernel_eval(spec, 2.0) == 0.0
    assert kernel_eval(spec, -1.0001) == 0.0
    assert kernel_eval(spec, 0.0) == pytest.approx(0.75)


@pytest.mark.parametrize("family", ["gaussian", "epanechnikov"])
def test_kernel_symmetry(family):
    spec = KernelSpec(family, 1.0)
    xs = np.linspace(-3.0, 3.0, 241)
    diffs = np.abs(kernel_eval(spec, xs) - kernel_eval(spec, -xs))
    assert np.max(diffs) < 1e-15


@pytest.mark.parametrize("family", ["gaussian", "epanechnikov"])
def test_kernel_nonnegative_bounded(family):
    spec = KernelSpec(family, 1.0)
    vals = kernel_eval(spec, np.linspace(-5, 5, 1001))
    assert np.all(vals >= 0.0)
    assert np.max(vals) <= 0.75 + 1e-12


def test_rule_of_thumb_values():
    assert rule_of_thumb_bandwidth(1) == pytest.approx(1.06, abs=1e-15)
    # direct evaluations of 1.06 * T**(-1/5)
    assert rule_of_thumb_bandwidth(1000) == pytest.approx(1.06 / 10**0.6, rel=1e-12)
    assert rule_of_thumb_bandwidth(1000) == pytest.approx(0.26625996174, abs=1e-9)
    assert rule_of_thumb_bandwidth(200) == pytest.approx(0.36736676687, abs=1e-9)


def test_rule_of_thumb_rejects_zero():
    with pytest.raises(InvalidArgumentError):
        rule_of_thumb_bandwidth(0)


def test_bad_kernel_spec():
    with pytest.raises(InvalidArgumentError):
        KernelSpec("triangular", 0.1)
    with pytest.raises(InvalidArgumentError):
        KernelSpec("gaussian", 0.0)


def test_raw_weights_riemann_sum_gaussian():
    # the raw sum equals the kernel mass inside the observation window:
    # 1 - 2*Phi(-0.5/h) for the gaussian at u = 0.5, up to O(1/(Th)^2)
    T = 10000
    h = rule_of_thumb_bandwidth(T)
    w = local_weights(KernelSpec("gaussian", h), 0.5, T, "raw").weights
    tail = math.erfc(0.5 / h / math.sqrt(2.0))  # 2*Phi(-0.5/h)
    assert w.sum() == pytest.approx(1.0 - tail, abs=1e-6)
    assert abs(w.sum() - 1.0) < 4e-3


def test_raw_weights_riemann_sum_epanechnikov():
    T = 10000
    h = rule_of_thumb_bandwidth(T)
    w = local_weights(KernelSpec("epanechnikov", h), 0.5, T, "raw").weights
    assert abs(w.sum() - 1.0) < 1e-3


def test_epanechnikov_compact_support_weights():
    w = local_weights(KernelSpec("epanechnikov", 0.1), 0.5, 100, "raw").weights
    t = np.arange(1, 101) / 100.0
    assert np.all(w[np.abs(0.5 - t) > 0.1] == 0.0)


def test_nadaraya_watson_sums_to_one():
    for family in ("gaussian", "epanechnikov"):
        w = local_weights(KernelSpec(family, 0.2), 0.3, 500, "nadaraya_watson").weights
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.all(w >= 0.0)


def test_translation_consistency():
    # weights at (u + 1/T) are the weights at u shifted by one index
    T = 400
    spec = KernelSpec("gaussian", 0.15)
    w1 = local_weights(spec, 0.5, T, "raw").weights
    w2 = local_weights(spec, 0.5 + 1.0 / T, T, "raw").weights
    assert np.max(np.abs(w2[1:] - w1[:-1])) < 1e-12


def test_local_weights_rejects_bad_u():
    with pytest.raises(InvalidArgumentError):
        local_weights(KernelSpec("gaussian", 0.1), 0.0, 10)
    with pytest.raises(InvalidArgumentError):
        local_weights(KernelSpec("gaussian", 0.1), 1.0, 10)
