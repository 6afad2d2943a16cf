"""Compiled kernels for the GJR-GARCH quasi-likelihood.

The simulated side of the LS-SV matching refits the GJR model thousands
of times per objective evaluation chain, so the variance recursion, the
smooth reparameterization onto the stationarity region and the simplex
search all live here as nopython kernels.

Parameterization (naming follows the variance recursion
``s2_{t+1} = omega + alpha s2_t + (beta + gamma 1{x_t<0}) x_t^2``):

unconstrained ``z`` maps to the admissible region via

* ``s = smax * sigmoid(z_s)``      total persistence alpha + beta + gamma/2
* ``alpha = s * sigmoid(z_w1)``
* ``m = s - alpha``                 equals beta + gamma/2
* ``beta = 2 m * sigmoid(z_w2)``, ``gamma = 2 (m - beta)``

which enforces ``alpha, beta >= 0``, ``beta + gamma >= 0`` and
``alpha + beta + gamma/2 < smax`` for every ``z``.  ``omega`` is
``exp(z_omega)`` in the unrestricted fit and ``1 - s`` in the restricted
fit (unit unconditional variance).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# compact parameter box: persistence capped at 1 - 0.05.  Besides making
# the compactness assumption operational, the cap tames the implied
# unconditional variance omega / (1 - persistence), whose near-unit-root
# extrapolation is wildly heavy-tailed in short misspecified samples.
SMAX = 0.95


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def gjr_simulate_core(omega, alpha, beta, gamma, z):
    """Standardized GJR path driven by the normals ``z``."""
    n = z.shape[0]
    x = np.empty(n)
    s2 = omega / (1.0 - alpha - beta - 0.5 * gamma)
    for t in range(n):
        x[t] = np.sqrt(s2) * z[t]
        arch = beta + (gamma if x[t] < 0.0 else 0.0)
        s2 = omega + alpha * s2 + arch * x[t] * x[t]
    return x


@njit(cache=True)
def gjr_neg_loglik(omega, alpha, beta, gamma, y, s2_init):
    """0.5 * sum(log s2_t + y_t^2 / s2_t) under the GJR recursion."""
    n = y.shape[0]
    s2 = s2_init
    acc = 0.0
    for t in range(n):
        if s2 <= 0.0 or not np.isfinite(s2):
            return 1e100
        acc += np.log(s2) + y[t] * y[t] / s2
        arch = beta + (gamma if y[t] < 0.0 else 0.0)
        s2 = omega + alpha * s2 + arch * y[t] * y[t]
    return 0.5 * acc


@njit(cache=True)
def params_from_z(z, restricted):
    """Map unconstrained coordinates to (omega, alpha, beta, gamma)."""
    if restricted:
        s = SMAX * _sigmoid(z[0])
        w1 = _sigmoid(z[1])
        w2 = _sigmoid(z[2])
        omega = 1.0 - s
    else:
        omega = np.exp(z[0])
        s = SMAX * _sigmoid(z[1])
        w1 = _sigmoid(z[2])
        w2 = _sigmoid(z[3])
    alpha = s * w1
    m = s - alpha
    beta = 2.0 * m * w2
    gamma = 2.0 * (m - beta)
    return omega, alpha, beta, gamma


def z_from_params(omega, alpha, beta, gamma, restricted):
    """Inverse of :func:`params_from_z`, clipped away from the boundary."""

    def logit(p):
        p = min(max(p, 1e-8), 1.0 - 1e-8)
        return np.log(p / (1.0 - p))

    s = alpha + beta + 0.5 * gamma
    s = min(max(s, 1e-8), SMAX * (1.0 - 1e-8))
    w1 = alpha / s if s > 0.0 else 0.5
    m = s * (1.0 - min(max(w1, 1e-8), 1.0 - 1e-8))
    w2 = beta / (2.0 * m) if m > 0.0 else 0.5
    if restricted:
        return np.array([logit(s / SMAX), logit(w1), logit(w2)])
    return np.array(
        [np.log(max(omega, 1e-12)), logit(s / SMAX), logit(w1), logit(w2)]
    )


@njit(cache=True)
def _nll_at(z, restricted, y, s2_init):
    omega, alpha, beta, gamma = params_from_z(z, restricted)
    return gjr_neg_loglik(omega, alpha, beta, gamma, y, s2_init)


@njit(cache=True)
def nm_minimize_gjr(z0, restricted, y, s2_init, xatol, fatol, maxiter):
    """Nelder-Mead on the transformed GJR quasi-likelihood.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 0.5, 0.5).  Returns (z_best, f_best, converged flag).
    """
    n = z0.shape[0]
    m = n + 1
    simplex = np.empty((m, n))
    fvals = np.empty(m)
    for j in range(n):
        simplex[0, j] = z0[j]
    fvals[0] = _nll_at(z0, restricted, y, s2_init)
    for i in range(n):
        for j in range(n):
            simplex[i + 1, j] = z0[j]
        simplex[i + 1, i] = z0[i] + 0.25
        fvals[i + 1] = _nll_at(simplex[i + 1], restricted, y, s2_init)

    converged = False
    xr = np.empty(n)
    xe = np.empty(n)
    xc = np.empty(n)
    centroid = np.empty(n)
    f_mark = 1e300
    stall = 0
    for _ in range(maxiter):
        # sort vertices by objective value (m <= 5, insertion sort)
        for i in range(1, m):
            fkey = fvals[i]
            xkey = simplex[i].copy()
            k = i - 1
            while k >= 0 and fvals[k] > fkey:
                fvals[k + 1] = fvals[k]
                simplex[k + 1] = simplex[k]
                k -= 1
            fvals[k + 1] = fkey
            simplex[k + 1] = xkey

        xspread = 0.0
        for i in range(1, m):
            for j in range(n):
                d = abs(simplex[i, j] - simplex[0, j])
                if d > xspread:
                    xspread = d
        fspread = abs(fvals[m - 1] - fvals[0])
        # ridge and boundary optima sit at infinite transformed
        # coordinates, so a collapsed function spread or a long
        # stretch without likelihood improvement also counts
        if fvals[0] < f_mark - fatol:
            f_mark = fvals[0]
            stall = 0
        else:
            stall += 1
        if xspread <= xatol or fspread <= fatol or stall >= 150:
            converged = True
            break

        for j in range(n):
            c = 0.0
            for i in range(m - 1):
                c += simplex[i, j]
            centroid[j] = c / (m - 1)

        for j in range(n):
            xr[j] = centroid[j] + (centroid[j] - simplex[m - 1, j])
        fr = _nll_at(xr, restricted, y, s2_init)

        if fr < fvals[0]:
            for j in range(n):
                xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[m - 1, j])
            fe = _nll_at(xe, restricted, y, s2_init)
            if fe < fr:
                simplex[m - 1] = xe
                fvals[m - 1] = fe
            else:
                simplex[m - 1] = xr
                fvals[m - 1] = fr
        elif fr < fvals[m - 2]:
            simplex[m - 1] = xr
            fvals[m - 1] = fr
        else:
            if fr < fvals[m - 1]:
                # outside contraction
                for j in range(n):
                    xc[j] = centroid[j] + 0.5 * (centroid[j] - simplex[m - 1, j])
                fc = _nll_at(xc, restricted, y, s2_init)
                accept = fc <= fr
            else:
                # inside contraction
                for j in range(n):
                    xc[j] = centroid[j] - 0.5 * (centroid[j] - simplex[m - 1, j])
                fc = _nll_at(xc, restricted, y, s2_init)
                accept = fc < fvals[m - 1]
            if accept:
                simplex[m - 1] = xc
                fvals[m - 1] = fc
            else:
                for i in range(1, m):
                    for j in range(n):
                        simplex[i, j] = simplex[0, j] + 0.5 * (
                            simplex[i, j] - simplex[0, j]
                        )
                    fvals[i] = _nll_at(simplex[i], restricted, y, s2_init)

    best = 0
    for i in range(1, m):
        if fvals[i] < fvals[best]:
            best = i
    return simplex[best].copy(), fvals[best], converged
