"""Kernel functions, bandwidth rules, and local weight vectors.

Every local estimator in the package weights observations through this
module, so the conventions are fixed here once: rescaled time lives on
(0, 1), the weight attached to observation ``t`` of a length-``T`` series
is ``K((u - t/T)/h)``, and raw weights carry the ``1/(Th)`` factor so
that for interior ``u`` they behave like a Riemann sum of a density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

KERNEL_FAMILIES = ("gaussian", "epanechnikov")

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth, in rescaled-time units.

    Both families are symmetric, non-negative, bounded and integrate
    to one; ``epanechnikov`` is compactly supported on [-1, 1].
    """

    family: str = "gaussian"
    bandwidth: float = 0.1

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InvalidArgumentError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )
        if not (self.bandwidth > 0.0) or not math.isfinite(self.bandwidth):
            raise InvalidArgumentError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class WeightVector:
    """Local weights centered at ``center`` for a length-T series.

    ``normalization`` is either ``"raw"`` (the ``1/(Th)`` scaling, summing
    to ~1 for interior centers) or ``"nadaraya_watson"`` (exact sum-to-one).
    """

    weights: np.ndarray
    center: float
    normalization: str


def kernel_eval(spec: KernelSpec, x):
    """Evaluate the kernel at ``x`` (scalar or array).

    gaussian: standard normal density; epanechnikov: ``0.75 (1 - x^2)``
    on ``|x| <= 1`` and zero outside.
    """
    x = np.asarray(x, dtype=float)
    if spec.family == "gaussian":
        out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    else:
        out = np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def rule_of_thumb_bandwidth(T: int) -> float:
    """Rule-of-thumb bandwidth ``1.06 * T**(-1/5)``."""
    if T < 1:
        raise InvalidArgumentError(f"T must be a positive integer, got {T}")
    return 1.06 * float(T) ** (-0.2)


def local_weights(
    spec: KernelSpec, u: float, T: int, normalization: str = "raw"
) -> WeightVector:
    """Weight vector ``w_t = K((u - t/T)/h) / (Th)`` for ``t = 1..T``.

    ``nadaraya_watson`` divides by the sum instead, so the weights add
    to one exactly.
    """
    if not 0.0 < u < 1.0:
        raise InvalidArgumentError(f"u must lie in (0, 1), got {u}")
    if T < 1:
        raise InvalidArgumentError(f"T must be a positive integer, got {T}")
    if normalization not in ("raw", "nadaraya_watson"):
        raise InvalidArgumentError(f"unknown normalization {normalization!r}")
    h = spec.bandwidth
    t = np.arange(1, T + 1, dtype=float)
    k = kernel_eval(spec, (u - t / T) / h)
    if normalization == "raw":
        w = k / (T * h)
    else:
        total = k.sum()
        if total <= 0.0:
            raise InvalidArgumentError(
                f"all kernel weights vanish at u={u} with bandwidth {h}"
            )
        w = k / total
    return WeightVector(weights=w, center=u, normalization=normalization)
