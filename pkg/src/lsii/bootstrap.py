"""Local block bootstrap (LBB) and pointwise confidence bands.

The LBB replaces each length-``b`` block of the series by the block a
random shift ``k`` away, with ``k`` uniform on ``[-TB, TB]``.  Because
every block moves at most ``TB`` positions, the resample preserves the
slowly varying structure of a locally stationary series while breaking
short-range dependence, which is what pointwise uncertainty bands for
path estimators need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, StudyFailure
from .processes import Series


@dataclass(frozen=True)
class LbbConfig:
    """Block size ``b``, window fraction ``B``, replications and level."""

    block_size: int = 10
    window_fraction: float = 0.11
    replications: int = 999
    seed: int = 0
    level: float = 0.90

    def __post_init__(self):
        if self.block_size < 1:
            raise InvalidArgumentError(f"block_size must be >= 1, got {self.block_size}")
        if not 0.0 < self.window_fraction <= 1.0:
            raise InvalidArgumentError(
                f"window_fraction must lie in (0, 1], got {self.window_fraction}"
            )
        if self.replications < 1:
            raise InvalidArgumentError("replications must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise InvalidArgumentError(f"level must lie in (0, 1), got {self.level}")


@dataclass(frozen=True)
class BandTable:
    """Pointwise bootstrap bands around a path estimate."""

    grid: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    n_dropped: int


@dataclass(frozen=True)
class LbbWindow:
    """Derived resampling quantities: shift window TB, block count index
    q (blocks run i = 0..q) and the uniform weight w = 1/(2 TB + 1)."""

    tb: int
    q: int
    weight: float


def lbb_window(T: int, config: LbbConfig) -> LbbWindow:
    """Shift window and block-count parameters for a length-T series.

    ``T * B`` is rounded to the nearest integer and floored at one, since
    real sample sizes rarely make it integral.
    """
    if T < 1:
        raise InvalidArgumentError("T must be positive")
    tb = max(1, int(round(T * config.window_fraction)))
    q = math.ceil(tb) - 1
    return LbbWindow(tb=tb, q=q, weight=1.0 / (2 * tb + 1))


def lbb_resample(
    series: Series, config: LbbConfig, rng: np.random.Generator, return_indices: bool = False
):
    """One LBB resample: ``y*_{j+ib} = y_{j+ib+k_i}``, j = 1..b, i = 0..q.

    Shifts whose target indices would leave [1, T] are drawn from the
    truncated uniform on the valid sub-window, which preserves locality
    without padding or wrap-around.  When ``q+1`` blocks do not reach T
    (block size below 1/B), extra blocks are appended with the same shift
    law so the output always has length T.  With ``return_indices`` the
    provenance map ``s(t)`` (0-based) is returned alongside.
    """
    y = series.values
    T = y.size
    if config.block_size > T:
        raise InvalidArgumentError(
            f"block_size {config.block_size} exceeds series length {T}"
        )
    b = config.block_size
    tb = lbb_window(T, config).tb
    n_blocks = max(tb, math.ceil(T / b))
    src = np.empty(T, dtype=np.int64)
    for i in range(n_blocks):
        lo_pos = i * b  # 0-based first output index of block i
        if lo_pos >= T:
            break
        hi_pos = min(lo_pos + b - 1, T - 1)
        k_lo = max(-tb, -lo_pos)
        k_hi = min(tb, (T - 1) - hi_pos)
        k = int(rng.integers(k_lo, k_hi + 1))
        src[lo_pos : hi_pos + 1] = np.arange(lo_pos, hi_pos + 1) + k
    out = Series(y[src])
    if return_indices:
        return out, src
    return out


def lbb_confidence_bands(
    series: Series, estimator, config: LbbConfig, grid=None
) -> BandTable:
    """Pointwise empirical-quantile bands for a path estimator.

    ``estimator`` maps a :class:`Series` to a value per grid point; it is
    run on the original series and on ``R`` resamples.  Replications on
    which it raises are dropped and counted; more than 10% drops aborts.
    ``grid`` labels the output rows (defaults to 0..m-1).
    """
    point = np.atleast_1d(np.asarray(estimator(series), dtype=float))
    draws = []
    n_dropped = 0
    max_dropped = config.replications // 10
    for r in range(config.replications):
        rng = np.random.default_rng(np.random.SeedSequence((config.seed & (2**64 - 1), r)))
        resampled = lbb_resample(series, config, rng)
        try:
            values = np.atleast_1d(np.asarray(estimator(resampled), dtype=float))
        except Exception:
            n_dropped += 1
            if n_dropped > max_dropped:
                raise StudyFailure(
                    f"{n_dropped} of {r + 1} bootstrap replications failed (>10%)",
                    partial=np.array(draws),
                )
            continue
        if values.shape != point.shape:
            raise InvalidArgumentError("estimator returned inconsistent shapes")
        draws.append(values)
    draws = np.array(draws)
    alpha = (1.0 - config.level) / 2.0
    lower = np.quantile(draws, alpha, axis=0)
    upper = np.quantile(draws, 1.0 - alpha, axis=0)
    if grid is None:
        grid = np.arange(point.size, dtype=float)
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size != point.size:
            raise InvalidArgumentError("grid length does not match estimator output")
    return BandTable(
        grid=grid,
        estimate=point,
        lower=lower,
        upper=upper,
        level=config.level,
        n_dropped=n_dropped,
    )
