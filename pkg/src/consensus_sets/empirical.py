"""Sample expected utilities and the studentized difference field.

For each grid point f the field carries diff = mean_a u_f - mean_b u_f, a
positive scale estimate sigma_hat, and the zero-centered t statistic
t0 = sqrt(n_a) * diff / sigma_hat used by all downstream decisions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .utility import UtilityGrid, UtilityParams, eval_utility, utility_matrix

# Scale floor guards against zero bootstrap IQRs; it keeps t0 finite while
# leaving any realistic sigma untouched.
SIGMA_FLOOR_COEF = 1e-12


@dataclass(frozen=True)
class SamplePair:
    """Two independent outcome samples; the first drives the sqrt(n_a) scaling."""

    sample_a: np.ndarray
    sample_b: np.ndarray

    def __post_init__(self):
        for name in ("sample_a", "sample_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be 1-D")
            if arr.size < 2:
                raise ValueError(f"{name} needs at least 2 observations, got {arr.size}")
            if np.any(~np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)

    @property
    def n_a(self) -> int:
        return self.sample_a.size

    @property
    def n_b(self) -> int:
        return self.sample_b.size

    @property
    def size_ratio(self) -> float:
        """n_a / n_b, the lambda of the two-sample asymptotics."""
        return self.n_a / self.n_b

    def swapped(self) -> "SamplePair":
        return SamplePair(self.sample_b, self.sample_a)


def expected_utility_mean(sample, params: UtilityParams) -> float:
    """Arithmetic mean of the utility over the sample (pairwise summation)."""
    return float(np.mean(eval_utility(params, np.asarray(sample, dtype=float))))


@dataclass(frozen=True)
class EUDiffField:
    """Per-grid-point difference, scale, and zero-centered t statistic."""

    grid: UtilityGrid
    n_a: int
    n_b: int
    diff: np.ndarray
    sigma_hat: np.ndarray
    t0: np.ndarray


def sigma_floor(diff: np.ndarray, n_a: int) -> np.ndarray:
    """Lower bound applied to scale estimates before studentizing."""
    return SIGMA_FLOOR_COEF * (1.0 + np.abs(diff) * np.sqrt(n_a))


def eu_diff_field(pair: SamplePair, grid: UtilityGrid, sigma) -> EUDiffField:
    """Build the difference field from a sample pair and per-point scales.

    ``sigma`` are raw scale estimates (typically from the bootstrap IQR);
    they must be nonnegative and are floored before use so degenerate zeros
    cannot produce division by zero.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (grid.n_points,):
        raise ShapeMismatchError(
            f"sigma has shape {sigma.shape}, expected ({grid.n_points},)"
        )
    if np.any(~np.isfinite(sigma)) or np.any(sigma < 0):
        raise ValueError("sigma must be finite and nonnegative")
    mean_a = utility_matrix(pair.sample_a, grid).mean(axis=0)
    mean_b = utility_matrix(pair.sample_b, grid).mean(axis=0)
    diff = mean_a - mean_b
    sigma_hat = np.maximum(sigma, sigma_floor(diff, pair.n_a))
    t0 = np.sqrt(pair.n_a) * diff / sigma_hat
    return EUDiffField(
        grid=grid,
        n_a=pair.n_a,
        n_b=pair.n_b,
        diff=diff,
        sigma_hat=sigma_hat,
        t0=t0,
    )
