"""Exchangeable bootstrap of the expected-utility difference process.

Each replicate draws one exchangeable nonnegative weight vector per sample
and forms the centered, studentizable process row

    sqrt(n_a) * [ (P~_a - P~_b) - (Wbar_a P^_a - Wbar_b P^_b) ] f / c ,

where P~ are the weighted empirical measures and Wbar the weight means.
Supported weight kinds are multinomial counts (the classic empirical
bootstrap) and iid standard exponentials (the Bayesian bootstrap); both have
unit asymptotic weight variance, so c = 1.

Scale estimates come from the scaled interquartile range of the replicate
rows, and critical values are ceil(q*R)-th order statistics of per-replicate
extrema of the studentized rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .empirical import SamplePair
from .errors import EmptySubsetError, ShapeMismatchError
from .utility import UtilityGrid, utility_matrix

# Scaled-IQR divisor: z_0.75 - z_0.25 of the standard normal.
Z_IQR = float(stats.norm.ppf(0.75) - stats.norm.ppf(0.25))

WEIGHT_KINDS = ("multinomial", "bayesian")
_KIND_ALIASES = {
    "empirical-multinomial": "multinomial",
    "bayesian-exponential": "bayesian",
}

# SeedSequence folds trailing zero entropy words into the same stream, so
# every key component after the seed is kept strictly positive.
_TAG_WEIGHTS_A = 11
_TAG_WEIGHTS_B = 12


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator keyed by (seed, *path); order-independent."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, *map(int, path)]))
    )


@dataclass(frozen=True)
class WeightScheme:
    """Exchangeable weight family with its normalization constant c."""

    kind: str
    c: float = 1.0

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        if kind not in WEIGHT_KINDS:
            raise ValueError(
                f"unknown weight scheme {self.kind!r}; choose from {WEIGHT_KINDS}"
            )
        object.__setattr__(self, "kind", kind)
        if not np.isfinite(self.c) or self.c <= 0:
            raise ValueError(f"c must be a positive real, got {self.c}")


def _weight_matrix(scheme: WeightScheme, n_rows: int, n: int, rng) -> np.ndarray:
    if scheme.kind == "multinomial":
        # Counts of n uniform cell assignments == Multinomial(n, 1/n, ..., 1/n).
        idx = rng.integers(0, n, size=(n_rows, n))
        offsets = n * np.arange(n_rows, dtype=np.int64)[:, None]
        counts = np.bincount((idx + offsets).ravel(), minlength=n_rows * n)
        return counts.reshape(n_rows, n).astype(np.float64)
    return rng.standard_exponential((n_rows, n))


def draw_weights(scheme: WeightScheme, n: int, rng) -> np.ndarray:
    """One replicate's weight vector for a sample of size n.

    Multinomial weights are nonnegative integers summing to n; Bayesian
    weights are strictly positive reals.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _weight_matrix(scheme, 1, n, rng)[0]


@dataclass(frozen=True)
class BootstrapDraws:
    """Replicate-by-grid-point matrix of centered difference-process values."""

    matrix: np.ndarray
    seed: int
    scheme: WeightScheme

    @property
    def n_replicates(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_points(self) -> int:
        return self.matrix.shape[1]


def centered_difference_rows(u_a, u_b, w_a, w_b, c: float = 1.0) -> np.ndarray:
    """Centered process rows from explicit weight matrices.

    ``u_a`` is the (n_a, G) utility matrix and ``w_a`` an (R, n_a) weight
    matrix (likewise for b).  Exposed so fixed weight matrices can drive the
    computation directly: with all weights equal to one, every row is
    exactly zero.
    """
    u_a = np.asarray(u_a, dtype=float)
    u_b = np.asarray(u_b, dtype=float)
    w_a = np.atleast_2d(np.asarray(w_a, dtype=float))
    w_b = np.atleast_2d(np.asarray(w_b, dtype=float))
    if w_a.shape[1] != u_a.shape[0] or w_b.shape[1] != u_b.shape[0]:
        raise ShapeMismatchError("weight matrices do not match sample sizes")
    if w_a.shape[0] != w_b.shape[0]:
        raise ShapeMismatchError("weight matrices must have the same replicate count")
    n_a = u_a.shape[0]
    n_b = u_b.shape[0]
    mean_a = u_a.mean(axis=0)
    mean_b = u_b.mean(axis=0)
    p_a = w_a @ u_a / n_a
    p_b = w_b @ u_b / n_b
    wbar_a = w_a.mean(axis=1, keepdims=True)
    wbar_b = w_b.mean(axis=1, keepdims=True)
    centered = (p_a - p_b) - (wbar_a * mean_a[None, :] - wbar_b * mean_b[None, :])
    return np.sqrt(n_a) * centered / c


def bootstrap_difference_process(
    pair: SamplePair,
    grid: UtilityGrid,
    scheme: WeightScheme,
    n_replicates: int,
    seed: int,
) -> BootstrapDraws:
    """Draw the full matrix of centered bootstrap process values.

    The weight matrices for the two samples come from independent streams
    keyed by (seed, sample tag) and are materialized before any row is
    formed, so the result is a pure function of (seed, n_replicates, pair,
    grid, scheme) no matter how the rows are consumed afterwards.
    """
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")
    u_a = utility_matrix(pair.sample_a, grid)
    u_b = utility_matrix(pair.sample_b, grid)
    w_a = _weight_matrix(scheme, n_replicates, pair.n_a, substream(seed, _TAG_WEIGHTS_A))
    w_b = _weight_matrix(scheme, n_replicates, pair.n_b, substream(seed, _TAG_WEIGHTS_B))
    rows = centered_difference_rows(u_a, u_b, w_a, w_b, scheme.c)
    return BootstrapDraws(matrix=rows, seed=int(seed), scheme=scheme)


def order_statistic_quantile(values, q: float) -> float:
    """Sample q-quantile as the ceil(q*R)-th order statistic (1-based).

    The index is clamped to [1, R].  Conservative, and exact for the usual
    R = 999 bootstrap with conventional alpha levels.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty 1-D array")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    k = min(max(int(np.ceil(q * v.size)), 1), v.size)
    return float(np.partition(v, k - 1)[k - 1])


@dataclass(frozen=True)
class ScaleEstimates:
    """Raw scaled-IQR scales; zero-IQR points are flagged as degenerate."""

    sigma: np.ndarray
    degenerate: np.ndarray

    @property
    def any_degenerate(self) -> bool:
        return bool(self.degenerate.any())


def scale_estimates(draws: BootstrapDraws) -> ScaleEstimates:
    """Per-point scale: (q75 - q25) of the replicate rows over z75 - z25.

    Quartiles use the same ceil(q*R) order-statistic convention as the
    critical values.  Needs at least 4 replicates.  Zero IQRs are returned
    as zero sigma with the degenerate flag set; the difference field floors
    them before studentizing.
    """
    m = draws.matrix
    n_rep = m.shape[0]
    if n_rep < 4:
        raise ValueError(f"need at least 4 replicates for quartiles, got {n_rep}")
    srt = np.sort(m, axis=0)
    k25 = min(max(int(np.ceil(0.25 * n_rep)), 1), n_rep) - 1
    k75 = min(max(int(np.ceil(0.75 * n_rep)), 1), n_rep) - 1
    iqr = srt[k75] - srt[k25]
    return ScaleEstimates(sigma=iqr / Z_IQR, degenerate=iqr == 0)


@dataclass(frozen=True)
class CriticalValues:
    """Order-statistic quantiles of per-replicate extrema of T = rows/sigma.

    ``sup_q``, ``abs_q``, and ``mirror_sup_q`` are (1-alpha)-quantiles of the
    per-replicate sup, abs-sup, and sup-of-negated-process; ``inf_q`` is the
    alpha-quantile of the per-replicate inf.  The half-level entries serve
    the equal-tailed band and may be absent on hand-built instances.
    """

    alpha: float
    subset_mask: np.ndarray
    sup_q: float
    inf_q: float
    abs_q: float
    mirror_sup_q: float
    sup_q_half: float | None = None
    inf_q_half: float | None = None

    @property
    def full_grid(self) -> bool:
        return bool(self.subset_mask.all())


def critical_values(
    draws: BootstrapDraws,
    sigma,
    alpha: float,
    subset_mask=None,
) -> CriticalValues:
    """Bootstrap critical values over a subset of grid points.

    ``sigma`` must be the strictly positive (floored) per-point scales; the
    same draws used for the scales are reused here.  With no subset mask the
    whole grid forms the family.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (draws.n_points,):
        raise ShapeMismatchError(
            f"sigma has shape {sigma.shape}, expected ({draws.n_points},)"
        )
    if np.any(~np.isfinite(sigma)) or np.any(sigma <= 0):
        raise ValueError("sigma must be finite and strictly positive")
    if subset_mask is None:
        mask = np.ones(draws.n_points, dtype=bool)
    else:
        mask = np.asarray(subset_mask, dtype=bool)
        if mask.shape != (draws.n_points,):
            raise ShapeMismatchError(
                f"subset mask has shape {mask.shape}, expected ({draws.n_points},)"
            )
        mask = mask.copy()
    if not mask.any():
        raise EmptySubsetError("critical values need a nonempty subset")

    t = draws.matrix[:, mask] / sigma[mask]
    sup = t.max(axis=1)
    inf = t.min(axis=1)
    abs_sup = np.abs(t).max(axis=1)
    osq = order_statistic_quantile
    return CriticalValues(
        alpha=float(alpha),
        subset_mask=mask,
        sup_q=osq(sup, 1.0 - alpha),
        inf_q=osq(inf, alpha),
        abs_q=osq(abs_sup, 1.0 - alpha),
        mirror_sup_q=osq(-inf, 1.0 - alpha),
        sup_q_half=osq(sup, 1.0 - alpha / 2.0),
        inf_q_half=osq(inf, alpha / 2.0),
    )
