"""Multiple testing, confidence sets, uniform bands, and dominance tests.

All procedures share one convention: the observed statistic is the
zero-centered t0 from the difference field, while critical values come from
the centered bootstrap process (which plays the role of the truth-centered
statistic).  Rejections use strict inequality, so ties never reject.

Directions: "a-over-b" asks where the first sample's population is better;
"b-over-a" mirrors every statistic and uses the sign-flipped process through
``mirror_sup_q``, so the two directions are exact complements of each other
on the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bootstrap import BootstrapDraws, CriticalValues, critical_values, order_statistic_quantile
from .empirical import EUDiffField
from .errors import MissingQuantileError, ShapeMismatchError

DIRECTIONS = ("a-over-b", "b-over-a")
BAND_VARIANTS = ("symmetric", "lower", "upper", "equal-tailed")
SET_MODES = ("mtp-one-sided", "band-joint")


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def _check_full_grid(field: EUDiffField, cv: CriticalValues):
    if cv.subset_mask.shape != (field.grid.n_points,):
        raise ShapeMismatchError(
            f"critical values cover {cv.subset_mask.size} points, "
            f"field has {field.grid.n_points}"
        )
    if not cv.full_grid:
        raise ShapeMismatchError("critical values must be computed over the full grid")


@dataclass(frozen=True)
class RejectionField:
    """Per-point rejection record of a multiple testing procedure.

    ``iteration`` is the stepdown round at which a point was rejected
    (0 = first pass, -1 = never), and ``critical_value`` the threshold
    active for that point's final decision.
    """

    rejected: np.ndarray
    iteration: np.ndarray
    critical_value: np.ndarray
    alpha: float
    direction: str
    n_iterations: int


def mtp_basic(
    field: EUDiffField,
    cv: CriticalValues,
    direction: str = "a-over-b",
) -> RejectionField:
    """Single-step sup-t procedure controlling the familywise error rate.

    Rejects a point when its signed t0 strictly exceeds the (1-alpha)
    bootstrap sup quantile over the full grid.
    """
    _check_direction(direction)
    _check_full_grid(field, cv)
    if direction == "a-over-b":
        t = field.t0
        threshold = cv.sup_q
    else:
        t = -field.t0
        threshold = cv.mirror_sup_q
    rejected = t > threshold
    return RejectionField(
        rejected=rejected,
        iteration=np.where(rejected, 0, -1),
        critical_value=np.full(field.grid.n_points, threshold),
        alpha=cv.alpha,
        direction=direction,
        n_iterations=1,
    )


def mtp_stepdown(
    field: EUDiffField,
    draws: BootstrapDraws,
    alpha: float,
    direction: str = "a-over-b",
) -> RejectionField:
    """Stepdown sup-t procedure: recompute the critical value over survivors.

    Reuses the same bootstrap draws in every round, so critical values are
    nonincreasing across rounds and the rejection set contains the basic
    procedure's.  Stops when a round rejects nothing new or everything is
    rejected; round counts are capped by the grid size.
    """
    _check_direction(direction)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    n_points = field.grid.n_points
    if draws.n_points != n_points:
        raise ShapeMismatchError(
            f"draws cover {draws.n_points} points, field has {n_points}"
        )
    sign = 1.0 if direction == "a-over-b" else -1.0
    t = sign * field.t0
    matrix = sign * draws.matrix
    sigma = field.sigma_hat

    rejected = np.zeros(n_points, dtype=bool)
    iteration = np.full(n_points, -1)
    point_cv = np.empty(n_points)
    rounds = 0
    for k in range(n_points):
        surviving = ~rejected
        sub = matrix[:, surviving] / sigma[surviving]
        cv_k = order_statistic_quantile(sub.max(axis=1), 1.0 - alpha)
        point_cv[surviving] = cv_k
        rounds = k + 1
        new = surviving & (t > cv_k)
        if not new.any():
            break
        rejected |= new
        iteration[new] = k
        if rejected.all():
            break
    return RejectionField(
        rejected=rejected,
        iteration=iteration,
        critical_value=point_cv,
        alpha=float(alpha),
        direction=direction,
        n_iterations=rounds,
    )


@dataclass(frozen=True)
class ConfidenceBand:
    """Uniform band [b1, b2] for the expected-utility difference."""

    b1: np.ndarray
    b2: np.ndarray
    variant: str
    alpha: float


def uniform_band(
    field: EUDiffField,
    cv: CriticalValues,
    variant: str = "symmetric",
) -> ConfidenceBand:
    """Uniform confidence band over the grid.

    Variants: "symmetric" uses the abs-sup quantile around the point
    estimate; "lower"/"upper" are one-sided with the other side at +-inf;
    "equal-tailed" pairs the sup quantile at 1-alpha/2 with the inf quantile
    at alpha/2 (conservative).
    """
    if variant not in BAND_VARIANTS:
        raise ValueError(f"variant must be one of {BAND_VARIANTS}, got {variant!r}")
    _check_full_grid(field, cv)
    n = field.grid.n_points
    scale = field.sigma_hat / np.sqrt(field.n_a)
    if variant == "symmetric":
        half = cv.abs_q * scale
        b1, b2 = field.diff - half, field.diff + half
    elif variant == "lower":
        b1 = field.diff - cv.sup_q * scale
        b2 = np.full(n, np.inf)
    elif variant == "upper":
        b1 = np.full(n, -np.inf)
        b2 = field.diff - cv.inf_q * scale
    else:
        if cv.sup_q_half is None or cv.inf_q_half is None:
            raise MissingQuantileError(
                "equal-tailed band needs sup and inf quantiles at alpha/2 levels"
            )
        b1 = field.diff - cv.sup_q_half * scale
        b2 = field.diff - cv.inf_q_half * scale
    return ConfidenceBand(b1=b1, b2=b2, variant=variant, alpha=cv.alpha)


@dataclass(frozen=True)
class ConsensusSets:
    """Inner and outer set masks over the grid at one confidence level."""

    inner: np.ndarray
    outer: np.ndarray
    alpha: float
    mode: str


def consensus_sets_from_band(band: ConfidenceBand) -> ConsensusSets:
    """Joint inner/outer sets from a symmetric band: {b1 > 0} and {b2 > 0}."""
    return ConsensusSets(
        inner=band.b1 > 0,
        outer=band.b2 > 0,
        alpha=band.alpha,
        mode="band-joint",
    )


def confidence_sets(
    field: EUDiffField,
    draws: BootstrapDraws,
    alpha: float,
    mode: str = "band-joint",
    direction: str = "a-over-b",
) -> ConsensusSets:
    """Inner and outer confidence sets for the consensus set.

    "mtp-one-sided" runs two one-sided procedures, each at level alpha:
    the inner set collects rejections of the <=-family, the outer set
    non-rejections of the >=-family.  "band-joint" thresholds one symmetric
    band at level alpha, which makes the pair jointly valid and nested.
    """
    if mode not in SET_MODES:
        raise ValueError(f"mode must be one of {SET_MODES}, got {mode!r}")
    _check_direction(direction)
    cv = critical_values(draws, field.sigma_hat, alpha)
    if mode == "band-joint":
        band = uniform_band(field, cv, "symmetric")
        if direction == "a-over-b":
            inner, outer = band.b1 > 0, band.b2 > 0
        else:
            inner, outer = band.b2 < 0, band.b1 < 0
        return ConsensusSets(inner=inner, outer=outer, alpha=cv.alpha, mode=mode)
    other = "b-over-a" if direction == "a-over-b" else "a-over-b"
    inner = mtp_basic(field, cv, direction).rejected
    outer = ~mtp_basic(field, cv, other).rejected
    return ConsensusSets(inner=inner, outer=outer, alpha=cv.alpha, mode=mode)


@dataclass(frozen=True)
class DominanceTest:
    """Test of the null that the b population is weakly better everywhere.

    Rejection means strong evidence that sample a's population has higher
    expected utility for at least one grid point.  ``margin`` is the
    statistic minus the critical value (no p-values are defined).
    """

    reject: bool
    sup_t0: float
    critical_value: float
    margin: float
    argmax_theta: float
    argmax_s: float


def dominance_test(field: EUDiffField, cv: CriticalValues) -> DominanceTest:
    """Reject dominance of b over a when sup t0 exceeds the sup quantile.

    Equivalent to the lower one-sided band being positive somewhere.
    """
    _check_full_grid(field, cv)
    k = int(np.argmax(field.t0))
    sup_t0 = float(field.t0[k])
    point = field.grid.point(k)
    return DominanceTest(
        reject=sup_t0 > cv.sup_q,
        sup_t0=sup_t0,
        critical_value=cv.sup_q,
        margin=sup_t0 - cv.sup_q,
        argmax_theta=point.theta,
        argmax_s=point.s,
    )


@dataclass(frozen=True)
class NondominanceTest:
    """Test of the null that a does NOT dominate b over the universe.

    Rejection means strong evidence that sample a's population is better for
    every grid point; the critical value is the standard normal quantile.
    """

    reject: bool
    inf_t0: float
    critical_value: float
    margin: float
    argmin_theta: float
    argmin_s: float


def nondominance_test(field: EUDiffField, alpha: float) -> NondominanceTest:
    """Reject non-dominance when inf t0 exceeds z_(1-alpha)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    z = float(stats.norm.ppf(1.0 - alpha))
    k = int(np.argmin(field.t0))
    inf_t0 = float(field.t0[k])
    point = field.grid.point(k)
    return NondominanceTest(
        reject=inf_t0 > z,
        inf_t0=inf_t0,
        critical_value=z,
        margin=inf_t0 - z,
        argmin_theta=point.theta,
        argmin_s=point.s,
    )
