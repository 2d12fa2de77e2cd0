"""Lognormal data generation, quadrature oracles, and the coverage experiment.

The experiment draws repeated sample pairs from lognormal laws, runs the full
band/confidence-set pipeline on each, and reports the fraction of runs in
which (i) the symmetric uniform band contains the true expected-utility
difference everywhere, and (ii) the joint inner/outer sets bracket the true
consensus set.  Truth comes from adaptive quadrature, not simulation.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import numpy as np
from scipy import integrate, stats

from .bootstrap import (
    WeightScheme,
    bootstrap_difference_process,
    critical_values,
    scale_estimates,
    substream,
)
from .empirical import SamplePair, eu_diff_field
from .errors import ConfigError, QuadratureError
from .inference import consensus_sets_from_band, uniform_band
from .utility import UtilityGrid, UtilityParams, build_grid, eval_utility

# Utility shift used throughout the experiment: u(y) evaluated at y + 0.1,
# which keeps the envelope bounded below on (0, inf).
DEFAULT_SHIFT = -0.1

# Quadrature window in standard-normal z; mass outside is below 1e-20.
_Z_LO, _Z_HI = -10.0, 10.0

# Stream tags for the per-simulation substreams (kept strictly positive, and
# distinct from the bootstrap module's weight-stream tags).
_TAG_SIM_A = 21
_TAG_SIM_B = 22
_TAG_SIM_BOOT = 23


@dataclass(frozen=True)
class LognormalDGP:
    """Lognormal law: draws are exp(mu + sigma * Z) with Z standard normal."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def draw_dgp_sample(dgp: LognormalDGP, n: int, rng) -> np.ndarray:
    """n positive reals from the lognormal law."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.exp(dgp.mu + dgp.sigma * rng.standard_normal(n))


def true_eu_oracle(dgp: LognormalDGP, params: UtilityParams, rel_tol: float = 1e-8) -> float:
    """Population expected utility E[u(Y)] via adaptive quadrature in z.

    Integrates u(exp(mu + sigma z)) phi(z) over z in [-10, 10].  The shift
    must satisfy s <= 0 so the lognormal support stays inside the utility
    domain.  Raises :class:`QuadratureError` with diagnostics when the
    integrator cannot reach the requested relative tolerance.
    """
    if params.s > 0:
        raise ValueError("lognormal support (0, inf) requires shift s <= 0")

    def integrand(z):
        y = np.exp(dgp.mu + dgp.sigma * z)
        return eval_utility(params, y) * stats.norm.pdf(z)

    result = integrate.quad(
        integrand, _Z_LO, _Z_HI, epsrel=rel_tol, epsabs=1e-12, limit=200, full_output=1
    )
    if len(result) > 3:
        raise QuadratureError(
            f"expected-utility quadrature failed for theta={params.theta}, "
            f"mu={dgp.mu}, sigma={dgp.sigma}: {result[3]}"
        )
    value, abserr = result[0], result[1]
    if abserr > max(10.0 * rel_tol * abs(value), 1e-9):
        raise QuadratureError(
            f"expected-utility quadrature did not converge: value={value}, "
            f"estimated error={abserr} (theta={params.theta}, mu={dgp.mu}, "
            f"sigma={dgp.sigma})"
        )
    return float(value)


def oracle_eu_vector(dgp: LognormalDGP, theta_axis, shift: float = DEFAULT_SHIFT) -> np.ndarray:
    """Oracle expected utility at every theta on the axis."""
    return np.array(
        [true_eu_oracle(dgp, UtilityParams(float(t), shift)) for t in np.asarray(theta_axis)]
    )


@dataclass(frozen=True)
class TrueConsensusSet:
    """Thetas at which the first law has strictly higher expected utility."""

    theta_axis: np.ndarray
    mask: np.ndarray
    intervals: tuple

    @property
    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def format(self) -> str:
        if self.is_empty:
            return "{}"
        return " U ".join(
            f"[{round(lo, 10):g}, {round(hi, 10):g}]" for lo, hi in self.intervals
        )


def _contiguous_intervals(theta_axis, mask):
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return ()
    runs = np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1)
    return tuple((float(theta_axis[r[0]]), float(theta_axis[r[-1]])) for r in runs)


def true_consensus_set(
    dgp_a: LognormalDGP,
    dgp_b: LognormalDGP,
    theta_axis,
    shift: float = DEFAULT_SHIFT,
) -> TrueConsensusSet:
    """Oracle consensus set over a theta axis at the fixed shift."""
    theta_axis = np.asarray(theta_axis, dtype=float)
    diff = oracle_eu_vector(dgp_a, theta_axis, shift) - oracle_eu_vector(dgp_b, theta_axis, shift)
    mask = diff > 0
    return TrueConsensusSet(
        theta_axis=theta_axis,
        mask=mask,
        intervals=_contiguous_intervals(theta_axis, mask),
    )


@dataclass(frozen=True)
class ExperimentRow:
    """One DGP cell: sample sizes and the second law's parameters."""

    n_a: int
    n_b: int
    sigma_b: float
    mu_b: float

    def __post_init__(self):
        if self.n_a < 2 or self.n_b < 2:
            raise ConfigError(f"sample sizes must be >= 2, got ({self.n_a}, {self.n_b})")
        if not np.isfinite(self.sigma_b) or self.sigma_b <= 0:
            raise ConfigError(f"sigma_b must be positive, got {self.sigma_b}")
        if not np.isfinite(self.mu_b):
            raise ConfigError(f"mu_b must be finite, got {self.mu_b}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full specification of a coverage experiment."""

    rows: tuple
    sims: int
    reps: int
    alpha: float
    seed: int
    scheme: str = "bayesian"
    mu_a: float = 0.0
    sigma_a: float = 1.0
    theta_min: float = 0.0
    theta_max: float = 3.0
    theta_step: float = 0.1
    shift: float = DEFAULT_SHIFT

    def __post_init__(self):
        if not self.rows:
            raise ConfigError("experiment needs at least one row")
        if self.sims < 1:
            raise ConfigError(f"sims must be >= 1, got {self.sims}")
        if self.reps < 4:
            raise ConfigError(f"reps must be >= 4, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        WeightScheme(self.scheme)
        object.__setattr__(self, "rows", tuple(self.rows))

    def grid(self) -> UtilityGrid:
        return build_grid(
            self.theta_min, self.theta_max, self.theta_step, self.shift, self.shift, 1.0
        )


def parse_experiment_config(mapping: dict, **overrides) -> ExperimentConfig:
    """Build a config from a plain mapping (e.g. parsed JSON)."""
    data = dict(mapping)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        raw_rows = data.pop("rows")
    except KeyError:
        raise ConfigError("experiment config is missing 'rows'") from None
    if not isinstance(raw_rows, (list, tuple)):
        raise ConfigError("'rows' must be a list of row objects")
    try:
        rows = tuple(
            ExperimentRow(
                n_a=int(r["n_a"]),
                n_b=int(r["n_b"]),
                sigma_b=float(r["sigma_b"]),
                mu_b=float(r["mu_b"]),
            )
            for r in raw_rows
        )
        return ExperimentConfig(rows=rows, **data)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment config: {exc}") from exc


def load_experiment_config(path, **overrides) -> ExperimentConfig:
    """Read a JSON experiment config from disk."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return parse_experiment_config(data, **overrides)


def bundled_config(name: str = "table1", **overrides) -> ExperimentConfig:
    """Load a config shipped with the package (currently only "table1")."""
    ref = resources.files("consensus_sets").joinpath("data", f"{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"no bundled config named {name!r}") from None
    return parse_experiment_config(json.loads(text), **overrides)


@dataclass(frozen=True)
class CoverageRow:
    """Simulated coverage fractions for one DGP cell."""

    n_a: int
    n_b: int
    sigma_b: float
    mu_b: float
    true_set: TrueConsensusSet
    band_cp: float
    both_cp: float
    inner_cp: float
    outer_cp: float

    def identity_gap(self) -> float:
        """inner_cp + outer_cp - (1 + both_cp); zero unless a simulation
        missed on both sides at once."""
        return self.inner_cp + self.outer_cp - 1.0 - self.both_cp


@dataclass(frozen=True)
class CoverageReport:
    """All rows of a coverage experiment plus the config that produced them."""

    rows: tuple
    config: ExperimentConfig


def _simulate_once(config, grid, scheme, dgp_a, dgp_b, row, row_idx, sim_idx, truth):
    rng_a = substream(config.seed, _TAG_SIM_A, row_idx + 1, sim_idx + 1)
    rng_b = substream(config.seed, _TAG_SIM_B, row_idx + 1, sim_idx + 1)
    boot_seed = int(
        np.random.SeedSequence(
            [config.seed, _TAG_SIM_BOOT, row_idx + 1, sim_idx + 1]
        ).generate_state(1, np.uint64)[0]
    )
    pair = SamplePair(
        draw_dgp_sample(dgp_a, row.n_a, rng_a),
        draw_dgp_sample(dgp_b, row.n_b, rng_b),
    )
    draws = bootstrap_difference_process(pair, grid, scheme, config.reps, boot_seed)
    field = eu_diff_field(pair, grid, scale_estimates(draws).sigma)
    cv = critical_values(draws, field.sigma_hat, config.alpha)
    band = uniform_band(field, cv, "symmetric")
    sets = consensus_sets_from_band(band)

    band_cover = bool(np.all((band.b1 <= truth) & (truth <= band.b2)))
    truth_mask = truth > 0
    inner_cover = not bool(np.any(sets.inner & ~truth_mask))
    outer_cover = not bool(np.any(truth_mask & ~sets.outer))
    return np.array(
        [band_cover, inner_cover and outer_cover, inner_cover, outer_cover],
        dtype=np.int64,
    )


def _chunk_counts(args):
    config, row_idx, truth, lo, hi = args
    grid = config.grid()
    scheme = WeightScheme(config.scheme)
    dgp_a = LognormalDGP(config.mu_a, config.sigma_a)
    row = config.rows[row_idx]
    dgp_b = LognormalDGP(row.mu_b, row.sigma_b)
    counts = np.zeros(4, dtype=np.int64)
    for sim_idx in range(lo, hi):
        counts += _simulate_once(
            config, grid, scheme, dgp_a, dgp_b, row, row_idx, sim_idx, truth
        )
    return counts


def run_coverage_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    progress: Optional[Callable[[int, CoverageRow], None]] = None,
) -> CoverageReport:
    """Run the full coverage experiment.

    Each simulation owns substreams keyed by (seed, row, sim), so results
    are a pure function of the config and byte-identical for any ``jobs``:
    per-row tallies are integer counts summed over disjoint sim chunks.
    ``progress`` is called with (row index, finished CoverageRow).
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    grid = config.grid()
    dgp_a = LognormalDGP(config.mu_a, config.sigma_a)
    truth_cache = {}
    eu_a = oracle_eu_vector(dgp_a, grid.theta_axis, config.shift)

    rows_out = []
    for row_idx, row in enumerate(config.rows):
        key = (row.mu_b, row.sigma_b)
        if key not in truth_cache:
            dgp_b = LognormalDGP(row.mu_b, row.sigma_b)
            diff = eu_a - oracle_eu_vector(dgp_b, grid.theta_axis, config.shift)
            mask = diff > 0
            truth_cache[key] = (
                diff,
                TrueConsensusSet(
                    theta_axis=grid.theta_axis,
                    mask=mask,
                    intervals=_contiguous_intervals(grid.theta_axis, mask),
                ),
            )
        truth, true_set = truth_cache[key]

        if jobs == 1:
            counts = _chunk_counts((config, row_idx, truth, 0, config.sims))
        else:
            chunk = max(1, -(-config.sims // (jobs * 4)))
            bounds = list(range(0, config.sims, chunk)) + [config.sims]
            tasks = [
                (config, row_idx, truth, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            counts = np.zeros(4, dtype=np.int64)
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for part in pool.map(_chunk_counts, tasks):
                    counts += part

        fractions = counts / config.sims
        cov_row = CoverageRow(
            n_a=row.n_a,
            n_b=row.n_b,
            sigma_b=row.sigma_b,
            mu_b=row.mu_b,
            true_set=true_set,
            band_cp=float(fractions[0]),
            both_cp=float(fractions[1]),
            inner_cp=float(fractions[2]),
            outer_cp=float(fractions[3]),
        )
        rows_out.append(cov_row)
        if progress is not None:
            progress(row_idx, cov_row)
    return CoverageReport(rows=tuple(rows_out), config=config)
