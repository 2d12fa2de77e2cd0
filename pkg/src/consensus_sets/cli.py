"""Command-line front end.

Two subcommands: ``analyze`` compares two observed samples and writes the
per-point results CSV, a text summary, and an SVG region plot; ``simulate``
runs the Monte Carlo coverage experiment from a JSON config (or the bundled
table1 preset) and writes one CSV row per DGP cell.

Exit codes: 0 on success, 2 on usage, configuration, or domain errors.
The CONSENSUS_SEED environment variable overrides --seed for both commands.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bootstrap import (
    WeightScheme,
    bootstrap_difference_process,
    critical_values,
    scale_estimates,
)
from .empirical import SamplePair, eu_diff_field
from .errors import ConfigError, ConsensusError
from .inference import (
    confidence_sets,
    mtp_stepdown,
    dominance_test,
    nondominance_test,
    uniform_band,
)
from .plotting import render_region_plot
from .report import (
    CoverageCsvWriter,
    build_summary,
    read_sample,
    write_draws_csv,
    write_results_csv,
)
from .simulation import bundled_config, load_experiment_config, run_coverage_experiment
from .utility import build_grid, envelope_diagnostic

_MODE_BY_FLAG = {"one-sided": "mtp-one-sided", "band-joint": "band-joint"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensus",
        description="Bound the set of utility functions preferring one sampled "
        "distribution over another.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="compare two sample files")
    an.add_argument("--sample-a", required=True, help="first sample (one value per line)")
    an.add_argument("--sample-b", required=True, help="second sample")
    an.add_argument("--theta-min", type=float, default=0.0)
    an.add_argument("--theta-max", type=float, default=3.0)
    an.add_argument("--theta-step", type=float, default=0.1)
    an.add_argument("--s-min", type=float, default=-0.1)
    an.add_argument("--s-max", type=float, default=-0.1)
    an.add_argument("--s-step", type=float, default=1.0)
    an.add_argument("--alpha", type=float, default=0.10, help="level in (0, 0.5]")
    an.add_argument("--reps", type=int, default=999, help="bootstrap replicates (>= 99)")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--scheme", choices=("multinomial", "bayesian"), default="bayesian")
    an.add_argument("--mode", choices=tuple(_MODE_BY_FLAG), default="band-joint")
    an.add_argument("--out", default="consensus_out", help="output directory")
    an.add_argument("--dump-draws", action="store_true", help="dump the draw matrix CSV")
    an.set_defaults(func=run_analysis)

    si = sub.add_parser("simulate", help="run the coverage experiment")
    si.add_argument("config", nargs="?", help="JSON experiment config path")
    si.add_argument("--preset", choices=("table1",), help="use a bundled config")
    si.add_argument("--out", default="coverage.csv", help="output CSV path")
    si.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    si.add_argument("--sims", type=int, help="override simulation count")
    si.add_argument("--reps", type=int, help="override bootstrap replicates")
    si.add_argument("--seed", type=int, help="override master seed")
    si.add_argument("--alpha", type=float, help="override level")
    si.set_defaults(func=run_simulation)
    return parser


def _env_seed(default):
    raw = os.environ.get("CONSENSUS_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"CONSENSUS_SEED must be an integer, got {raw!r}") from None


def run_analysis(args) -> int:
    seed = _env_seed(args.seed)
    if not 0.0 < args.alpha <= 0.5:
        raise ConfigError(f"--alpha must be in (0, 0.5], got {args.alpha}")
    if args.reps < 99:
        raise ConfigError(f"--reps must be >= 99, got {args.reps}")
    if seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {seed}")

    scheme = WeightScheme(args.scheme)
    grid = build_grid(
        args.theta_min, args.theta_max, args.theta_step,
        args.s_min, args.s_max, args.s_step,
    )
    sample_a = read_sample(args.sample_a)
    sample_b = read_sample(args.sample_b)
    for name, arr in (("--sample-a", sample_a), ("--sample-b", sample_b)):
        if arr.size < 2:
            raise ConfigError(f"{name} needs at least 2 observations, got {arr.size}")
    pair = SamplePair(sample_a, sample_b)

    draws = bootstrap_difference_process(pair, grid, scheme, args.reps, seed)
    scales = scale_estimates(draws)
    field = eu_diff_field(pair, grid, scales.sigma)
    cv = critical_values(draws, field.sigma_hat, args.alpha)
    band = uniform_band(field, cv, "symmetric")
    sets = confidence_sets(field, draws, args.alpha, mode=_MODE_BY_FLAG[args.mode])
    rejections = mtp_stepdown(field, draws, args.alpha, "a-over-b")
    dominance = dominance_test(field, cv)
    nondominance = nondominance_test(field, args.alpha)
    envelope_a = envelope_diagnostic(grid, sample_a)
    envelope_b = envelope_diagnostic(grid, sample_b)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.csv"
    summary_path = out_dir / "summary.txt"
    plot_path = out_dir / "regions.svg"
    write_results_csv(results_path, field, band, sets, rejections)
    summary = build_summary(
        field=field,
        cv=cv,
        sets=sets,
        rejections=rejections,
        dominance=dominance,
        nondominance=nondominance,
        envelope_a=envelope_a,
        envelope_b=envelope_b,
        scheme=scheme,
        n_replicates=args.reps,
        seed=seed,
        alpha=args.alpha,
        mode=_MODE_BY_FLAG[args.mode],
    )
    summary_path.write_text(summary, encoding="utf-8")
    render_region_plot(plot_path, grid, sets, alpha=args.alpha)
    if args.dump_draws:
        write_draws_csv(out_dir / "draws.csv", draws)
    if scales.any_degenerate:
        print(
            f"warning: {int(scales.degenerate.sum())} grid point(s) had a "
            "degenerate bootstrap IQR; their scales were floored",
            file=sys.stderr,
        )
    for rep, name in ((envelope_a, "sample_a"), (envelope_b, "sample_b")):
        if rep.tail_flagged:
            print(
                f"warning: envelope moment of {name} is tail-dominated "
                f"(top-1% share {rep.tail_share:.2f}); inference may be fragile",
                file=sys.stderr,
            )
    print(f"inner set: {int(sets.inner.sum())} / {grid.n_points} points")
    print(f"outer set: {int(sets.outer.sum())} / {grid.n_points} points")
    print(f"wrote {results_path}, {summary_path}, {plot_path}")
    return 0


def run_simulation(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of a config path or --preset")
    overrides = {
        "sims": args.sims,
        "reps": args.reps,
        "seed": _env_seed(args.seed),
        "alpha": args.alpha,
    }
    if args.preset is not None:
        config = bundled_config(args.preset, **overrides)
    else:
        config = load_experiment_config(args.config, **overrides)
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")

    with CoverageCsvWriter(args.out, config) as writer:

        def on_row(row_idx, row):
            writer.write_row(row)
            print(
                f"[{row_idx + 1}/{len(config.rows)}] n=({row.n_a},{row.n_b}) "
                f"sigma_b={row.sigma_b:g} mu_b={row.mu_b:g} "
                f"true={row.true_set.format()} band_cp={row.band_cp:.3f} "
                f"both={row.both_cp:.3f}",
                file=sys.stderr,
            )

        run_coverage_experiment(config, jobs=args.jobs, progress=on_row)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConsensusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
