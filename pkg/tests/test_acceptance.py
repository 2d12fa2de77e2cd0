"""Acceptance suite.

Runs every exit criterion at its stated tolerance and prints one PASS line
per criterion (visible with ``pytest -s``).  The coverage experiment behind
criteria 1, 4, and 5 uses the bundled table1 config (1000 simulations x 999
bootstrap replicates x 18 DGP cells) and takes a few minutes on one core;
everything is seeded, so reruns are byte-identical.
"""

import json

import numpy as np
import pytest
from scipy import stats

from consensus_sets import (
    LognormalDGP,
    SamplePair,
    UtilityParams,
    WeightScheme,
    bootstrap_difference_process,
    build_grid,
    bundled_config,
    centered_difference_rows,
    confidence_sets,
    critical_values,
    draw_dgp_sample,
    envelope_moment_quadrature,
    eu_diff_field,
    expected_utility_mean,
    mtp_basic,
    mtp_stepdown,
    order_statistic_quantile,
    run_coverage_experiment,
    scale_estimates,
    substream,
    true_eu_oracle,
    uniform_band,
    utility_matrix,
)
from consensus_sets.cli import main as cli_main

ALPHA = 0.10

# Reference values from the published coverage table.
BAND_CP_40_SIG10_MUM03 = 0.915
BAND_CP_100_SIG13_MU03 = 0.872
BOTH_CP_100_SIG13_MU03 = 0.953
CP_TOL = 0.03

TRUE_SETS = {
    (0.7, -0.3): ((0.0, 2.8),),
    (0.7, 0.0): ((0.0, 1.1),),
    (0.7, 0.3): (),
    (1.0, -0.3): ((0.0, 3.0),),
    (1.0, 0.0): (),
    (1.0, 0.3): (),
    (1.3, -0.3): ((0.2, 3.0),),
    (1.3, 0.0): ((1.2, 3.0),),
    (1.3, 0.3): ((2.5, 3.0),),
}


@pytest.fixture(scope="session")
def table1_report():
    config = bundled_config("table1")
    assert (config.sims, config.reps, config.alpha) == (1000, 999, ALPHA)
    assert len(config.rows) == 18
    return run_coverage_experiment(config)


def find_row(report, n, sigma_b, mu_b):
    for row in report.rows:
        if (row.n_a, row.sigma_b, row.mu_b) == (n, sigma_b, mu_b):
            return row
    raise AssertionError(f"row ({n}, {sigma_b}, {mu_b}) missing from report")


def test_criterion_1_table1_reproduction(table1_report):
    r40 = find_row(table1_report, 40, 1.0, -0.3)
    r100 = find_row(table1_report, 100, 1.3, 0.3)
    assert abs(r40.band_cp - BAND_CP_40_SIG10_MUM03) <= CP_TOL
    assert abs(r100.band_cp - BAND_CP_100_SIG13_MU03) <= CP_TOL
    assert abs(r100.both_cp - BOTH_CP_100_SIG13_MU03) <= CP_TOL
    print(
        f"\n[criterion 1] PASS: band CP (40, 1.0, -0.3) = {r40.band_cp:.3f} "
        f"(target {BAND_CP_40_SIG10_MUM03} +- {CP_TOL}); "
        f"band CP (100, 1.3, 0.3) = {r100.band_cp:.3f} "
        f"(target {BAND_CP_100_SIG13_MU03} +- {CP_TOL}); "
        f"both-sets CP = {r100.both_cp:.3f} "
        f"(target {BOTH_CP_100_SIG13_MU03} +- {CP_TOL})"
    )


def test_criterion_2_true_set_oracle(table1_report):
    checked = set()
    for row in table1_report.rows:
        key = (row.sigma_b, row.mu_b)
        expected = TRUE_SETS[key]
        got = row.true_set.intervals
        assert len(got) == len(expected), key
        for (glo, ghi), (elo, ehi) in zip(got, expected):
            assert abs(glo - elo) <= 1e-9, key
            assert abs(ghi - ehi) <= 1e-9, key
        checked.add(key)
    assert len(checked) == 9
    empties = sum(1 for k in checked if not TRUE_SETS[k])
    print(
        f"\n[criterion 2] PASS: all 9 distinct truth sets exact at 0.1 "
        f"resolution, including {empties} empty sets"
    )


def test_criterion_3_envelope_moments():
    cauchy_grid = build_grid(0.6, 0.6, 1.0, 0.0, 0.0, 1.0)
    m1 = envelope_moment_quadrature(
        cauchy_grid, lambda y: 2.0 * stats.t.pdf(y - 1.0, 1), 1.0, np.inf
    )
    t2_grid = build_grid(0.01, 0.01, 1.0, 0.0, 0.0, 1.0)
    m2 = envelope_moment_quadrature(
        t2_grid, lambda y: 2.0 * stats.t.pdf(y - 1.0, 2), 1.0, np.inf
    )
    assert abs(m1 - 11.3) / 11.3 <= 0.01
    assert abs(m2 - 100.7) / 100.7 <= 0.01
    print(
        f"\n[criterion 3] PASS: envelope moments {m1:.4f} (ref 11.3) and "
        f"{m2:.4f} (ref 100.7), both within 1%"
    )


def test_criterion_4_conservative_joint_sets(table1_report):
    floor = 1.0 - ALPHA - 0.02
    worst = min(row.both_cp for row in table1_report.rows)
    for row in table1_report.rows:
        assert row.both_cp >= floor, (row.sigma_b, row.mu_b, row.n_a, row.both_cp)
    print(
        f"\n[criterion 4] PASS: both-sets CP >= {floor:.2f} on all 18 rows "
        f"(worst {worst:.3f})"
    )


def test_criterion_5_bookkeeping_identity(table1_report):
    for row in table1_report.rows:
        assert row.identity_gap() == pytest.approx(0.0, abs=1e-12)
    print(
        "\n[criterion 5] PASS: inner_cp + outer_cp = 1 + both_sets_cp "
        "exactly on all 18 rows"
    )


def test_criterion_6_structural_properties():
    rng = np.random.default_rng(97)
    grid = build_grid(0.0, 3.0, 0.25, -0.2, -0.1, 0.1)
    pair = SamplePair(
        np.exp(0.25 + rng.standard_normal(70)), np.exp(rng.standard_normal(55))
    )
    scheme = WeightScheme("bayesian")
    draws = bootstrap_difference_process(pair, grid, scheme, 499, 31)
    field = eu_diff_field(pair, grid, scale_estimates(draws).sigma)
    cv = critical_values(draws, field.sigma_hat, ALPHA)

    # subset monotonicity of critical values
    for _ in range(8):
        mask = rng.random(grid.n_points) < 0.4
        if not mask.any():
            mask[0] = True
        sub = critical_values(draws, field.sigma_hat, ALPHA, mask)
        assert sub.sup_q <= cv.sup_q
        assert sub.inf_q >= cv.inf_q

    # stepdown contains the basic MTP with nonincreasing critical values
    basic = mtp_basic(field, cv)
    step = mtp_stepdown(field, draws, ALPHA)
    assert np.all(step.rejected | ~basic.rejected)
    rounds = step.iteration[step.rejected]
    if rounds.size:
        cv_by_round = [
            step.critical_value[step.iteration == k].max()
            for k in range(int(rounds.max()) + 1)
        ]
        assert np.all(np.diff(cv_by_round) <= 1e-12)

    # band nesting in alpha
    tight = uniform_band(field, critical_values(draws, field.sigma_hat, 0.05))
    loose = uniform_band(field, critical_values(draws, field.sigma_hat, 0.20))
    assert np.all(tight.b1 <= loose.b1) and np.all(tight.b2 >= loose.b2)

    # symmetric-band midpoint identity
    band = uniform_band(field, cv, "symmetric")
    np.testing.assert_allclose((band.b1 + band.b2) / 2.0, field.diff, atol=1e-10)

    # inner is nested in outer for band-joint sets
    sets = confidence_sets(field, draws, ALPHA, mode="band-joint")
    assert not np.any(sets.inner & ~sets.outer)

    # antisymmetry of the difference field under sample swap
    fwd = eu_diff_field(pair, grid, np.ones(grid.n_points))
    rev = eu_diff_field(pair.swapped(), grid, np.ones(grid.n_points))
    np.testing.assert_allclose(rev.diff, -fwd.diff, atol=1e-15)

    # unit weights center the bootstrap rows at exactly zero
    u_a = utility_matrix(pair.sample_a, grid)
    u_b = utility_matrix(pair.sample_b, grid)
    rows = centered_difference_rows(
        u_a, u_b, np.ones((3, pair.n_a)), np.ones((3, pair.n_b))
    )
    assert np.all(rows == 0.0)

    # order-statistic quantiles match the exhaustive sort oracle for R <= 8
    for size in range(1, 9):
        vals = rng.standard_normal(size)
        ordered = np.sort(vals)
        for q in np.linspace(0.05, 0.95, 19):
            k = min(max(int(np.ceil(q * size)), 1), size)
            assert order_statistic_quantile(vals, q) == ordered[k - 1]

    print("\n[criterion 6] PASS: structural property suite (8 properties)")


def test_criterion_7_oracle_equivalence():
    # sample mean of log utility vs quadrature at n = 1e6
    dgp = LognormalDGP(0.0, 1.0)
    params = UtilityParams(1.0, -0.1)
    sample = draw_dgp_sample(dgp, 10**6, substream(2025, 51))
    sample_mean = expected_utility_mean(sample, params)
    oracle = true_eu_oracle(dgp, params)
    assert abs(sample_mean - oracle) < 0.01

    # bootstrap IQR scale vs the analytic plug-in at a fixed point
    grid = build_grid(1.0, 1.0, 1.0, -0.1, -0.1, 1.0)
    scheme = WeightScheme("bayesian")
    n = 2000
    rel_errors = []
    for i in range(20):
        rng = substream(808, 52, i + 1)
        pair = SamplePair(
            np.exp(rng.standard_normal(n)), np.exp(0.2 + 0.9 * rng.standard_normal(n))
        )
        draws = bootstrap_difference_process(pair, grid, scheme, 999, 9100 + i)
        sigma_boot = scale_estimates(draws).sigma[0]
        u_a = utility_matrix(pair.sample_a, grid)[:, 0]
        u_b = utility_matrix(pair.sample_b, grid)[:, 0]
        plug_in = np.sqrt(u_a.var() + pair.size_ratio * u_b.var())
        rel_errors.append(abs(sigma_boot - plug_in) / plug_in)
    assert max(rel_errors) <= 0.15
    print(
        f"\n[criterion 7] PASS: |sample EU - oracle| = "
        f"{abs(sample_mean - oracle):.5f} < 0.01 at n=1e6; bootstrap sigma vs "
        f"plug-in within 15% over 20 seeds (worst {max(rel_errors):.3f})"
    )


def test_criterion_8_determinism(tmp_path, capsys):
    rng = np.random.default_rng(65)
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("".join(f"{v}\n" for v in np.exp(rng.standard_normal(50))), "utf-8")
    b.write_text("".join(f"{v}\n" for v in np.exp(rng.standard_normal(40))), "utf-8")

    analysis_bytes = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli_main([
            "analyze", "--sample-a", str(a), "--sample-b", str(b),
            "--reps", "199", "--seed", "13", "--out", str(out),
        ]) == 0
        analysis_bytes.append((out / "results.csv").read_bytes())
    assert analysis_bytes[0] == analysis_bytes[1]

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "sims": 6, "reps": 99, "alpha": 0.1, "seed": 3,
        "rows": [{"n_a": 25, "n_b": 25, "sigma_b": 0.7, "mu_b": 0.0}],
    }), "utf-8")
    cov = []
    for jobs in ("1", "2"):
        out = tmp_path / f"cov{jobs}.csv"
        assert cli_main(["simulate", str(cfg), "--out", str(out), "--jobs", jobs]) == 0
        cov.append(out.read_bytes())
    assert cov[0] == cov[1]
    capsys.readouterr()
    print(
        "\n[criterion 8] PASS: result CSVs byte-identical across reruns and "
        "across worker counts"
    )
