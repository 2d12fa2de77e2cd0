"""Sample ingestion and delimited output.

Input samples are plain text, one numeric value per line; blank lines and
'#' comments are skipped and a single non-numeric header line is allowed at
the top.  All emitted files are deterministic byte-for-byte given the same
inputs (floats are written with shortest round-trip repr, no timestamps).
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import ConfigError
from .inference import ConfidenceBand, ConsensusSets, RejectionField

RESULT_COLUMNS = (
    "theta",
    "s",
    "diff",
    "sigma_hat",
    "t0",
    "b1",
    "b2",
    "in_inner",
    "in_outer",
    "rejected_iteration",
)


def read_sample(path) -> np.ndarray:
    """Read a one-column sample file."""
    values = []
    header_allowed = True
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read sample file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise ConfigError(
                f"{path}:{lineno}: expected a numeric value, got {line!r}"
            ) from None
        if not np.isfinite(value):
            raise ConfigError(f"{path}:{lineno}: non-finite value {line!r}")
        header_allowed = False
        values.append(value)
    if not values:
        raise ConfigError(f"sample file {path} contains no data")
    return np.array(values)


def _fmt(x) -> str:
    return repr(float(x))


def write_results_csv(
    path,
    field,
    band: ConfidenceBand,
    sets: ConsensusSets,
    rejections: RejectionField,
) -> None:
    """Per-grid-point results table (schema in RESULT_COLUMNS)."""
    grid = field.grid
    thetas, ss = grid.thetas, grid.ss
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for k in range(grid.n_points):
            writer.writerow(
                [
                    _fmt(thetas[k]),
                    _fmt(ss[k]),
                    _fmt(field.diff[k]),
                    _fmt(field.sigma_hat[k]),
                    _fmt(field.t0[k]),
                    _fmt(band.b1[k]),
                    _fmt(band.b2[k]),
                    int(sets.inner[k]),
                    int(sets.outer[k]),
                    int(rejections.iteration[k]),
                ]
            )


def read_results_csv(path) -> dict:
    """Read a results table back into column arrays (bool/int columns typed)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RESULT_COLUMNS:
            raise ConfigError(f"{path}: unexpected results header {header}")
        rows = [row for row in reader if row]
    cols = {name: [] for name in RESULT_COLUMNS}
    for row in rows:
        for name, cell in zip(RESULT_COLUMNS, row):
            cols[name].append(cell)
    out = {}
    for name, cells in cols.items():
        if name in ("in_inner", "in_outer"):
            out[name] = np.array([bool(int(c)) for c in cells])
        elif name == "rejected_iteration":
            out[name] = np.array([int(c) for c in cells])
        else:
            out[name] = np.array([float(c) for c in cells])
    return out


def write_draws_csv(path, draws) -> None:
    """Audit dump of the bootstrap draw matrix (replicate, point_index, value)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "point_index", "value"])
        matrix = draws.matrix
        for r in range(matrix.shape[0]):
            for k in range(matrix.shape[1]):
                writer.writerow([r, k, _fmt(matrix[r, k])])


def _mask_intervals(grid, mask):
    """Per-s rows of contiguous theta intervals where the mask holds."""
    n_s = grid.s_axis.size
    shaped = mask.reshape(grid.theta_axis.size, n_s)
    lines = []
    for j, s in enumerate(grid.s_axis):
        idx = np.nonzero(shaped[:, j])[0]
        if idx.size == 0:
            desc = "(empty)"
        else:
            runs = np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1)
            desc = ", ".join(
                f"theta in [{round(float(grid.theta_axis[r[0]]), 10):g}, "
                f"{round(float(grid.theta_axis[r[-1]]), 10):g}]"
                for r in runs
            )
        lines.append(f"    s={round(float(s), 10):g}: {desc}")
    return lines


def build_summary(
    *,
    field,
    cv,
    sets: ConsensusSets,
    rejections: RejectionField,
    dominance,
    nondominance,
    envelope_a,
    envelope_b,
    scheme,
    n_replicates: int,
    seed: int,
    alpha: float,
    mode: str,
) -> str:
    """Human-readable run summary."""
    grid = field.grid
    out = io.StringIO()
    w = out.write
    w("consensus set analysis\n")
    w("======================\n")
    w(f"samples: n_a={field.n_a}, n_b={field.n_b} (ratio {field.n_a / field.n_b:g})\n")
    w(
        f"grid: {grid.theta_axis.size} theta x {grid.s_axis.size} s = "
        f"{grid.n_points} points, theta in [{grid.theta_axis[0]:g}, "
        f"{grid.theta_axis[-1]:g}], s in [{grid.s_axis[0]:g}, {grid.s_axis[-1]:g}]\n"
    )
    w(f"bootstrap: scheme={scheme.kind}, replicates={n_replicates}, seed={seed}\n")
    w(f"level: alpha={alpha:g}, set mode={mode}\n")
    w("\ncritical values (studentized bootstrap process)\n")
    w(f"  sup (1-alpha):      {cv.sup_q!r}\n")
    w(f"  inf (alpha):        {cv.inf_q!r}\n")
    w(f"  abs-sup (1-alpha):  {cv.abs_q!r}\n")
    w(f"  mirrored sup:       {cv.mirror_sup_q!r}\n")
    w("\nconsensus sets (direction: a over b)\n")
    w(f"  inner: {int(sets.inner.sum())} of {grid.n_points} points\n")
    w("\n".join(_mask_intervals(grid, sets.inner)) + "\n")
    w(f"  outer: {int(sets.outer.sum())} of {grid.n_points} points\n")
    w("\n".join(_mask_intervals(grid, sets.outer)) + "\n")
    w("\nstepdown multiple testing (a over b)\n")
    w(
        f"  rejected {int(rejections.rejected.sum())} of {grid.n_points} points "
        f"in {rejections.n_iterations} round(s)\n"
    )
    w("\ndominance tests\n")
    w(
        f"  H0 'b at least as good everywhere': "
        f"{'REJECTED' if dominance.reject else 'not rejected'} "
        f"(sup t0 = {dominance.sup_t0:.6g} vs {dominance.critical_value:.6g}, "
        f"margin {dominance.margin:.6g}, at theta={dominance.argmax_theta:g}, "
        f"s={dominance.argmax_s:g})\n"
    )
    w(
        f"  H0 'a does not dominate b': "
        f"{'REJECTED' if nondominance.reject else 'not rejected'} "
        f"(inf t0 = {nondominance.inf_t0:.6g} vs z = "
        f"{nondominance.critical_value:.6g}, margin {nondominance.margin:.6g})\n"
    )
    w("\nenvelope moment diagnostic (advisory)\n")
    for name, rep in (("sample_a", envelope_a), ("sample_b", envelope_b)):
        flag = "  [WARNING: tail-dominated]" if rep.tail_flagged else ""
        w(
            f"  {name}: (2+{rep.delta:g})-moment = {rep.moment:.6g}, "
            f"top-1% share = {rep.tail_share:.3f}{flag}\n"
        )
    return out.getvalue()


COVERAGE_COLUMNS = (
    "n_a",
    "n_b",
    "sigma_b",
    "mu_b",
    "true_theta_set",
    "band_cp",
    "both_sets_cp",
    "inner_cp",
    "outer_cp",
)


class CoverageCsvWriter:
    """Writes coverage rows as they finish, so interrupts keep partial output."""

    def __init__(self, path, config):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._fh.write(
            f"# seed={config.seed} sims={config.sims} reps={config.reps} "
            f"alpha={config.alpha!r} scheme={config.scheme} "
            f"theta={config.theta_min!r}:{config.theta_max!r}:{config.theta_step!r} "
            f"shift={config.shift!r} mu_a={config.mu_a!r} sigma_a={config.sigma_a!r}\n"
        )
        self._writer = csv.writer(self._fh)
        self._writer.writerow(COVERAGE_COLUMNS)
        self._fh.flush()

    def write_row(self, row) -> None:
        self._writer.writerow(
            [
                row.n_a,
                row.n_b,
                _fmt(row.sigma_b),
                _fmt(row.mu_b),
                row.true_set.format(),
                _fmt(row.band_cp),
                _fmt(row.both_cp),
                _fmt(row.inner_cp),
                _fmt(row.outer_cp),
            ]
        )
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def write_coverage_csv(path, report) -> None:
    """Write a finished coverage report in one call."""
    with CoverageCsvWriter(path, report.config) as writer:
        for row in report.rows:
            writer.write_row(row)
