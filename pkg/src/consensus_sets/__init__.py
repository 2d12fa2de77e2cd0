"""Inference on the consensus set of utility functions preferring one
sampled distribution over another.

Pipeline: discretize a shifted-CRRA utility universe on a (theta, s) grid,
estimate the expected-utility difference at every point, bootstrap the
centered difference process with exchangeable weights, and turn sup-t
critical values into multiple tests, inner/outer confidence sets, uniform
bands, and restricted-dominance tests.  A simulation harness reproduces the
coverage experiment that validates the construction.
"""

from .bootstrap import (
    BootstrapDraws,
    CriticalValues,
    ScaleEstimates,
    WeightScheme,
    bootstrap_difference_process,
    centered_difference_rows,
    critical_values,
    draw_weights,
    order_statistic_quantile,
    scale_estimates,
    substream,
)
from .empirical import EUDiffField, SamplePair, eu_diff_field, expected_utility_mean
from .errors import (
    ConfigError,
    ConsensusError,
    EmptySubsetError,
    GridError,
    MissingQuantileError,
    QuadratureError,
    ShapeMismatchError,
    UtilityDomainError,
)
from .inference import (
    ConfidenceBand,
    ConsensusSets,
    DominanceTest,
    NondominanceTest,
    RejectionField,
    confidence_sets,
    consensus_sets_from_band,
    mtp_basic,
    mtp_stepdown,
    dominance_test,
    nondominance_test,
    uniform_band,
)
from .simulation import (
    CoverageReport,
    CoverageRow,
    ExperimentConfig,
    ExperimentRow,
    LognormalDGP,
    TrueConsensusSet,
    bundled_config,
    draw_dgp_sample,
    load_experiment_config,
    oracle_eu_vector,
    parse_experiment_config,
    run_coverage_experiment,
    true_consensus_set,
    true_eu_oracle,
)
from .utility import (
    EnvelopeReport,
    UtilityGrid,
    UtilityParams,
    build_grid,
    envelope_diagnostic,
    envelope_moment_quadrature,
    eval_utility,
    utility_matrix,
)

__version__ = "0.1.0"
