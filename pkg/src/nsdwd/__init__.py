"""Normalized steepest descent with weight decay under heavy-tailed class imbalance.

A small numerical-optimization library and benchmark harness: Zipf-style
class-proportion vectors, softmax KL objectives with exact derivatives,
sign-descent / normalized-GD optimizers with the harmonic weight-decay
schedule, closed-form complexity constants, and CSV-logged experiments with
convergence-bound verification.
"""

from .analysis import (
    AnalysisReport,
    MinNormSolution,
    adaptive_smoothness_lower_bound,
    build_report,
    complexity,
    estimate_l2_smoothness,
    estimate_linf_smoothness,
    min_norm_alt,
    min_norm_inf,
    min_norm_l2,
    s_curve,
    var_log_uniform,
)
from .distributions import (
    DistributionSource,
    TokenDistribution,
    ingest_corpus,
    ingest_corpus_path,
    power_law_distribution,
    read_distribution_csv,
    write_distribution_csv,
    zipf_fit_exponent,
)
from .errors import (
    ConfigMismatchError,
    DivergenceError,
    EmptyCorpusError,
    PowerIterationError,
    ZeroGradientError,
)
from .harness import (
    BoundForm,
    BoundReport,
    DistributionSpec,
    ExperimentConfig,
    OptimizerSpec,
    run_experiment,
    verify_bounds,
    verify_manifest,
)
from .objective import (
    ObjectiveHandle,
    ObjectiveKind,
    alt_inverse,
    alt_transform,
    gradient,
    hessian_from_probs,
    hvp,
    loss,
    loss_and_gradient,
    make_objective,
    minimizer,
    probability_map,
    softmax_stable,
)
from .optimizers import (
    GEOMETRIES,
    L2,
    LINF,
    BaselineConfig,
    BaselineVariant,
    NormGeometry,
    NormKind,
    NSDWDConfig,
    RunLog,
    grid_search_lr,
    nsdwd_step,
    run_baseline,
    run_nsdwd,
    schedule_eta,
)

__version__ = "0.1.0"
