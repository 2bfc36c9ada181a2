"""Sequential rejection testing for groups of variables in high-dimensional
linear regression.

The pipeline: split the sample repeatedly, screen variables with the
lasso on one half, compute partial F-test p-values for clusters of
variables on the other half, adjust for multiplicity with a policy that
may relax as rejections accumulate, aggregate across splits by an
empirical-quantile rule, and iterate rejections to a fixpoint. The
familywise error rate is controlled at the chosen level throughout.
"""

from .aggregation import (
    AggregationConfig,
    adjusted_pvalues,
    aggregate,
    aggregate_adaptive,
    aggregate_fixed,
    gamma_quantile,
)
from .clustering import complete_linkage, correlation_distance
from .dataset import Dataset, read_csv_columns, read_csv_dataset
from .engine import (
    PValueTensor,
    Rejection,
    RejectionState,
    RunConfig,
    compute_pvalue_tensor,
    result_dict,
    run,
    sequential_rejection,
    successor,
)
from .hierarchy import (
    ClusterHierarchy,
    ClusterNode,
    HypothesisCollection,
    extinct_branches,
)
from .lowdim import (
    PartialFResult,
    f_cdf,
    partial_f_pvalue,
    regularized_incomplete_beta,
    rss,
    split_pvalues,
)
from .multiplicity import (
    AdjustmentPolicy,
    POLICY_KINDS,
    adjust,
    binary_shaffer_factor,
    bonferroni_adjustment,
    hier_bonferroni_adjustment,
    holm_adjustment,
    inheritance_adjustment,
    screened_weights,
)
from .screening import (
    LassoFit,
    ScreenedSplit,
    ScreeningConfig,
    coordinate_descent,
    cv_select_lambda,
    lambda_grid,
    screen,
)
from .simulation import (
    PowerReport,
    Scenario,
    block_design,
    equicorr_design,
    make_beta,
    minimal_true_detections,
    performance_scores,
    report_table_csv,
    run_comparison,
    run_study,
    sigma_for_snr,
)
from .splitting import SampleSplit, SplitPlan, make_splits

__version__ = "0.1.0"
