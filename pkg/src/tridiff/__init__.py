"""Triple-difference estimation: DATT, causal DATT, inference, simulation.

The difference in group-time average treatment effects between two subgroups
(DATT) mixes a causal subgroup effect with effect heterogeneity; the causal
part (CDATT) is identified under a conditional parallel-gaps design and
estimated here by regression adjustment, inverse propensity weighting, or a
doubly robust combination, with influence-function standard errors.  A
seeded Monte Carlo laboratory generates calibrated synthetic panels and
repeated cross-sections for validation studies.
"""

from .errors import (
    BalanceError,
    ConvergenceError,
    DataError,
    DegenerateDesignError,
    DesignError,
    NumericalError,
    OverlapError,
    ParseError,
    RankError,
    SchemaError,
    TridiffError,
    UsageError,
)
from .dataset import (
    NEVER,
    CellIndicators,
    DesignSpec,
    PanelDataset,
    RepeatedCrossSection,
    ValidationReport,
    build_cells,
    bundled_path,
    load_panel,
    load_repeated_cross_section,
    resolve_comparison,
    validate_design,
    write_panel,
    write_repeated_cross_section,
)
from .working_models import (
    OutcomeModel,
    PropensityModel,
    fit_least_squares,
    fit_multinomial_logit,
    predict_cell_probabilities,
    predict_outcome,
)
from .datt import (
    EffectEstimate,
    cluster_weighted_check,
    estimate_datt_3wfe,
    estimate_datt_adjusted,
    estimate_datt_unadjusted,
)
from .cdatt import (
    CdattWeights,
    compute_cdatt_weights,
    estimate_cdatt,
    estimate_cdatt_rc,
    mts_lower_bound,
    recover_att_unaffected,
)
from .inference import (
    AggregatedEffect,
    InfluenceVector,
    aggregate_group_time,
    influence_covariance,
    influence_values,
    standard_error_ci,
    z_value,
)
from .simlab import (
    DgpSpec,
    McReport,
    TABLE_SUITE,
    default_covariate_table,
    default_dgp_spec,
    dgp_spec_from_json,
    feasible_group_times,
    generate_trial,
    generate_trial_rc,
    mc_design,
    misspecify_covariates,
    oracle_datt,
    run_monte_carlo,
    summarize_metrics,
    trial_truth,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedEffect",
    "BalanceError",
    "CellIndicators",
    "CdattWeights",
    "ConvergenceError",
    "DataError",
    "DegenerateDesignError",
    "DesignError",
    "DesignSpec",
    "DgpSpec",
    "EffectEstimate",
    "InfluenceVector",
    "McReport",
    "NEVER",
    "NumericalError",
    "OutcomeModel",
    "OverlapError",
    "PanelDataset",
    "ParseError",
    "PropensityModel",
    "RankError",
    "RepeatedCrossSection",
    "SchemaError",
    "TABLE_SUITE",
    "TridiffError",
    "UsageError",
    "ValidationReport",
    "aggregate_group_time",
    "build_cells",
    "bundled_path",
    "cluster_weighted_check",
    "compute_cdatt_weights",
    "default_covariate_table",
    "default_dgp_spec",
    "dgp_spec_from_json",
    "estimate_cdatt",
    "estimate_cdatt_rc",
    "estimate_datt_3wfe",
    "estimate_datt_adjusted",
    "estimate_datt_unadjusted",
    "feasible_group_times",
    "fit_least_squares",
    "fit_multinomial_logit",
    "generate_trial",
    "generate_trial_rc",
    "influence_covariance",
    "influence_values",
    "load_panel",
    "load_repeated_cross_section",
    "mc_design",
    "misspecify_covariates",
    "mts_lower_bound",
    "oracle_datt",
    "predict_cell_probabilities",
    "predict_outcome",
    "recover_att_unaffected",
    "resolve_comparison",
    "run_monte_carlo",
    "standard_error_ci",
    "summarize_metrics",
    "trial_truth",
    "validate_design",
    "write_panel",
    "write_repeated_cross_section",
    "z_value",
]
