"""Replicable learning algorithms over shared randomness.

The submodules hold the building blocks (streams, rounding, quantiles), the
learners (affine parities, one-way sequences, decision-tree distributions,
lifting, DP-to-replicable) and, in :mod:`replicable.bench`, the Monte Carlo
certification harness.
"""

from __future__ import annotations

from .errors import (
    ReplicableError,
    ParameterError,
    DataError,
    DomainError,
    BudgetError,
    InconsistentSystemError,
    InsufficientRankError,
    OwsFailure,
    RepresentationBlowup,
    ChannelError,
    LearnerFailure,
)
from .seedstream import (
    SeedStream,
    SHARED,
    DATA,
    as_bits,
)
from .hypercube import (
    MAX_ENUM_DIM,
    Restriction,
    all_points,
    codes,
    flip,
    pack,
    unpack,
)
from .sampling import (
    MAX_EXPLICIT_DRAWS,
    ConditionalSampleOracle,
    FiniteDistribution,
    HypercubeDistribution,
    Sample,
    SampleOracle,
    multinomial,
)
from .rstat import (
    BudgetLedger,
    RoundingGrid,
    charge,
    finite_distr_sample_size,
    mean_sample_size,
    project_to_simplex,
    r_estimate,
    r_finite_distr_est,
    r_mean,
    r_round,
    raw_accuracy,
)
from .rquantile import (
    EmpiricalCdf,
    quantile_sample_size,
    r_quantile_est,
)
from .hypotheses import (
    ConstantHypothesis,
    Hypothesis,
    KeyedGuessHypothesis,
    TableHypothesis,
    UniformLearnerSpec,
)
from .parity import (
    AffineParityHypothesis,
    Gf2System,
    ProductDistribution,
    aff_parity_sample_size,
    affine_parity_learner,
    gaussian_solve,
    naive_parity_learner,
    r_aff_parity,
    r_aff_parity_from_sample,
    skewed_parity_distribution,
)
from .ows import (
    AllZeroHypothesis,
    OwsConcept,
    OwsThresholdHypothesis,
    compute_forward,
    index_width,
    make_ows_concept,
    ows_distribution,
    ows_sample_size,
    r_learner_ows,
)
from .dtdist import (
    BuildDtPlan,
    build_dt_sample_size,
    DecisionTreeDistribution,
    Leaf,
    Node,
    dt_pmf,
    dt_sample,
    influence_oracle,
    is_monotone,
    monotone_influence_sample_size,
    r_build_dt,
    r_infl_est_monotone,
    r_infl_est_subcube,
    random_monotone_tree,
    random_tree,
    total_influence,
    tv_exact,
)
from .lift import (
    LeafSource,
    LiftedHypothesis,
    boost_runs,
    boost_sample_size,
    lift_end_to_end,
    lift_sample_sizes,
    r_boost,
    r_lift,
)
from .dp2rep import (
    FiniteClass,
    PointFunction,
    agnostic_sample_size,
    candidate_count,
    default_m0,
    dp_ratio_table,
    dp_to_replicable_weak,
    dummy_dataset,
    exp_mech_learner,
    exp_mech_probabilities,
    point_function_class,
    r_finite_class_agnostic,
    verify_pure_dp,
)

__version__ = "0.1.0"

__all__ = [
    "AffineParityHypothesis",
    "AllZeroHypothesis",
    "BudgetError",
    "BudgetLedger",
    "BuildDtPlan",
    "ChannelError",
    "ConditionalSampleOracle",
    "ConstantHypothesis",
    "DATA",
    "DataError",
    "DecisionTreeDistribution",
    "DomainError",
    "EmpiricalCdf",
    "FiniteClass",
    "FiniteDistribution",
    "Gf2System",
    "HypercubeDistribution",
    "Hypothesis",
    "InconsistentSystemError",
    "InsufficientRankError",
    "KeyedGuessHypothesis",
    "Leaf",
    "LeafSource",
    "LearnerFailure",
    "LiftedHypothesis",
    "MAX_ENUM_DIM",
    "MAX_EXPLICIT_DRAWS",
    "Node",
    "OwsConcept",
    "OwsFailure",
    "OwsThresholdHypothesis",
    "ParameterError",
    "PointFunction",
    "ProductDistribution",
    "ReplicableError",
    "RepresentationBlowup",
    "Restriction",
    "RoundingGrid",
    "SHARED",
    "Sample",
    "SampleOracle",
    "SeedStream",
    "TableHypothesis",
    "UniformLearnerSpec",
    "aff_parity_sample_size",
    "affine_parity_learner",
    "agnostic_sample_size",
    "all_points",
    "as_bits",
    "boost_runs",
    "boost_sample_size",
    "build_dt_sample_size",
    "candidate_count",
    "charge",
    "codes",
    "compute_forward",
    "default_m0",
    "dp_ratio_table",
    "dp_to_replicable_weak",
    "dt_pmf",
    "dt_sample",
    "dummy_dataset",
    "exp_mech_learner",
    "exp_mech_probabilities",
    "finite_distr_sample_size",
    "flip",
    "gaussian_solve",
    "index_width",
    "influence_oracle",
    "is_monotone",
    "lift_end_to_end",
    "lift_sample_sizes",
    "make_ows_concept",
    "mean_sample_size",
    "monotone_influence_sample_size",
    "multinomial",
    "naive_parity_learner",
    "ows_distribution",
    "ows_sample_size",
    "pack",
    "point_function_class",
    "project_to_simplex",
    "quantile_sample_size",
    "r_aff_parity",
    "r_aff_parity_from_sample",
    "r_boost",
    "r_build_dt",
    "r_estimate",
    "r_finite_class_agnostic",
    "r_finite_distr_est",
    "r_infl_est_monotone",
    "r_infl_est_subcube",
    "r_learner_ows",
    "r_lift",
    "r_mean",
    "r_quantile_est",
    "r_round",
    "random_monotone_tree",
    "random_tree",
    "raw_accuracy",
    "skewed_parity_distribution",
    "total_influence",
    "tv_exact",
    "unpack",
    "verify_pure_dp",
]
