"""Moment-matching model reduction for affine LPV state-space models."""
from .bench import BfrStats, ExperimentSpec, bfr, example_model, random_signals, run_compare
from .model import (
    EnumerationTooLarge,
    LpvSsModel,
    ModelValidationError,
    SubMarkovIndex,
    Trajectory,
    enumerate_sub_markov,
    eval_matrices,
    iir_response,
    markov_count,
    simulate,
    sub_markov,
    validate_model,
)
from .oracle import (
    HankelTooLarge,
    extended_obs_matrix,
    extended_reach_matrix,
    hankel,
    hankel_rank,
)
from .reduce import (
    MatchReport,
    RankConditionError,
    ReductionResult,
    check_partial_realization,
    find_isomorphism,
    minimize,
    reduce,
)
from .subspace import SubspaceBasis, is_observable, is_reachable, orth, reach_basis, unobs_cobasis

__version__ = "0.1.0"
