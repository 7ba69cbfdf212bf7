"""Causal orders and total causal effects for linear non-Gaussian SEMs
with latent variables, via overcomplete ICA and bootstrap support tests."""

from .absorb import (
    AbsorbAction,
    MinimalityReport,
    ReductionResult,
    absorb_action,
    apply_absorb,
    is_absorbable,
    minimal_reduction,
)
from .benchmark import BenchmarkConfig, BenchmarkResult, normalized_error, run_benchmark
from .errors import (
    AmbiguousColumn,
    CycleDetected,
    DegenerateCovariance,
    IllConditioned,
    InconsistentVerdicts,
    NoMatchingColumn,
    NonPositivePrice,
    NotAbsorbable,
    NotAPath,
    ObservedColumnsDependent,
    SemicaError,
    StructureUnsupported,
)
from .graph import CausalOrder, Dag, path_weight, reachability, validate_dag
from .ica import (
    IcaConfig,
    RicaSolution,
    SampleMatrix,
    WhiteningTransform,
    estimate_mixing,
    reference_fit,
    rica_fit,
    rica_objective,
    select_model,
    whiten,
)
from .inference import (
    DescendantSets,
    EffectCandidateSet,
    PairVerdict,
    PathVerdictMatrix,
    all_verdicts,
    causal_order_infer,
    construct_equivalent_model,
    descendant_sets,
    enumerate_effect_sets,
    pairwise_path,
    unique_effects,
)
from .pipeline import DiscoveryConfig, DiscoveryResult, discover
from .sem import (
    ColumnLabel,
    LinearSem,
    MergeRecord,
    MixingMatrix,
    Noise,
    observed_direct_matrix,
    observed_mixing,
    reduce_mixing,
    total_effect_matrix,
)
from .simulate import random_dag, random_sem, returns_from_prices, simulate_samples
from .support import (
    BootstrapEnsemble,
    SupportMatrix,
    bootstrap_replicates,
    match_columns,
    zero_support,
)

__version__ = "0.1.0"
