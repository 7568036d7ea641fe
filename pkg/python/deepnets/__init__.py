"""deepnets - constructive two-hidden-layer sigmoid nets and their learning-rate experiments."""

from deepnets.activation import (
    SigmoidKind,
    SigmoidSpec,
    eval_sigmoid,
    heaviside,
    level_for_learning,
    lipschitz_constant,
    sigmoid,
    threshold_for,
)
from deepnets.capacity import (
    BoundEvaluation,
    CoveringEstimate,
    empirical_covering,
    sample_phi_net,
    shallow_bound_reference,
    theoretical_bound,
)
from deepnets.config import ExperimentConfig, load_config
from deepnets.exceptions import (
    ConfigError,
    DeepNetsError,
    InvalidArgumentError,
    OutOfDomainError,
    ReportWriteError,
)
from deepnets.harness import (
    RateFitResult,
    compare_sparse_dense,
    fit_rate,
    run_rate_sweep,
    sparse_rate_factor,
    theoretical_rate,
)
from deepnets.learn import (
    Dataset,
    FitResult,
    empirical_risk,
    erm_fit,
    error_decomposition,
    generalization_error,
    sample_dataset,
)
from deepnets.netcore import (
    LocalizerNet,
    PhiBounds,
    PhiNetParams,
    ShallowNetParams,
    SparseApproximant,
    build_approximant,
    encode_approximant,
    encode_localizer,
    eval_localizer,
    eval_phi_net,
    eval_shallow,
    eval_sparse_approximant,
    project_clip,
    validate_params,
)
from deepnets.partition import (
    CubicPartition,
    MultiIndex,
    SupportSet,
    locate,
    make_partition,
    make_support,
    overlap_indices,
)
from deepnets.report import emit_report
from deepnets.targets import (
    SparseTarget,
    make_lipschitz_target,
    make_sparse_target,
    verify_lipschitz,
)
from deepnets.verify import GridReport, check_localization, check_sparse_bound

__all__ = [
    "__version__",
    "DeepNetsError",
    "InvalidArgumentError",
    "OutOfDomainError",
    "ConfigError",
    "ReportWriteError",
    "MultiIndex",
    "CubicPartition",
    "SupportSet",
    "make_partition",
    "locate",
    "overlap_indices",
    "make_support",
    "SigmoidKind",
    "SigmoidSpec",
    "sigmoid",
    "eval_sigmoid",
    "heaviside",
    "threshold_for",
    "level_for_learning",
    "lipschitz_constant",
    "LocalizerNet",
    "SparseApproximant",
    "PhiBounds",
    "PhiNetParams",
    "ShallowNetParams",
    "eval_localizer",
    "eval_sparse_approximant",
    "build_approximant",
    "eval_phi_net",
    "validate_params",
    "encode_localizer",
    "encode_approximant",
    "project_clip",
    "eval_shallow",
    "SparseTarget",
    "make_lipschitz_target",
    "make_sparse_target",
    "verify_lipschitz",
    "GridReport",
    "check_localization",
    "check_sparse_bound",
    "CoveringEstimate",
    "BoundEvaluation",
    "sample_phi_net",
    "empirical_covering",
    "theoretical_bound",
    "shallow_bound_reference",
    "Dataset",
    "FitResult",
    "sample_dataset",
    "erm_fit",
    "empirical_risk",
    "generalization_error",
    "error_decomposition",
    "ExperimentConfig",
    "load_config",
    "RateFitResult",
    "theoretical_rate",
    "sparse_rate_factor",
    "run_rate_sweep",
    "fit_rate",
    "compare_sparse_dense",
    "emit_report",
]

__version__ = "0.3.0"
