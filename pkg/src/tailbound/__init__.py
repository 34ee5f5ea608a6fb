"""Tail-probability bounds for sums of independent bounded random
variables under progressively richer distributional information, each
machine-verifiable against exact small-instance oracles."""

from .bernstein_moments import (
    MomentVector,
    bernstein_weights,
    cohen_extremal,
    exp_moment_bound,
    impossibility_witness,
    refined_binomial_bound,
    t_nm_distribution,
    z_nm_bound,
)
from .binomial_core import (
    BinomialSpec,
    binomial_dist,
    expected_positive_part,
    feller_point_bound,
    log_pmf,
    upper_tail,
)
from .classic_bounds import (
    BoundReport,
    MeanInstance,
    VarianceClassSpec,
    bennett_bound,
    hoeffding_bound,
    hoeffding_exp_bound,
    markov_bound,
)
from .convex_opt_bounds import (
    bentkus_linear_bound,
    binomial_comparison_bound,
    missing_factor_bound,
    missing_factor_threshold,
)
from .distributions import DiscreteDist, convolve
from .errors import (
    DomainError,
    InfeasibleMomentError,
    InternalConsistencyError,
    PreconditionError,
    ResourceLimitError,
    SamplingExhaustedError,
    TailboundError,
    ValidationError,
)
from .instance_io import (
    BoundTask,
    InstanceFile,
    SkippedMethod,
    emit_instance,
    emit_results,
    parse_instance,
)
from .mixture_bounds import (
    ConditionalMeansSpec,
    ConditionalProbsSpec,
    PartitionSpec,
    conditional_means_bound,
    conditional_probs_bound,
    mix_envelope,
    xi_distribution,
    xi_sum_bound,
)
from .order_oracle import (
    MarkovReductionReport,
    OrderCertificate,
    ValidationReport,
    check_convex_order,
    check_stochastic_order,
    markov_reduction_check,
    sample_class_member,
    validate_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BinomialSpec",
    "BoundReport",
    "BoundTask",
    "ConditionalMeansSpec",
    "ConditionalProbsSpec",
    "DiscreteDist",
    "DomainError",
    "InfeasibleMomentError",
    "InstanceFile",
    "InternalConsistencyError",
    "MarkovReductionReport",
    "MeanInstance",
    "MomentVector",
    "OrderCertificate",
    "PartitionSpec",
    "PreconditionError",
    "ResourceLimitError",
    "SamplingExhaustedError",
    "SkippedMethod",
    "TailboundError",
    "ValidationError",
    "ValidationReport",
    "VarianceClassSpec",
    "bennett_bound",
    "bentkus_linear_bound",
    "bernstein_weights",
    "binomial_comparison_bound",
    "binomial_dist",
    "check_convex_order",
    "check_stochastic_order",
    "cohen_extremal",
    "conditional_means_bound",
    "conditional_probs_bound",
    "convolve",
    "emit_instance",
    "emit_results",
    "exp_moment_bound",
    "expected_positive_part",
    "feller_point_bound",
    "hoeffding_bound",
    "hoeffding_exp_bound",
    "impossibility_witness",
    "log_pmf",
    "markov_bound",
    "markov_reduction_check",
    "missing_factor_bound",
    "missing_factor_threshold",
    "mix_envelope",
    "parse_instance",
    "refined_binomial_bound",
    "sample_class_member",
    "t_nm_distribution",
    "upper_tail",
    "validate_bound",
    "xi_distribution",
    "xi_sum_bound",
    "z_nm_bound",
]
