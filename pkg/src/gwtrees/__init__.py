"""Two-type branching trees: exact combinatorics, sampling, and inference.

The package has three layers.  The core modules compute everything
in-process: ``combinatorics`` (Narayana numbers, bounded matrix
decompositions, weight generating functions), ``trees`` (typed plane
trees, parenthesis encodings, contours, the tree/matrix bijection),
``branching`` (the survival offspring model and its deterministic
sampler), and ``inference`` (moment generating functions, extinction
probabilities, exact father-count laws, likelihoods and estimators,
Monte-Carlo comparison).  ``verification`` bundles self-checks over all
of them.  On top sit a pydantic/FastAPI service (``schemas``,
``service``), backends that make the service optional (``client``), and
a command-line front end (``cli``).
"""

from .branching import (
    Criticality,
    FatherSurvivalCounts,
    OffspringDistribution,
    SampleOutcome,
    Status,
    SurvivalParams,
    SurvivalRecord,
    classify,
    count_fathers_survivals,
    edge_count,
    generation_counts,
    sample_batch,
    sample_survival_stats,
    sample_tree,
    survival_distribution,
)
from .combinatorics import (
    DEFAULT_ENUMERATION_CAP,
    Decomposition,
    binomial,
    enumerate_decompositions,
    gf_coefficients,
    narayana,
    weight_histogram,
)
from .errors import ConvergenceError, ModelError, ResourceLimitError
from .inference import (
    CellComparison,
    Estimates,
    McReport,
    MgfComparison,
    MgfSolution,
    extinction_probability,
    father_pmf,
    joint_pmf,
    likelihood,
    likelihood_total_mass,
    log_father_pmf,
    log_joint_pmf,
    log_likelihood,
    mc_compare,
    mgf_fixed_point,
    mle,
)
from .trees import (
    FatherLeafCounts,
    MultitypeTree,
    ValidationResult,
    contour,
    decode_parens,
    decomposition_to_tree,
    encode_parens,
    enumerate_full_binary_trees,
    fathers_leaves,
    tree_from_records,
    tree_to_decomposition,
    tree_to_records,
    validate,
)
from .verification import DEFAULT_VERIFY_SEED, CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "CellComparison",
    "CheckResult",
    "ConvergenceError",
    "Criticality",
    "DEFAULT_ENUMERATION_CAP",
    "DEFAULT_VERIFY_SEED",
    "Decomposition",
    "Estimates",
    "FatherLeafCounts",
    "FatherSurvivalCounts",
    "McReport",
    "MgfComparison",
    "MgfSolution",
    "ModelError",
    "MultitypeTree",
    "OffspringDistribution",
    "ResourceLimitError",
    "SampleOutcome",
    "Status",
    "SurvivalParams",
    "SurvivalRecord",
    "ValidationResult",
    "binomial",
    "classify",
    "contour",
    "count_fathers_survivals",
    "decode_parens",
    "decomposition_to_tree",
    "edge_count",
    "encode_parens",
    "enumerate_decompositions",
    "enumerate_full_binary_trees",
    "extinction_probability",
    "father_pmf",
    "fathers_leaves",
    "gf_coefficients",
    "generation_counts",
    "joint_pmf",
    "likelihood",
    "likelihood_total_mass",
    "log_father_pmf",
    "log_joint_pmf",
    "log_likelihood",
    "mc_compare",
    "mgf_fixed_point",
    "mle",
    "narayana",
    "run_checks",
    "sample_batch",
    "sample_survival_stats",
    "sample_tree",
    "survival_distribution",
    "tree_from_records",
    "tree_to_decomposition",
    "tree_to_records",
    "validate",
    "weight_histogram",
    "__version__",
]
