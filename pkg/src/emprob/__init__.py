"""Batch probability scoring for weighted questionnaire case spaces.

The package turns per-doctor answer weights into calibrated probability
scores for every admissible answer combination, fitting a Gaussian mixture
by expectation-maximization alongside a kernel density estimate, and
explains the resulting categories with a decision tree and per-band
concept lattices.
"""

from emprob.cases import (
    CaseSet,
    CaseVector,
    WeightSumTable,
    canonical_index,
    case_from_index,
    enumerate_cases,
    normalize_sums,
    validate_case,
    weight_sum,
    weight_sum_table,
    weight_sums,
)
from emprob.density import (
    SILVERMAN_CONVENTIONS,
    ComponentSelection,
    FitReport,
    GaussianComponent,
    GaussianMixture,
    KernelDensityEstimate,
    aic,
    bic,
    em_fit,
    gmm_parameter_count,
    information_criteria,
    select_component_count,
    silverman_bandwidth,
)
from emprob.fca import (
    Concept,
    ConceptLattice,
    FormalContext,
    build_band_context,
    build_lattice,
    derive,
    enumerate_concepts,
)
from emprob.io import (
    export_cxt,
    export_density_samples_csv,
    export_dot,
    export_scores_csv,
    export_supports_csv,
    format_float,
    lattice_to_dot,
    read_cxt,
    read_scores_csv,
    tree_to_dot,
    write_json,
)
from emprob.pipeline import (
    DEFAULT_BANDS,
    PipelineConfig,
    PipelineResult,
    band_tag,
    fit_report_document,
    load_inputs,
    prepare,
    run_pipeline,
    write_artifacts,
)
from emprob.schema import (
    AnswerOption,
    AnswerWeightVector,
    MergeRule,
    Question,
    QuestionMode,
    Questionnaire,
    ValidationError,
    WeightMatrix,
    apply_merge,
    default_questionnaire,
    default_weight_matrix,
    load_questionnaire,
    load_weight_matrix,
    mean_weights,
    merge_questionnaire,
    parse_merge_rule,
    validate_weights,
)
from emprob.scoring import (
    DEFAULT_THRESHOLDS,
    ModelBundle,
    PatientScore,
    ProbabilityCategory,
    ScoreTable,
    categorize,
    categorize_array,
    elicit_probabilities,
    ill_component,
    score_patient,
    validate_thresholds,
)
from emprob.tree import (
    TreeNode,
    build_tree,
    fit_decision_tree,
    iter_nodes,
    leaf_count,
    node_count,
    predict,
    predict_matrix,
    prune_tree,
    tree_depth,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerOption",
    "AnswerWeightVector",
    "CaseSet",
    "CaseVector",
    "ComponentSelection",
    "Concept",
    "ConceptLattice",
    "DEFAULT_THRESHOLDS",
    "FitReport",
    "FormalContext",
    "GaussianComponent",
    "GaussianMixture",
    "KernelDensityEstimate",
    "MergeRule",
    "ModelBundle",
    "PatientScore",
    "DEFAULT_BANDS",
    "PipelineConfig",
    "PipelineResult",
    "ProbabilityCategory",
    "Question",
    "QuestionMode",
    "Questionnaire",
    "SILVERMAN_CONVENTIONS",
    "ScoreTable",
    "TreeNode",
    "ValidationError",
    "WeightMatrix",
    "WeightSumTable",
    "aic",
    "apply_merge",
    "bic",
    "band_tag",
    "build_band_context",
    "build_lattice",
    "build_tree",
    "canonical_index",
    "case_from_index",
    "categorize",
    "categorize_array",
    "default_questionnaire",
    "default_weight_matrix",
    "derive",
    "elicit_probabilities",
    "em_fit",
    "enumerate_cases",
    "enumerate_concepts",
    "export_cxt",
    "export_density_samples_csv",
    "export_dot",
    "export_scores_csv",
    "export_supports_csv",
    "format_float",
    "fit_decision_tree",
    "fit_report_document",
    "gmm_parameter_count",
    "ill_component",
    "information_criteria",
    "iter_nodes",
    "lattice_to_dot",
    "leaf_count",
    "load_inputs",
    "load_questionnaire",
    "load_weight_matrix",
    "mean_weights",
    "merge_questionnaire",
    "node_count",
    "normalize_sums",
    "parse_merge_rule",
    "predict",
    "predict_matrix",
    "prepare",
    "prune_tree",
    "read_cxt",
    "read_scores_csv",
    "run_pipeline",
    "score_patient",
    "select_component_count",
    "silverman_bandwidth",
    "tree_depth",
    "tree_to_dot",
    "write_json",
    "validate_case",
    "validate_thresholds",
    "validate_weights",
    "weight_sum",
    "weight_sum_table",
    "weight_sums",
    "write_artifacts",
]
