"""Neonatal risk-factor learning toolkit.

Pipeline pieces: a fixed risk-factor schema and CSV datasets, minority
oversampling, decision-tree and Bayesian-network classifiers, Weka-style
evaluation, and an HTTP prediction service with an operator CLI.
"""

from .bayesnet import (
    BayesNetModel,
    Dag,
    StructureParams,
    bn_from_json,
    bn_to_json,
    eliminate,
    export_bn_dot,
    fit_cpts,
    learn_structure,
    markov_blanket,
    predict_bn,
    score_network,
)
from .dataset import (
    Dataset,
    DatasetView,
    PatientRecord,
    feature_view,
    make_record,
    parse_dataset,
    write_dataset,
)
from .dtree import (
    DecisionTreeModel,
    TreeParams,
    entropy,
    export_tree_dot,
    gain_ratio,
    induce,
    predict_tree,
    prune,
    tree_from_json,
    tree_to_json,
)
from .errors import NatalRiskError
from .evaluation import (
    ConfusionMatrix,
    EvaluationReport,
    LearnerConfig,
    MetricsRow,
    confusion_and_metrics,
    cross_validate,
    render_report,
    stratified_folds,
)
from .schema import FactorDef, RiskFactorSchema, builtin_schema
from .service import create_app
from .smote import SmoteParams, minority_neighbors, smote, synthesize_one
from .synthetic import CorrelationSpec, PlantedRule, demo_cohort_spec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "BayesNetModel", "ConfusionMatrix", "CorrelationSpec", "Dag", "Dataset",
    "DatasetView", "DecisionTreeModel", "EvaluationReport", "FactorDef",
    "LearnerConfig", "MetricsRow", "NatalRiskError", "PatientRecord",
    "PlantedRule", "RiskFactorSchema", "SmoteParams", "StructureParams",
    "TreeParams", "bn_from_json", "bn_to_json", "builtin_schema",
    "confusion_and_metrics", "create_app", "cross_validate", "demo_cohort_spec",
    "eliminate", "entropy", "export_bn_dot", "export_tree_dot", "feature_view",
    "fit_cpts", "gain_ratio", "generate_synthetic", "induce", "learn_structure",
    "make_record", "markov_blanket", "minority_neighbors", "parse_dataset",
    "predict_bn", "predict_tree", "prune", "render_report", "score_network",
    "smote", "stratified_folds", "synthesize_one", "tree_from_json",
    "tree_to_json", "write_dataset",
]
