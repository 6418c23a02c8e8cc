"""Mahalanobis metric learning on relational data.

Entity tables linked by an association table are turned into similar and
dissimilar training pairs by ranking sampled pairs on their link strength
(shared-parent side information); the pairs feed threshold-projection
(ITML-style) and relative-comparison (LSML-style) metric learners, whose
output is evaluated with cross-validated k-NN classification.
"""

from . import errors
from ._kernels import backend_name
from .constraints import (
    ConstraintBudget,
    PairConstraintSet,
    Provenance,
    RelativeTripleSet,
    build_relative_triples,
    label_constraints,
    mix_constraints,
    neighbour_graph_constraints,
    relative_link_constraints,
    sample_distinct_pairs,
    select_link_strength_constraints,
    write_comparisons,
)
from .evaluation import (
    CONDITIONS,
    DEFAULT_PROPORTIONS,
    EvalConfig,
    ExperimentResult,
    RecordingParentIndex,
    cross_validate,
    knn_predict,
    knn_predict_batch,
    make_folds,
    proportion_sweep,
)
from .ingest import export_schema, load_schema
from .itml import ItmlConfig, ItmlLog, itml_fit
from .linkstrength import (
    LinkStrengthParams,
    LinkStrengthTable,
    categorical_affinity,
    default_gamma,
    link_strength,
    numeric_affinity,
    params_for,
    strength_breakdown,
)
from .lsml import LsmlConfig, LsmlLog, lsml_fit, lsml_gradient, lsml_loss
from .metric import (
    MahalanobisMetric,
    Thresholds,
    estimate_thresholds,
    identity_metric,
    linear_projection,
    load_metric,
    pairwise_squared_distances,
    project_psd,
    save_metric,
    squared_distance,
)
from .movielens import GENRES, load_movielens, quantile_bins
from .schema import (
    AssociationTable,
    AttributeKind,
    EntityTable,
    ParentIndex,
    RelationalSchema,
    normalize_association_numerics,
)
from .synthetic import generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "errors",
    "backend_name",
    "AttributeKind",
    "EntityTable",
    "AssociationTable",
    "ParentIndex",
    "RelationalSchema",
    "normalize_association_numerics",
    "load_schema",
    "export_schema",
    "LinkStrengthParams",
    "LinkStrengthTable",
    "default_gamma",
    "params_for",
    "numeric_affinity",
    "categorical_affinity",
    "link_strength",
    "strength_breakdown",
    "Provenance",
    "PairConstraintSet",
    "RelativeTripleSet",
    "ConstraintBudget",
    "sample_distinct_pairs",
    "select_link_strength_constraints",
    "label_constraints",
    "relative_link_constraints",
    "mix_constraints",
    "build_relative_triples",
    "neighbour_graph_constraints",
    "write_comparisons",
    "MahalanobisMetric",
    "identity_metric",
    "squared_distance",
    "pairwise_squared_distances",
    "linear_projection",
    "project_psd",
    "Thresholds",
    "estimate_thresholds",
    "save_metric",
    "load_metric",
    "ItmlConfig",
    "ItmlLog",
    "itml_fit",
    "LsmlConfig",
    "LsmlLog",
    "lsml_fit",
    "lsml_loss",
    "lsml_gradient",
    "EvalConfig",
    "ExperimentResult",
    "RecordingParentIndex",
    "knn_predict",
    "knn_predict_batch",
    "make_folds",
    "cross_validate",
    "proportion_sweep",
    "CONDITIONS",
    "DEFAULT_PROPORTIONS",
    "generate_synthetic",
    "GENRES",
    "load_movielens",
    "quantile_bins",
    "__version__",
]
