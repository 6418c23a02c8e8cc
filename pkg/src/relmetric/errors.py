"""Exception types shared across the package."""


class RelmetricError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------- ingestion

class SchemaError(RelmetricError):
    """A schema manifest or one of its data files is inconsistent."""


class MissingFileError(SchemaError):
    """A manifest or data file does not exist."""


class UnknownColumnError(SchemaError):
    """A declared column is absent from the file header."""


class DuplicateEntityIdError(SchemaError):
    """An entity key appears more than once in its table."""


class DanglingForeignKeyError(SchemaError):
    """An association row references an entity key that does not exist."""


class UnknownEntityError(RelmetricError):
    """A queried entity key is not present in the table."""


# ------------------------------------------------------------ link strength

class ParentNotCommonError(RelmetricError):
    """The given parent is not a common parent of the queried pair."""


class NoAssociationAttributesError(RelmetricError):
    """The association table declares no attributes (alpha + beta = 0)."""


# -------------------------------------------------------------- constraints

class ConstraintError(RelmetricError):
    """Base class for constraint-generation failures."""


class NotEnoughEntitiesError(ConstraintError):
    """Fewer than two entities available for pair sampling."""


class SingleClassError(ConstraintError):
    """All labels identical: no dissimilar pair can be formed."""


class NoLabelsError(ConstraintError):
    """The target table carries no labels."""


class GraphEmptyError(ConstraintError):
    """No pair of entities shares a parent."""


class GraphCompleteError(ConstraintError):
    """Every pair of entities shares a parent: no disconnected pair exists."""


class EmptySourceError(ConstraintError):
    """A constraint source required for mixing is empty."""


class EmptyConstraintSetError(ConstraintError):
    """Similar or dissimilar side is empty where both are required."""


# ------------------------------------------------------------------- metric

class MetricError(RelmetricError):
    """Base class for metric-algebra failures."""


class DimensionMismatchError(MetricError):
    """Vector dimension does not match the metric dimension."""


class NonSymmetricError(MetricError):
    """A matrix expected to be symmetric is not."""


class NotPsdError(MetricError):
    """A matrix expected to be positive semi-definite is not."""


# --------------------------------------------------------------- evaluation

class EvaluationError(RelmetricError):
    """Base class for evaluation-harness failures."""


class FoldTooSmallError(EvaluationError):
    """A cross-validation fold has fewer training points than k."""


class TooFewTrainingPointsError(EvaluationError):
    """k-NN asked for more neighbours than training points exist."""


class InvalidCorrelationError(EvaluationError):
    """Synthetic link/label correlation outside [0, 1]."""
