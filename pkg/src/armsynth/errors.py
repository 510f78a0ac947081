"""Exception hierarchy shared by every armsynth subsystem.

Each class corresponds to one error code surfaced through the CLI and the
HTTP service, so callers can branch on type rather than message text.
"""


class ArmsynthError(Exception):
    """Base class for all armsynth errors."""

    code = "error"


class CatalogError(ArmsynthError):
    """Module-catalog file is malformed."""

    code = "catalog-error"


class GrammarError(ArmsynthError):
    """Grammar is malformed (undeclared symbol, bad production shape)."""

    code = "grammar-error"


class AlphabetError(ArmsynthError):
    """A word contains a token outside the declared alphabet."""

    code = "alphabet-error"


class StructureError(ArmsynthError):
    """A token sequence violates the node/edge alternation shape."""

    code = "structure-error"


class ResourceError(ArmsynthError):
    """A configured resource cap (enumeration depth, cells, pivots) was hit."""

    code = "resource-error"


class ModelError(ArmsynthError):
    """A robot model cannot be assembled from the given word/parameters."""

    code = "model-error"


class ParameterError(ArmsynthError):
    """A numeric parameter is outside its valid range."""

    code = "parameter-error"


class ReachabilityError(ArmsynthError):
    """A kinematic target lies outside the reachable set of the arm.

    Consumed by the synthesis loop as evidence that the current structure
    must be relaxed.
    """

    code = "reachability-error"


class OutOfWorkspaceError(ArmsynthError):
    """A point to classify lies outside the workspace bounding box."""

    code = "out-of-workspace"


class WorkspaceError(ArmsynthError):
    """Workspace description is malformed or inconsistent."""

    code = "workspace-error"


class SpecError(ArmsynthError):
    """A task specification is inconsistent with the workspace."""

    code = "spec-error"


class DomainError(ArmsynthError):
    """An argument violates a mathematical domain requirement."""

    code = "domain-error"


class NumericError(ArmsynthError):
    """A numeric routine failed beyond recovery (non-PD matrix, etc.)."""

    code = "numeric-error"


class StructuralExhaustion(ArmsynthError):
    """No further structural relaxation is allowed by the limits."""

    code = "structural-exhaustion"
