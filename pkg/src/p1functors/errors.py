"""Error taxonomy shared by every module.

Each class carries a stable machine-readable code used by the CLI for
exit statuses and error JSON.
"""


class EngineError(Exception):
    code = "ENGINE_ERROR"


class NotContainedError(EngineError):
    code = "NOT_CONTAINED"


class SingularPencilError(EngineError):
    code = "SINGULAR_PENCIL"


class SplitFailureError(EngineError):
    code = "SPLIT_FAILURE"


class NoStabilizationError(EngineError):
    code = "NO_STABILIZATION"


class WindowTooSmallError(EngineError):
    code = "WINDOW_TOO_SMALL"


class EqualPointsError(EngineError):
    code = "EQUAL_POINTS"


class WindowMismatchError(EngineError):
    code = "WINDOW_MISMATCH"


class NotAdmissibleError(EngineError):
    code = "NOT_ADMISSIBLE"


class FieldExhaustedError(EngineError):
    code = "FIELD_EXHAUSTED"


class DisagreementError(EngineError):
    """A set of provably-equivalent verdicts disagreed: engine bug or corrupt input."""

    code = "DISAGREEMENT"
