"""Error hierarchy for the toolkit.

Every error carries a process exit code and a structured ``detail`` mapping so the
CLI can report it without parsing messages.
"""

from typing import Any

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class ScaffoldError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = EXIT_VALIDATION

    def __init__(self, message: str, **detail: Any) -> None:
        super().__init__(message)
        self.message = message
        self.detail: dict[str, Any] = detail

    def to_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.detail}


class ConfigError(ScaffoldError):
    """Invalid command-line flags or settings."""

    exit_code = EXIT_USAGE


class ScaffoldIOError(ScaffoldError):
    """File could not be read or written."""

    exit_code = EXIT_IO


# Scene model
class SceneFormatError(ScaffoldError):
    """Scene document is malformed or violates a scene invariant."""


# Geometry
class GeometryError(ScaffoldError):
    pass


class NonFiniteError(GeometryError):
    pass


class DegenerateFrameError(GeometryError):
    """First camera's optical axis is (nearly) vertical."""


class GimbalDegenerateError(GeometryError):
    """Box local x-axis is (nearly) vertical, so yaw is ill-defined."""


class MissingTrajectoryError(GeometryError):
    """Scene has no camera trajectory, so no unified frame exists."""


# LocalCogMap
class CogMapError(ScaffoldError):
    pass


class CoincidentAnchorsError(CogMapError):
    pass


# Scene graph
class SceneGraphError(ScaffoldError):
    pass


class TooFewObjectsError(SceneGraphError):
    pass


class InstanceTooLargeError(SceneGraphError):
    pass


class UnknownObjectError(SceneGraphError):
    pass


class NonRigidGraphError(SceneGraphError):
    pass


class GraphFormatError(SceneGraphError):
    """Graph document is malformed."""


class AlignmentError(ScaffoldError):
    pass


# Referral / QA
class ReferralDataError(ScaffoldError):
    """Scene data needed by a referral strategy is missing."""


class QAEmissionError(ScaffoldError):
    pass


# Metrics
class AnswerParseError(ScaffoldError):
    pass


class NoParseError(AnswerParseError):
    pass


class OutOfRangeError(AnswerParseError):
    pass


class InvalidSizeError(AnswerParseError):
    pass


class MetricsError(ScaffoldError):
    pass


class SchemaMismatchError(ScaffoldError):
    pass
