"""
Exception hierarchy

Library code raises these; the command line turns them into exit codes.
"""


class SafetyLossError(Exception):
    """Root of every error raised by this project."""


class SceneFormatError(SafetyLossError):
    """A scene or detection file could not be parsed."""

    def __init__(self, path, message, line=None, column=None):
        self.path = str(path)
        self.line = line
        self.column = column
        locus = self.path if line is None else f"{self.path}:{line}:{column}"
        super().__init__(f"{locus}: {message}")


class SceneValidationError(SafetyLossError):
    """A loaded value breaks one of the scene invariants."""

    def __init__(self, frame_id, field, message):
        self.frame_id = frame_id
        self.field = field
        super().__init__(f"frame {frame_id!r}, field {field!r}: {message}")


class DetectionFormatError(SceneFormatError):
    pass


class DiscontinuousMapError(SafetyLossError):
    pass


class OutOfPathError(SafetyLossError):
    pass


class GridMismatchError(SafetyLossError):
    pass


class DomainError(SafetyLossError, ValueError):
    """An argument lies outside the domain of a formula."""


class CalibrationError(SafetyLossError):
    pass


class MissingAnnotationError(SafetyLossError):
    pass


class ConfigError(SafetyLossError):
    pass
