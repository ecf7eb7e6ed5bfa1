"""Typed errors shared across the package."""


class ValleysimError(Exception):
    """Base class for all package errors."""


class DegeneracyError(ValleysimError):
    """Off-diagonal dipole requested between (near-)degenerate bands."""


class ParseError(ValleysimError):
    """Malformed numeric token in an input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(ValleysimError):
    """Structurally wrong input file (counts, ordering, truncation)."""


class ValidationError(ValleysimError):
    """Parsed data violates a physical consistency requirement."""


class MissingPositions(ValleysimError):
    """tb output requested for a model without position matrices."""


class FermiLevelError(ValleysimError):
    """Configured Fermi level cuts through a band."""


class StepBlowupError(ValleysimError):
    """Density-matrix element exceeded its physical bound; dt too large."""

    def __init__(self, message, k_index=None, k_point=None):
        super().__init__(message)
        self.k_index = k_index
        self.k_point = k_point


class PlaquetteSingular(ValleysimError):
    """Berry-phase link overlap vanished (band crossing inside a cell)."""


class ShapeMismatch(ValleysimError):
    """Array shapes of populations / curvature / grid disagree."""


class WindowTooSmall(ValleysimError):
    """Fit window contains too few samples."""


class ConfigError(ValleysimError):
    """Run configuration failed validation."""

    def __init__(self, message, section=None, key=None):
        loc = ".".join(x for x in (section, key) if x)
        if loc:
            message = f"[{loc}] {message}"
        super().__init__(message)
        self.section = section
        self.key = key
