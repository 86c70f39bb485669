"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: parameter/format/metadata problems
exit 1, capacity guards exit 2, numerical failures exit 3.
"""


class ManifoldMasksError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ManifoldMasksError, ValueError):
    """An argument is out of range or inconsistent with the data."""


class FormatError(ManifoldMasksError, ValueError):
    """An input file does not match its declared format."""


class MetadataError(ManifoldMasksError, ValueError):
    """Sidecar metadata is inconsistent with the data it describes."""


class DegenerateDataError(ManifoldMasksError, ValueError):
    """Duplicate or otherwise degenerate points make an operation undefined."""


class CapacityError(ManifoldMasksError, RuntimeError):
    """An exhaustive operation would exceed its guard-rail size."""


class NumericalError(ManifoldMasksError, RuntimeError):
    """A numerical routine (solver, eigendecomposition) failed."""


class DisconnectedGraphError(ManifoldMasksError, ValueError):
    """The neighborhood graph is disconnected where connectivity is required."""
