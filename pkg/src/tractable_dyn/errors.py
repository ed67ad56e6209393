"""Exception taxonomy shared by all toolkit modules.

Validation failures describe rejected *input*; the remaining classes signal
resource caps and numerical or internal-consistency breakdowns.  The CLI maps
these onto distinct exit codes.
"""


class TractableDynError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TractableDynError):
    """Input violates a documented precondition or file-format rule."""


class ElementMismatchError(ValidationError):
    """Two objects that must share an element list do not."""


class DomainError(ValidationError):
    """An element has no outgoing edge where full domain is required."""


class WordError(ValidationError):
    """A symbol sequence is not a word of the relevant relation."""


class CoverError(ValidationError):
    """A matrix is not a stochastic cover of the given relation."""


class NotTerminalError(ValidationError):
    """A class passed where a terminal basic set is required is not one."""


class NotStationaryError(ValidationError):
    """A vector fails the stationarity residual required by the caller."""


class SubdivisionError(ValidationError):
    """A complex is not a (proper) subdivision of the target complex."""


class DegenerateMapError(ValidationError):
    """A vertex map collapses or tears a simplex where forbidden."""


class MapRangeError(ValidationError):
    """A sampled map leaves the polyhedron it must map into."""


class CapExceededError(TractableDynError):
    """An enumeration would exceed the configured cell cap."""


class CorrespondenceError(TractableDynError):
    """Cross-checked structure on two alphabets failed to match."""


class NumericalError(TractableDynError):
    """A numerical routine could not reach its required residual."""
