"""Exception types raised by the lfbp library.

All library errors derive from :class:`LfbpError` so callers can catch one
base class.  The CLI maps these onto nonzero exit codes.
"""


class LfbpError(Exception):
    """Base class for all lfbp errors."""


class InvalidDims(LfbpError):
    """Dimension tuple violates the array contract (even cell, n_s < n_x, ...)."""


class DimsError(LfbpError):
    """A file header carries dimensions that violate the array contract."""


class FormatError(LfbpError):
    """A file is not a well-formed LF5 container."""


class IoError(LfbpError):
    """An underlying read or write failed."""


class DimMismatch(LfbpError):
    """Operands of an operation have incompatible dimensions."""


class EvenPixelDims(LfbpError):
    """Inverse rearrangement requested for even pixel dimensions (lossy)."""


class NonFiniteInput(LfbpError):
    """An input array contains NaN or infinity."""


class LayoutMismatch(LfbpError):
    """Lenslet layout cell does not match the requested array cell."""


class SynthesisError(LfbpError):
    """PSF synthesis produced a degenerate (all-zero) pattern."""


class VerificationFailure(LfbpError):
    """Fast and reference results disagree where they must be identical."""
