"""Exception types raised by tomocert."""


class TomographyError(ValueError):
    """Base class for all input/contract violations in this package."""


class NonHermitianInput(TomographyError):
    pass


class UnsupportedDimension(TomographyError):
    pass


class DimensionMismatch(TomographyError):
    pass


class InvalidEfficiency(TomographyError):
    pass


class NotInformationallyComplete(TomographyError):
    pass


class UnphysicalState(TomographyError):
    pass


class UnphysicalInput(TomographyError):
    pass


class InvalidThreshold(TomographyError):
    pass


class InvalidTarget(TomographyError):
    pass


class InvalidLoss(TomographyError):
    pass
