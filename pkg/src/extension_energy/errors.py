"""Exception hierarchy shared by all modules."""


class ExtensionEnergyError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ExtensionEnergyError, ValueError):
    """Invalid construction parameters (measure digits, ratios, configs)."""


class DomainError(ExtensionEnergyError, ValueError):
    """Argument outside the mathematical domain of an evaluation."""


class SizeError(ExtensionEnergyError, MemoryError):
    """A requested object would exceed a configured size cap, or is empty."""


class RangeError(ExtensionEnergyError, IndexError):
    """A cached table does not cover the frequencies an operation needs."""


class AliasingError(ExtensionEnergyError, ValueError):
    """Quadrature resolution is too coarse for the integrand's bandwidth."""
