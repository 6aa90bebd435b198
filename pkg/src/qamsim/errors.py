"""Exception types shared across the package."""


class QamError(Exception):
    """Base class for all package errors."""


class ConfigError(QamError):
    """Invalid run configuration or parameter combination."""


class NumericsError(QamError):
    """A numerical procedure failed to meet its accuracy contract."""


class UnderResolvedError(NumericsError):
    """Momentum ladder too small: tail mass exceeded the threshold."""


class GaugeFixingError(NumericsError):
    """Eigenvector gauge smoothing failed (imaginary residue too large)."""


class OrbitNotFoundError(NumericsError):
    """Newton search did not converge to a periodic orbit."""


class GridMismatchError(ConfigError):
    """Operands were sampled on incompatible grids."""
