"""Exception types shared across the package."""


class CavityParityError(Exception):
    """Base class for all package errors."""


class CapacityError(CavityParityError):
    """Requested Hilbert-space dimension exceeds the configured memory cap."""


class ConfigError(CavityParityError):
    """Invalid or unrecognised experiment configuration."""


class SingularDetuningError(CavityParityError):
    """Effective rates requested at delta = 0."""


class NumericalError(CavityParityError):
    """Integrator step-size underflow, trace drift, or similar failure."""
