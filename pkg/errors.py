# errors.py
from __future__ import annotations


class ElocusError(Exception):
    """Base class for every error raised by the locus pipeline."""


class PresentationError(ElocusError):
    """Manifold file or presentation is unusable (schema, letters, homology)."""


class AlexanderError(ElocusError):
    pass


class TrackingError(ElocusError):
    """Fatal failure while following the fiber around the unit circle."""


class PolishError(ElocusError):
    pass


class RealityError(ElocusError):
    """Intertwiner for the complex conjugate representation is degenerate."""


class LiftError(ElocusError):
    """A lift to the universal cover could not be formed or adjusted."""


class PeripheralTypeError(ElocusError):
    """Boundary representation is hyperbolic, so it has no locus sample."""


class ConfigError(ElocusError):
    """Run configuration rejected (bad values, frame dump from another config)."""
