"""Exception hierarchy shared across the package."""


class RodentSegError(Exception):
    """Base class for all package errors."""


class LayoutError(RodentSegError):
    """An image has the wrong channel layout for the requested operation."""


class DimensionError(RodentSegError):
    """Image / mask dimensions are inconsistent or unsupported."""


class ParameterError(RodentSegError):
    """A parameter value is outside its valid range."""


class IngestError(RodentSegError):
    """A file could not be ingested (bad format, missing sidecar, size mismatch)."""


class SeedError(RodentSegError):
    """A tracker seed point has no region within reach."""


class TrackingLost(RodentSegError):
    """Raised when no candidate object remains inside the tracking ROI."""
