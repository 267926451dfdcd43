"""Exception types shared across the package."""


class VadsError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(VadsError, ValueError):
    """Points with incompatible dimensions were combined."""


class DegenerateDatasetError(VadsError, ValueError):
    """Dataset contains duplicate points, so the closest-pair distance is 0."""


class DegenerateQueryError(VadsError, ValueError):
    """Query coincides with its nearest neighbor; approximation ratio undefined."""
