"""Exception types shared across the package.

All geometry errors derive from ValueError so callers that only care
about "bad input" can catch one class.
"""


class GeometryError(ValueError):
    """Invalid geometric input (non-finite, wrong shape, broken invariant)."""


class BehindCameraError(GeometryError):
    """Point has negative depth and cannot be projected."""


class DegenerateDepthError(GeometryError):
    """Depth or homogeneous w is too close to zero to normalize."""


class ExcessiveRotationError(GeometryError):
    """A rotation pushed a source corner ray 90 degrees or more off-axis."""


class InvalidHomographyError(GeometryError):
    """Homography matrix is singular or otherwise unusable."""


class CanvasTooLargeError(GeometryError):
    """Requested output canvas exceeds the configured size limit."""


class DataError(ValueError):
    """Dataset record failed to parse or violates the schema."""
