"""Exception types shared across the package."""


class TrackProjError(Exception):
    """Base class for all package-specific errors."""


class PointAtInfinityError(TrackProjError):
    """A projective map sent a point to (or near) the plane at infinity."""


class DegenerateGeometryError(TrackProjError):
    """Point configuration or linear system too degenerate to solve."""


class ImageTooSmallError(TrackProjError):
    """Operation needs a larger raster than was supplied."""


class EmptyMaskError(TrackProjError):
    """A reduction over a mask found no selected pixels."""


class EmptySelectionError(TrackProjError):
    """Pixel selection (after erosion) removed every candidate pixel."""


class CellTooSmallError(TrackProjError):
    """Chessboard cells would fall below the minimum rasterizable size."""


class DarkInputError(TrackProjError):
    """Scene too dark for the requested photometric operation."""


class DetectionFailureError(TrackProjError):
    """Marker detection failed; caller may retry with new frames."""


class InfeasibleWeightingError(TrackProjError):
    """Slot counts cannot realize the requested LED weighting in range."""


class PlaneBehindCameraError(TrackProjError):
    """The tracked plane is behind (or through) a device center."""


class OutOfBoundsError(TrackProjError):
    """A sample point fell outside the source raster."""
