"""Operator F: from a raster image to a decomposition into visual kets."""
from .decompose import (
    MAX_LEVEL,
    GestaltCurve,
    decompose,
    minimal_ket_count,
    reconstruction_error,
    segment_primitives,
)
from .fitting import (
    DegenerateArcError,
    DiscretizationLevel,
    FitResult,
    circle_of,
    fit_arc,
    fit_segment,
    kasa_circle,
    simplify,
)
from .raster import (
    DECODE_ERROR,
    NO_OBJECTS_ERROR,
    ImageDecodeError,
    ImageRaster,
    NoObjectsError,
    Polyline,
    binarize,
    extract_contours,
    load_image,
    otsu_threshold,
)

__all__ = [
    "DECODE_ERROR",
    "NO_OBJECTS_ERROR",
    "MAX_LEVEL",
    "DegenerateArcError",
    "DiscretizationLevel",
    "FitResult",
    "circle_of",
    "GestaltCurve",
    "ImageDecodeError",
    "ImageRaster",
    "NoObjectsError",
    "Polyline",
    "binarize",
    "decompose",
    "extract_contours",
    "fit_arc",
    "fit_segment",
    "kasa_circle",
    "load_image",
    "minimal_ket_count",
    "otsu_threshold",
    "reconstruction_error",
    "segment_primitives",
    "simplify",
]
