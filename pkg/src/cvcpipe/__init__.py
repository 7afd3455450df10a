"""Catheter detection and type classification on synthetic chest phantoms.

Pipeline stages: phantom synthesis -> approximate segmentation -> spatial
prior / anatomy / shape features -> random-forest presence and type
classifiers -> cross-validated evaluation. See README.md for the tour and
the `cvcpipe` command line for the stage-by-stage interface.
"""

from .raster import (
    ANATOMY_REGIONS,
    PRIOR_CLASSES,
    TYPE_INDICATORS,
    BinaryMask,
    CvcClass,
    GrayImage,
    PolylineAnnotation,
    ProbMap,
)

__version__ = "0.1.0"

__all__ = [
    "ANATOMY_REGIONS",
    "PRIOR_CLASSES",
    "TYPE_INDICATORS",
    "BinaryMask",
    "CvcClass",
    "GrayImage",
    "PolylineAnnotation",
    "ProbMap",
    "__version__",
]
