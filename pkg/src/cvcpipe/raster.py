"""Core raster types and the image-processing primitives the pipeline builds on.

Images are stored row-major as 2-D numpy arrays of shape (height, width).
Coordinates in polylines are (x, y) with x running along columns and y along
rows, origin at the top-left pixel center. All operations here are pure
functions on effectively immutable inputs (the wrapper types mark their
buffers read-only), so they are safe to call concurrently.
"""
from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np
from scipy import ndimage

from .errors import BoundsError, ShapeMismatchError


class CvcClass(enum.Enum):
    """Catheter classes distinguished by the spatial prior atlas."""

    PICC_LEFT = "PICC_LEFT"
    PICC_RIGHT = "PICC_RIGHT"
    IJ = "IJ"
    SUBCLAVIAN = "SUBCLAVIAN"
    SWAN_GANZ = "SWAN_GANZ"


#: Canonical ordering used for priors, feature blocks and serialization.
PRIOR_CLASSES = (
    CvcClass.PICC_LEFT,
    CvcClass.PICC_RIGHT,
    CvcClass.IJ,
    CvcClass.SUBCLAVIAN,
    CvcClass.SWAN_GANZ,
)

#: The four type indicators reported by the classifier (left/right PICC merge).
TYPE_INDICATORS = ("PICC", "IJ", "SUBCLAVIAN", "SWAN_GANZ")

#: Anatomy regions rendered by the phantom generator, in feature-block order.
ANATOMY_REGIONS = ("LUNGS", "HEART", "MEDIASTINUM", "CLAVICLES")


def indicator_of(cvc_class: CvcClass) -> str:
    """Map a prior class to its type indicator (both PICC sides -> PICC)."""
    if cvc_class in (CvcClass.PICC_LEFT, CvcClass.PICC_RIGHT):
        return "PICC"
    return cvc_class.value


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


def _check_unit_interval(data: np.ndarray, what: str) -> None:
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise ShapeMismatchError(f"{what} must be a 2-D array with positive dims, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what} contains non-finite values")
    if data.min() < 0.0 or data.max() > 1.0:
        raise ValueError(f"{what} values must lie in [0, 1], got range [{data.min()}, {data.max()}]")


@dataclasses.dataclass(frozen=True)
class GrayImage:
    """Radiograph-like intensity raster with values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        _check_unit_interval(data, "GrayImage")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclasses.dataclass(frozen=True)
class ProbMap:
    """Soft per-pixel probability raster with values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        _check_unit_interval(data, "ProbMap")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclasses.dataclass(frozen=True)
class BinaryMask:
    """Hard segmentation raster."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.bool_:
            data = data.astype(bool)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeMismatchError(f"BinaryMask must be 2-D with positive dims, got {data.shape}")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def count(self) -> int:
        return int(self.data.sum())


@dataclasses.dataclass(frozen=True)
class PolylineAnnotation:
    """One catheter traced from its insertion origin to its tip.

    points: (n, 2) array of (x, y) pixel coordinates, n >= 2, consecutive
    points distinct. Bounds are validated against a concrete raster when the
    polyline is rasterized.
    """

    points: np.ndarray
    cvc_class: CvcClass
    image_id: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError(f"polyline needs >= 2 (x, y) points, got array of shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("polyline contains non-finite coordinates")
        if np.any(np.all(np.diff(pts, axis=0) == 0.0, axis=1)):
            raise ValueError("consecutive polyline points must be distinct")
        if not isinstance(self.cvc_class, CvcClass):
            raise ValueError(f"cvc_class must be a CvcClass, got {self.cvc_class!r}")
        object.__setattr__(self, "points", _freeze(pts))


def _require_same_shape(a, b, what: str) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"{what}: shapes differ, {a.data.shape} vs {b.data.shape}")


def disk_footprint(radius: float) -> np.ndarray:
    """Boolean discrete disk {(dx, dy): dx^2 + dy^2 <= radius^2}."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = int(math.floor(radius))
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    return (dx * dx + dy * dy) <= radius * radius


def dilate(mask: BinaryMask, radius: float) -> BinaryMask:
    """Morphological dilation by a discrete disk. Radius 0 is the identity."""
    foot = disk_footprint(radius)
    if foot.shape == (1, 1):
        return mask
    out = ndimage.binary_dilation(mask.data, structure=foot)
    return BinaryMask(out)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian kernel truncated at +/- ceil(3 sigma)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return np.ones(1)
    r = int(math.ceil(3.0 * sigma))
    k = np.arange(-r, r + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return w / w.sum()


def _blur_array(data: np.ndarray, sigma: float) -> np.ndarray:
    # Separable convolution; 'mirror' reflects about the edge pixel so
    # constants are preserved exactly and priors do not darken at borders.
    if sigma == 0:
        return np.array(data, copy=True)
    w = gaussian_kernel(sigma)
    out = ndimage.correlate1d(data, w, axis=0, mode="mirror")
    out = ndimage.correlate1d(out, w, axis=1, mode="mirror")
    return out


def gaussian_blur(pmap: ProbMap, sigma: float) -> ProbMap:
    """Blur with a normalized separable Gaussian, reflective boundaries."""
    if sigma == 0:
        return pmap
    out = _blur_array(pmap.data, sigma)
    np.clip(out, 0.0, 1.0, out=out)
    return ProbMap(out)


def rasterize_polyline(ann: PolylineAnnotation, width: int, height: int, thickness: float) -> BinaryMask:
    """Set every pixel whose center lies within thickness/2 of the polyline."""
    try:
        return rasterize_path(ann.points, width, height, thickness)
    except BoundsError:
        raise BoundsError(
            f"polyline for image {ann.image_id!r} has points outside {width}x{height} bounds"
        ) from None


def rasterize_path(pts: np.ndarray, width: int, height: int, thickness: float) -> BinaryMask:
    """rasterize_polyline on a bare (n, 2) array of (x, y) points."""
    if thickness < 1:
        raise ValueError("thickness must be >= 1")
    pts = np.asarray(pts, dtype=np.float64)
    if (
        pts[:, 0].min() < 0.0
        or pts[:, 1].min() < 0.0
        or pts[:, 0].max() > width - 1
        or pts[:, 1].max() > height - 1
    ):
        raise BoundsError(f"path has points outside {width}x{height} bounds")
    half = thickness / 2.0
    out = np.zeros((height, width), dtype=bool)
    margin = int(math.ceil(half)) + 1
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        lo_x = max(0, int(math.floor(min(x0, x1))) - margin)
        hi_x = min(width - 1, int(math.ceil(max(x0, x1))) + margin)
        lo_y = max(0, int(math.floor(min(y0, y1))) - margin)
        hi_y = min(height - 1, int(math.ceil(max(y0, y1))) + margin)
        ys, xs = np.mgrid[lo_y : hi_y + 1, lo_x : hi_x + 1]
        dx, dy = x1 - x0, y1 - y0
        seg_len2 = dx * dx + dy * dy
        t = ((xs - x0) * dx + (ys - y0) * dy) / seg_len2
        np.clip(t, 0.0, 1.0, out=t)
        ex = xs - (x0 + t * dx)
        ey = ys - (y0 + t * dy)
        out[lo_y : hi_y + 1, lo_x : hi_x + 1] |= (ex * ex + ey * ey) <= half * half
    return BinaryMask(out)


_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def connected_components(mask: BinaryMask) -> list[np.ndarray]:
    """8-connected components as (k, 2) arrays of (row, col) pixels.

    Pixels within each component are in row-major order; components are
    ordered by (min row, min col) with the first row-major pixel as a
    tie-break, so the partition is deterministic.
    """
    labels, n = ndimage.label(mask.data, structure=_EIGHT_CONNECTED)
    if n == 0:
        return []
    rows, cols = np.nonzero(mask.data)  # row-major order
    comps = []
    lab_of_pix = labels[rows, cols]
    for lab in range(1, n + 1):
        sel = lab_of_pix == lab
        comps.append(np.column_stack((rows[sel], cols[sel])))
    comps.sort(key=lambda c: (int(c[:, 0].min()), int(c[:, 1].min()), int(c[0, 0]), int(c[0, 1])))
    return comps


def overlap_fraction(auto: BinaryMask, truth: BinaryMask, dilation_radius: float) -> float:
    """Fraction of auto-segmented pixels explained by the dilated truth.

    Returns |auto & dilate(truth, r)| / |auto|. Both masks empty -> 1.0;
    empty auto against non-empty truth -> 0.0 (callers that report should
    flag this case, see cvcpipe.evaluation.seg_overlap_report).
    """
    _require_same_shape(auto, truth, "overlap_fraction")
    n_auto = auto.count()
    if n_auto == 0:
        return 1.0 if truth.count() == 0 else 0.0
    hit = np.logical_and(auto.data, dilate(truth, dilation_radius).data).sum()
    return float(hit) / float(n_auto)


def threshold_map(pmap: ProbMap, threshold: float = 0.5) -> BinaryMask:
    """Hard mask of pixels strictly above the threshold."""
    return BinaryMask(pmap.data > threshold)
