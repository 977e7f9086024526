"""Sobel gradients, orientation estimates and Canny edge extraction.

All vectors use the centered frame: ``gx`` is positive toward increasing
column, ``gy`` positive toward *decreasing* row (up).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import MIN_SIDE, GrayImage

__all__ = [
    "GradientField",
    "EdgeMap",
    "sobel",
    "orientation_full",
    "orientation_half",
    "magnitude",
    "canny_edges",
    "gradient_to_images",
    "DEFAULT_CANNY_HIGH",
    "DEFAULT_LOW_RATIO",
]

DEFAULT_CANNY_HIGH = 210.0
DEFAULT_LOW_RATIO = 0.4

_KX = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
# Row 0 of the stencil is the row above, i.e. +y.
_KY = np.array([[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]])


@dataclass(frozen=True, eq=False)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        if self.gx.shape != self.gy.shape or self.gx.ndim != 2:
            raise ValueError("gx and gy must be 2-D arrays of equal shape")

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]

    def magnitude(self, norm: str = "l2") -> np.ndarray:
        return magnitude(self.gx, self.gy, norm=norm)

    def orientation(self) -> np.ndarray:
        """Full-range orientation in degrees, NaN where the gradient vanishes."""
        theta = _wrap180(np.degrees(np.arctan2(self.gy, self.gx)))
        return np.where((self.gx == 0) & (self.gy == 0), np.nan, theta)

    def negated(self) -> "GradientField":
        return GradientField(-self.gx, -self.gy)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ValueError("edge mask must be 2-D")
        object.__setattr__(self, "mask", m)

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    def __len__(self):
        return int(self.mask.sum())

    def to_image(self) -> GrayImage:
        return GrayImage(np.where(self.mask, 255, 0).astype(np.uint8))


def _wrap180(deg):
    """Map degrees into [-180, 180)."""
    return np.mod(np.asarray(deg, dtype=float) + 180.0, 360.0) - 180.0


def sobel(img: GrayImage, sigma: float = 0.0) -> GradientField:
    """3x3 Sobel gradient with edge-replicated borders.

    Parameters
    ----------
    img : GrayImage
    sigma : float
        Optional Gaussian pre-smoothing; 0 disables it.
    """
    if img.width < MIN_SIDE or img.height < MIN_SIDE:
        raise ValueError(f"Sobel needs at least a 3x3 image, got {img.width}x{img.height}")
    data = img.pixels.astype(np.float64)
    if sigma > 0:
        data = ndimage.gaussian_filter(data, sigma, mode="nearest")
    gx = ndimage.correlate(data, _KX, mode="nearest")
    gy = ndimage.correlate(data, _KY, mode="nearest")
    return GradientField(gx, gy)


def orientation_full(gx: float, gy: float) -> float:
    """Gradient direction in degrees from atan2, normalized to [-180, 180)."""
    if gx == 0 and gy == 0:
        raise ValueError("orientation of a zero gradient is undefined")
    return float(_wrap180(np.degrees(np.arctan2(gy, gx))))


def orientation_half(gx: float, gy: float) -> float:
    """Half-range direction ``atan(gy / gx)`` in degrees, within [-90, 90].

    Antipodal gradients share one value; a vertical gradient (``gx == 0``)
    reports 90.
    """
    if gx == 0 and gy == 0:
        raise ValueError("orientation of a zero gradient is undefined")
    if gx == 0:
        return 90.0
    return float(np.degrees(np.arctan(gy / gx)))


def magnitude(gx, gy, norm: str = "l2"):
    """Gradient strength; ``norm="l1"`` gives the cheaper ``|gx| + |gy|``."""
    if norm == "l2":
        return np.hypot(gx, gy)
    if norm == "l1":
        return np.abs(gx) + np.abs(gy)
    raise ValueError(f"norm must be 'l2' or 'l1', got {norm!r}")


# Neighbor offsets (drow, dcol) for the four quantized gradient directions.
# "behind" is compared strictly, "ahead" non-strictly, so a two-pixel plateau
# across a step keeps exactly one pixel.
_NMS_OFFSETS = {
    0: ((0, -1), (0, 1)),  # gradient ~ horizontal
    1: ((1, -1), (-1, 1)),  # ~45 deg: +x and +y (up)
    2: ((1, 0), (-1, 0)),  # ~vertical
    3: ((1, 1), (-1, -1)),  # ~135 deg: -x and +y
}


def _shift(a: np.ndarray, drow: int, dcol: int) -> np.ndarray:
    """``out[r, c] = a[r + drow, c + dcol]`` with zero padding."""
    out = np.zeros_like(a)
    h, w = a.shape
    rs = slice(max(0, -drow), min(h, h - drow))
    cs = slice(max(0, -dcol), min(w, w - dcol))
    out[rs, cs] = a[rs.start + drow : rs.stop + drow, cs.start + dcol : cs.stop + dcol]
    return out


def non_maximum_suppression(grad: GradientField, norm: str = "l2") -> np.ndarray:
    """Boolean mask of pixels that are local maxima across the edge.

    A neighbor whose gradient opposes the pixel's (negative dot product)
    belongs to the other flank of a thin structure and does not suppress it.
    """
    mag = grad.magnitude(norm)
    angle = np.mod(np.degrees(np.arctan2(grad.gy, grad.gx)), 180.0)
    sector = (np.floor((angle + 22.5) / 45.0).astype(int)) % 4
    keep = np.zeros(mag.shape, dtype=bool)
    for s, offsets in _NMS_OFFSETS.items():
        rivals = []
        for dr, dc in offsets:
            facing = grad.gx * _shift(grad.gx, dr, dc) + grad.gy * _shift(grad.gy, dr, dc)
            rivals.append(np.where(facing >= 0, _shift(mag, dr, dc), 0.0))
        behind, ahead = rivals
        keep |= (sector == s) & (mag > behind) & (mag >= ahead)
    keep &= mag > 0
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False
    return keep


def canny_edges(
    grad: GradientField,
    high: float = DEFAULT_CANNY_HIGH,
    low: float | None = None,
    norm: str = "l2",
) -> EdgeMap:
    """Canny edge map from a precomputed gradient field.

    Non-maximum suppression uses four direction sectors; hysteresis keeps
    pixels ``>= low`` that are 8-connected to a pixel ``>= high``. ``low``
    defaults to ``0.4 * high``. The outermost pixel frame is never an edge.
    """
    if low is None:
        low = DEFAULT_LOW_RATIO * high
    if not 0 < low <= high:
        raise ValueError(f"thresholds must satisfy 0 < low <= high, got low={low}, high={high}")
    mag = grad.magnitude(norm)
    thin = non_maximum_suppression(grad, norm)
    weak = thin & (mag >= low)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return EdgeMap(np.zeros(mag.shape, dtype=bool))
    strong_labels = np.unique(labels[weak & (mag >= high)])
    keep = np.isin(labels, strong_labels[strong_labels > 0])
    return EdgeMap(keep)


def gradient_to_images(grad: GradientField) -> tuple[GrayImage, GrayImage]:
    """Render gx and gy as mid-gray-centered images (128 means zero).

    Both components share one scale so their relative strength is preserved.
    For viewing only; the mapping is lossy.
    """
    peak = max(np.abs(grad.gx).max(), np.abs(grad.gy).max())
    scale = 127.0 / peak if peak > 0 else 0.0

    def render(g):
        return GrayImage(np.clip(np.floor(128.0 + g * scale + 0.5), 0, 255).astype(np.uint8))

    return render(grad.gx), render(grad.gy)
