"""Grayscale rasters, binary PGM I/O, centered coordinates and synthetic scenes.

Images are stored row-major with row 0 at the top. Geometry downstream uses
centered math coordinates: x grows to the right, y grows upward, and the
origin sits on the image center (a pixel center for odd sizes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "GrayImage",
    "CenteredPoint",
    "RectSpec",
    "SceneSpec",
    "PGMError",
    "read_pgm",
    "write_pgm",
    "to_centered",
    "from_centered",
    "centered_grid",
    "generate",
]

MIN_SIDE = 3


class PGMError(ValueError):
    """Malformed or unsupported PGM payload. ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class CenteredPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit luminance raster.

    Any non-empty size is representable; gradient stages require 3x3.

    Parameters
    ----------
    pixels : array-like of shape (height, width)
        Integer luminance values in ``[0, 255]``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D raster, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("raster must not be empty")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("samples must lie in [0, 255]")
            if not np.all(np.asarray(arr) == np.round(arr)):
                raise ValueError("samples must be integers")
            arr = arr.astype(np.uint8)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> np.ndarray:
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


# -- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\v\f"


def _header_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    """Return (token, start, end) skipping whitespace and ``#`` comments."""
    n = len(data)
    while pos < n:
        if data[pos] in _WS:
            pos += 1
        elif data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], start, pos


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM with maxval <= 255."""
    data = bytes(data)
    if data[:2] != b"P5":
        raise PGMError("not a binary PGM: magic must be 'P5'", 0)
    pos = 2
    values = []
    for name in ("width", "height", "maxval"):
        tok, start, pos = _header_token(data, pos)
        if not tok:
            raise PGMError(f"truncated header: missing {name}", start)
        if not tok.isdigit():
            raise PGMError(f"malformed header: {name} {tok!r} is not a decimal integer", start)
        values.append(int(tok))
    width, height, maxval = values
    if width <= 0 or height <= 0:
        raise PGMError(f"malformed header: non-positive size {width}x{height}", 2)
    if maxval <= 0 or maxval > 255:
        raise PGMError(f"unsupported maxval {maxval}: only 8-bit samples are supported", start)
    if pos >= len(data) or data[pos] not in _WS:
        raise PGMError("malformed header: missing whitespace after maxval", pos)
    pos += 1
    need = width * height
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise PGMError(
            f"truncated payload: expected {need} bytes, found {len(payload)}", pos + len(payload)
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    if maxval < 255 and pixels.max(initial=0) > maxval:
        bad = int(np.argmax(pixels.ravel() > maxval))
        raise PGMError(f"sample exceeds maxval {maxval}", pos + bad)
    return GrayImage(pixels)


def write_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# -- coordinates ---------------------------------------------------------------


def to_centered(col: int, row: int, width: int, height: int) -> CenteredPoint:
    if not (0 <= col < width and 0 <= row < height):
        raise IndexError(f"pixel ({col}, {row}) outside a {width}x{height} image")
    return CenteredPoint(col - (width - 1) / 2, (height - 1) / 2 - row)


def from_centered(x: float, y: float, width: int, height: int) -> tuple[int, int]:
    """Inverse of :func:`to_centered` for lattice points."""
    col = x + (width - 1) / 2
    row = (height - 1) / 2 - y
    c, r = int(round(col)), int(round(row))
    if abs(c - col) > 1e-9 or abs(r - row) > 1e-9:
        raise ValueError(f"({x}, {y}) is not a pixel center of a {width}x{height} image")
    if not (0 <= c < width and 0 <= r < height):
        raise IndexError(f"({x}, {y}) lies outside a {width}x{height} image")
    return c, r


def centered_grid(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Centered (x, y) of every pixel as two ``(height, width)`` arrays."""
    xs = np.arange(width) - (width - 1) / 2
    ys = (height - 1) / 2 - np.arange(height)
    return np.meshgrid(xs, ys)


# -- synthetic scenes ----------------------------------------------------------


@dataclass(frozen=True)
class RectSpec:
    """Axis-aligned-before-rotation rectangle in centered coordinates.

    ``a`` is the extent along the rotated x axis, ``b`` along the rotated y
    axis. A pixel belongs to the rectangle when its center satisfies
    ``-a/2 <= u < a/2`` and ``-b/2 <= v < b/2`` in the rectangle frame, so an
    unrotated rectangle with integer sides covers exactly ``a * b`` pixels.
    """

    center: tuple[float, float] = (0.0, 0.0)
    a: float = 40.0
    b: float = 20.0
    intensity: int = 255
    angle: float = 0.0


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for a deterministic synthetic test image.

    Kinds
    -----
    ``stripe``
        Band of ``thickness`` pixels whose axis runs at ``angle`` degrees,
        shifted ``offset`` pixels along its left-hand normal.
    ``rectangle_scene``
        ``rects`` painted in order over the ``dark`` background.
    ``step_edge``
        Half-plane edge through ``offset`` along the normal; the edge line
        runs at ``angle`` degrees with the bright side on its left, so the
        gradient points at ``angle + 90``.
    ``single_dot``
        One ``bright`` pixel at ``point``.

    ``supersample`` > 1 renders with area coverage on an s-by-s subgrid per
    pixel; 1 uses point sampling at pixel centers.
    """

    kind: str
    width: int = 200
    height: int = 200
    angle: float = 0.0
    thickness: float = 2.0
    offset: float = 0.0
    bright: int = 255
    dark: int = 0
    rects: Sequence[RectSpec] = field(default_factory=tuple)
    point: tuple[float, float] = (0.0, 0.0)
    supersample: int = 1
    noise_seed: int = 0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("stripe", "rectangle_scene", "step_edge", "single_dot"):
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if self.width < MIN_SIDE or self.height < MIN_SIDE:
            raise ValueError("scene must be at least 3x3")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.supersample < 1:
            raise ValueError("supersample must be >= 1")
        for v in (self.bright, self.dark):
            if not 0 <= v <= 255:
                raise ValueError("intensities must lie in [0, 255]")
        object.__setattr__(self, "rects", tuple(self.rects))


def _sample_points(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    s = spec.supersample
    x, y = centered_grid(spec.width, spec.height)
    if s == 1:
        return x[..., None], y[..., None]
    sub = (np.arange(s) + 0.5) / s - 0.5
    dx, dy = np.meshgrid(sub, -sub)
    return x[..., None] + dx.ravel(), y[..., None] + dy.ravel()


def _check_inside(spec: SceneSpec, xs: np.ndarray, ys: np.ndarray, what: str):
    hw, hh = spec.width / 2, spec.height / 2
    if np.any(np.abs(xs) > hw + 1e-9) or np.any(np.abs(ys) > hh + 1e-9):
        raise ValueError(f"{what} does not fit inside a {spec.width}x{spec.height} image")


def generate(spec: SceneSpec) -> GrayImage:
    """Render ``spec`` into a :class:`GrayImage`."""
    xs, ys = _sample_points(spec)
    canvas = np.full(xs.shape, float(spec.dark))

    if spec.kind == "stripe":
        t = np.radians(spec.angle)
        d = -xs * np.sin(t) + ys * np.cos(t) - spec.offset
        if abs(spec.offset) - spec.thickness / 2 > np.hypot(spec.width, spec.height) / 2:
            raise ValueError("stripe lies outside the image")
        half = spec.thickness / 2
        canvas[(d >= -half) & (d < half)] = spec.bright
    elif spec.kind == "step_edge":
        t = np.radians(spec.angle)
        d = -xs * np.sin(t) + ys * np.cos(t) - spec.offset
        canvas[d >= 0] = spec.bright
    elif spec.kind == "rectangle_scene":
        for r in spec.rects:
            t = np.radians(r.angle)
            c, s_ = np.cos(t), np.sin(t)
            corners = np.array([[-r.a, -r.b], [r.a, -r.b], [r.a, r.b], [-r.a, r.b]]) / 2
            cx = r.center[0] + corners[:, 0] * c - corners[:, 1] * s_
            cy = r.center[1] + corners[:, 0] * s_ + corners[:, 1] * c
            _check_inside(spec, cx, cy, "rectangle")
            u = (xs - r.center[0]) * c + (ys - r.center[1]) * s_
            v = -(xs - r.center[0]) * s_ + (ys - r.center[1]) * c
            inside = (u >= -r.a / 2) & (u < r.a / 2) & (v >= -r.b / 2) & (v < r.b / 2)
            canvas[inside] = r.intensity
    else:  # single_dot
        col, row = from_centered(*spec.point, spec.width, spec.height)
        canvas[row, col, :] = spec.bright

    img = canvas.mean(axis=-1)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.noise_seed)
        img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
    img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(img)
