"""Windowed Hough rectangle detection.

A window centered on a rectangle sees its four sides as two pairs of
accumulator peaks. In a regular accumulator the pairs share an orientation
and have cancelling rho. In an extended accumulator the pairs have opposite
orientations and *equal* rho, and all four rho share a sign because the
gradients of a real rectangle point either all inward or all outward. That
sign test rejects look-alike constellations formed by unrelated edges.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .gradient import EdgeMap, GradientField
from .hough import (
    HOUGH_MODES,
    AccumulatorGeometry,
    Accumulator,
    HoughParams,
    accumulate_points,
    wrap_theta,
)
from .peaks import DEFAULT_NMS_RHO, DEFAULT_NMS_THETA, Peak, find_peaks
from .raster import GrayImage

__all__ = [
    "RectWindow",
    "RectTolerances",
    "RectangleHit",
    "windowed_hough",
    "match_regular",
    "match_extended",
    "scan",
    "hits_to_json",
    "DEFAULT_RECT_PEAK_THRESHOLD",
    "DEFAULT_MAX_PEAKS",
    "DEFAULT_WINDOW_SIZE",
    "DEFAULT_STRIDE",
]

# Short sides of elongated rectangles must clear the threshold.
DEFAULT_RECT_PEAK_THRESHOLD = 0.25
DEFAULT_MAX_PEAKS = 16
DEFAULT_WINDOW_SIZE = 61
DEFAULT_STRIDE = 2


class RectWindow(NamedTuple):
    center: tuple[int, int]  # (col, row)
    size: int


@dataclass(frozen=True)
class RectTolerances:
    tol_theta: float = 3.0
    tol_orth: float = 3.0
    tol_rho: float = 3.0
    tol_height: float = 0.25
    strict_height: bool = False

    def __post_init__(self):
        for name in ("tol_theta", "tol_orth", "tol_rho", "tol_height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class RectangleHit:
    """Accepted four-peak constellation.

    ``alpha`` is the normal orientation of the first pair, in [-90, 90); ``a``
    is the distance between the first pair's sides and ``b`` the distance
    between the second pair's.
    """

    center: tuple[int, int]
    alpha: float
    a: float
    b: float
    peaks: tuple[Peak, Peak, Peak, Peak]
    rule_set: str

    @property
    def score(self) -> float:
        return float(sum(p.votes for p in self.peaks))

    def contains(self, col: float, row: float) -> bool:
        """Whether pixel ``(col, row)`` lies inside the recovered rectangle."""
        dx, dy = col - self.center[0], self.center[1] - row
        t = math.radians(self.alpha)
        u = dx * math.cos(t) + dy * math.sin(t)
        v = -dx * math.sin(t) + dy * math.cos(t)
        return abs(u) <= self.a / 2 and abs(v) <= self.b / 2

    def to_dict(self) -> dict:
        return {
            "center": [int(self.center[0]), int(self.center[1])],
            "alpha_deg": self.alpha,
            "a_px": self.a,
            "b_px": self.b,
            "rule_set": self.rule_set,
            "peaks": [{"theta_deg": p.theta, "rho_px": p.rho, "votes": p.votes} for p in self.peaks],
        }


def _window_bounds(shape, w: RectWindow):
    if w.size < 1 or w.size % 2 == 0:
        raise ValueError(f"window size must be a positive odd integer, got {w.size}")
    h = w.size // 2
    col, row = w.center
    height, width = shape
    if col - h < 0 or row - h < 0 or col + h >= width or row + h >= height:
        raise ValueError(f"window of size {w.size} at {w.center} leaves the {width}x{height} image")
    return slice(row - h, row + h + 1), slice(col - h, col + h + 1)


@functools.lru_cache(maxsize=16)
def _window_geometry(mode, size, delta_theta, delta_rho) -> AccumulatorGeometry:
    # Shared across windows so the trig tables are built once per scan.
    return AccumulatorGeometry(mode, size, size, delta_theta, delta_rho)


def windowed_hough(
    img: GrayImage,
    grad: GradientField,
    edges: EdgeMap,
    w: RectWindow,
    params: HoughParams = HoughParams(),
    mode: str = "extended",
) -> Accumulator:
    """Hough transform of the edge pixels inside window ``w``.

    Coordinates are re-centered on the window center and rho spans the
    window's half-diagonal. ``mode`` is ``"regular"`` (classical, all
    orientations), ``"oriented-regular"`` or ``"extended"``.
    """
    if mode not in HOUGH_MODES:
        raise ValueError(f"mode must be one of {HOUGH_MODES}, got {mode!r}")
    if (img.width, img.height) != (edges.width, edges.height):
        raise ValueError("image and edge map differ in size")
    rows, cols = _window_bounds(edges.mask.shape, w)
    geom_mode = "extended" if mode == "extended" else "regular"
    geom = _window_geometry(geom_mode, w.size, params.delta_theta, params.delta_rho)
    r, c = np.nonzero(edges.mask[rows, cols])
    h = w.size // 2
    xs = (c - h).astype(float)
    ys = (h - r).astype(float)
    weights = None
    if params.weight_mode == "magnitude":
        weights = grad.magnitude()[rows, cols][r, c]
    if mode == "regular":
        return accumulate_points(xs, ys, geom, params, weights=weights)
    gx = grad.gx[rows, cols][r, c]
    gy = grad.gy[rows, cols][r, c]
    return accumulate_points(xs, ys, geom, params, gx, gy, weights=weights)


# -- constellation rules --------------------------------------------------------


def _heights_match(h1: float, h2: float, tol: RectTolerances) -> bool:
    top = max(h1, h2)
    return top > 0 and abs(h1 - h2) / top <= tol.tol_height


def _line_angle(theta: float) -> float:
    """Undirected orientation of a normal angle, in [-90, 90)."""
    return float(wrap_theta(theta, 180.0))


def _orthogonal(alpha: float, beta: float, tol: RectTolerances) -> bool:
    d = abs(wrap_theta(alpha - beta, 180.0))
    return abs(d - 90.0) <= tol.tol_orth


class _Pair(NamedTuple):
    i: int
    j: int
    alpha: float
    side: float
    sign: int
    mean_height: float


def _regular_pair(peaks, i, j, tol) -> _Pair | None:
    p, q = peaks[i], peaks[j]
    tq, rq = q.theta, q.rho
    # Across the +-90 seam the same orientation reappears with negated rho.
    if tq - p.theta > 90:
        tq, rq = tq - 180.0, -rq
    elif p.theta - tq > 90:
        tq, rq = tq + 180.0, -rq
    if abs(p.theta - tq) > tol.tol_theta:
        return None
    if abs(p.rho + rq) > tol.tol_rho:
        return None
    if not _heights_match(p.votes, q.votes, tol):
        return None
    side = abs(p.rho - rq)
    if side <= 0:
        return None
    alpha = _line_angle((p.theta + tq) / 2)
    return _Pair(i, j, alpha, side, 0, (p.votes + q.votes) / 2)


def _extended_pair(peaks, i, j, tol) -> _Pair | None:
    p, q = peaks[i], peaks[j]
    gap = float(wrap_theta(p.theta - q.theta - 180.0))
    if abs(gap) > tol.tol_theta:
        return None
    if p.rho > 0 and q.rho > 0:
        sign = 1
    elif p.rho < 0 and q.rho < 0:
        sign = -1
    else:
        return None
    if abs(p.rho - q.rho) > tol.tol_rho:
        return None
    if not _heights_match(p.votes, q.votes, tol):
        return None
    alpha = _line_angle(p.theta - gap / 2)
    return _Pair(i, j, alpha, abs(p.rho + q.rho), sign, (p.votes + q.votes) / 2)


def _match(peaks, tol, center, rule_set, max_peaks) -> list[RectangleHit]:
    peaks = [Peak(*p) for p in peaks][:max_peaks]
    make = _regular_pair if rule_set == "regular" else _extended_pair
    pairs = []
    for i, j in itertools.combinations(range(len(peaks)), 2):
        pr = make(peaks, i, j, tol)
        if pr is not None:
            pairs.append(pr)
    hits = []
    seen = set()
    for p1, p2 in itertools.combinations(pairs, 2):
        members = frozenset((p1.i, p1.j, p2.i, p2.j))
        if len(members) < 4 or members in seen:
            continue
        if rule_set == "extended" and p1.sign != p2.sign:
            continue
        if not _orthogonal(p1.alpha, p2.alpha, tol):
            continue
        if tol.strict_height and not (
            abs(p1.mean_height - p2.side) <= tol.tol_height * p2.side
            and abs(p2.mean_height - p1.side) <= tol.tol_height * p1.side
        ):
            continue
        seen.add(members)
        first, second = sorted((p1, p2), key=lambda pr: (abs(pr.alpha), pr.alpha))
        hits.append(
            RectangleHit(
                center=center,
                alpha=first.alpha,
                a=first.side,
                b=second.side,
                peaks=(peaks[first.i], peaks[first.j], peaks[second.i], peaks[second.j]),
                rule_set=rule_set,
            )
        )
    return hits


def match_regular(
    peaks, tol: RectTolerances = RectTolerances(), center=(0, 0), max_peaks: int = DEFAULT_MAX_PEAKS
) -> list[RectangleHit]:
    """Constellations satisfying the five regular-accumulator rules.

    Pairs share an orientation (within ``tol_theta``), have rho summing to
    zero (within ``tol_rho``) and similar heights; the two pair orientations
    are 90 degrees apart. Side lengths are ``|rho1 - rho2|``.
    Only the strongest ``max_peaks`` peaks are considered.
    """
    return _match(peaks, tol, center, "regular", max_peaks)


def match_extended(
    peaks, tol: RectTolerances = RectTolerances(), center=(0, 0), max_peaks: int = DEFAULT_MAX_PEAKS
) -> list[RectangleHit]:
    """Constellations satisfying the six extended-accumulator rules.

    Pairs have opposite orientations (180 degrees apart, within
    ``tol_theta``), equal rho, similar heights, and every rho in the
    constellation has the same strict sign. Side lengths are
    ``|rho1 + rho2|``.
    """
    return _match(peaks, tol, center, "extended", max_peaks)


# -- sliding window -------------------------------------------------------------


def scan(
    img: GrayImage,
    grad: GradientField,
    edges: EdgeMap,
    window_size: int = DEFAULT_WINDOW_SIZE,
    stride: int = DEFAULT_STRIDE,
    params: HoughParams = HoughParams(),
    tol: RectTolerances = RectTolerances(),
    rule_set: str = "extended",
    peak_threshold: float = DEFAULT_RECT_PEAK_THRESHOLD,
    nms_theta: float = DEFAULT_NMS_THETA,
    nms_rho: float = DEFAULT_NMS_RHO,
    max_peaks: int = DEFAULT_MAX_PEAKS,
    min_edge_pixels: int = 4,
) -> list[RectangleHit]:
    """Slide a square window over the image and collect rectangle hits.

    Regular rules run on the classical transform of each window, extended
    rules on the extended oriented transform. Hits whose centers fall
    inside a stronger hit's rectangle are dropped. Output is ordered by
    window position (row, then column), then by descending peak-height sum.
    """
    if window_size < 1 or window_size % 2 == 0:
        raise ValueError("window_size must be a positive odd integer")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if rule_set not in ("regular", "extended"):
        raise ValueError("rule_set must be 'regular' or 'extended'")
    mode = "regular" if rule_set == "regular" else "extended"
    matcher = match_regular if rule_set == "regular" else match_extended
    height, width = edges.mask.shape
    h = window_size // 2
    if window_size > min(width, height):
        return []
    integral = np.pad(edges.mask.astype(np.int64), ((1, 0), (1, 0))).cumsum(0).cumsum(1)

    found = []
    for row in range(h, height - h, stride):
        for col in range(h, width - h, stride):
            r0, r1, c0, c1 = row - h, row + h + 1, col - h, col + h + 1
            count = integral[r1, c1] - integral[r0, c1] - integral[r1, c0] + integral[r0, c0]
            if count < min_edge_pixels:
                continue
            acc = windowed_hough(img, grad, edges, RectWindow((col, row), window_size), params, mode)
            peaks = find_peaks(acc, peak_threshold, nms_theta, nms_rho)
            found.extend(matcher(peaks, tol, (col, row), max_peaks))

    order = sorted(found, key=lambda hit: (-hit.score, hit.center[1], hit.center[0]))
    kept: list[RectangleHit] = []
    for hit in order:
        if any(k.contains(*hit.center) or hit.contains(*k.center) for k in kept):
            continue
        kept.append(hit)
    kept.sort(key=lambda hit: (hit.center[1], hit.center[0], -hit.score))
    return kept


def hits_to_json(hits) -> str:
    return json.dumps([h.to_dict() for h in hits], indent=2) + "\n"
