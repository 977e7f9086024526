"""Accumulator peak extraction and oriented-line recovery."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .hough import Accumulator, antipode
from .raster import CenteredPoint

__all__ = [
    "Peak",
    "OrientedLine",
    "Segment",
    "find_peaks",
    "line_of_peak",
    "clip_to_image",
    "peaks_to_csv",
    "segments_to_csv",
    "draw_segments",
    "DEFAULT_THRESHOLD_FRAC",
    "DEFAULT_NMS_THETA",
    "DEFAULT_NMS_RHO",
]

DEFAULT_THRESHOLD_FRAC = 0.5
DEFAULT_NMS_THETA = 5.0
DEFAULT_NMS_RHO = 5.0

_PAIRWISE_LIMIT = 3000


class Peak(NamedTuple):
    theta: float
    rho: float
    votes: float

    def antipode(self) -> "Peak":
        t, r = antipode(self.theta, self.rho)
        return Peak(t, r, self.votes)


class OrientedLine(NamedTuple):
    """Line ``p . normal = rho`` traversed along ``direction``.

    ``direction`` is ``normal`` rotated by +90 degrees, so (normal, direction)
    is a right-handed frame.
    """

    theta: float
    rho: float
    normal: tuple[float, float]
    direction: tuple[float, float]

    def distance(self, p) -> float:
        """Signed distance of ``p`` from the line, positive on the normal side."""
        return p[0] * self.normal[0] + p[1] * self.normal[1] - self.rho


class Segment(NamedTuple):
    start: CenteredPoint
    end: CenteredPoint


def _offsets(geom, i1, j1, i2, j2):
    """Smallest (dtheta, drho) index offsets between bins, elementwise.

    Extended accumulators are cyclic in theta. Regular ones are glued at
    +-90 deg with rho reversed, since (theta, rho) and (theta - 180, -rho)
    describe the same line.
    """
    n_t, n_r = geom.shape
    di = np.asarray(i2) - np.asarray(i1)
    dj = np.asarray(j2) - np.asarray(j1)
    wrapped_di = np.where(di > 0, di - n_t, di + n_t)
    wrapped_dj = (n_r - 1 - np.asarray(j2) - np.asarray(j1)) if geom.mode == "regular" else dj
    use = np.abs(wrapped_di) < np.abs(di)
    return np.where(use, wrapped_di, di), np.where(use, wrapped_dj, dj)


def _pad_theta(v: np.ndarray, rt: int, mode: str) -> np.ndarray:
    if rt == 0:
        return v
    head, tail = v[-rt:], v[:rt]
    if mode == "regular":
        head, tail = head[:, ::-1], tail[:, ::-1]
    return np.concatenate([head, v, tail])


def find_peaks(
    acc: Accumulator,
    threshold_frac: float = DEFAULT_THRESHOLD_FRAC,
    nms_theta: float = DEFAULT_NMS_THETA,
    nms_rho: float = DEFAULT_NMS_RHO,
) -> list[Peak]:
    """Local maxima of ``acc`` above ``threshold_frac`` times its maximum.

    A bin is a candidate when no bin within ``+-nms_theta`` degrees and
    ``+-nms_rho`` pixels exceeds it. The theta neighborhood wraps around
    (with rho mirrored in regular accumulators). Adjacent candidates of equal
    height form a plateau that is reported once, at its medoid bin; the
    remaining candidates are accepted strongest first, skipping any that
    fall inside an accepted peak's neighborhood.

    Returns
    -------
    list of Peak
        Sorted by votes, strongest first; equal heights in bin order.
    """
    if not 0 < threshold_frac <= 1:
        raise ValueError(f"threshold_frac must lie in (0, 1], got {threshold_frac}")
    if nms_theta < 0 or nms_rho < 0:
        raise ValueError("suppression radii must be >= 0")
    g = acc.geometry
    v = acc.votes
    vmax = v.max(initial=0.0)
    if vmax <= 0:
        return []
    n_t = g.n_theta
    rt = min(int(math.floor(nms_theta / g.delta_theta + 1e-9)), (n_t - 1) // 2)
    rr = int(math.floor(nms_rho / g.delta_rho + 1e-9))
    above = np.argwhere(v >= threshold_frac * vmax)
    if len(above) <= _PAIRWISE_LIMIT:
        # Only bins above the threshold can beat a candidate.
        vals = v[above[:, 0], above[:, 1]]
        di, dj = _offsets(g, above[:, None, 0], above[:, None, 1], above[None, :, 0], above[None, :, 1])
        near = (np.abs(di) <= rt) & (np.abs(dj) <= rr)
        beaten = (near & (vals[None, :] > vals[:, None])).any(axis=1)
        cand = [tuple(ij) for ij in above[~beaten]]
    else:
        padded = _pad_theta(v, rt, g.mode)
        size = (2 * rt + 1, 2 * rr + 1)
        local = ndimage.maximum_filter(padded, size=size, mode="constant", cval=-np.inf)[rt : rt + n_t]
        cand = [tuple(ij) for ij in np.argwhere((v >= threshold_frac * vmax) & (v == local))]

    cand.sort()
    # Plateaus: connected runs of equal-height candidates.
    index = {c: k for k, c in enumerate(cand)}
    group = [-1] * len(cand)
    reps = []
    for k, c in enumerate(cand):
        if group[k] >= 0:
            continue
        members, stack = [], [k]
        group[k] = k
        while stack:
            m = stack.pop()
            members.append(cand[m])
            i, j = cand[m]
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ni, nj = i + di, j + dj
                    if ni < 0 or ni >= n_t:
                        ni %= n_t
                        if g.mode == "regular":
                            nj = g.n_rho - 1 - nj
                    other = index.get((ni, nj))
                    if other is not None and group[other] < 0 and v[ni, nj] == v[i, j]:
                        group[other] = k
                        stack.append(other)
        members.sort()
        if len(members) > 1:
            m = np.array(members)
            di, dj = _offsets(g, m[:, None, 0], m[:, None, 1], m[None, :, 0], m[None, :, 1])
            members = [members[int(np.argmin((di**2 + dj**2).sum(axis=1)))]]
        reps.append(members[0])

    reps.sort(key=lambda ij: (-v[ij], ij))
    acc_i = np.empty(len(reps), dtype=np.int64)
    acc_j = np.empty(len(reps), dtype=np.int64)
    accepted: list[tuple[int, int]] = []
    for i, j in reps:
        n = len(accepted)
        if n:
            di, dj = _offsets(g, acc_i[:n], acc_j[:n], i, j)
            if ((np.abs(di) <= rt) & (np.abs(dj) <= rr)).any():
                continue
        acc_i[n], acc_j[n] = i, j
        accepted.append((i, j))
    return [Peak(float(g.theta_centers[i]), float(g.rho_centers[j]), float(v[i, j])) for i, j in accepted]


def line_of_peak(p) -> OrientedLine:
    """Oriented line for a peak (or any ``(theta, rho, ...)`` tuple)."""
    t = math.radians(p[0])
    c, s = math.cos(t), math.sin(t)
    return OrientedLine(p[0], p[1], (c, s), (-s, c))


def clip_to_image(line: OrientedLine, width: float, height: float) -> Segment | None:
    """Intersect ``line`` with the centered rectangle ``[-W/2, W/2] x [-H/2, H/2]``.

    Endpoints are ordered along ``line.direction``. Returns ``None`` when the
    line misses the rectangle.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    nx, ny = line.normal
    dx, dy = line.direction
    ox, oy = line.rho * nx, line.rho * ny
    lo, hi = -math.inf, math.inf
    for o, d, half in ((ox, dx, width / 2), (oy, dy, height / 2)):
        if abs(d) < 1e-15:
            if abs(o) > half:
                return None
            continue
        t1, t2 = (-half - o) / d, (half - o) / d
        lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
    if lo > hi:
        return None
    return Segment(
        CenteredPoint(ox + lo * dx, oy + lo * dy),
        CenteredPoint(ox + hi * dx, oy + hi * dy),
    )


def peaks_to_csv(peaks) -> str:
    lines = ["theta_deg,rho_px,votes"]
    lines += [f"{p.theta:.6f},{p.rho:.6f},{p.votes:.10g}" for p in peaks]
    return "\n".join(lines) + "\n"


def segments_to_csv(segments, width: int, height: int) -> str:
    """Endpoints in centered coordinates and in (col, row) pixel coordinates."""
    cx, cy = (width - 1) / 2, (height - 1) / 2
    lines = ["theta_deg,rho_px,x0,y0,x1,y1,col0,row0,col1,row1"]
    for line, seg in segments:
        (x0, y0), (x1, y1) = seg
        vals = (line.theta, line.rho, x0, y0, x1, y1, x0 + cx, cy - y0, x1 + cx, cy - y1)
        lines.append(",".join(f"{v:.6f}" for v in vals))
    return "\n".join(lines) + "\n"


def draw_segments(pixels: np.ndarray, segments, value: int = 0) -> np.ndarray:
    """Burn segments into a copy of ``pixels`` by dense sampling."""
    out = np.array(pixels, dtype=np.uint8, copy=True)
    h, w = out.shape
    for seg in segments:
        (x0, y0), (x1, y1) = seg
        n = int(math.ceil(2 * math.hypot(x1 - x0, y1 - y0))) + 1
        t = np.linspace(0.0, 1.0, n)
        cols = np.floor(x0 + t * (x1 - x0) + (w - 1) / 2 + 0.5).astype(int)
        rows = np.floor((h - 1) / 2 - (y0 + t * (y1 - y0)) + 0.5).astype(int)
        ok = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < h)
        out[rows[ok], cols[ok]] = value
    return out
