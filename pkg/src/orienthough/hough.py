"""Hough accumulators over (theta, rho): classical, orientation-limited and extended.

Geometry
--------
``regular`` accumulators span theta in [-90, 90), ``extended`` ones span
[-180, 180). Both carry a signed rho axis in [-R, R] where R covers the
half-diagonal of the source. Theta bins are cell-centered, so no bin center
sits on a wrap point; the rho axis has an odd number of bins with the middle
bin centered on 0, so reflecting rho maps bins onto bins.

The extended accumulator stores oriented lines: each undirected line appears
at (theta, rho) and at its antipode (theta + 180, -rho), and gradient-limited
voting picks the representation whose normal follows the gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gradient import EdgeMap, GradientField
from .raster import CenteredPoint, GrayImage, centered_grid

__all__ = [
    "HoughParams",
    "AccumulatorGeometry",
    "Accumulator",
    "rho_of",
    "antipode",
    "wrap_theta",
    "accumulate_points",
    "accumulate_full",
    "accumulate_oriented",
    "fold_extended",
    "render_accumulator",
    "hough_transform",
    "HOUGH_MODES",
]

MODES = ("regular", "extended")
# Transform variants: classical, orientation-limited regular, extended oriented.
HOUGH_MODES = ("regular", "oriented-regular", "extended")
WEIGHT_MODES = ("unit", "magnitude")

# Voting is chunked so the (pixels x bins) scratch arrays stay small.
_CHUNK_CELLS = 2_000_000


def wrap_theta(theta, period: float = 360.0):
    """Wrap angles (degrees) into [-period/2, period/2)."""
    half = period / 2
    return np.mod(np.asarray(theta, dtype=float) + half, period) - half


@dataclass(frozen=True)
class HoughParams:
    """Accumulator resolution and voting options.

    ``theta_window`` is the half-width of the orientation window around the
    gradient estimate; bins whose centers fall strictly inside it get votes.
    """

    delta_rho: float = 1.0
    delta_theta: float = 0.5
    theta_window: float = 22.5
    weight_mode: str = "unit"

    def __post_init__(self):
        if not self.delta_rho > 0:
            raise ValueError("delta_rho must be > 0")
        if not self.delta_theta > 0:
            raise ValueError("delta_theta must be > 0")
        if not self.theta_window > 0:
            raise ValueError("theta_window must be > 0")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
        q = round(90.0 / self.delta_theta)
        if q < 1 or not math.isclose(q * self.delta_theta, 90.0, rel_tol=0, abs_tol=1e-9):
            # 90 deg must be a whole number of bins so that regular bins coincide
            # with extended ones and antipodes land on bin centers.
            raise ValueError(f"delta_theta={self.delta_theta} must divide 90 degrees evenly")


@dataclass(frozen=True)
class AccumulatorGeometry:
    mode: str
    width: int
    height: int
    delta_theta: float = 0.5
    delta_rho: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.width < 1 or self.height < 1:
            raise ValueError("source size must be positive")
        HoughParams(delta_rho=self.delta_rho, delta_theta=self.delta_theta)

    @classmethod
    def for_image(cls, width: int, height: int, params: HoughParams, mode: str):
        return cls(mode, width, height, params.delta_theta, params.delta_rho)

    @property
    def theta_min(self) -> float:
        return -90.0 if self.mode == "regular" else -180.0

    @property
    def theta_max(self) -> float:
        return -self.theta_min

    @property
    def period(self) -> float:
        """Angular period of the voting window test (180 regular, 360 extended)."""
        return 180.0 if self.mode == "regular" else 360.0

    @property
    def quarter(self) -> int:
        """Number of theta bins per 90 degrees."""
        return round(90.0 / self.delta_theta)

    @property
    def n_theta(self) -> int:
        return self.quarter * (2 if self.mode == "regular" else 4)

    @property
    def rho_max(self) -> float:
        return math.hypot(self.width / 2, self.height / 2)

    @property
    def n_rho(self) -> int:
        return 2 * math.ceil(self.rho_max / self.delta_rho - 0.5) + 1

    @property
    def rho_extent(self) -> float:
        """Half-length of the rho axis; at least ``rho_max``."""
        return self.n_rho * self.delta_rho / 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_rho)

    @cached_property
    def theta_centers(self) -> np.ndarray:
        return self.theta_min + (np.arange(self.n_theta) + 0.5) * self.delta_theta

    @cached_property
    def rho_centers(self) -> np.ndarray:
        centers = (np.arange(self.n_rho) - self.n_rho // 2) * self.delta_rho
        return centers

    @cached_property
    def trig(self) -> tuple[np.ndarray, np.ndarray]:
        """(cos, sin) at every theta bin center.

        Extended tables are assembled from the regular half with exact sign
        flips, so a bin and its antipode produce exactly opposite rho.
        """
        q = self.quarter
        reg = np.radians(-90.0 + (np.arange(2 * q) + 0.5) * self.delta_theta)
        c, s = np.cos(reg), np.sin(reg)
        if self.mode == "regular":
            return c, s
        return (
            np.concatenate([-c[q:], c, -c[:q]]),
            np.concatenate([-s[q:], s, -s[:q]]),
        )

    def rho_index(self, rho) -> np.ndarray:
        """Nearest rho bin, mirror-symmetric: ``rho_index(-r) == n_rho - 1 - rho_index(r)``."""
        rho = np.asarray(rho, dtype=float)
        j = np.floor((np.abs(rho) + self.rho_extent) / self.delta_rho).astype(np.int64)
        j = np.minimum(j, self.n_rho - 1)
        return np.where(rho >= 0, j, self.n_rho - 1 - j)

    def theta_index(self, theta) -> np.ndarray:
        t = (np.asarray(theta, dtype=float) - self.theta_min) / self.delta_theta
        return np.floor(t).astype(np.int64) % self.n_theta

    def antipode_index(self, i) -> np.ndarray:
        """Theta bin whose center is 180 degrees away (extended mode only)."""
        if self.mode != "extended":
            raise ValueError("antipodal bins exist only in extended mode")
        return (np.asarray(i) + 2 * self.quarter) % self.n_theta


@dataclass(eq=False)
class Accumulator:
    """Vote grid of shape ``(n_theta, n_rho)``."""

    geometry: AccumulatorGeometry
    votes: np.ndarray

    def __post_init__(self):
        if self.votes.shape != self.geometry.shape:
            raise ValueError(f"votes shape {self.votes.shape} != geometry {self.geometry.shape}")

    @classmethod
    def empty(cls, geometry: AccumulatorGeometry) -> "Accumulator":
        return cls(geometry, np.zeros(geometry.shape))

    @property
    def total(self) -> float:
        return float(self.votes.sum())

    def nonzero_bins(self):
        """Yield ``(theta_deg, rho_px, votes)`` for each nonzero bin in index order."""
        g = self.geometry
        for i, j in zip(*np.nonzero(self.votes)):
            yield float(g.theta_centers[i]), float(g.rho_centers[j]), float(self.votes[i, j])

    def to_csv(self) -> str:
        lines = ["theta_deg,rho_px,votes"]
        for t, r, v in self.nonzero_bins():
            lines.append(f"{t:.6f},{r:.6f},{v:.10g}")
        return "\n".join(lines) + "\n"


def rho_of(p: CenteredPoint, theta: float) -> float:
    """Signed distance ``x cos(theta) + y sin(theta)`` for theta in degrees."""
    t = math.radians(theta)
    return p[0] * math.cos(t) + p[1] * math.sin(t)


def antipode(theta: float, rho: float) -> tuple[float, float]:
    """The other representation of the same undirected line."""
    return float(wrap_theta(theta + 180.0)), -rho


def _add_votes(flat: np.ndarray, idx: np.ndarray, weights: np.ndarray) -> None:
    if idx.size == 0:
        return
    lo = int(idx.min())
    counts = np.bincount(idx - lo, weights=weights)
    flat[lo : lo + counts.size] += counts


def _half_orientation(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.degrees(np.arctan(gy / gx))
    return np.where(gx == 0, 90.0, t)


def _full_orientation(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return wrap_theta(np.degrees(np.arctan2(gy, gx)))


def accumulate_points(
    xs,
    ys,
    geom: AccumulatorGeometry,
    params: HoughParams = HoughParams(),
    gx=None,
    gy=None,
    weights=None,
) -> Accumulator:
    """Vote centered points into ``geom``.

    Without gradients every theta bin receives a vote (classical transform).
    With gradients, each point votes only inside the open orientation window
    around its estimate: ``atan(gy/gx)`` for regular geometry, ``atan2`` for
    extended geometry. In regular geometry the window wraps across +-90 deg;
    bins past the seam carry the antipodal (negated) rho automatically since
    rho is evaluated at each bin's own center.

    Parameters
    ----------
    xs, ys : array-like
        Centered coordinates.
    gx, gy : array-like, optional
        Gradient components per point; must be nonzero.
    weights : array-like, optional
        Per-point vote weight; defaults to 1.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have equal length")
    w = np.ones_like(xs) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != xs.shape:
        raise ValueError("weights must match the number of points")
    if (gx is None) != (gy is None):
        raise ValueError("gx and gy must be given together")

    cos_t, sin_t = geom.trig
    n_theta, n_rho = geom.shape
    flat = np.zeros(n_theta * n_rho)
    if xs.size == 0:
        return Accumulator(geom, flat.reshape(geom.shape))

    if gx is None:
        k_all = np.arange(n_theta)
        step = max(1, _CHUNK_CELLS // n_theta)
        for s in range(0, xs.size, step):
            x, y, ww = xs[s : s + step], ys[s : s + step], w[s : s + step]
            rho = x[:, None] * cos_t + y[:, None] * sin_t
            idx = k_all * n_rho + geom.rho_index(rho)
            _add_votes(flat, idx.ravel(), np.broadcast_to(ww[:, None], idx.shape).ravel())
        return Accumulator(geom, flat.reshape(geom.shape))

    gx = np.asarray(gx, dtype=float).ravel()
    gy = np.asarray(gy, dtype=float).ravel()
    if gx.shape != xs.shape or gy.shape != xs.shape:
        raise ValueError("gradients must match the number of points")
    zero = (gx == 0) & (gy == 0)
    if zero.any():
        i = int(np.argmax(zero))
        raise ValueError(f"point {i} at ({xs[i]}, {ys[i]}) has a zero gradient")
    if geom.mode == "regular":
        theta0 = _half_orientation(gx, gy)
    else:
        theta0 = _full_orientation(gx, gy)

    window = params.theta_window
    period = geom.period
    centers = geom.theta_centers
    n_cand = int(math.ceil(2 * window / geom.delta_theta)) + 2
    if n_cand >= n_theta:
        n_cand = n_theta
        start = np.zeros(xs.size, dtype=np.int64)
    else:
        start = np.floor((theta0 - window - geom.theta_min) / geom.delta_theta - 0.5).astype(np.int64)
    offsets = np.arange(n_cand)
    step = max(1, _CHUNK_CELLS // n_cand)
    for s in range(0, xs.size, step):
        sl = slice(s, s + step)
        k = (start[sl, None] + offsets) % n_theta
        dist = np.abs(wrap_theta(centers[k] - theta0[sl, None], period))
        inside = dist < window
        rho = xs[sl, None] * cos_t[k] + ys[sl, None] * sin_t[k]
        idx = k * n_rho + geom.rho_index(rho)
        ww = np.where(inside, w[sl, None], 0.0)
        _add_votes(flat, idx[inside], ww[inside])
    return Accumulator(geom, flat.reshape(geom.shape))


def _edge_points(edges: EdgeMap, geom: AccumulatorGeometry):
    if (edges.width, edges.height) != (geom.width, geom.height):
        raise ValueError(
            f"edge map is {edges.width}x{edges.height} but geometry expects "
            f"{geom.width}x{geom.height}"
        )
    x, y = centered_grid(edges.width, edges.height)
    m = edges.mask
    return x[m], y[m], m


def _weights(params: HoughParams, grad: GradientField | None, mask: np.ndarray):
    if params.weight_mode == "unit":
        return None
    if grad is None:
        raise ValueError("magnitude weighting needs a gradient field")
    return grad.magnitude()[mask]


def accumulate_full(
    edges: EdgeMap,
    geom: AccumulatorGeometry,
    params: HoughParams = HoughParams(),
    grad: GradientField | None = None,
) -> Accumulator:
    """Classical transform: every edge pixel votes along its whole sinusoid.

    ``grad`` is only consulted for magnitude weighting.
    """
    xs, ys, m = _edge_points(edges, geom)
    return accumulate_points(xs, ys, geom, params, weights=_weights(params, grad, m))


def accumulate_oriented(
    edges: EdgeMap,
    grad: GradientField,
    geom: AccumulatorGeometry,
    params: HoughParams = HoughParams(),
) -> Accumulator:
    """Gradient-limited voting; regular geometry gives the O'Gorman-Clowes
    transform, extended geometry the oriented-line transform."""
    xs, ys, m = _edge_points(edges, geom)
    if (grad.width, grad.height) != (edges.width, edges.height):
        raise ValueError("edge map and gradient field differ in size")
    gx, gy = grad.gx[m], grad.gy[m]
    zero = (gx == 0) & (gy == 0)
    if zero.any():
        rows, cols = np.nonzero(m)
        i = int(np.argmax(zero))
        raise ValueError(f"edge pixel (col={cols[i]}, row={rows[i]}) has a zero gradient")
    return accumulate_points(xs, ys, geom, params, gx, gy, weights=_weights(params, grad, m))


def hough_transform(
    img: GrayImage,
    grad: GradientField,
    edges: EdgeMap,
    params: HoughParams = HoughParams(),
    mode: str = "extended",
) -> Accumulator:
    """Run one of the :data:`HOUGH_MODES` transforms over a whole image."""
    if mode not in HOUGH_MODES:
        raise ValueError(f"mode must be one of {HOUGH_MODES}, got {mode!r}")
    geom = AccumulatorGeometry.for_image(
        img.width, img.height, params, "extended" if mode == "extended" else "regular"
    )
    if mode == "regular":
        return accumulate_full(edges, geom, params, grad)
    return accumulate_oriented(edges, grad, geom, params)


def fold_extended(acc: Accumulator) -> Accumulator:
    """Merge each extended bin with its antipode into a regular accumulator.

    ``out[theta, rho] = in[theta, rho] + in[theta + 180, -rho]`` for theta in
    [-90, 90).
    """
    g = acc.geometry
    if g.mode != "extended":
        raise ValueError("fold_extended needs an extended accumulator")
    if g.n_theta % 2:
        raise ValueError("cannot fold an odd number of theta bins")
    q = g.quarter
    reg = AccumulatorGeometry("regular", g.width, g.height, g.delta_theta, g.delta_rho)
    idx = np.arange(2 * q)
    direct = acc.votes[q + idx]
    opposite = acc.votes[g.antipode_index(q + idx)][:, ::-1]
    return Accumulator(reg, direct + opposite)


def render_accumulator(acc: Accumulator) -> GrayImage:
    """Square-root-compressed, inverted view: black is the maximum, white zero.

    Theta runs left to right, rho bottom to top, origin at the image center.
    """
    v = np.clip(acc.votes, 0, None)
    vmax = v.max(initial=0.0)
    if vmax <= 0:
        shade = np.full(v.shape, 255.0)
    else:
        shade = np.floor(255.0 * (1.0 - np.sqrt(v) / math.sqrt(vmax)) + 0.5)
    return GrayImage(shade.T[::-1].astype(np.uint8))
