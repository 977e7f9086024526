"""scikit-learn style front ends for line and rectangle detection.

Both estimators take one grayscale image per call (a :class:`GrayImage` or
a 2-D array of 8-bit values), so they slot into pipelines and parameter
searches through the usual ``get_params``/``set_params`` machinery.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_image, check_odd
from .gradient import DEFAULT_CANNY_HIGH, canny_edges, sobel
from .hough import HoughParams, hough_transform
from .peaks import (
    DEFAULT_NMS_RHO,
    DEFAULT_NMS_THETA,
    DEFAULT_THRESHOLD_FRAC,
    clip_to_image,
    find_peaks,
    line_of_peak,
)
from .rect import (
    DEFAULT_MAX_PEAKS,
    DEFAULT_RECT_PEAK_THRESHOLD,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW_SIZE,
    RectTolerances,
    scan,
)

__all__ = ["HoughLineDetector", "RectangleDetector"]


class _EdgeStage:
    """Shared gradient + edge extraction driven by estimator params."""

    def _edges(self, img):
        grad = sobel(img, sigma=self.sigma)
        edges = canny_edges(grad, self.canny_high, self.canny_low, norm=self.norm)
        return grad, edges

    def _hough_params(self):
        return HoughParams(self.delta_rho, self.delta_theta, self.theta_window, self.weight_mode)


class HoughLineDetector(_EdgeStage, TransformerMixin, BaseEstimator):
    """Detect straight lines with a (possibly gradient-limited) Hough transform.

    Parameters
    ----------
    mode : {"extended", "oriented-regular", "regular"}
        ``"extended"`` votes oriented lines over [-180, 180) using the full
        gradient direction. ``"oriented-regular"`` limits votes with the
        half-range orientation over [-90, 90). ``"regular"`` is the classical
        transform.
    delta_rho, delta_theta : float
        Bin widths in pixels and degrees.
    theta_window : float
        Half-width (degrees) of the voting window around the gradient
        orientation.
    weight_mode : {"unit", "magnitude"}
    canny_high, canny_low : float
        Hysteresis thresholds; ``canny_low=None`` means ``0.4 * canny_high``.
    sigma : float
        Gaussian pre-smoothing before Sobel, 0 to disable.
    norm : {"l2", "l1"}
        Gradient magnitude used by the edge detector.
    threshold_frac, nms_theta, nms_rho : float
        Peak detection settings.

    Attributes
    ----------
    gradient_ : GradientField
    edges_ : EdgeMap
    accumulator_ : Accumulator
    peaks_ : list of Peak
    lines_ : list of OrientedLine
    image_shape_ : tuple of int
        ``(height, width)`` of the fitted image.

    Examples
    --------
    >>> from orienthough import HoughLineDetector, SceneSpec, generate
    >>> img = generate(SceneSpec("stripe", width=64, height=64, angle=30, offset=8))
    >>> det = HoughLineDetector(mode="extended").fit(img)
    >>> len(det.lines_) >= 2
    True
    """

    def __init__(
        self,
        mode="extended",
        delta_rho=1.0,
        delta_theta=0.5,
        theta_window=22.5,
        weight_mode="unit",
        canny_high=DEFAULT_CANNY_HIGH,
        canny_low=None,
        sigma=0.0,
        norm="l2",
        threshold_frac=DEFAULT_THRESHOLD_FRAC,
        nms_theta=DEFAULT_NMS_THETA,
        nms_rho=DEFAULT_NMS_RHO,
    ):
        self.mode = mode
        self.delta_rho = delta_rho
        self.delta_theta = delta_theta
        self.theta_window = theta_window
        self.weight_mode = weight_mode
        self.canny_high = canny_high
        self.canny_low = canny_low
        self.sigma = sigma
        self.norm = norm
        self.threshold_frac = threshold_frac
        self.nms_theta = nms_theta
        self.nms_rho = nms_rho

    def _accumulate(self, X):
        img = check_image(X)
        grad, edges = self._edges(img)
        acc = hough_transform(img, grad, edges, self._hough_params(), self.mode)
        return img, grad, edges, acc

    def fit(self, X, y=None):
        img, self.gradient_, self.edges_, self.accumulator_ = self._accumulate(X)
        self.image_shape_ = (img.height, img.width)
        self.peaks_ = find_peaks(self.accumulator_, self.threshold_frac, self.nms_theta, self.nms_rho)
        self.lines_ = [line_of_peak(p) for p in self.peaks_]
        return self

    def transform(self, X):
        """Vote grid of shape ``(n_theta, n_rho)`` for image ``X``."""
        check_is_fitted(self, "accumulator_")
        return self._accumulate(X)[3].votes

    def predict(self, X):
        """Oriented lines found in ``X``, strongest first."""
        check_is_fitted(self, "accumulator_")
        acc = self._accumulate(X)[3]
        return [line_of_peak(p) for p in find_peaks(acc, self.threshold_frac, self.nms_theta, self.nms_rho)]

    def segments(self):
        """Fitted lines clipped to the image, as ``(line, Segment)`` pairs."""
        check_is_fitted(self, "lines_")
        h, w = self.image_shape_
        out = []
        for line in self.lines_:
            seg = clip_to_image(line, w, h)
            if seg is not None:
                out.append((line, seg))
        return out


class RectangleDetector(_EdgeStage, BaseEstimator):
    """Sliding-window rectangle detector on Hough peak constellations.

    ``rules="regular"`` evaluates the classical five-rule constellation on
    the regular transform of each window; ``rules="extended"`` evaluates the
    six-rule oriented constellation on the extended transform, which also
    demands a common rho sign and so drops constellations assembled from
    edges of different objects.

    Parameters
    ----------
    window_size : int
        Odd side of the square window; should exceed the rectangle's
        bounding box by a margin.
    stride : int
        Window step in pixels.
    peak_threshold : float
        Peak threshold as a fraction of each window's maximum.
    max_peaks : int
        Strongest peaks per window entering constellation search.
    tol_theta, tol_orth, tol_rho, tol_height, strict_height
        Constellation tolerances, see :class:`RectTolerances`.

    Remaining parameters match :class:`HoughLineDetector`.

    Attributes
    ----------
    hits_ : list of RectangleHit
    """

    def __init__(
        self,
        rules="extended",
        window_size=DEFAULT_WINDOW_SIZE,
        stride=DEFAULT_STRIDE,
        delta_rho=1.0,
        delta_theta=0.5,
        theta_window=22.5,
        weight_mode="unit",
        canny_high=DEFAULT_CANNY_HIGH,
        canny_low=None,
        sigma=0.0,
        norm="l2",
        peak_threshold=DEFAULT_RECT_PEAK_THRESHOLD,
        nms_theta=DEFAULT_NMS_THETA,
        nms_rho=DEFAULT_NMS_RHO,
        max_peaks=DEFAULT_MAX_PEAKS,
        tol_theta=3.0,
        tol_orth=3.0,
        tol_rho=3.0,
        tol_height=0.25,
        strict_height=False,
    ):
        self.rules = rules
        self.window_size = window_size
        self.stride = stride
        self.delta_rho = delta_rho
        self.delta_theta = delta_theta
        self.theta_window = theta_window
        self.weight_mode = weight_mode
        self.canny_high = canny_high
        self.canny_low = canny_low
        self.sigma = sigma
        self.norm = norm
        self.peak_threshold = peak_threshold
        self.nms_theta = nms_theta
        self.nms_rho = nms_rho
        self.max_peaks = max_peaks
        self.tol_theta = tol_theta
        self.tol_orth = tol_orth
        self.tol_rho = tol_rho
        self.tol_height = tol_height
        self.strict_height = strict_height

    def _detect(self, X):
        if self.rules not in ("regular", "extended"):
            raise ValueError(f"rules must be 'regular' or 'extended', got {self.rules!r}")
        size = check_odd("window_size", self.window_size)
        img = check_image(X)
        grad, edges = self._edges(img)
        tol = RectTolerances(
            self.tol_theta, self.tol_orth, self.tol_rho, self.tol_height, self.strict_height
        )
        hits = scan(
            img, grad, edges, size, self.stride, self._hough_params(), tol, self.rules,
            self.peak_threshold, self.nms_theta, self.nms_rho, self.max_peaks,
        )
        return grad, edges, hits

    def fit(self, X, y=None):
        self.gradient_, self.edges_, self.hits_ = self._detect(X)
        return self

    def predict(self, X):
        check_is_fitted(self, "hits_")
        return self._detect(X)[2]

    def fit_predict(self, X, y=None):
        return self.fit(X).hits_

    def centers(self) -> np.ndarray:
        """``(n_hits, 2)`` array of hit centers as (col, row)."""
        check_is_fitted(self, "hits_")
        return np.array([h.center for h in self.hits_], dtype=int).reshape(-1, 2)
