"""Oriented Hough transforms for line and rectangle detection.

The extended transform keeps the direction of each line, voting over
theta in [-180, 180) around the full gradient orientation. Folding it by
antipode recovers the orientation-limited regular transform exactly.
"""

from .estimators import HoughLineDetector, RectangleDetector
from .gradient import (
    DEFAULT_CANNY_HIGH,
    DEFAULT_LOW_RATIO,
    EdgeMap,
    GradientField,
    canny_edges,
    gradient_to_images,
    magnitude,
    orientation_full,
    orientation_half,
    sobel,
)
from .hough import (
    HOUGH_MODES,
    Accumulator,
    AccumulatorGeometry,
    HoughParams,
    accumulate_full,
    accumulate_oriented,
    accumulate_points,
    antipode,
    fold_extended,
    hough_transform,
    render_accumulator,
    rho_of,
    wrap_theta,
)
from .peaks import (
    DEFAULT_NMS_RHO,
    DEFAULT_NMS_THETA,
    DEFAULT_THRESHOLD_FRAC,
    OrientedLine,
    Peak,
    Segment,
    clip_to_image,
    draw_segments,
    find_peaks,
    line_of_peak,
    peaks_to_csv,
    segments_to_csv,
)
from .raster import (
    CenteredPoint,
    GrayImage,
    PGMError,
    RectSpec,
    SceneSpec,
    centered_grid,
    from_centered,
    generate,
    read_pgm,
    to_centered,
    write_pgm,
)
from .rect import (
    DEFAULT_MAX_PEAKS,
    DEFAULT_RECT_PEAK_THRESHOLD,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW_SIZE,
    RectangleHit,
    RectTolerances,
    RectWindow,
    hits_to_json,
    match_extended,
    match_regular,
    scan,
    windowed_hough,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
