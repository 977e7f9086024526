import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orienthough import (
    Accumulator,
    AccumulatorGeometry,
    CenteredPoint,
    OrientedLine,
    Peak,
    RectSpec,
    SceneSpec,
    canny_edges,
    centered_grid,
    clip_to_image,
    draw_segments,
    find_peaks,
    generate,
    hough_transform,
    line_of_peak,
    peaks_to_csv,
    segments_to_csv,
    sobel,
    wrap_theta,
)
from orienthough.peaks import _offsets


def acc_with(mode, bins, w=20, h=20):
    g = AccumulatorGeometry(mode, w, h)
    v = np.zeros(g.shape)
    for (i, j), val in bins.items():
        v[i, j] = val
    return Accumulator(g, v)


# -- find_peaks -----------------------------------------------------------------


def test_zero_accumulator_no_peaks():
    assert find_peaks(Accumulator.empty(AccumulatorGeometry("extended", 10, 10))) == []


def test_single_bin_single_peak():
    acc = acc_with("extended", {(100, 7): 3})
    g = acc.geometry
    assert find_peaks(acc) == [Peak(g.theta_centers[100], g.rho_centers[7], 3.0)]


def test_threshold_fraction():
    acc = acc_with("extended", {(100, 7): 10, (400, 20): 5, (600, 3): 4.9})
    assert [p.votes for p in find_peaks(acc, 0.5)] == [10, 5]
    assert [p.votes for p in find_peaks(acc, 0.4)] == [10, 5, 4.9]


def test_neighbor_suppression():
    acc = acc_with("extended", {(100, 7): 10, (105, 9): 8, (116, 7): 7})
    # 5 deg / 0.5 = 10 bins, 5 px = 5 bins: (105, 9) is suppressed, (116, 7) is not.
    assert [p.votes for p in find_peaks(acc)] == [10, 7]


def test_extended_theta_wraps_cyclically():
    acc = acc_with("extended", {(0, 10): 10, (719, 10): 9})
    assert [p.votes for p in find_peaks(acc)] == [10]


def test_regular_theta_wraps_with_mirrored_rho():
    g = AccumulatorGeometry("regular", 20, 20)
    n = g.n_rho
    # (-89.75, rho) and (89.75, -rho) are neighbors across the seam.
    acc = acc_with("regular", {(0, 10): 10, (359, n - 1 - 10): 9})
    assert [p.votes for p in find_peaks(acc)] == [10]
    acc = acc_with("regular", {(0, 10): 10, (359, 10): 9})
    assert [p.votes for p in find_peaks(acc)] == [10, 9]


def test_plateau_reported_once_at_medoid():
    acc = acc_with("extended", {(100, 7): 5, (101, 7): 5, (102, 7): 5})
    (p,) = find_peaks(acc)
    assert p.theta == acc.geometry.theta_centers[101]


def test_find_peaks_validation():
    acc = acc_with("extended", {(1, 1): 1})
    with pytest.raises(ValueError):
        find_peaks(acc, 0)
    with pytest.raises(ValueError):
        find_peaks(acc, 0.5, -1)


def test_dense_fallback_matches_pairwise(monkeypatch):
    import orienthough.peaks as pk

    rng = np.random.default_rng(3)
    g = AccumulatorGeometry("regular", 30, 30)
    acc = Accumulator(g, rng.integers(0, 50, g.shape).astype(float))
    slow = find_peaks(acc, 0.6)
    monkeypatch.setattr(pk, "_PAIRWISE_LIMIT", 0)
    assert find_peaks(acc, 0.6) == slow


def test_bar_scene_peak_matches_side():
    img = generate(SceneSpec("rectangle_scene", width=81, height=61, rects=[RectSpec((0, 0), 40, 8)]))
    grad = sobel(img)
    edges = canny_edges(grad)
    peaks = find_peaks(hough_transform(img, grad, edges))
    _, ys = centered_grid(81, 61)
    # Oracle: the top side's edge pixels are the edge row at y = 3; its
    # gradient points down, so the oriented line is (-90, -3).
    n_top = int((edges.mask & (ys == 3)).sum())
    assert n_top == 40
    top = [p for p in peaks if abs(wrap_theta(p.theta + 90)) <= 0.5 and abs(p.rho + 3) <= 1]
    assert len(top) == 1
    assert abs(top[0].votes - n_top) <= 0.15 * n_top
    assert peaks[0].votes == max(p.votes for p in peaks)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["regular", "extended"]),
       st.floats(0.1, 1.0), st.floats(0, 8), st.floats(0, 8))
def test_nms_soundness(seed, mode, frac, nt, nr):
    rng = np.random.default_rng(seed)
    g = AccumulatorGeometry(mode, 16, 12, delta_theta=1.0)
    v = np.where(rng.random(g.shape) < 0.05, rng.integers(1, 6, g.shape), 0).astype(float)
    peaks = find_peaks(Accumulator(g, v), frac, nt, nr)
    rt, rr = math.floor(nt / g.delta_theta + 1e-9), math.floor(nr / g.delta_rho + 1e-9)
    i = g.theta_index([p.theta for p in peaks])
    j = g.rho_index([p.rho for p in peaks])
    di, dj = _offsets(g, i[:, None], j[:, None], i[None, :], j[None, :])
    close = (np.abs(di) <= rt) & (np.abs(dj) <= rr)
    assert not (close & ~np.eye(len(peaks), dtype=bool)).any()
    assert [p.votes for p in peaks] == sorted((p.votes for p in peaks), reverse=True)
    if v.any():
        assert peaks and peaks[0].votes == v.max()


# -- lines ----------------------------------------------------------------------


def test_axis_line():
    line = line_of_peak(Peak(0.0, 5.0, 1))
    assert line.normal == (1.0, 0.0) and line.direction == (-0.0, 1.0)
    assert line.distance((5, 123)) == 0


def test_figure_line():
    line = line_of_peak((53.13, 2.4))
    assert line.normal == pytest.approx((0.6, 0.8), abs=1e-4)
    # 12/5 = 3/5 x + 4/5 y through (1.44, 1.92) and (4, 0).
    assert line.distance((1.44, 1.92)) == pytest.approx(0, abs=1e-3)
    assert line.distance((4.0, 0.0)) == pytest.approx(0, abs=1e-3)


def test_antipodal_line_same_points_reversed():
    p = Peak(53.13, 2.4, 1)
    a, b = line_of_peak(p), line_of_peak(p.antipode())
    assert b.direction == pytest.approx((-a.direction[0], -a.direction[1]))
    for pt in [(1.44, 1.92), (4.0, 0.0), (-2.0, 4.5)]:
        assert a.distance(pt) == pytest.approx(-b.distance(pt), abs=1e-12)


@given(st.floats(-180, 180), st.floats(-100, 100))
def test_right_hand_frame(theta, rho):
    line = line_of_peak((theta, rho))
    (nx, ny), (dx, dy) = line.normal, line.direction
    # direction is the normal rotated by +90 degrees.
    assert (dx, dy) == (-ny, nx)
    assert nx * dy - ny * dx == pytest.approx(1.0)


@given(st.floats(-180, 180), st.floats(-100, 100))
def test_antipodal_point_sets_agree(theta, rho):
    a = line_of_peak((theta, rho))
    b = line_of_peak(Peak(theta, rho, 0).antipode())
    for s in (-7.0, 0.0, 3.5):
        pt = (a.rho * a.normal[0] + s * a.direction[0], a.rho * a.normal[1] + s * a.direction[1])
        assert abs(b.distance(pt)) < 1e-9


# -- clipping -------------------------------------------------------------------


def test_clip_vertical_line():
    seg = clip_to_image(line_of_peak((0.0, 5.0)), 20, 20)
    assert tuple(seg.start) == pytest.approx((5, -10)) and tuple(seg.end) == pytest.approx((5, 10))


def test_clip_miss():
    assert clip_to_image(line_of_peak((0.0, 50.0)), 20, 20) is None


def test_clip_figure_line():
    n = (0.6, 0.8)
    line = OrientedLine(math.degrees(math.atan2(0.8, 0.6)), 2.4, n, (-0.8, 0.6))
    seg = clip_to_image(line, 10, 8)
    # y = -(3/4) x + 3 meets x = 5 at y = -0.75 and y = 4 at x = -4/3.
    assert tuple(seg.start) == pytest.approx((5.0, -0.75), abs=1e-12)
    assert tuple(seg.end) == pytest.approx((-4.0 / 3.0, 4.0), abs=1e-12)


@settings(max_examples=200)
@given(st.floats(-180, 180), st.floats(-60, 60), st.integers(1, 100), st.integers(1, 100))
def test_clip_endpoints_on_line_and_boundary(theta, rho, w, h):
    line = line_of_peak((theta, rho))
    seg = clip_to_image(line, w, h)
    if seg is None:
        # A miss means every boundary corner is on one side.
        corners = [(sx * w / 2, sy * h / 2) for sx in (-1, 1) for sy in (-1, 1)]
        d = [line.distance(c) for c in corners]
        assert all(x > -1e-9 for x in d) or all(x < 1e-9 for x in d)
        return
    for pt in seg:
        assert abs(line.distance(pt)) <= 1e-9
        assert abs(pt[0]) <= w / 2 + 1e-9 and abs(pt[1]) <= h / 2 + 1e-9
    d = (seg.end[0] - seg.start[0]) * line.direction[0] + (seg.end[1] - seg.start[1]) * line.direction[1]
    assert d >= -1e-9


def test_clip_validation():
    with pytest.raises(ValueError):
        clip_to_image(line_of_peak((0.0, 0.0)), 0, 10)


# -- output ---------------------------------------------------------------------


def test_peaks_csv():
    assert peaks_to_csv([Peak(53.25, 2.0, 7.0)]) == "theta_deg,rho_px,votes\n53.250000,2.000000,7\n"


def test_segments_csv_pixel_columns():
    line = line_of_peak((0.0, 0.0))
    seg = clip_to_image(line, 5, 5)
    rows = segments_to_csv([(line, seg)], 5, 5).splitlines()
    assert rows[0] == "theta_deg,rho_px,x0,y0,x1,y1,col0,row0,col1,row1"
    vals = [float(v) for v in rows[1].split(",")]
    assert vals[2:] == pytest.approx([0, -2.5, 0, 2.5, 2, 4.5, 2, -0.5])


def test_draw_segments_burns_line():
    px = np.full((7, 9), 200, np.uint8)
    seg = (CenteredPoint(-4, 0), CenteredPoint(4, 0))
    out = draw_segments(px, [seg], 0)
    assert (out[3] == 0).all() and (out[[0, 1, 2, 4, 5, 6]] == 200).all()
    assert (px == 200).all()
