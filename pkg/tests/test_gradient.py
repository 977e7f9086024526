import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import ndimage

from orienthough import (
    GrayImage,
    RectSpec,
    SceneSpec,
    canny_edges,
    generate,
    gradient_to_images,
    magnitude,
    orientation_full,
    orientation_half,
    sobel,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False)


def brute_sobel(pixels):
    """Direct loop convolution with replicated borders, y pointing up."""
    p = np.pad(pixels.astype(float), 1, mode="edge")
    h, w = pixels.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            win = p[r : r + 3, c : c + 3]
            gx[r, c] = (win[:, 2] - win[:, 0]) @ [1, 2, 1]
            gy[r, c] = (win[0] - win[2]) @ [1, 2, 1]
    return gx, gy


def step_image(k=4, size=9):
    px = np.zeros((size, size), np.uint8)
    px[:, k:] = 255
    return GrayImage(px)


def test_vertical_step_response():
    g = sobel(step_image())
    assert g.gx[4, 3] == 1020 and g.gy[4, 3] == 0
    assert g.gx[4, 4] == 1020
    assert g.gx[4, 1] == 0 and g.gx[4, 6] == 0


def test_horizontal_step_bright_above():
    px = np.rot90(step_image().pixels)  # bright half moves to the top
    g = sobel(GrayImage(px))
    assert g.gy[4, 4] == 1020 and g.gx[4, 4] == 0
    assert (g.gy >= 0).all()


def test_constant_image_has_no_gradient():
    g = sobel(GrayImage(np.full((6, 5), 77, np.uint8)))
    assert not g.gx.any() and not g.gy.any()


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 9), st.integers(3, 9), st.integers(0, 2**32 - 1))
def test_sobel_matches_brute_force(h, w, seed):
    px = np.random.default_rng(seed).integers(0, 256, (h, w)).astype(np.uint8)
    g = sobel(GrayImage(px))
    gx, gy = brute_sobel(px)
    assert np.array_equal(g.gx, gx) and np.array_equal(g.gy, gy)


def test_sobel_needs_three_by_three():
    with pytest.raises(ValueError):
        sobel(GrayImage(np.zeros((2, 5), np.uint8)))


def test_smoothing_reduces_peak_response():
    img = step_image()
    assert sobel(img, sigma=1.0).gx.max() < sobel(img).gx.max()


@pytest.mark.parametrize(
    "g, expected", [((1, 0), 0.0), ((0, 1), 90.0), ((-1, 0), -180.0), ((1, -1), -45.0), ((-1, -1), -135.0)]
)
def test_orientation_full(g, expected):
    assert orientation_full(*g) == pytest.approx(expected)


@pytest.mark.parametrize("g, expected", [((1, 1), 45.0), ((-1, -1), 45.0), ((0, -3), 90.0), ((0, 2), 90.0)])
def test_orientation_half(g, expected):
    assert orientation_half(*g) == pytest.approx(expected)


@pytest.mark.parametrize("f", [orientation_full, orientation_half])
def test_zero_gradient_orientation_undefined(f):
    with pytest.raises(ValueError):
        f(0, 0)


@given(finite, finite)
def test_half_orientation_folds_antipodes(gx, gy):
    assume(gx != 0 or gy != 0)
    assert orientation_half(gx, gy) == orientation_half(-gx, -gy)


@given(finite, finite)
def test_full_orientation_antipode_shift(gx, gy):
    assume(math.hypot(gx, gy) > 1e-6)
    a = orientation_full(gx, gy)
    b = orientation_full(-gx, -gy)
    assert -180 <= a < 180 and -180 <= b < 180
    d = (b - a - 180.0 + 180.0) % 360.0 - 180.0
    assert abs(d) < 1e-9


@pytest.mark.parametrize("gx, gy, norm, expected", [(3, 4, "l2", 5), (0, 0, "l2", 0), (-3, 4, "l1", 7)])
def test_magnitude(gx, gy, norm, expected):
    assert magnitude(gx, gy, norm) == expected


def test_magnitude_rejects_unknown_norm():
    with pytest.raises(ValueError):
        magnitude(1, 1, "linf")


def test_orientation_field_nan_on_flat():
    g = sobel(step_image())
    th = g.orientation()
    assert np.isnan(th[4, 0]) and th[4, 4] == 0.0


# -- Canny ----------------------------------------------------------------------


def test_vertical_step_single_column():
    e = canny_edges(sobel(step_image()), 210, 84)
    cols = np.unique(np.nonzero(e.mask)[1])
    assert len(cols) == 1 and cols[0] == 3
    assert e.mask[1:-1, 3].all()
    assert len(e) == 7  # border frame excluded


def test_constant_image_no_edges():
    e = canny_edges(sobel(GrayImage(np.full((8, 8), 50, np.uint8))), 10, 1)
    assert len(e) == 0


def test_rectangle_edge_count_near_perimeter():
    img = generate(SceneSpec("rectangle_scene", width=101, height=101, rects=[RectSpec()]))
    n = len(canny_edges(sobel(img)))
    assert abs(n - 120) <= 12


def test_thin_stripe_keeps_both_sides():
    # Opposite-facing edges one pixel apart must both survive thinning.
    img = generate(SceneSpec("stripe", width=40, height=40, angle=0, thickness=2))
    rows = np.unique(np.nonzero(canny_edges(sobel(img)).mask)[0])
    assert len(rows) == 2


def test_polarity_invariant_edges():
    img = generate(SceneSpec("rectangle_scene", width=61, height=61, rects=[RectSpec((0, 0), 30, 14, 255, 20)]))
    inv = GrayImage(255 - img.pixels)
    assert np.array_equal(canny_edges(sobel(img)).mask, canny_edges(sobel(inv)).mask)


def test_low_threshold_default_and_validation():
    g = sobel(step_image())
    assert np.array_equal(canny_edges(g, 210).mask, canny_edges(g, 210, 84).mask)
    with pytest.raises(ValueError):
        canny_edges(g, 100, 150)
    with pytest.raises(ValueError):
        canny_edges(g, 100, 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(60, 400))
def test_hysteresis_invariants(seed, high):
    img = generate(SceneSpec("rectangle_scene", width=48, height=48,
                             rects=[RectSpec((2, -1), 24, 16, 180, 33)], noise_seed=seed, noise_sigma=20))
    g = sobel(img)
    low = 0.4 * high
    e = canny_edges(g, high)
    mag = g.magnitude()
    assert (mag[e.mask] >= low).all()
    assert not e.mask[0].any() and not e.mask[-1].any()
    assert not e.mask[:, 0].any() and not e.mask[:, -1].any()
    labels, n = ndimage.label(e.mask, structure=np.ones((3, 3)))
    for k in range(1, n + 1):
        assert mag[labels == k].max() >= high


def test_gradient_images_center_on_128():
    gx, gy = gradient_to_images(sobel(step_image()))
    assert gx.pixels[4, 0] == 128 and gy.pixels[4, 4] == 128
    assert gx.pixels[4, 4] == 255
    flat_x, flat_y = gradient_to_images(sobel(GrayImage(np.zeros((4, 4), np.uint8))))
    assert (flat_x.pixels == 128).all() and (flat_y.pixels == 128).all()
