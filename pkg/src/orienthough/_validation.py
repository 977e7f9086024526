"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .raster import MIN_SIDE, GrayImage


def check_image(X, min_side: int = MIN_SIDE) -> GrayImage:
    """Coerce ``X`` (a :class:`GrayImage` or 2-D array) into a GrayImage.

    Raises ``ValueError`` for non-2-D input, images below ``min_side`` on
    either axis, non-finite or non-integer samples, or samples outside
    [0, 255].
    """
    if isinstance(X, GrayImage):
        if X.width < min_side or X.height < min_side:
            raise ValueError(f"image must be at least {min_side}x{min_side}, got {X.width}x{X.height}")
        return X
    arr = check_array(
        X,
        dtype=None,
        ensure_2d=True,
        ensure_min_samples=min_side,
        ensure_min_features=min_side,
        input_name="X",
    )
    if arr.dtype == np.uint8:
        return GrayImage(arr)
    if arr.dtype.kind not in "iuf" and arr.dtype != bool:
        raise ValueError(f"image samples must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(np.float64)
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("image samples must lie in [0, 255]")
    if not np.array_equal(arr, np.round(arr)):
        raise ValueError("image samples must be integers")
    return GrayImage(arr.astype(np.uint8))


def check_odd(name: str, value) -> int:
    if int(value) != value or value < 1 or value % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {value!r}")
    return int(value)
