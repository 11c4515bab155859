"""Dilation and erosion by Euclidean balls of integer radius.

Balls are closed discs: a pixel belongs to the dilation iff its squared
distance to the object is at most r^2, so both operators reduce to
thresholding an exact distance map and stay in integer arithmetic.

Target sets live inside the image: erosion of a shape with no in-frame
background (a completely filled image) is the identity.
"""

from __future__ import annotations

import numpy as np

from .edt import infinity, meijster
from .grid import as_binary


def _check_radius(radius: int) -> int:
    r = int(radius)
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return r


def dilate(img, radius: int, workers: int = 1) -> np.ndarray:
    """Union of closed balls of the given radius around object pixels."""
    r = _check_radius(radius)
    arr = as_binary(img)
    if r == 0:
        return arr.copy()
    dmap = meijster(arr, "foreground", workers)
    # The sentinel (empty object) must stay outside every ball, even when
    # r^2 is larger than the image diagonal.
    return (dmap <= r * r) & (dmap != infinity(arr.shape))


def erode(img, radius: int, workers: int = 1) -> np.ndarray:
    """Pixels whose closed ball of the given radius fits inside the object.

    Equals the complement of dilating the in-frame complement: a pixel
    survives iff its squared distance to the background exceeds r^2.
    """
    r = _check_radius(radius)
    arr = as_binary(img)
    if r == 0:
        return arr.copy()
    dmap = meijster(arr, "background", workers)
    return arr & ((dmap > r * r) | (dmap == infinity(arr.shape)))
