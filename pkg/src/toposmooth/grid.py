"""Digital topology on the 2D square grid.

A binary image is a 2D boolean numpy array indexed ``(row, col)``.  The
object is the set of True cells; everything outside the array reads as
background, so neighborhoods are well defined on the border.  Foreground
and background adjacency must form a dual pair, ``(8, 4)`` or ``(4, 8)``,
otherwise component-counting arguments break down.

A pixel's 8-neighborhood occupancy is packed into an 8-bit pattern, one
bit per neighbor in row-major order (see ``OFFSETS8``).  Simpleness of a
pixel -- "can it be flipped without changing the component structure of
object and complement" -- is a pure function of that pattern and is
served from a precomputed 256-entry table per adjacency pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

# 8-neighbor offsets in row-major order over the 3x3 block, center skipped.
# Bit i of a neighborhood pattern corresponds to OFFSETS8[i].
OFFSETS8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
# 4-neighbor offsets, row-major.
OFFSETS4 = ((-1, 0), (0, -1), (0, 1), (1, 0))


@dataclass(frozen=True)
class Connectivity:
    """Dual adjacency pair: ``fg`` for the object, ``bg`` for its complement."""

    fg: int
    bg: int

    def __post_init__(self) -> None:
        if (self.fg, self.bg) not in ((8, 4), (4, 8)):
            raise ValueError(f"adjacency pair must be (8, 4) or (4, 8), got {(self.fg, self.bg)}")

    @property
    def dual(self) -> "Connectivity":
        """The pair used for the complement: roles of fg and bg swapped."""
        return Connectivity(self.bg, self.fg)


CONN_84 = Connectivity(8, 4)
CONN_48 = Connectivity(4, 8)


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected-component labels, first-visit raster numbering from 1."""

    labels: np.ndarray
    count: int
    connectivity: int


def as_binary(img) -> np.ndarray:
    """Coerce input to a 2D boolean array; nonzero means foreground."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"binary image must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"binary image must be at least 1x1, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        arr = arr != 0
    return np.ascontiguousarray(arr)


def _check_n(n: int) -> None:
    if n not in (4, 8):
        raise ValueError(f"adjacency must be 4 or 8, got {n}")


def neighbors(p, n: int) -> list[tuple[int, int]]:
    """The 4 or 8 neighbors of ``p`` in row-major order.

    Coordinates may fall outside any particular image; callers decide how
    to treat them (out-of-image cells read as background here).
    """
    _check_n(n)
    i, j = p
    offs = OFFSETS4 if n == 4 else OFFSETS8
    return [(i + di, j + dj) for di, dj in offs]


def pattern_at(img, p) -> int:
    """Pack the 8-neighborhood occupancy of ``p`` into a byte.

    Bit i is set iff the i-th entry of ``OFFSETS8`` lands on a foreground
    cell; out-of-image positions contribute 0.  ``p`` must be inside the
    image.
    """
    arr = as_binary(img)
    h, w = arr.shape
    i, j = p
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"pixel {p!r} outside {h}x{w} image")
    pat = 0
    for bit, (di, dj) in enumerate(OFFSETS8):
        ni, nj = i + di, j + dj
        if 0 <= ni < h and 0 <= nj < w and arr[ni, nj]:
            pat |= 1 << bit
    return pat


def _offset_adjacent(a: tuple[int, int], b: tuple[int, int], n: int) -> bool:
    di, dj = abs(a[0] - b[0]), abs(a[1] - b[1])
    if n == 4:
        return di + dj == 1
    return max(di, dj) == 1 and (di, dj) != (0, 0)


def _count_center_components(pattern: int, n: int) -> int:
    """Components of the set bits under n-adjacency that touch the center.

    Reference construction for the tables below: explicit BFS over at most
    8 nodes.  A component only counts when one of its members is
    n-adjacent to the center; for n = 4 that excludes purely diagonal
    components.
    """
    pts = [OFFSETS8[k] for k in range(8) if (pattern >> k) & 1]
    seen: set[tuple[int, int]] = set()
    count = 0
    for start in pts:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            cur = stack.pop()
            for other in pts:
                if other not in seen and _offset_adjacent(cur, other, n):
                    seen.add(other)
                    comp.append(other)
                    stack.append(other)
        if any(_offset_adjacent(q, (0, 0), n) for q in comp):
            count += 1
    return count


def _build_tables() -> tuple[dict[int, np.ndarray], dict[tuple[int, int], np.ndarray]]:
    cn = {
        4: np.array([_count_center_components(p, 4) for p in range(256)], dtype=np.uint8),
        8: np.array([_count_center_components(p, 8) for p in range(256)], dtype=np.uint8),
    }
    simple = {}
    for fg, bg in ((8, 4), (4, 8)):
        tab = np.zeros(256, dtype=np.uint8)
        for pat in range(256):
            # T on the object pattern, T-bar on the complement pattern;
            # complementing flips out-of-image bits to 1, which is exactly
            # the "plane outside is background" convention.
            tab[pat] = 1 if (cn[fg][pat] == 1 and cn[bg][pat ^ 0xFF] == 1) else 0
        simple[(fg, bg)] = tab
    return cn, simple


_CN_TABLE, _SIMPLE_TABLE = _build_tables()


def connectivity_number(pattern: int, n: int) -> int:
    """Number of n-components of the pattern's set bits n-adjacent to the center."""
    _check_n(n)
    if not 0 <= pattern <= 255:
        raise ValueError(f"pattern must be in [0, 255], got {pattern}")
    return int(_CN_TABLE[n][pattern])


def simple_lut(conn: Connectivity) -> np.ndarray:
    """The 256-entry simpleness table for an adjacency pair (uint8, 0/1)."""
    return _SIMPLE_TABLE[(conn.fg, conn.bg)]


def is_simple(img, p, conn: Connectivity = CONN_84) -> bool:
    """True iff the foreground pixel ``p`` can be deleted without changing
    the component structure of object and complement."""
    arr = as_binary(img)
    i, j = p
    h, w = arr.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"pixel {p!r} outside {h}x{w} image")
    if not arr[i, j]:
        raise ValueError(f"pixel {p!r} is background; simpleness is defined for foreground")
    return bool(simple_lut(conn)[pattern_at(arr, p)])


def is_addable(img, p, conn: Connectivity = CONN_84) -> bool:
    """True iff adding the background pixel ``p`` preserves topology.

    Formalized as: p is simple for the object with p added.  Since p's own
    bit is not part of its pattern, this is the same table lookup on the
    unchanged neighborhood.
    """
    arr = as_binary(img)
    i, j = p
    h, w = arr.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"pixel {p!r} outside {h}x{w} image")
    if arr[i, j]:
        raise ValueError(f"pixel {p!r} is foreground; addability is defined for background")
    return bool(simple_lut(conn)[pattern_at(arr, p)])


@njit(cache=True)
def _flood_label(img, labels, use8):  # pragma: no cover - exercised via wrapper
    h, w = img.shape
    stack = np.empty(h * w, np.int64)
    count = 0
    for i0 in range(h):
        for j0 in range(w):
            if img[i0, j0] == 1 and labels[i0, j0] == 0:
                count += 1
                labels[i0, j0] = count
                stack[0] = i0 * w + j0
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    i = p // w
                    j = p - i * w
                    for k in range(8):
                        if not use8 and (k == 0 or k == 2 or k == 5 or k == 7):
                            continue
                        if k == 0:
                            ni, nj = i - 1, j - 1
                        elif k == 1:
                            ni, nj = i - 1, j
                        elif k == 2:
                            ni, nj = i - 1, j + 1
                        elif k == 3:
                            ni, nj = i, j - 1
                        elif k == 4:
                            ni, nj = i, j + 1
                        elif k == 5:
                            ni, nj = i + 1, j - 1
                        elif k == 6:
                            ni, nj = i + 1, j
                        else:
                            ni, nj = i + 1, j + 1
                        if 0 <= ni < h and 0 <= nj < w:
                            if img[ni, nj] == 1 and labels[ni, nj] == 0:
                                labels[ni, nj] = count
                                stack[top] = ni * w + nj
                                top += 1
    return count


def connected_components(img, n: int) -> ComponentLabeling:
    """Label foreground components under n-adjacency.

    Labels are assigned in first-visit raster order starting from 1, so
    the labeling is deterministic; background cells hold 0.
    """
    _check_n(n)
    arr = as_binary(img)
    u8 = arr.astype(np.uint8)
    labels = np.zeros(arr.shape, dtype=np.int32)
    count = _flood_label(u8, labels, n == 8)
    return ComponentLabeling(labels=labels, count=int(count), connectivity=n)


def topology_signature(img, conn: Connectivity = CONN_84) -> tuple[int, int]:
    """(foreground components, background components) of an image.

    The background count is taken in the plane: the image is surrounded by
    an implicit background frame, so background regions that meet the
    border all belong to one outer component.  This is the quantity
    preserved by simple-point operations.
    """
    arr = as_binary(img)
    fg = connected_components(arr, conn.fg).count
    h, w = arr.shape
    comp = np.ones((h + 2, w + 2), dtype=bool)
    comp[1:-1, 1:-1] = ~arr
    bg = connected_components(comp, conn.bg).count
    return fg, bg


def pattern_map(img) -> np.ndarray:
    """Neighborhood patterns of every pixel at once (uint8 array)."""
    arr = as_binary(img)
    h, w = arr.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = arr
    pat = np.zeros((h, w), dtype=np.uint8)
    for bit, (di, dj) in enumerate(OFFSETS8):
        pat |= padded[1 + di : 1 + di + h, 1 + dj : 1 + dj + w] << np.uint8(bit)
    return pat


def simple_mask(img, conn: Connectivity = CONN_84) -> np.ndarray:
    """Boolean mask of foreground pixels that are currently simple."""
    arr = as_binary(img)
    return (simple_lut(conn)[pattern_map(arr)] == 1) & arr


def addable_mask(img, conn: Connectivity = CONN_84) -> np.ndarray:
    """Boolean mask of background pixels whose addition preserves topology."""
    arr = as_binary(img)
    return (simple_lut(conn)[pattern_map(arr)] == 1) & ~arr


def boundary_length(img) -> int:
    """Count of foreground pixels 4-adjacent to background (plane convention)."""
    arr = as_binary(img)
    padded = np.zeros((arr.shape[0] + 2, arr.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = arr
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return int(np.count_nonzero(arr & ~interior))
