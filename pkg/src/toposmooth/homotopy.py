"""Topology-preserving transforms: constrained thinning and thickening,
homotopic cutting and filling, and the alternating smoothing filter.

Thinning deletes simple pixels outside an inhibit set, taking candidates
in increasing order of their precomputed squared distance to the
background (raster order breaks ties), re-queueing the neighbors of each
deletion, until no deletable pixel remains.  The distance map is frozen
up front and never refreshed, so results are deterministic.

Thickening is the dual: thinning of the complement under the swapped
adjacency pair.

Cutting at radius r thins down to the erosion (plus an optional keep
set), then thickens back inside the dilation of what survived,
intersected with the original.  Filling is the mirror image.  The
smoothing filter alternates cutting and filling at radii 1..r_max; every
stage is built from simple-point moves only, so the component structure
of object and complement is preserved exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels, grid
from .edt import infinity, meijster
from .grid import CONN_84, Connectivity, as_binary

ThinFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class ConstraintSets:
    """Optional geometric inhibit sets.

    ``c`` marks object pixels that cutting may never remove (must be a
    subset of the object); ``d`` marks background pixels that filling may
    never fill (must be disjoint from the object).
    """

    c: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SmoothingParams:
    """Knobs for the smoothing filter.

    ``r_max`` is the largest ball radius (0 means identity); ``workers``
    only affects execution strategy, never the sequential result.
    ``max_iter`` caps stability rounds and exists as a safety valve;
    leave it None for correct smoothing.
    """

    r_max: int
    conn: Connectivity = CONN_84
    constraints: Optional[ConstraintSets] = None
    workers: int = 1
    max_iter: Optional[int] = None

    def __post_init__(self) -> None:
        if self.r_max < 0:
            raise ValueError(f"r_max must be >= 0, got {self.r_max}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class StageReport:
    """Accumulated wall-clock seconds per pipeline stage kind."""

    seconds: dict = field(default_factory=dict)

    def add(self, key: str, dt: float) -> None:
        self.seconds[key] = self.seconds.get(key, 0.0) + dt


def _lut_for(conn: Connectivity) -> np.ndarray:
    # Seam for fault-injection tests; normal path is the grid table.
    return grid.simple_lut(conn)


def _tick(report: Optional[StageReport], key: str, t0: float) -> None:
    if report is not None:
        report.add(key, time.perf_counter() - t0)


def _check_subset(inner: np.ndarray, outer: np.ndarray, what: str) -> None:
    if inner.shape != outer.shape:
        raise ValueError(f"{what}: shape mismatch {inner.shape} vs {outer.shape}")
    if np.any(inner & ~outer):
        raise ValueError(f"{what} violated")


def _as_dist(dmap, shape) -> np.ndarray:
    d = np.asarray(dmap, dtype=np.int64)
    if d.shape != tuple(shape):
        raise ValueError(f"distance map shape {d.shape} does not match image {tuple(shape)}")
    if d.size and (d.max() >= 1 << 31 or d.min() < 0):
        raise ValueError("distance values must fit in 31 bits and be non-negative")
    return d


def thin(z, w, dmap, conn: Connectivity = CONN_84, max_iter: Optional[int] = None) -> np.ndarray:
    """Ultimate constrained skeleton of ``z``: delete simple pixels outside
    ``w`` in increasing ``dmap`` order until stability.

    ``dmap`` must hold the squared distances of z's pixels to its
    background, computed beforehand; it is used as a frozen priority.
    """
    z = as_binary(z)
    w = as_binary(w)
    _check_subset(w, z, "thinning requires the keep set inside the object")
    dist = _as_dist(dmap, z.shape)
    if z.shape[0] * z.shape[1] >= 1 << 31:
        raise ValueError("image too large for the candidate encoding")
    img = z.astype(np.uint8)
    free = (~w).astype(np.uint8)
    cap = -1 if max_iter is None else int(max_iter)
    _kernels.thin_core(img, free, _lut_for(conn), dist.ravel(), cap)
    return img.astype(bool)


def thicken(y, v, conn: Connectivity = CONN_84, max_iter: Optional[int] = None) -> np.ndarray:
    """Grow ``y`` inside ``v`` by topology-safe additions until stability.

    Runs as thinning of the complement under the dual adjacency pair,
    with the complement's distance map computed here.
    """
    return _thicken_via(thin, y, v, conn, max_iter, edt_workers=1, report=None)


def _fg_map_padded(y: np.ndarray, workers: int, report: Optional[StageReport]) -> np.ndarray:
    """Distance to the object on the lattice padded by one row/column.

    One map serves two purposes: its interior slice thresholds like a
    dilation of ``y``, and the whole map is the thinning priority for the
    padded complement (distance of complement pixels to the object).
    """
    t0 = time.perf_counter()
    dmap = meijster(np.pad(y, 1), "foreground", workers)
    _tick(report, "edt", t0)
    return dmap


def _bg_map(x: np.ndarray, workers: int, report: Optional[StageReport]) -> np.ndarray:
    t0 = time.perf_counter()
    dmap = meijster(x, "background", workers)
    _tick(report, "edt", t0)
    return dmap


def _erode_from(x: np.ndarray, bg_map: np.ndarray, r: int) -> np.ndarray:
    return x & ((bg_map > r * r) | (bg_map == infinity(x.shape)))


def _dilate_from(fg_map_pad: np.ndarray, r: int) -> np.ndarray:
    inner = fg_map_pad[1:-1, 1:-1]
    return (inner <= r * r) & (inner != infinity(fg_map_pad.shape))


def _thicken_core(
    thin_fn: ThinFn,
    y: np.ndarray,
    v: np.ndarray,
    fg_map_pad: np.ndarray,
    conn: Connectivity,
    max_iter: Optional[int],
    report: Optional[StageReport],
) -> np.ndarray:
    # The complement extends past the image frame, so thin it padded with
    # one ring of constrained foreground: the ring stands in for the rest
    # of the plane and may never be deleted.  Without it, border pixels
    # would be judged under the wrong convention.
    zc = np.pad(~y, 1, constant_values=True)
    wc = np.pad(~v, 1, constant_values=True)
    t0 = time.perf_counter()
    out = thin_fn(zc, wc, fg_map_pad, conn.dual, max_iter)
    _tick(report, "topology", t0)
    return ~out[1:-1, 1:-1]


def _thicken_via(
    thin_fn: ThinFn,
    y,
    v,
    conn: Connectivity,
    max_iter: Optional[int],
    edt_workers: int,
    report: Optional[StageReport],
) -> np.ndarray:
    y = as_binary(y)
    v = as_binary(v)
    _check_subset(y, v, "thickening requires the seed inside the growth set")
    return _thicken_core(thin_fn, y, v, _fg_map_padded(y, edt_workers, report), conn, max_iter, report)


def _cutting_via(
    x: np.ndarray,
    r: int,
    c: Optional[np.ndarray],
    conn: Connectivity,
    thin_fn: ThinFn,
    max_iter: Optional[int],
    edt_workers: int,
    report: Optional[StageReport],
) -> np.ndarray:
    bg_map = _bg_map(x, edt_workers, report)
    keep = _erode_from(x, bg_map, r)
    if c is not None:
        keep = keep | c
    t0 = time.perf_counter()
    y = thin_fn(x, keep, bg_map, conn, max_iter)
    _tick(report, "topology", t0)
    fg_map = _fg_map_padded(y, edt_workers, report)
    grow = _dilate_from(fg_map, r) & x
    return _thicken_core(thin_fn, y, grow, fg_map, conn, max_iter, report)


def _filling_via(
    x: np.ndarray,
    r: int,
    d: Optional[np.ndarray],
    conn: Connectivity,
    thin_fn: ThinFn,
    max_iter: Optional[int],
    edt_workers: int,
    report: Optional[StageReport],
) -> np.ndarray:
    fg_map = _fg_map_padded(x, edt_workers, report)
    grow = _dilate_from(fg_map, r)
    if d is not None:
        grow = grow & ~d
    z = _thicken_core(thin_fn, x, grow, fg_map, conn, max_iter, report)
    bg_map = _bg_map(z, edt_workers, report)
    keep = _erode_from(z, bg_map, r) | x
    t0 = time.perf_counter()
    out = thin_fn(z, keep, bg_map, conn, max_iter)
    _tick(report, "topology", t0)
    return out


def cutting(x, r: int, c=None, conn: Connectivity = CONN_84) -> np.ndarray:
    """Opening-like smoothing step at radius ``r`` that preserves topology.

    Thins down to the erosion (union the optional keep set ``c``), then
    thickens back inside the dilation of the survivor intersected with
    the original, so only protrusions that can be removed without
    topology changes disappear.
    """
    x = as_binary(x)
    if c is not None:
        c = as_binary(c)
        _check_subset(c, x, "cutting keep set must lie inside the object")
    return _cutting_via(x, int(r), c, conn, thin, None, 1, None)


def filling(x, r: int, d=None, conn: Connectivity = CONN_84) -> np.ndarray:
    """Closing-like smoothing step at radius ``r`` that preserves topology.

    Thickens inside the dilation (minus the optional inhibit set ``d``),
    then thins back down to the erosion of the grown shape union the
    original, so only indentations that can be filled safely get filled.
    """
    x = as_binary(x)
    if d is not None:
        d = as_binary(d)
        if d.shape != x.shape:
            raise ValueError(f"inhibit set shape {d.shape} does not match image {x.shape}")
        if np.any(d & x):
            raise ValueError("filling inhibit set must be disjoint from the object")
    return _filling_via(x, int(r), d, conn, thin, None, 1, None)


def _validated_constraints(x: np.ndarray, params: SmoothingParams):
    c = d = None
    if params.constraints is not None:
        if params.constraints.c is not None:
            c = as_binary(params.constraints.c)
            _check_subset(c, x, "cutting keep set must lie inside the object")
        if params.constraints.d is not None:
            d = as_binary(params.constraints.d)
            if d.shape != x.shape:
                raise ValueError(f"inhibit set shape {d.shape} does not match image {x.shape}")
            if np.any(d & x):
                raise ValueError("filling inhibit set must be disjoint from the object")
    return c, d


def _smooth_pipeline(
    x,
    params: SmoothingParams,
    thin_fn: ThinFn,
    edt_workers: int,
    report: Optional[StageReport] = None,
) -> np.ndarray:
    x = as_binary(x)
    c, d = _validated_constraints(x, params)
    out = x.copy()
    for r in range(1, params.r_max + 1):
        out = _cutting_via(out, r, c, params.conn, thin_fn, params.max_iter, edt_workers, report)
        out = _filling_via(out, r, d, params.conn, thin_fn, params.max_iter, edt_workers, report)
    return out


def hasf(x, params: SmoothingParams) -> np.ndarray:
    """Alternating cutting/filling smoothing at radii 1..r_max.

    Single-threaded reference semantics; the zone-parallel variant lives
    in ``runtime.parallel_smooth`` and preserves the same invariants.
    """
    return _smooth_pipeline(x, params, thin, edt_workers=1)


def salient_parts(x, smoothed) -> tuple[np.ndarray, np.ndarray]:
    """(removed, added): pixels the smoothing carved away and filled in."""
    x = as_binary(x)
    s = as_binary(smoothed)
    if x.shape != s.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {s.shape}")
    return x & ~s, s & ~x
