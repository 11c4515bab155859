"""Compiled inner loops shared by the sequential and zone-parallel
stability engines.

Images are uint8 (0/1) so the kernels can mutate them in place; ``free``
marks pixels outside the inhibit set.  Candidate lists are int64 arrays
encoding ``(priority << 32) | flat_index``, which sorts by priority with
raster-order tie-break in one comparison.  All kernels release the GIL;
callers guarantee that concurrent invocations touch row bands at least
three rows apart, so the 3x3 neighborhoods they read and write never
overlap.
"""

from __future__ import annotations

import numpy as np
from numba import njit

IDX_MASK = 0xFFFFFFFF

# Row-major 8-neighborhood, same order as grid.OFFSETS8.
_DI = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)
_DJ = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)


@njit(cache=True, inline="always")
def _pattern(img, i, j):  # pragma: no cover - inlined
    h, w = img.shape
    pat = 0
    if i > 0:
        if j > 0 and img[i - 1, j - 1] == 1:
            pat |= 1
        if img[i - 1, j] == 1:
            pat |= 2
        if j < w - 1 and img[i - 1, j + 1] == 1:
            pat |= 4
    if j > 0 and img[i, j - 1] == 1:
        pat |= 8
    if j < w - 1 and img[i, j + 1] == 1:
        pat |= 16
    if i < h - 1:
        if j > 0 and img[i + 1, j - 1] == 1:
            pat |= 32
        if img[i + 1, j] == 1:
            pat |= 64
        if j < w - 1 and img[i + 1, j + 1] == 1:
            pat |= 128
    return pat


@njit(cache=True, nogil=True)
def delete_pass(img, free, lut, enc):  # pragma: no cover - via wrappers
    """Guarded deletions in encoded order; returns deleted flat indices.

    Candidates must already be sorted.  Every deletion re-tests
    simpleness against the current image state, so the pass is safe to
    interleave with other passes working on bands at least three rows
    away.
    """
    w = img.shape[1]
    out = np.empty(enc.shape[0], np.int64)
    nd = 0
    for k in range(enc.shape[0]):
        idx = enc[k] & IDX_MASK
        i = idx // w
        j = idx - i * w
        if img[i, j] == 1 and free[i, j] == 1:
            if lut[_pattern(img, i, j)] == 1:
                img[i, j] = 0
                out[nd] = idx
                nd += 1
    return out[:nd]


@njit(cache=True, nogil=True)
def collect_recheck(img, free, deleted):  # pragma: no cover - via wrappers
    """Neighbors of deleted pixels that could have become deletable.

    Only live unconstrained pixels are returned; a background or
    inhibited pixel can never become a candidate later.  Duplicates are
    possible and are resolved by queue membership at insert time.
    """
    h, w = img.shape
    out = np.empty(deleted.shape[0] * 8, np.int64)
    m = 0
    for k in range(deleted.shape[0]):
        idx = deleted[k]
        i = idx // w
        j = idx - i * w
        for t in range(8):
            ni = i + _DI[t]
            nj = j + _DJ[t]
            if 0 <= ni < h and 0 <= nj < w:
                if img[ni, nj] == 1 and free[ni, nj] == 1:
                    out[m] = ni * w + nj
                    m += 1
    return out[:m]


@njit(cache=True)
def thin_core(img, free, lut, dist, max_sweeps):  # pragma: no cover - via wrappers
    """Run guarded deletions to stability, in rounds.

    Round 1 takes every live unconstrained pixel in increasing
    (priority, raster) order; each later round takes the deduplicated
    recheck neighbors of the previous round's deletions, in the same
    order.  Stops when a round deletes nothing more to schedule, or after
    ``max_sweeps`` rounds (negative means unlimited).  Returns the number
    of rounds run.
    """
    h, w = img.shape
    n = h * w
    cur = np.empty(n, np.int64)
    m = 0
    for i in range(h):
        for j in range(w):
            if img[i, j] == 1 and free[i, j] == 1:
                idx = i * w + j
                cur[m] = (dist[idx] << 32) | idx
                m += 1
    srt = np.sort(cur[:m])
    cur[:m] = srt
    deleted = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    seen = np.zeros(n, np.int64)
    gen = 0
    sweeps = 0
    while m > 0:
        if max_sweeps >= 0 and sweeps >= max_sweeps:
            break
        sweeps += 1
        gen += 1
        nd = 0
        for k in range(m):
            idx = cur[k] & IDX_MASK
            i = idx // w
            j = idx - i * w
            if img[i, j] == 1:
                if lut[_pattern(img, i, j)] == 1:
                    img[i, j] = 0
                    deleted[nd] = idx
                    nd += 1
        m2 = 0
        for k in range(nd):
            idx = deleted[k]
            i = idx // w
            j = idx - i * w
            for t in range(8):
                ni = i + _DI[t]
                nj = j + _DJ[t]
                if 0 <= ni < h and 0 <= nj < w:
                    if img[ni, nj] == 1 and free[ni, nj] == 1:
                        nidx = ni * w + nj
                        if seen[nidx] != gen:
                            seen[nidx] = gen
                            nxt[m2] = (dist[nidx] << 32) | nidx
                            m2 += 1
        srt = np.sort(nxt[:m2])
        cur[:m2] = srt
        m = m2
    return sweeps
