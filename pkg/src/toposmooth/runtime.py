"""Zone-parallel execution of until-stability pixel transforms.

The image is split into row bands ("zones") of at least six rows, one per
logical worker, and each zone into a leading and a trailing half of at
least three rows.  A processing round runs all leading halves in
parallel, a barrier, then all trailing halves: concurrently active bands
are always separated by three or more rows, so no two workers can touch
the same 3x3 neighborhood, and concurrent deletions are never closer
than Chebyshev distance 3.  Deletions are additionally re-guarded
against the live image inside the kernels, making every parallel run
equivalent to some sequential order of guarded single-pixel moves.

Pixels whose neighborhood changed are queued for recheck in paired FIFO
queues: a queue belongs to at most two workers, rejects duplicates, and
a neighbor falling in another zone is queued on behalf of that zone's
owner.  When scanning finishes, workers fuse pairwise in completion
order; a fused worker inherits its parents' zones and queues, drains
every queue it solely owns (through the same banded waves), and pushes
fresh rechecks into next-level queues.  Fusion repeats until a single
worker remains and its queues drain empty.

Task distribution is round-robin over a fixed pool with run-to-completion
semantics: no task migrates or is preempted once started, and no worker
ever holds more than ceil(tasks / workers) of a wave.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels, _pools, homotopy
from .grid import CONN_84, Connectivity, as_binary
from .homotopy import SmoothingParams, StageReport, _smooth_pipeline

MIN_ZONE_ROWS = 6


class ProtocolError(AssertionError):
    """A violation of the queue/ownership protocol; always a bug, never silent."""


@dataclass(frozen=True)
class ZonePlan:
    """Row bands covering the image, each split into two half bands."""

    height: int
    zones: tuple[tuple[int, int], ...]
    sub_bands: tuple[tuple[tuple[int, int], tuple[int, int]], ...]


def split(height: int, requested_workers: int) -> ZonePlan:
    """Partition rows into near-equal zones of at least six rows each.

    The zone count is capped at ``height // 6`` (but at least one zone),
    so with two or more zones every half band spans three or more rows,
    which is what keeps simultaneously active bands apart.
    """
    if height < 1:
        raise ValueError(f"height must be >= 1, got {height}")
    if requested_workers < 1:
        raise ValueError(f"requested_workers must be >= 1, got {requested_workers}")
    count = max(1, min(requested_workers, height // MIN_ZONE_ROWS))
    base, rem = divmod(height, count)
    zones = []
    bands = []
    lo = 0
    for k in range(count):
        hi = lo + base + (1 if k < rem else 0)
        mid = (lo + hi) // 2
        zones.append((lo, hi))
        bands.append(((lo, mid), (mid, hi)))
        lo = hi
    return ZonePlan(height=height, zones=tuple(zones), sub_bands=tuple(bands))


def distribute(tasks: Sequence, workers: int) -> list[list]:
    """Round-robin assignment of tasks to workers.

    Deterministic given task order; per-worker load never exceeds
    ceil(len(tasks) / workers).  Workers run their list in order, each
    task to completion.  An empty task list yields all-idle workers.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    lanes: list[list] = [[] for _ in range(workers)]
    for k, task in enumerate(tasks):
        lanes[k % workers].append(task)
    return lanes


@dataclass
class ProtocolTrace:
    """Counters recorded by a run for discipline assertions."""

    queues_created: int = 0
    inserts: int = 0
    pops: int = 0
    duplicates_blocked: int = 0
    max_owners: int = 0
    fusions: int = 0
    drains: int = 0
    sweeps: int = 0
    completed: bool = False

    def assert_discipline(self) -> None:
        if self.max_owners > 2:
            raise ProtocolError(f"a queue saw {self.max_owners} owners")
        if not self.completed:
            raise ProtocolError("run did not reach termination")


class MergeQueue:
    """FIFO of pixel indices owned by at most two workers, no duplicates.

    Membership is tracked per queue so re-inserting a pending pixel is a
    no-op; popped pixels may be enqueued again later.  Draining retires
    the queue for good.  ``member_pool`` recycles the cleared membership
    lattices of retired queues, since zeroing a fresh one per queue costs
    more than the queue traffic itself.
    """

    def __init__(
        self,
        qid: int,
        ncells: int,
        owner: int,
        trace: ProtocolTrace,
        member_pool: Optional[list[np.ndarray]] = None,
    ):
        self.qid = qid
        self.owners: set[int] = {owner}
        self.retired = False
        self.size = 0
        self._pool = member_pool
        self._member = member_pool.pop() if member_pool else np.zeros(ncells, dtype=bool)
        self._batches: list[np.ndarray] = []
        self._trace = trace
        trace.queues_created += 1
        trace.max_owners = max(trace.max_owners, 1)

    def insert(self, worker: int, idx: np.ndarray) -> int:
        if self.retired:
            raise ProtocolError(f"insert into retired queue {self.qid}")
        if worker not in self.owners:
            if len(self.owners) >= 2:
                raise ProtocolError(f"queue {self.qid} would get a third owner")
            self.owners.add(worker)
            self._trace.max_owners = max(self._trace.max_owners, len(self.owners))
        raw = np.asarray(idx, dtype=np.int64)
        uniq = np.unique(raw)
        fresh = uniq[~self._member[uniq]]
        self._trace.inserts += int(fresh.size)
        self._trace.duplicates_blocked += int(raw.size - fresh.size)
        if fresh.size:
            self._member[fresh] = True
            self._batches.append(fresh)
            self.size += int(fresh.size)
        return int(fresh.size)

    def replace_owner(self, old: int, new: int) -> None:
        if old in self.owners:
            self.owners.discard(old)
            self.owners.add(new)

    def pop_all(self) -> np.ndarray:
        if self.retired:
            raise ProtocolError(f"queue {self.qid} drained twice")
        self.retired = True
        if not self._batches:
            arr = np.empty(0, dtype=np.int64)
        else:
            arr = np.concatenate(self._batches)
            if np.unique(arr).size != arr.size:
                raise ProtocolError(f"queue {self.qid} held duplicate entries")
            self._member[arr] = False
            self._batches.clear()
            self.size = 0
        self._trace.pops += int(arr.size)
        if self._pool is not None:
            self._pool.append(self._member)  # cleared, ready for the next queue
            self._member = None
        return arr


class _Worker:
    __slots__ = ("wid", "zones", "queue", "finished_at")

    def __init__(self, wid: int, zones: set[int]):
        self.wid = wid
        self.zones = zones
        self.queue: Optional[MergeQueue] = None
        self.finished_at = 0.0


def _run_chunk(chunk):
    return [fn() for fn in chunk]


class ZoneEngine:
    """Executes banded waves over a fixed thread pool and runs the
    queue/fusion protocol to stability.

    Band processors receive ``(zone, row_lo, row_hi)`` for the initial
    scan and additionally an index array for recheck entries; they mutate
    the shared image themselves and return the flat indices to requeue.
    Processors must read only the 3x3 neighborhoods of pixels inside
    their band and write only inside the band.
    """

    def __init__(self, workers: int, trace: Optional[ProtocolTrace] = None):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.trace = trace if trace is not None else ProtocolTrace()
        self._pool = _pools.shared_pool(workers)
        self._queues: list[MergeQueue] = []
        self._members: list[np.ndarray] = []
        self._next_wid = 0

    def _new_worker(self, zones: set[int]) -> _Worker:
        w = _Worker(self._next_wid, zones)
        self._next_wid += 1
        return w

    def _bind_queue(self, worker: _Worker, ncells: int) -> MergeQueue:
        q = worker.queue
        if q is not None and not q.retired and (worker.wid in q.owners or len(q.owners) < 2):
            return q
        for q in self._queues:
            if not q.retired and (worker.wid in q.owners or len(q.owners) < 2):
                worker.queue = q
                return q
        q = MergeQueue(len(self._queues), ncells, worker.wid, self.trace, self._members)
        self._queues.append(q)
        worker.queue = q
        return q

    def _fuse(self, a: _Worker, b: _Worker, zone_owner: dict[int, _Worker]) -> _Worker:
        fused = self._new_worker(a.zones | b.zones)
        fused.finished_at = max(a.finished_at, b.finished_at)
        for q in self._queues:
            if not q.retired:
                q.replace_owner(a.wid, fused.wid)
                q.replace_owner(b.wid, fused.wid)
        for z in fused.zones:
            zone_owner[z] = fused
        self.trace.fusions += 1
        return fused

    def _wave(self, tasks):
        """Run one wave of band tasks; returns (zone, requeue, finish time)."""

        def make(task):
            zid, lo, hi, entries = task

            def call():
                if entries is None:
                    enq = self._scan_band(zid, lo, hi)
                else:
                    enq = self._process_entries(zid, lo, hi, entries)
                return zid, enq, time.monotonic()

            return call

        results = []
        lanes = distribute([make(t) for t in tasks], self.workers)
        futs = [self._pool.submit(_run_chunk, lane) for lane in lanes if lane]
        for fu in futs:
            results.extend(fu.result())
        return results

    def _route(self, results, zone_starts, zone_owner, ncells, width):
        for zid, enq, _ in sorted(results, key=lambda r: r[0]):
            if enq.size == 0:
                continue
            rows = enq // width
            owner_zone = np.searchsorted(zone_starts, rows, side="right") - 1
            for z in np.unique(owner_zone):
                worker = zone_owner[int(z)]
                q = self._bind_queue(worker, ncells)
                q.insert(worker.wid, enq[owner_zone == z])

    def run(
        self,
        shape: tuple[int, int],
        plan: ZonePlan,
        scan_band: Callable[[int, int, int], np.ndarray],
        process_entries: Callable[[int, int, int, np.ndarray], np.ndarray],
        max_sweeps: Optional[int] = None,
    ) -> None:
        h, w = shape
        ncells = h * w
        self._scan_band = scan_band
        self._process_entries = process_entries
        nz = len(plan.zones)
        zone_starts = np.array([z[0] for z in plan.zones], dtype=np.int64)
        workers = [self._new_worker({z}) for z in range(nz)]
        zone_owner = {z: workers[z] for z in range(nz)}

        lead = [(z, *plan.sub_bands[z][0], None) for z in range(nz)]
        trail = [(z, *plan.sub_bands[z][1], None) for z in range(nz)]
        self._route(self._wave(lead), zone_starts, zone_owner, ncells, w)
        results = self._wave(trail)
        self._route(results, zone_starts, zone_owner, ncells, w)
        finish = {zid: t for zid, _, t in results}
        for z, worker in zone_owner.items():
            worker.finished_at = finish[z]
        self.trace.sweeps = 1

        alive = sorted(workers, key=lambda lw: (lw.finished_at, lw.wid))
        guard = 0
        while True:
            if len(alive) > 1:
                fused = []
                k = 0
                while k + 1 < len(alive):
                    fused.append(self._fuse(alive[k], alive[k + 1], zone_owner))
                    k += 2
                if k < len(alive):
                    fused.append(alive[k])
                alive = fused
            alive_ids = {lw.wid for lw in alive}
            drainable = [
                q
                for q in self._queues
                if not q.retired and q.size > 0 and len(q.owners) == 1 and next(iter(q.owners)) in alive_ids
            ]
            if not drainable:
                if len(alive) == 1 and all(q.retired or q.size == 0 for q in self._queues):
                    break
                if len(alive) == 1:
                    # Only co-owned queues could remain, which is impossible
                    # once a single worker holds every ownership slot.
                    raise ProtocolError("pending queue without a sole owner")
                continue
            if max_sweeps is not None and self.trace.sweeps >= max_sweeps:
                break
            self.trace.sweeps += 1
            self.trace.drains += len(drainable)
            guard += 1
            if guard > 8 * ncells + 64:
                raise ProtocolError("merge protocol failed to terminate")
            entries = np.concatenate([q.pop_all() for q in drainable])
            rows = entries // w
            zidx = np.searchsorted(zone_starts, rows, side="right") - 1
            lead_tasks = []
            trail_tasks = []
            for z in range(nz):
                sel = entries[zidx == z]
                if sel.size == 0:
                    continue
                (lo, mid), (_, hi) = plan.sub_bands[z]
                in_lead = (sel // w) < mid
                if np.any(in_lead):
                    lead_tasks.append((z, lo, mid, sel[in_lead]))
                if np.any(~in_lead):
                    trail_tasks.append((z, mid, hi, sel[~in_lead]))
            self._route(self._wave(lead_tasks), zone_starts, zone_owner, ncells, w)
            self._route(self._wave(trail_tasks), zone_starts, zone_owner, ncells, w)
        self.trace.completed = True


def _neighbors_flat(idx: np.ndarray, h: int, w: int) -> np.ndarray:
    """All in-bounds 8-neighbors of the given flat indices (with repeats)."""
    if idx.size == 0:
        return np.empty(0, dtype=np.int64)
    i = idx // w
    j = idx % w
    parts = []
    for di, dj in ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)):
        ni = i + di
        nj = j + dj
        keep = (ni >= 0) & (ni < h) & (nj >= 0) & (nj < w)
        parts.append(ni[keep] * w + nj[keep])
    return np.concatenate(parts)


def merge_run(
    img,
    plan: ZonePlan,
    characterize: Callable[[np.ndarray, int, int], bool],
    act: Callable[[np.ndarray, int, int], None],
    workers: Optional[int] = None,
    trace: Optional[ProtocolTrace] = None,
    max_sweeps: Optional[int] = None,
) -> np.ndarray:
    """Run the scan/queue/fusion protocol with arbitrary per-pixel rules.

    ``characterize(img, i, j)`` decides whether a pixel is a target;
    ``act`` mutates that single pixel and must make it stop being a
    target.  Both must depend only on the pixel's 3x3 neighborhood: that
    is what makes banded parallel execution equivalent to a sequential
    order.  All 8-neighbors of every acted-on pixel are requeued for
    recheck.  Returns the stabilized image.
    """
    arr = as_binary(img).copy()
    h, w = arr.shape
    eng = ZoneEngine(workers if workers is not None else len(plan.zones), trace)

    def apply_at(indices) -> list[int]:
        changed = []
        for idx in indices:
            i, j = divmod(int(idx), w)
            if characterize(arr, i, j):
                act(arr, i, j)
                changed.append(idx)
        return changed

    def scan_band(zid: int, lo: int, hi: int) -> np.ndarray:
        changed = apply_at(range(lo * w, hi * w))
        return _neighbors_flat(np.asarray(changed, dtype=np.int64), h, w)

    def process_entries(zid: int, lo: int, hi: int, entries: np.ndarray) -> np.ndarray:
        changed = apply_at(entries)
        return _neighbors_flat(np.asarray(changed, dtype=np.int64), h, w)

    eng.run((h, w), plan, scan_band, process_entries, max_sweeps)
    return arr


def parallel_thin(
    z,
    w,
    dmap,
    conn: Connectivity = CONN_84,
    workers: int = 1,
    max_iter: Optional[int] = None,
    trace: Optional[ProtocolTrace] = None,
) -> np.ndarray:
    """Zone-parallel constrained thinning.

    Same stability and topology guarantees as the sequential ``thin``;
    pixel-for-pixel equality with it is only guaranteed for a single
    zone, where this simply delegates.  Within each band candidates are
    taken in increasing (distance, raster) order and every deletion is
    re-guarded against the live image.
    """
    z = as_binary(z)
    w_img = as_binary(w)
    homotopy._check_subset(w_img, z, "thinning requires the keep set inside the object")
    h, wd = z.shape
    dist = homotopy._as_dist(dmap, z.shape)
    plan = split(h, workers)
    if workers == 1 or len(plan.zones) == 1:
        return homotopy.thin(z, w_img, dist, conn, max_iter)
    img = z.astype(np.uint8)
    free = (~w_img).astype(np.uint8)
    lut = homotopy._lut_for(conn)
    dflat = dist.ravel()

    # Candidates in raster order; band slices found by bisection.  The
    # per-band priority sorts run inside the pool threads (numpy's sort
    # drops the GIL), so they parallelize across bands.
    flat = np.flatnonzero(z & ~w_img).astype(np.int64)
    band_entries = {}
    for (lo, mid), (m2, hi) in plan.sub_bands:
        a, b, c = np.searchsorted(flat, [lo * wd, mid * wd, hi * wd])
        band_entries[(lo, mid)] = flat[a:b]
        band_entries[(m2, hi)] = flat[b:c]

    def scan_band(zid: int, lo: int, hi: int) -> np.ndarray:
        sel = band_entries[(lo, hi)]
        enc = np.sort((dflat[sel] << np.int64(32)) | sel)
        deleted = _kernels.delete_pass(img, free, lut, enc)
        return _kernels.collect_recheck(img, free, deleted)

    def process_entries(zid: int, lo: int, hi: int, entries: np.ndarray) -> np.ndarray:
        enc = np.sort((dflat[entries] << np.int64(32)) | entries)
        deleted = _kernels.delete_pass(img, free, lut, enc)
        return _kernels.collect_recheck(img, free, deleted)

    eng = ZoneEngine(workers, trace)
    eng.run((h, wd), plan, scan_band, process_entries, max_iter)
    return img.astype(bool)


def parallel_thicken(
    y,
    v,
    conn: Connectivity = CONN_84,
    workers: int = 1,
    max_iter: Optional[int] = None,
    trace: Optional[ProtocolTrace] = None,
) -> np.ndarray:
    """Zone-parallel constrained thickening (dual of ``parallel_thin``)."""

    def thin_fn(zz, ww, dm, cc, mi):
        return parallel_thin(zz, ww, dm, cc, workers, mi, trace)

    return homotopy._thicken_via(thin_fn, y, v, conn, max_iter, workers, None)


def parallel_smooth(
    x,
    params: SmoothingParams,
    report: Optional[StageReport] = None,
    trace: Optional[ProtocolTrace] = None,
) -> np.ndarray:
    """The smoothing filter with zone-parallel stability loops and
    multi-worker distance transforms.

    With ``workers=1`` this is bit-for-bit the sequential filter; with
    more workers the distance maps are still bit-identical and the
    outputs satisfy the same stability and topology invariants.
    """

    def thin_fn(zz, ww, dm, cc, mi):
        return parallel_thin(zz, ww, dm, cc, params.workers, mi, trace)

    return _smooth_pipeline(x, params, thin_fn, edt_workers=params.workers, report=report)
