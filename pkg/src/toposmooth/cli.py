"""Command-line interface.

Commands::

    toposmooth smooth INPUT OUTPUT [--radius N] [--connectivity 8-4|4-8]
                      [--workers N] [--constraint-c PBM] [--constraint-d PBM]
                      [--max-iter N] [--report] [--fg-threshold V]
    toposmooth edt    INPUT OUTPUT [--algorithm brute|sed4|meijster]
                      [--workers N] [--compare]
    toposmooth bench  INPUT [--radius N] [--workers-list 1,2,4,8,16]
                      [--repetitions N]
    toposmooth verify INPUT [--radius N] [--connectivity ...] [--workers N]

Binary input is PBM (P1/P4); PGM (P2/P5) is thresholded on ingest
(foreground strictly above ``--fg-threshold``, default 0).  Distance maps
go to CSV (exact squared values) or 16-bit PGM (integer radii) depending
on the output extension.

Exit codes: 0 success, 2 usage, 3 I/O or parse error, 4 validation error
(bad constraint sets and the like), 5 invariant failure from ``verify``.

The ``THREADS`` environment variable supplies the default worker count;
an explicit ``--workers`` wins.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import runtime, verify
from .edt import edt_brute, infinity, meijster, sed4
from .grid import CONN_48, CONN_84, Connectivity
from .homotopy import ConstraintSets, SmoothingParams, StageReport
from .netpbm import ImageFormatError, read_image, write_distance_map, write_image

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_INVARIANT = 5


def _conn(text: str) -> Connectivity:
    if text == "8-4":
        return CONN_84
    if text == "4-8":
        return CONN_48
    raise argparse.ArgumentTypeError(f"connectivity must be 8-4 or 4-8, got {text!r}")


def _default_workers() -> int:
    env = os.environ.get("THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: THREADS env or 1)")
    p.add_argument("--fg-threshold", type=int, default=0, help="PGM ingest threshold (foreground if value > this)")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="toposmooth", description="Topology-preserving smoothing of binary images")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("smooth", help="smooth an image while preserving its topology")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--radius", type=int, default=5, help="maximum ball radius (filter order)")
    p.add_argument("--connectivity", type=_conn, default=CONN_84, help="8-4 or 4-8")
    p.add_argument("--constraint-c", default=None, help="PBM of pixels cutting must keep")
    p.add_argument("--constraint-d", default=None, help="PBM of pixels filling must avoid")
    p.add_argument("--max-iter", type=int, default=None, help="cap stability rounds (debug valve)")
    p.add_argument("--report", action="store_true", help="print per-stage timing breakdown")
    _add_common(p)

    p = sub.add_parser("edt", help="compute a squared Euclidean distance map")
    p.add_argument("input")
    p.add_argument("output", help=".csv for exact squared values, .pgm for 16-bit radii")
    p.add_argument("--algorithm", choices=("brute", "sed4", "meijster"), default="meijster")
    p.add_argument("--target", choices=("foreground", "background"), default="foreground")
    p.add_argument("--compare", action="store_true", help="print error of sed4 and meijster vs brute force")
    _add_common(p)

    p = sub.add_parser("bench", help="wall-clock scaling table (CSV on stdout)")
    p.add_argument("input")
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--workers-list", default="1,2,4,8,16")
    p.add_argument("--repetitions", type=int, default=3, help="timings per point; the minimum is kept")
    _add_common(p)

    p = sub.add_parser("verify", help="run the invariant suite against an input")
    p.add_argument("input")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--connectivity", type=_conn, default=CONN_84)
    _add_common(p)
    return top


def _cmd_smooth(args) -> int:
    img = read_image(args.input, args.fg_threshold)
    constraints = None
    if args.constraint_c or args.constraint_d:
        c = read_image(args.constraint_c, args.fg_threshold) if args.constraint_c else None
        d = read_image(args.constraint_d, args.fg_threshold) if args.constraint_d else None
        constraints = ConstraintSets(c=c, d=d)
    params = SmoothingParams(
        r_max=args.radius,
        conn=args.connectivity,
        constraints=constraints,
        workers=args.workers,
        max_iter=args.max_iter,
    )
    report = StageReport() if args.report else None
    out = runtime.parallel_smooth(img, params, report=report)
    write_image(out, args.output)
    if report is not None:
        total = sum(report.seconds.values()) or 1.0
        print("stage timing:")
        for key in sorted(report.seconds):
            dt = report.seconds[key]
            print(f"  {key:10s} {dt:8.4f}s  {100.0 * dt / total:5.1f}%")
    return EXIT_OK


def _cmd_edt(args) -> int:
    img = read_image(args.input, args.fg_threshold)
    algos = {
        "brute": lambda: edt_brute(img, args.target),
        "sed4": lambda: sed4(img, args.target),
        "meijster": lambda: meijster(img, args.target, args.workers),
    }
    dmap = algos[args.algorithm]()
    write_distance_map(dmap, args.output)
    if np.all(dmap == infinity(dmap.shape)):
        print("note: target set is empty; map is all-infinity")
    if args.compare:
        brute = edt_brute(img, args.target)
        for name, fn in (("sed4", algos["sed4"]), ("meijster", algos["meijster"])):
            t0 = time.perf_counter()
            approx = fn()
            dt = time.perf_counter() - t0
            err = np.abs(approx - brute)
            print(
                f"{name}: max squared error {int(err.max())}, "
                f"mean {float(err.mean()):.6f}, seconds {dt:.4f}"
            )
    return EXIT_OK


def _min_time(fn, repetitions: int) -> float:
    fn()  # warm-up: compilation and caches are not what we measure
    best = float("inf")
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cmd_bench(args) -> int:
    img = read_image(args.input, args.fg_threshold)
    h, w = img.shape
    try:
        workers_list = [int(tok) for tok in args.workers_list.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"bad --workers-list {args.workers_list!r}")
    if not workers_list or any(wk < 1 for wk in workers_list):
        raise ValueError(f"bad --workers-list {args.workers_list!r}")

    def run_op(op: str, wk: int):
        if op == "meijster":
            return lambda: meijster(img, "foreground", wk)
        return lambda: runtime.parallel_smooth(img, SmoothingParams(r_max=args.radius, workers=wk))

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["operation", "width", "height", "r_max", "workers", "seconds", "speedup", "efficiency"])
    for op in ("meijster", "smooth"):
        base = _min_time(run_op(op, 1), args.repetitions)
        for wk in workers_list:
            seconds = base if wk == 1 else _min_time(run_op(op, wk), args.repetitions)
            speedup = base / seconds if seconds > 0 else float("inf")
            writer.writerow(
                [op, w, h, args.radius, wk, f"{seconds:.6f}", f"{speedup:.3f}", f"{speedup / wk:.3f}"]
            )
    return EXIT_OK


def _cmd_verify(args) -> int:
    img = read_image(args.input, args.fg_threshold)
    checks = verify.run_checks(img, r_max=args.radius, conn=args.connectivity, workers=args.workers)
    failed = 0
    for chk in checks:
        status = "PASS" if chk.ok else "FAIL"
        print(f"{status} {chk.name}: {chk.detail}")
        failed += 0 if chk.ok else 1
    if failed:
        print(f"{failed} of {len(checks)} checks failed")
        return EXIT_INVARIANT
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None:
        args.workers = _default_workers()
    handlers = {
        "smooth": _cmd_smooth,
        "edt": _cmd_edt,
        "bench": _cmd_bench,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ImageFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
