"""Self-checks: run the library's own invariants against one input.

Used by the command-line ``verify`` command and by the test suite.  Every
check is an independent oracle: distance maps are compared against the
brute-force transform, smoothing stages against full-image stability
rescans and component recounts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import morph, runtime
from .edt import edt_brute, meijster
from .grid import CONN_84, Connectivity, addable_mask, as_binary, simple_mask, topology_signature
from .homotopy import SmoothingParams, thicken, thin


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def thin_stable(img, keep, conn: Connectivity) -> bool:
    """No deletable pixel outside the keep set remains."""
    return not np.any(simple_mask(img, conn) & ~as_binary(keep))


def thicken_stable(img, grow, conn: Connectivity) -> bool:
    """No addable pixel inside the growth set remains."""
    return not np.any(addable_mask(img, conn) & as_binary(grow) & ~as_binary(img))


def staged_smooth(x, r_max: int, conn: Connectivity, checks: list[CheckResult]) -> np.ndarray:
    """Run the smoothing pipeline stage by stage, verifying stability and
    topology after every thinning/thickening step."""
    x = as_binary(x)
    sig = topology_signature(x, conn)
    out = x.copy()
    for r in range(1, r_max + 1):
        keep = morph.erode(out, r)
        y = thin(out, keep, meijster(out, "background"), conn)
        checks.append(
            CheckResult(
                f"stability thin r={r}",
                thin_stable(y, keep, conn),
                "no deletable pixel outside the keep set",
            )
        )
        grow = morph.dilate(y, r) & out
        out = thicken(y, grow, conn)
        checks.append(
            CheckResult(
                f"stability thicken r={r}",
                thicken_stable(out, grow, conn),
                "no addable pixel left inside the growth set",
            )
        )
        grow = morph.dilate(out, r)
        z = thicken(out, grow, conn)
        checks.append(
            CheckResult(
                f"stability fill-thicken r={r}",
                thicken_stable(z, grow, conn),
                "no addable pixel left inside the growth set",
            )
        )
        keep = morph.erode(z, r) | out
        out = thin(z, keep, meijster(z, "background"), conn)
        checks.append(
            CheckResult(
                f"stability fill-thin r={r}",
                thin_stable(out, keep, conn),
                "no deletable pixel outside the keep set",
            )
        )
        checks.append(
            CheckResult(
                f"topology r={r}",
                topology_signature(out, conn) == sig,
                f"component counts stay {sig}",
            )
        )
    return out


def run_checks(img, r_max: int = 5, conn: Connectivity = CONN_84, workers: int = 1) -> list[CheckResult]:
    """The full oracle suite on one image.

    The distance check compares against the brute-force transform and is
    quadratic in the image size; expect it to dominate on large inputs.
    """
    x = as_binary(img)
    checks: list[CheckResult] = []

    exact = meijster(x, "foreground")
    brute = edt_brute(x, "foreground")
    checks.append(
        CheckResult(
            "edt exactness",
            bool(np.array_equal(exact, brute)),
            "two-phase transform equals brute force",
        )
    )
    exact_bg = meijster(x, "background")
    checks.append(
        CheckResult(
            "edt exactness (background)",
            bool(np.array_equal(exact_bg, edt_brute(x, "background"))),
            "two-phase transform equals brute force",
        )
    )
    wcheck = sorted({1, 2, max(2, workers)})
    maps = [meijster(x, "foreground", wk) for wk in wcheck]
    checks.append(
        CheckResult(
            "edt determinism",
            all(np.array_equal(maps[0], m) for m in maps[1:]),
            f"identical maps for workers in {wcheck}",
        )
    )

    staged_smooth(x, r_max, conn, checks)

    sig = topology_signature(x, conn)
    trace = runtime.ProtocolTrace()
    smoothed = runtime.parallel_smooth(x, SmoothingParams(r_max=r_max, conn=conn, workers=workers), trace=trace)
    checks.append(
        CheckResult(
            "topology (parallel)",
            topology_signature(smoothed, conn) == sig,
            f"component counts stay {sig} at workers={workers}",
        )
    )
    ran_parallel = workers > 1 and len(runtime.split(x.shape[0], workers).zones) > 1 and r_max > 0
    checks.append(
        CheckResult(
            "merge discipline",
            trace.max_owners <= 2 and (not ran_parallel or trace.completed),
            f"{trace.queues_created} queues, max owners {trace.max_owners}",
        )
    )
    return checks
