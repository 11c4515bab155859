"""Netpbm image I/O: PBM (P1/P4) for binary images, PGM (P2/P5) for
grayscale input and 16-bit distance-map output.

PBM convention: 1 means black and is read as foreground.  PGM pixels are
foreground when strictly above a threshold (0 by default).  Distance maps
are written either as 16-bit PGM holding clamped integer square roots, or
as CSV holding the exact squared values.
"""

from __future__ import annotations

import numpy as np

from .grid import as_binary


class ImageFormatError(ValueError):
    """Malformed netpbm payload; the message names the byte offset."""


class _Scanner:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def fail(self, msg: str):
        raise ImageFormatError(f"{self.path}: {msg} at byte {self.pos}")

    def skip_space(self) -> None:
        data = self.data
        n = len(data)
        while self.pos < n:
            c = data[self.pos]
            if c in b" \t\r\n\x0b\x0c":
                self.pos += 1
            elif c == ord("#"):
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def token(self) -> bytes:
        self.skip_space()
        if self.pos >= len(self.data):
            self.fail("unexpected end of header")
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        return data[start : self.pos]

    def int_token(self, what: str) -> int:
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            self.fail(f"invalid {what} {tok!r}")


def _read_header(sc: _Scanner) -> tuple[bytes, int, int, int]:
    magic = sc.token()
    if magic not in (b"P1", b"P2", b"P4", b"P5"):
        sc.fail(f"unsupported magic {magic!r} (want P1/P2/P4/P5)")
    width = sc.int_token("width")
    height = sc.int_token("height")
    if width < 1 or height < 1:
        sc.fail(f"invalid dimensions {width}x{height}")
    maxval = 1
    if magic in (b"P2", b"P5"):
        maxval = sc.int_token("maxval")
        if not 0 < maxval <= 65535:
            sc.fail(f"unsupported maxval {maxval}")
    return magic, width, height, maxval


def read_image(path, threshold: int = 0) -> np.ndarray:
    """Read a PBM/PGM file as a boolean image.

    PBM bits: 1 (black) is foreground.  PGM samples: foreground iff value
    is strictly greater than ``threshold``.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    sc = _Scanner(data, str(path))
    magic, width, height, maxval = _read_header(sc)
    if magic == b"P1":
        bits = []
        need = width * height
        while len(bits) < need:
            sc.skip_space()
            if sc.pos >= len(data):
                sc.fail(f"payload truncated ({len(bits)} of {need} bits)")
            c = data[sc.pos]
            if c == ord("0"):
                bits.append(0)
            elif c == ord("1"):
                bits.append(1)
            else:
                sc.fail(f"invalid bit character {chr(c)!r}")
            sc.pos += 1
        return np.array(bits, dtype=bool).reshape(height, width)
    if magic == b"P4":
        # One whitespace byte after the header, then packed rows.
        if sc.pos >= len(data) or data[sc.pos] not in b" \t\r\n\x0b\x0c":
            sc.fail("missing whitespace before raster")
        sc.pos += 1
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        if len(data) - sc.pos < need:
            sc.pos = len(data)
            sc.fail(f"payload truncated (need {need} raster bytes)")
        raw = np.frombuffer(data, dtype=np.uint8, count=need, offset=sc.pos)
        bits = np.unpackbits(raw.reshape(height, row_bytes), axis=1)[:, :width]
        return bits.astype(bool)
    # PGM, ascii or raw.
    if magic == b"P2":
        vals = []
        need = width * height
        while len(vals) < need:
            sc.skip_space()
            if sc.pos >= len(data):
                sc.fail(f"payload truncated ({len(vals)} of {need} samples)")
            vals.append(sc.int_token("sample"))
        arr = np.array(vals, dtype=np.int64).reshape(height, width)
    else:
        if sc.pos >= len(data) or data[sc.pos] not in b" \t\r\n\x0b\x0c":
            sc.fail("missing whitespace before raster")
        sc.pos += 1
        per = 2 if maxval > 255 else 1
        need = width * height * per
        if len(data) - sc.pos < need:
            sc.pos = len(data)
            sc.fail(f"payload truncated (need {need} raster bytes)")
        if per == 1:
            arr = np.frombuffer(data, dtype=np.uint8, count=need, offset=sc.pos)
        else:
            arr = np.frombuffer(data, dtype=">u2", count=width * height, offset=sc.pos)
        arr = arr.astype(np.int64).reshape(height, width)
    if np.any(arr > maxval):
        sc.fail(f"sample exceeds maxval {maxval}")
    return arr > threshold


def write_image(img, path, raw: bool = True) -> None:
    """Write a boolean image as PBM: P4 (packed) by default, P1 if ``raw``
    is false.  Foreground maps to 1 (black)."""
    arr = as_binary(img)
    h, w = arr.shape
    with open(path, "wb") as fh:
        if raw:
            fh.write(b"P4\n%d %d\n" % (w, h))
            fh.write(np.packbits(arr.astype(np.uint8), axis=1).tobytes())
        else:
            fh.write(b"P1\n%d %d\n" % (w, h))
            for row in arr:
                fh.write(b"".join(b"1" if v else b"0" for v in row) + b"\n")


def write_distance_map(dmap, path) -> None:
    """Write a squared-distance map: ``.csv`` keeps exact squared values,
    anything else becomes a 16-bit PGM of clamped integer square roots."""
    arr = np.asarray(dmap, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"distance map must be 2D, got shape {arr.shape}")
    if str(path).lower().endswith(".csv"):
        with open(path, "w", newline="") as fh:
            for row in arr:
                fh.write(",".join(str(int(v)) for v in row))
                fh.write("\n")
        return
    h, w = arr.shape
    roots = np.floor(np.sqrt(arr.astype(np.float64))).astype(np.int64)
    roots = np.clip(roots, 0, 65535).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(b"P5\n# squared distances rounded to integer radii\n%d %d\n65535\n" % (w, h))
        fh.write(roots.tobytes())
