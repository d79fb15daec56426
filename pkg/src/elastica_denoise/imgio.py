"""Grayscale image files and convergence-trace files.

Images are 8-bit grayscale only, in three formats: binary PGM (P5), ASCII
PGM (P2), and 8-bit grayscale PNG. Loading maps byte values to [0, 1] by
``value / 255``; saving clamps to [0, 1], multiplies by 255 and rounds
half-to-even. Color or deeper inputs are rejected, never converted, so
metric semantics stay unambiguous.

Traces are comma-separated text with the fixed header
``iter,energy,psnr,residual,norm_n``, one row per iteration. Floats are
written with 17 significant digits, which round-trips ``float64`` exactly;
infinite PSNR is serialized as the token ``inf``.
"""

from __future__ import annotations

import math
import os

import numpy as np
from numpy.typing import NDArray
from PIL import Image

from .model import IterationTrace

__all__ = [
    "MalformedImageError",
    "UnsupportedImageError",
    "MalformedTraceError",
    "load_image",
    "save_image",
    "save_trace",
    "load_trace",
]


class MalformedImageError(ValueError):
    """The file is not a parseable image (bad header, truncated data, ...)."""


class UnsupportedImageError(ValueError):
    """The file parses but is not 8-bit grayscale (color, 16-bit, unknown format)."""


class MalformedTraceError(ValueError):
    """A trace file has a wrong header or an unparseable row."""


def _read_pgm_tokens(data: bytes, count: int):
    # Header tokens are whitespace separated; '#' starts a comment running
    # to end of line. Returns the tokens and the offset just past them.
    tokens = []
    pos = 0
    length = len(data)
    while len(tokens) < count:
        while pos < length and data[pos : pos + 1].isspace():
            pos += 1
        if pos < length and data[pos] == ord("#"):
            while pos < length and data[pos] not in (ord("\n"), ord("\r")):
                pos += 1
            continue
        start = pos
        while pos < length and not data[pos : pos + 1].isspace() and data[pos] != ord("#"):
            pos += 1
        if pos == start:
            raise MalformedImageError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def _load_pgm(data: bytes) -> NDArray[np.float64]:
    magic = data[:2]
    try:
        tokens, pos = _read_pgm_tokens(data[2:], 3)
    except MalformedImageError:
        raise MalformedImageError("truncated PGM header") from None
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedImageError(f"non-numeric PGM header fields: {tokens}") from None
    if width < 1 or height < 1:
        raise MalformedImageError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedImageError(f"only 8-bit PGM supported, got maxval {maxval}")
    if magic == b"P5":
        start = 2 + pos + 1  # single whitespace byte after maxval
        raster = data[start : start + width * height]
        if len(raster) < width * height:
            raise MalformedImageError("truncated PGM raster")
        pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:  # P2
        text = data[2 + pos :].split()
        if len(text) < width * height:
            raise MalformedImageError("truncated PGM raster")
        try:
            values = [int(t) for t in text[: width * height]]
        except ValueError:
            raise MalformedImageError("non-numeric PGM ASCII sample") from None
        if any(v < 0 or v > 255 for v in values):
            raise MalformedImageError("PGM ASCII sample out of range")
        pixels = np.array(values, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / 255.0


def _load_png(path: str) -> NDArray[np.float64]:
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise UnsupportedImageError(
                    f"only 8-bit grayscale PNG supported, got mode {img.mode!r}"
                )
            pixels = np.asarray(img, dtype=np.uint8)
    except UnsupportedImageError:
        raise
    except Exception as exc:
        raise MalformedImageError(f"unreadable PNG file: {exc}") from exc
    return pixels.astype(np.float64) / 255.0


def load_image(path) -> NDArray[np.float64]:
    """Load an 8-bit grayscale PGM or PNG file as a [0, 1] float grid."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] in (b"P5", b"P2"):
        with open(path, "rb") as fh:
            return _load_pgm(fh.read())
    if head[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(path)
    raise UnsupportedImageError(f"unrecognized image format in {path!r}")


def _quantize(u) -> NDArray[np.uint8]:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {u.shape}")
    return np.round(np.clip(u, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(u, path, format: str | None = None):
    """Write a grid as 8-bit grayscale, clamping to [0, 1] first.

    ``format`` is one of ``"pgm"`` (binary P5), ``"pgm-ascii"`` (P2) or
    ``"png"``; when omitted it is inferred from the file extension
    (``.pgm`` means binary).
    """
    path = os.fspath(path)
    if format is None:
        ext = os.path.splitext(path)[1].lower()
        if ext == ".pgm":
            format = "pgm"
        elif ext == ".png":
            format = "png"
        else:
            raise ValueError(f"cannot infer image format from {path!r}; pass format=")
    pixels = _quantize(u)
    height, width = pixels.shape
    if format == "pgm":
        with open(path, "wb") as fh:
            fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            fh.write(pixels.tobytes())
    elif format == "pgm-ascii":
        with open(path, "wb") as fh:
            fh.write(f"P2\n{width} {height}\n255\n".encode("ascii"))
            for row in pixels:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
    elif format == "png":
        Image.fromarray(pixels, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unknown image format {format!r}")


def _format_value(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def save_trace(trace: IterationTrace, path):
    """Write a trace as CSV with the fixed column order; lossless for float64."""
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(IterationTrace.COLUMNS) + "\n")
        for it, energy, psnr, residual, nn in trace.rows():
            fh.write(
                f"{it},{_format_value(energy)},{_format_value(psnr)},"
                f"{_format_value(residual)},{_format_value(nn)}\n"
            )


def load_trace(path) -> IterationTrace:
    """Read a trace CSV written by :func:`save_trace`."""
    with open(os.fspath(path), "r", encoding="ascii") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != ",".join(IterationTrace.COLUMNS):
        raise MalformedTraceError(f"bad trace header in {path!r}")
    trace = IterationTrace()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(IterationTrace.COLUMNS):
            raise MalformedTraceError(f"line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            trace.append(int(parts[0]), *(float(p) for p in parts[1:]))
        except ValueError as exc:
            raise MalformedTraceError(f"line {lineno}: {exc}") from None
    return trace
