"""Grid CSV and binary PGM files.

CSV layout: the first line is ``M,N``; each of the next ``M`` lines holds the
``N`` values of one row (``m = 1..M``). Values are written with ``repr`` so a
write/read round trip is exact.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .model import as_grid

__all__ = ["GridFormatError", "write_grid_csv", "read_grid_csv", "to_gray", "write_pgm", "read_pgm"]


class GridFormatError(ValueError):
    """Malformed grid file; the message cites the offending line and column."""


def write_grid_csv(path, grid) -> None:
    y = as_grid(grid)
    M, N = y.shape
    lines = [f"{M},{N}"]
    lines += [",".join(repr(float(v)) for v in row) for row in y]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> np.ndarray:
    text = Path(path).read_text()
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GridFormatError(f"{path}: empty file")
    head = lines[0].split(",")
    try:
        M, N = (int(h) for h in head)
    except ValueError:
        raise GridFormatError(f"{path}:1: header must be 'M,N', got {lines[0]!r}") from None
    if M < 1 or N < 1:
        raise GridFormatError(f"{path}:1: dimensions must be positive, got {M}x{N}")
    if len(lines) - 1 != M:
        raise GridFormatError(f"{path}: header declares {M} rows, found {len(lines) - 1}")
    out = np.empty((M, N))
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != N:
            raise GridFormatError(f"{path}:{i + 2}: expected {N} values, found {len(cells)}")
        for j, cell in enumerate(cells):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise GridFormatError(f"{path}:{i + 2}:{j + 1}: not a number: {cell.strip()!r}") from None
            if not np.isfinite(out[i, j]):
                raise GridFormatError(f"{path}:{i + 2}:{j + 1}: non-finite value {cell.strip()!r}")
    return out


def to_gray(grid, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Affine map of ``[lo, hi]`` (default: data range) onto 0..255."""
    y = as_grid(grid)
    lo = float(y.min()) if lo is None else float(lo)
    hi = float(y.max()) if hi is None else float(hi)
    if hi <= lo:
        return np.zeros(y.shape, dtype=np.uint8)
    g = np.rint((y - lo) / (hi - lo) * 255.0)
    return np.clip(g, 0, 255).astype(np.uint8)


def write_pgm(path, grid, lo: float | None = None, hi: float | None = None) -> None:
    """Write a P5 image; rows of the grid become image rows."""
    img = to_gray(grid, lo, hi)
    height, width = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def _tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    toks, pos = [], 0
    while len(toks) < count:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if buf[pos : pos + 1] == b"#":
            while pos < len(buf) and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise GridFormatError("truncated PGM header")
        toks.append(buf[start:pos])
    return toks, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit P5 image as a ``uint8`` array of shape (height, width)."""
    buf = Path(path).read_bytes()
    toks, offset = _tokens(buf, 4)
    if toks[0] != b"P5":
        raise GridFormatError(f"{path}: not a binary PGM (magic {toks[0]!r})")
    width, height, maxval = (int(t) for t in toks[1:])
    if maxval != 255:
        raise GridFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    data = np.frombuffer(buf, dtype=np.uint8, count=width * height, offset=offset)
    return data.reshape(height, width).copy()


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
