"""Binary raster loading (Netpbm PBM) and pixel/physical coordinate helpers.

Convention: PBM value 1 (black) is an ink pixel and is printable. Pixel
positions are integer pixel centers ``(col, row)``; rows grow downward.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class PBMParseError(ValueError):
    """Malformed PBM input; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class PixelPoint:
    col: int
    row: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.col, self.row)


@dataclass(frozen=True)
class PhysicalScale:
    """Length per pixel (mm/pixel)."""

    pitch: float = 1.0

    def __post_init__(self):
        if not self.pitch > 0:
            raise ValueError(f"pitch must be > 0, got {self.pitch}")


class BinaryRaster:
    """Immutable ``height x width`` grid of 0/1 values."""

    __slots__ = ("width", "height", "_values")

    def __init__(self, width: int, height: int, values: Iterable[int] | np.ndarray):
        arr = np.asarray(values, dtype=np.uint8).reshape(-1)
        if width < 0 or height < 0:
            raise ValueError("raster dimensions must be non-negative")
        if arr.size != width * height:
            raise ValueError(
                f"values length {arr.size} does not match {width}x{height}"
            )
        if arr.size and arr.max() > 1:
            raise ValueError("raster values must be 0 or 1")
        arr = arr.copy()
        arr.flags.writeable = False
        self.width = int(width)
        self.height = int(height)
        self._values = arr

    @classmethod
    def from_array(cls, grid: np.ndarray) -> "BinaryRaster":
        grid = np.asarray(grid)
        if grid.ndim != 2:
            raise ValueError("expected a 2-D array")
        h, w = grid.shape
        return cls(w, h, (grid != 0).astype(np.uint8).reshape(-1))

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view (read-only)."""
        return self._values

    def as_array(self) -> np.ndarray:
        return self._values.reshape(self.height, self.width)

    def __getitem__(self, rc: tuple[int, int]) -> int:
        r, c = rc
        return int(self._values[r * self.width + c])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryRaster):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self._values, other._values)
        )

    def __hash__(self):
        return hash((self.width, self.height, self._values.tobytes()))

    def __repr__(self):
        return f"BinaryRaster({self.width}x{self.height}, ink={int(self._values.sum())})"

    @property
    def n_printable(self) -> int:
        return int(self._values.sum())


def printable_set(raster: BinaryRaster) -> list[PixelPoint]:
    """Pixels with value 1, row-major."""
    idx = np.flatnonzero(raster.values)
    return [PixelPoint(int(i % raster.width), int(i // raster.width)) for i in idx]


def printable_coords(raster: BinaryRaster) -> np.ndarray:
    """Printable pixel centers as an ``(M, 2)`` int array of ``(col, row)``, row-major."""
    idx = np.flatnonzero(raster.values)
    return np.stack([idx % raster.width, idx // raster.width], axis=1).astype(np.int64)


def to_physical(p: PixelPoint | Sequence[float], scale: PhysicalScale) -> tuple[float, float]:
    x, y = p.pos if isinstance(p, PixelPoint) else p
    return (x * scale.pitch, y * scale.pitch)


# --- PBM reading -----------------------------------------------------------

_WS = b" \t\n\r\v\f"


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.i = 0

    def skip_ws_and_comments(self):
        d = self.data
        while self.i < len(d):
            ch = d[self.i : self.i + 1]
            if ch in _WS and ch:
                self.i += 1
            elif ch == b"#":
                while self.i < len(d) and d[self.i : self.i + 1] not in (b"\n", b"\r"):
                    self.i += 1
            else:
                break

    def read_int(self, what: str) -> int:
        self.skip_ws_and_comments()
        start = self.i
        d = self.data
        while self.i < len(d) and d[self.i : self.i + 1].isdigit():
            self.i += 1
        if start == self.i:
            raise PBMParseError(f"expected {what}", start)
        return int(d[start : self.i])


def parse_pbm(data: bytes) -> BinaryRaster:
    if len(data) < 2:
        raise PBMParseError("truncated header", 0)
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise PBMParseError(f"bad magic number {magic!r}", 0)
    cur = _Cursor(data)
    cur.i = 2
    if cur.i < len(data) and data[cur.i : cur.i + 1] not in _WS + b"#":
        raise PBMParseError("expected whitespace after magic number", cur.i)
    width = cur.read_int("width")
    height = cur.read_int("height")
    n = width * height

    if magic == b"P1":
        values = np.zeros(n, dtype=np.uint8)
        k = 0
        d = data
        while k < n:
            cur.skip_ws_and_comments()
            if cur.i >= len(d):
                raise PBMParseError(
                    f"payload has {k} pixels, header declares {n}", cur.i
                )
            ch = d[cur.i]
            if ch == 0x30:
                values[k] = 0
            elif ch == 0x31:
                values[k] = 1
            else:
                raise PBMParseError(f"non-binary symbol {chr(ch)!r}", cur.i)
            k += 1
            cur.i += 1
        cur.skip_ws_and_comments()
        if cur.i < len(d):
            raise PBMParseError("trailing data after pixel payload", cur.i)
        return BinaryRaster(width, height, values)

    # P4: exactly one whitespace byte after height, then packed rows.
    if cur.i >= len(data) or data[cur.i : cur.i + 1] not in _WS:
        raise PBMParseError("expected single whitespace before raster", cur.i)
    cur.i += 1
    row_bytes = (width + 7) // 8
    need = row_bytes * height
    payload = data[cur.i : cur.i + need]
    if len(payload) != need:
        raise PBMParseError(
            f"payload has {len(payload)} bytes, header declares {need}",
            cur.i + len(payload),
        )
    if len(data) > cur.i + need:
        raise PBMParseError("trailing data after pixel payload", cur.i + need)
    packed = np.frombuffer(payload, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(packed, axis=1)[:, :width]
    return BinaryRaster(width, height, bits.reshape(-1))


def load_pbm(path: str | Path) -> BinaryRaster:
    return parse_pbm(Path(path).read_bytes())


def format_pbm(raster: BinaryRaster, binary: bool = False) -> bytes:
    head = f"{'P4' if binary else 'P1'}\n{raster.width} {raster.height}\n".encode()
    grid = raster.as_array()
    if binary:
        return head + np.packbits(grid, axis=1).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in grid]
    return head + ("\n".join(lines) + "\n").encode() if lines else head


def write_pbm(raster: BinaryRaster, path: str | Path, binary: bool = False) -> None:
    Path(path).write_bytes(format_pbm(raster, binary=binary))


def write_ppm(rgb: np.ndarray, path: str | Path) -> None:
    """Plain (P3) PPM from an ``(H, W, 3)`` uint8 array."""
    Path(path).write_bytes(format_ppm(rgb))


def format_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    body = "\n".join(" ".join(map(str, row)) for row in rgb.reshape(h, w * 3).tolist())
    return f"P3\n{w} {h}\n255\n{body}\n".encode()


def parse_ppm(data: bytes) -> np.ndarray:
    """Read a plain P3 PPM back into an ``(H, W, 3)`` array (used by tests/tools)."""
    if data[:2] != b"P3":
        raise PBMParseError(f"bad magic number {data[:2]!r}", 0)
    cur = _Cursor(data)
    cur.i = 2
    w = cur.read_int("width")
    h = cur.read_int("height")
    cur.read_int("maxval")
    vals = [cur.read_int("sample") for _ in range(w * h * 3)]
    return np.array(vals, dtype=np.uint8).reshape(h, w, 3)
