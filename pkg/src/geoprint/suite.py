"""Deterministic synthetic test images: eight mixed scenes plus best/worst cases.

The best case is an image whose rotation order equals the robot count (four
identical D4-symmetric squares for four robots); the worst case is a
checkerboard, where every ink pixel is isolated.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .raster_io import BinaryRaster, write_pbm
from .rng import SplitMix64

SIZE = 64

# 5x7 block glyphs, one string per row
_FONT = {
    "A": ["01110", "10001", "10001", "11111", "10001", "10001", "10001"],
    "E": ["11111", "10000", "10000", "11110", "10000", "10000", "11111"],
    "G": ["01110", "10001", "10000", "10111", "10001", "10001", "01110"],
    "I": ["11111", "00100", "00100", "00100", "00100", "00100", "11111"],
    "K": ["10001", "10010", "10100", "11000", "10100", "10010", "10001"],
    "N": ["10001", "11001", "10101", "10011", "10001", "10001", "10001"],
    "O": ["01110", "10001", "10001", "10001", "10001", "10001", "01110"],
    "P": ["11110", "10001", "10001", "11110", "10000", "10000", "10000"],
    "R": ["11110", "10001", "10001", "11110", "10100", "10010", "10001"],
    "S": ["01111", "10000", "10000", "01110", "00001", "00001", "11110"],
    "T": ["11111", "00100", "00100", "00100", "00100", "00100", "00100"],
}


def _grid(size=SIZE):
    yy, xx = np.mgrid[0:size, 0:size]
    return xx.astype(float), yy.astype(float)


def ellipse(size, cx, cy, rx, ry) -> np.ndarray:
    xx, yy = _grid(size)
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def ring(size, cx, cy, r_out, r_in) -> np.ndarray:
    xx, yy = _grid(size)
    d2 = (xx - cx) ** 2 + (yy - cy) ** 2
    return (d2 <= r_out**2) & (d2 >= r_in**2)


def text(size, word: str, x0: int, y0: int, scale: int) -> np.ndarray:
    img = np.zeros((size, size), dtype=bool)
    x = x0
    for ch in word:
        glyph = np.array([[c == "1" for c in row] for row in _FONT[ch]])
        big = np.kron(glyph, np.ones((scale, scale), dtype=bool))
        h, w = big.shape
        img[y0:y0 + h, x:x + w] |= big[: max(0, size - y0), : max(0, size - x)]
        x += w + scale
    return img


def _jit(rng: SplitMix64, amp: float) -> float:
    return (rng.uniform() * 2.0 - 1.0) * amp


def suite_images(seed: int = 0) -> dict[str, BinaryRaster]:
    """The eight scenes, in a fixed order; ``seed`` jitters shapes and positions."""
    rng = SplitMix64(seed)
    n = SIZE
    imgs: dict[str, np.ndarray] = {}

    blobs = np.zeros((n, n), dtype=bool)
    for cx, cy, rx, ry in ((16, 18, 11, 8), (46, 16, 9, 10), (20, 46, 10, 11), (47, 46, 12, 9)):
        blobs |= ellipse(n, cx + _jit(rng, 2), cy + _jit(rng, 2), rx + _jit(rng, 1), ry + _jit(rng, 1))
    imgs["01_blobs"] = blobs

    imgs["02_rings"] = ring(n, 31.5 + _jit(rng, 1), 31.5 + _jit(rng, 1), 29, 20) | ring(
        n, 31.5, 31.5, 13, 6 + _jit(rng, 1))

    imgs["03_glyphs_geo"] = text(n, "GEO", 3 + int(_jit(rng, 1.5)), 18, 4)

    imgs["04_glyphs_ink"] = text(n, "INK", 3 + int(_jit(rng, 1.5)), 18, 4)

    mixed = ellipse(n, 20 + _jit(rng, 2), 22 + _jit(rng, 2), 14, 12) | ring(n, 44, 44, 17, 9 + _jit(rng, 1))
    imgs["05_blob_ring"] = mixed

    imgs["06_ellipse"] = ellipse(n, 31.5 + _jit(rng, 2), 31.5 + _jit(rng, 2), 28 + _jit(rng, 2), 20 + _jit(rng, 2))

    rects = np.zeros((n, n), dtype=bool)
    for _ in range(6):
        x0 = int(rng.below(n - 20))
        y0 = int(rng.below(n - 20))
        rects[y0:y0 + 8 + rng.below(12), x0:x0 + 8 + rng.below(12)] = True
    imgs["07_rectangles"] = rects

    xx, yy = _grid(n)
    phase = rng.uniform() * 2 * np.pi
    imgs["08_wave_band"] = np.abs(yy - (n / 2 + 14 * np.sin(xx / n * 2 * np.pi + phase))) <= 9

    return {k: BinaryRaster.from_array(v.astype(np.uint8)) for k, v in imgs.items()}


def symmetric_image(order: int = 4, size: int = SIZE) -> BinaryRaster:
    """``order``-fold rotationally symmetric scene; for order 4 every quadrant is a mirror image."""
    if order == 4:
        img = np.zeros((size, size), dtype=bool)
        q = size // 2
        side = q // 2
        off = (q - side) // 2
        for r0 in (off, q + (q - off - side)):
            for c0 in (off, q + (q - off - side)):
                img[r0:r0 + side, c0:c0 + side] = True
        return BinaryRaster.from_array(img.astype(np.uint8))
    xx, yy = _grid(size)
    c = (size - 1) / 2
    ang = np.arctan2(yy - c, xx - c)
    rad = np.hypot(xx - c, yy - c)
    petals = (np.cos(order * ang) > 0.3) & (rad > size * 0.12) & (rad < size * 0.46)
    return BinaryRaster.from_array(petals.astype(np.uint8))


def checkerboard(size: int = 32) -> BinaryRaster:
    yy, xx = np.mgrid[0:size, 0:size]
    return BinaryRaster.from_array(((xx + yy) % 2 == 0).astype(np.uint8))


def gen_suite(out_dir: str | Path, seed: int = 0) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, img in suite_images(seed).items():
        p = out / f"{name}.pbm"
        write_pbm(img, p)
        paths.append(p)
    for name, img in (("best_symmetric4", symmetric_image(4)), ("worst_checkerboard", checkerboard(32))):
        p = out / f"{name}.pbm"
        write_pbm(img, p)
        paths.append(p)
    return paths
