"""Phase portraits and label overlays as binary PGM/PPM rasters."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .core import LiftMap
from .engine import GridSpec, iterate_array

GAMMA = 0.5
CONTRAST_PERCENTILE = 99
# accumulate this many steps before binning (memory/speed trade-off only)
BLOCK = 256

# named portrait set-ups
PRESETS = {
    "sea-and-islands": dict(alpha=0.5, beta=0.5, grid="40x40", iterates=1000, burn_in=100, size=800),
    "perturbed": dict(alpha=0.5, beta=0.502, grid="40x40", iterates=1000, burn_in=100, size=800),
    "island-rings": dict(alpha=0.5, beta=0.5, starts=[(0.253 + i * 0.00455,) * 2 for i in range(1, 11)],
               iterates=20000, burn_in=0, size=400),
    "instability-zone": dict(alpha=0.5, beta=0.5, starts=[(0.298429, 0.298429)], iterates=100000, burn_in=0, size=400),
}


@dataclass
class PortraitImage:
    """Hit counts per pixel; row 0 is the top (y near 1)."""

    counts: np.ndarray

    def __post_init__(self):
        if self.counts.ndim != 2 or min(self.counts.shape) < 1:
            raise ValueError("image needs at least one pixel")

    @property
    def height(self) -> int:
        return self.counts.shape[0]

    @property
    def width(self) -> int:
        return self.counts.shape[1]

    def gray(self) -> np.ndarray:
        """8-bit raster, hits dark on white, darkness ~ (count/ref)^GAMMA.

        ``ref`` is the 99th percentile of the nonzero counts, so a few
        saturated pixels at periodic points do not wash out the rest.
        """
        hit = self.counts[self.counts > 0]
        if hit.size == 0:
            return np.full(self.counts.shape, 255, dtype=np.uint8)
        ref = max(float(np.percentile(hit, CONTRAST_PERCENTILE, method="lower")), 1.0)
        level = np.minimum(self.counts / ref, 1.0) ** GAMMA
        return (255 - np.rint(255 * level)).astype(np.uint8)

    def to_pgm(self) -> bytes:
        return encode_pnm(self.gray())

    def to_ppm(self) -> bytes:
        return encode_pnm(np.repeat(self.gray()[:, :, None], 3, axis=2))


def portrait(F: LiftMap, starts: np.ndarray, iterates: int, burn_in: int = 0,
             width: int = 800, height: int = 800) -> PortraitImage:
    """Bin the orbit points with index in (burn_in, iterates] of every start, mod 1."""
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be >= 1")
    if not 0 <= burn_in < iterates:
        raise ValueError("require 0 <= burn_in < iterates")
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    x, y = iterate_array(F, starts[:, 0].copy(), starts[:, 1].copy(), burn_in)
    counts = np.zeros(width * height, dtype=np.int64)
    left = iterates - burn_in
    while left:
        k = min(BLOCK, left)
        xs = np.empty((k, len(x)))
        ys = np.empty((k, len(x)))
        for i in range(k):
            x, y = F(x, y)
            xs[i], ys[i] = x, y
        left -= k
        ok = np.isfinite(xs) & np.isfinite(ys)
        if not ok.all():
            raise ArithmeticError("non-finite orbit value while rendering")
        px = np.minimum((np.mod(xs, 1.0) * width).astype(np.int64), width - 1)
        py = np.minimum(((1.0 - np.mod(ys, 1.0)) * height).astype(np.int64), height - 1)
        counts += np.bincount((py * width + px).ravel(), minlength=width * height)
    return PortraitImage(counts.reshape(height, width))


def grid_starts(grid: GridSpec) -> np.ndarray:
    x, y = grid.points()
    return np.column_stack([x, y])


def encode_pnm(raster: np.ndarray) -> bytes:
    """P5 for (h, w) uint8, P6 for (h, w, 3) uint8."""
    raster = np.ascontiguousarray(raster, dtype=np.uint8)
    if raster.ndim == 2:
        magic = b"P5"
    elif raster.ndim == 3 and raster.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError("raster must be (h, w) or (h, w, 3)")
    h, w = raster.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode() + raster.tobytes()


_HEADER = re.compile(rb"(P[56])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s")


def decode_pnm(data: bytes) -> np.ndarray:
    m = _HEADER.match(data)
    if not m:
        raise ValueError("not a binary PGM/PPM file")
    w, h, maxval = int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise ValueError("only 8-bit rasters are supported")
    depth = 1 if m.group(1) == b"P5" else 3
    body = np.frombuffer(data, dtype=np.uint8, offset=m.end())
    if body.size != w * h * depth:
        raise ValueError("raster size does not match header")
    return body.reshape((h, w) if depth == 1 else (h, w, 3))


# fixed palette for island witnesses; chaotic and undetermined cells are grey/white
PALETTE = np.array([
    (214, 39, 40), (31, 119, 180), (44, 160, 44), (255, 127, 14), (148, 103, 189),
    (140, 86, 75), (227, 119, 194), (188, 189, 34), (23, 190, 207), (127, 127, 127),
], dtype=np.uint8)
CHAOTIC_RGB = (200, 200, 200)
UNDETERMINED_RGB = (255, 255, 255)


def label_image(labels, cell_px: int = 10, portrait_img: PortraitImage | None = None) -> np.ndarray:
    """RGB raster of a label grid; elliptic colours follow sorted witness order.

    With a portrait of matching size, its dark pixels are drawn on top.
    """
    g = labels.grid
    wit = sorted({l.witness for l in labels.labels if l.kind == "elliptic"})
    colour = {w: PALETTE[i % len(PALETTE)] for i, w in enumerate(wit)}
    cells = np.empty((g.ny, g.nx, 3), dtype=np.uint8)
    for ix in range(g.nx):
        for iy in range(g.ny):
            lab = labels.at(ix, iy)
            if lab.kind == "elliptic":
                c = colour[lab.witness]
            elif lab.kind == "chaotic":
                c = CHAOTIC_RGB
            else:
                c = UNDETERMINED_RGB
            cells[g.ny - 1 - iy, ix] = c
    img = np.repeat(np.repeat(cells, cell_px, axis=0), cell_px, axis=1)
    if portrait_img is not None:
        gray = portrait_img.gray()
        if gray.shape != img.shape[:2]:
            raise ValueError("portrait size must match the overlay size")
        dark = gray < 128
        img[dark] = np.repeat(gray[dark][:, None], 3, axis=1)
    return img


def parse_size(text: str) -> tuple[int, int]:
    w, _, h = text.lower().partition("x")
    w, h = int(w), int(h or w)
    if w < 1 or h < 1:
        raise ValueError("image dimensions must be >= 1")
    return w, h


def preset_config(name: str) -> dict:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
