"""Raster classification, grid dumps and PNG encoding.

Pixels are sampled at their centres; row 0 is the top edge of the viewport.
Work is split into 64x64 tiles that may run on several threads (the
compiled kernels release the GIL), and tiles are written back into a
preallocated array by index, so output never depends on scheduling.
"""

import io
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._accel import worker_count
from .dynamics import R_IN, R_OUT, Fate, classify_points

TILE = 64
MAGIC = b"HLGRID01"
# below this relative pixel size double precision cannot separate neighbours
PRECISION_FLOOR = 1e-13


class PrecisionFloorError(ValueError):
    def __init__(self, width, center):
        self.width = width
        super().__init__(
            f"viewport width {width:.3g} at |center| = {abs(center):.3g} is below the double "
            f"precision floor; use an extended-precision orbit instead"
        )


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float
    w: int
    h: int

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "width", float(self.width))
        if not self.width > 0:
            raise ValueError("viewport width must be positive")
        if self.w < 16 or self.h < 16:
            raise ValueError("viewport needs at least 16 pixels per side")

    @classmethod
    def square(cls, center, width, px):
        return cls(center, width, px, px)

    @property
    def height(self):
        return self.width * self.h / self.w

    @property
    def pixel_size(self):
        return self.width / self.w

    def pixel_coords(self, rows=None, cols=None):
        """Complex pixel centres, shape ``(len(rows), len(cols))``."""
        rows = np.arange(self.h) if rows is None else np.asarray(rows)
        cols = np.arange(self.w) if cols is None else np.asarray(cols)
        px = self.pixel_size
        x = self.center.real - self.width / 2 + (cols + 0.5) * px
        y = self.center.imag + self.height / 2 - (rows + 0.5) * px
        return x[None, :] + 1j * y[:, None]

    def check_precision(self):
        scale = max(abs(self.center), 1.0)
        if self.pixel_size < PRECISION_FLOOR * scale:
            raise PrecisionFloorError(self.width, self.center)


@dataclass(frozen=True)
class ClassificationGrid:
    viewport: Viewport
    tags: np.ndarray
    iters: np.ndarray
    map_id: str
    maxiter: int
    r_in: float = R_IN
    r_out: float = R_OUT

    def __post_init__(self):
        shape = (self.viewport.h, self.viewport.w)
        if self.tags.shape != shape or self.iters.shape != shape:
            raise ValueError(f"grid arrays must have shape {shape}")

    def mask(self, fate=Fate.BOUNDED):
        return self.tags == int(fate)

    def coords(self):
        return self.viewport.pixel_coords()

    def fractions(self):
        n = self.tags.size
        return {f.name: float(np.count_nonzero(self.tags == int(f))) / n for f in Fate}


def _tiles(h, w, size=TILE):
    return [(r, c) for r in range(0, h, size) for c in range(0, w, size)]


def classify_grid(g, viewport, maxiter=2000, r_in=R_IN, r_out=R_OUT, workers=None, backend=None):
    """Classify every pixel centre of ``viewport`` under ``g``."""
    viewport.check_precision()
    h, w = viewport.h, viewport.w
    tags = np.empty((h, w), dtype=np.uint8)
    iters = np.empty((h, w), dtype=np.uint32)

    def run(tile):
        r0, c0 = tile
        rows = np.arange(r0, min(r0 + TILE, h))
        cols = np.arange(c0, min(c0 + TILE, w))
        pts = viewport.pixel_coords(rows, cols)
        t, k = classify_points(g, pts, maxiter, r_in, r_out, backend=backend)
        return tile, rows, cols, t, k

    tiles = _tiles(h, w)
    n = worker_count(1) if workers is None else max(1, int(workers))
    if n > 1:
        with ThreadPoolExecutor(n) as ex:
            results = ex.map(run, tiles)
            for _, rows, cols, t, k in results:
                tags[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = t
                iters[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = k
    else:
        for tile in tiles:
            _, rows, cols, t, k = run(tile)
            tags[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = t
            iters[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = k
    return ClassificationGrid(viewport, tags, iters, g.map_id, int(maxiter), float(r_in), float(r_out))


def zoom_sequence(g, center, base_width, factor, count, px=400, maxiter=2000, **kw):
    """Grids of width ``base_width / factor^k`` about ``center`` for ``k < count``."""
    if not factor > 1:
        raise ValueError("zoom factor must exceed 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    views = [Viewport.square(center, base_width / factor**k, px) for k in range(count)]
    for v in views:
        v.check_precision()
    return [classify_grid(g, v, maxiter, **kw) for v in views]


def paired_zoom_agreement(P, f, L, base_width, factor, count, px=200, maxiter=2000, backend=None):
    """Fraction of matching bounded/unbounded pixels between zooms on ``P`` at ``w`` and ``f`` at ``w2``.

    The ``f`` samples sit at ``w2 + L u`` for each ``P`` sample ``w + u``, so
    the second view is the first rescaled by ``|L|`` and turned by ``arg L``.
    """
    out = []
    for k in range(count):
        v = Viewport.square(0j, base_width / factor**k, px)
        u = v.pixel_coords()
        tp, _ = classify_points(P, P.omega + u, maxiter, backend=backend)
        tf, _ = classify_points(f, f.omega2 + L * u, maxiter, backend=backend)
        out.append(float(np.mean((tp == Fate.BOUNDED) == (tf == Fate.BOUNDED))))
    return out


def downsample_majority(mask, factor=2):
    """Block majority vote (ties count as true)."""
    h, w = mask.shape
    m = mask[: h - h % factor, : w - w % factor].reshape(h // factor, factor, w // factor, factor)
    return m.sum(axis=(1, 3)) * 2 >= factor * factor


# ---------------------------------------------------------------------------
# grid dumps
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<8sIIdddIdd")


def grid_bytes(grid):
    """Little-endian dump: header, map id, row-major u8 tags, row-major u32 counts."""
    v = grid.viewport
    mid = grid.map_id.encode("utf-8")
    head = _HEADER.pack(
        MAGIC, v.w, v.h, v.center.real, v.center.imag, v.width, grid.maxiter, grid.r_in, grid.r_out
    )
    return b"".join(
        [
            head,
            struct.pack("<I", len(mid)),
            mid,
            np.ascontiguousarray(grid.tags, dtype="<u1").tobytes(),
            np.ascontiguousarray(grid.iters, dtype="<u4").tobytes(),
        ]
    )


def grid_from_bytes(data):
    magic, w, h, cr, ci, width, maxiter, r_in, r_out = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError("not a grid dump (bad magic)")
    off = _HEADER.size
    (n,) = struct.unpack_from("<I", data, off)
    off += 4
    map_id = data[off : off + n].decode("utf-8")
    off += n
    tags = np.frombuffer(data, dtype="<u1", count=w * h, offset=off).reshape(h, w).copy()
    off += w * h
    iters = np.frombuffer(data, dtype="<u4", count=w * h, offset=off).reshape(h, w).astype(np.uint32)
    off += 4 * w * h
    if off != len(data):
        raise ValueError("grid dump has trailing bytes")
    return ClassificationGrid(Viewport(complex(cr, ci), width, w, h), tags, iters, map_id, maxiter, r_in, r_out)


def write_grid(grid, path):
    with open(path, "wb") as fh:
        fh.write(grid_bytes(grid))


def read_grid(path):
    with open(path, "rb") as fh:
        return grid_from_bytes(fh.read())


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

# colour per fate plus the colour reached at high iteration counts
PALETTES = {
    "classic": {
        Fate.BOUNDED: ((20, 20, 60), (20, 20, 60)),
        Fate.TO_INFINITY: ((255, 255, 255), (40, 110, 200)),
        Fate.TO_ZERO: ((255, 240, 200), (200, 80, 30)),
    },
    "mono": {
        Fate.BOUNDED: ((0, 0, 0), (0, 0, 0)),
        Fate.TO_INFINITY: ((255, 255, 255), (128, 128, 128)),
        Fate.TO_ZERO: ((255, 255, 255), (128, 128, 128)),
    },
}


def colorize(tags, iters, maxiter, palette="classic"):
    """``(h, w, 3)`` uint8 colours: fate hue shaded by log iteration count."""
    pal = PALETTES[palette] if isinstance(palette, str) else palette
    s = np.log1p(iters.astype(np.float64)) / math.log1p(max(maxiter, 1))
    s = np.clip(s, 0.0, 1.0)[..., None]
    out = np.zeros(tags.shape + (3,), dtype=np.float64)
    for fate, (lo, hi) in pal.items():
        m = tags == int(fate)
        if m.any():
            lo_a, hi_a = np.array(lo, float), np.array(hi, float)
            out[m] = (lo_a + (hi_a - lo_a) * s[m])
    return np.rint(out).astype(np.uint8)


def encode_image(grid, palette="classic", supersample=None):
    """PNG bytes for ``grid``.  ``supersample`` is a grid at an integer multiple of the resolution."""
    from PIL import Image

    if supersample is not None:
        k = supersample.viewport.w // grid.viewport.w
        rgb = colorize(supersample.tags, supersample.iters, supersample.maxiter, palette).astype(np.uint32)
        h, w = grid.viewport.h, grid.viewport.w
        rgb = rgb[: h * k, : w * k].reshape(h, k, w, k, 3).sum(axis=(1, 3))
        rgb = ((rgb + (k * k) // 2) // (k * k)).astype(np.uint8)
    else:
        rgb = colorize(grid.tags, grid.iters, grid.maxiter, palette)
    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(buf, format="PNG", optimize=False, compress_level=6)
    return buf.getvalue()


def render_image(g, viewport, maxiter=2000, palette="classic", supersample=1, workers=None):
    """Grid plus PNG bytes; supersampling only affects the picture, never the grid."""
    grid = classify_grid(g, viewport, maxiter, workers=workers)
    fine = None
    if supersample > 1:
        v = viewport
        fine = classify_grid(
            g, Viewport(v.center, v.width, v.w * supersample, v.h * supersample), maxiter, workers=workers
        )
    return grid, encode_image(grid, palette, supersample=fine)
