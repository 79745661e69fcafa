"""Pixel-counting area estimates: measurable depth and inner/outer radii."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..dynamics import Fate
from ..render import Viewport, classify_grid

BETA_MIN = 0.05
DEEP_RADII = tuple(2.0 ** -k for k in range(2, 7))


class ResolutionError(ValueError):
    def __init__(self, required, actual):
        self.required = required
        self.actual = actual
        super().__init__(f"pixel size {actual:.3g} too coarse; need <= {required:.3g}")


class CenterNotInComponentError(ValueError):
    pass


@dataclass(frozen=True)
class DeepPointReport:
    radii: tuple
    areas: tuple
    slope: float
    residual: float
    beta_min: float = BETA_MIN

    @property
    def beta_hat(self):
        return self.slope - 2.0

    @property
    def degenerate(self):
        # set fills every disk: deep in the strongest sense
        return all(a == 0 for a in self.areas)

    @property
    def passed(self):
        return self.degenerate or self.beta_hat > self.beta_min

    def rows(self):
        return [{"r": r, "area": a} for r, a in zip(self.radii, self.areas)]


def excluded_areas(mask, viewport, z0, radii):
    """``Area(B(z0, r) minus E)`` for each radius, with ``E`` given by ``mask``."""
    coords = viewport.pixel_coords()
    d = np.abs(coords - z0)
    px_area = viewport.pixel_size ** 2
    outside = d[~mask]
    outside.sort()
    return [float(np.searchsorted(outside, r, side="right")) * px_area for r in radii]


def deep_point_from_mask(mask, viewport, z0, radii=DEEP_RADII, beta_min=BETA_MIN):
    """Fit ``log Area(B(z0, r) minus E)`` against ``log r``; depth means slope above 2."""
    radii = tuple(sorted(float(r) for r in radii))
    need = radii[0] / 8
    if viewport.pixel_size > need:
        raise ResolutionError(need, viewport.pixel_size)
    half_w, half_h = viewport.width / 2, viewport.height / 2
    off = complex(z0) - viewport.center
    if abs(off.real) + radii[-1] > half_w * (1 + 1e-12) or abs(off.imag) + radii[-1] > half_h * (1 + 1e-12):
        raise ValueError("largest disk does not fit inside the grid")
    areas = excluded_areas(np.asarray(mask, dtype=bool), viewport, complex(z0), radii)
    pos = [(r, a) for r, a in zip(radii, areas) if a > 0]
    if len(pos) >= 2:
        x = np.log([r for r, _ in pos])
        y = np.log([a for _, a in pos])
        slope, icpt = np.polyfit(x, y, 1)
        res = float(np.sqrt(np.mean((y - slope * x - icpt) ** 2)))
    elif not pos:
        slope, res = math.inf, 0.0
    else:
        slope, res = math.nan, math.nan
    return DeepPointReport(radii, tuple(areas), float(slope), res, beta_min)


def deep_point_test(grid, z0, radii=DEEP_RADII, beta_min=BETA_MIN):
    """Deep-point check on a classification grid, ``E`` = non-escaping pixels."""
    return deep_point_from_mask(grid.mask(Fate.BOUNDED), grid.viewport, z0, radii, beta_min)


def deep_point_grid(g, z0, r_max=DEEP_RADII[-1], px=4096, maxiter=2000, workers=None):
    """Square grid just covering ``B(z0, r_max)``."""
    return classify_grid(g, Viewport.square(z0, 2 * r_max, px), maxiter, workers=workers)


def inner_outer_radius(mask, viewport, center):
    """Inner and outer radius of the connected component of ``mask`` containing ``center``.

    The inner radius is the distance to the nearest pixel centre outside the
    component (or to the grid edge); the outer radius is the distance to the
    farthest pixel centre inside it.
    """
    mask = np.asarray(mask, dtype=bool)
    center = complex(center)
    px = viewport.pixel_size
    col = int(math.floor((center.real - (viewport.center.real - viewport.width / 2)) / px))
    row = int(math.floor(((viewport.center.imag + viewport.height / 2) - center.imag) / px))
    if not (0 <= row < viewport.h and 0 <= col < viewport.w) or not mask[row, col]:
        raise CenterNotInComponentError(f"{center} is not inside the pixel set")
    labels, _ = ndimage.label(mask)
    comp = labels == labels[row, col]
    d = np.abs(viewport.pixel_coords() - center)
    out_r = float(d[comp].max())
    in_r = float(d[~comp].min()) if (~comp).any() else math.inf
    edge = min(
        center.real - (viewport.center.real - viewport.width / 2),
        (viewport.center.real + viewport.width / 2) - center.real,
        center.imag - (viewport.center.imag - viewport.height / 2),
        (viewport.center.imag + viewport.height / 2) - center.imag,
    )
    if comp[0, :].any() or comp[-1, :].any() or comp[:, 0].any() or comp[:, -1].any():
        in_r = min(in_r, edge)
    return min(in_r, out_r), out_r
