"""Largest empty isoceles triangle with apex at a boundary point."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TriangleReport:
    aperture: float
    direction: float
    length: float
    n_obstacles: int
    unrestricted: float = 0.0

    @property
    def degrees(self):
        return math.degrees(self.aperture)


def _outside_samples(vertex, length, inside, radial, angular):
    rho = length * (np.arange(radial) + 0.5) / radial
    psi = 2 * math.pi * np.arange(angular) / angular
    z = vertex + (rho[:, None] * np.exp(1j * psi)[None, :]).ravel()
    ok = np.asarray(inside(z), dtype=bool)
    return z[~ok]


def triangle_probe(
    points,
    vertex,
    length,
    directions=360,
    apertures=720,
    inside=None,
    radial=96,
    angular=1440,
):
    """Widest triangle of side ``length`` with apex ``vertex`` avoiding every obstacle.

    Obstacles are the cloud ``points`` and, when ``inside`` is given, polar
    samples around the vertex for which ``inside`` is false (so the triangle
    also has to stay on the domain side).  Apertures and bisector directions
    are searched on uniform grids.

    The reported aperture is grown from a needle: every narrower triangle
    along the same bisector must be free as well.  With a fixed side
    length, wide triangles are flat slivers that can slip between
    discrete samples, so the widest free aperture on its own is fragile; it
    is kept as ``unrestricted``.
    """
    vertex = complex(vertex)
    obs = np.asarray(points, dtype=np.complex128).ravel() - vertex
    if inside is not None:
        extra = _outside_samples(vertex, length, inside, radial, angular) - vertex
        obs = np.concatenate([obs, extra])
    rho = np.abs(obs)
    keep = (rho > 0) & (rho <= length)
    obs, rho = obs[keep], rho[keep]
    psi = np.angle(obs)

    grid = np.pi * (np.arange(1, apertures + 1)) / (apertures + 1)
    best = (0.0, 0.0)
    widest = 0.0
    for d in 2 * math.pi * np.arange(directions) / directions:
        delta = np.abs((psi - d + math.pi) % (2 * math.pi) - math.pi)
        proj = rho * np.cos(delta)
        # an obstacle blocks the apertures 2|delta| < phi < 2 arccos(proj/length)
        lo = 2 * delta
        hi = 2 * np.arccos(np.clip(proj / length, -1.0, 1.0))
        act = lo < hi
        i_lo = np.searchsorted(grid, lo[act], side="right")
        i_hi = np.searchsorted(grid, hi[act], side="left")
        diff = np.zeros(apertures + 1, dtype=np.int64)
        np.add.at(diff, i_lo, 1)
        np.add.at(diff, i_hi, -1)
        blocked = np.cumsum(diff[:-1]) > 0
        first = int(np.argmax(blocked)) if blocked.any() else apertures
        phi = float(grid[first - 1]) if first > 0 else 0.0
        if phi > best[0]:
            best = (phi, float(d))
        free = np.flatnonzero(~blocked)
        if free.size:
            widest = max(widest, float(grid[free[-1]]))
    return TriangleReport(best[0], best[1], float(length), int(obs.size), widest)
