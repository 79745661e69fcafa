"""Point clouds approximating rotation-domain boundaries and nearby Julia set."""

import math
from dataclasses import dataclass

import numpy as np

from .._accel import njit
from ..dynamics import BlaschkeCubic, QuadraticSiegel, co_preimages, eval_f, orbit


class NotOnLocusError(RuntimeError):
    """The critical orbit left the region a rotation-domain boundary can occupy."""


@dataclass(frozen=True)
class BoundaryCloud:
    points: np.ndarray
    center: complex
    source: str

    @property
    def N(self):
        return len(self.points) - 1

    def relative(self, origin=None):
        return self.points - (self.center if origin is None else origin)

    def diameter(self):
        return cloud_diameter(self.points)


def boundary_cloud(g, c, N, r_min=1e-3, r_max=1e3):
    """``{g^k(c) : 0 <= k <= N}`` with a sanity check that the orbit stayed put."""
    pts = orbit(g, c, N)
    mods = np.abs(pts)
    bad = ~np.isfinite(pts) | (mods > r_max)
    if isinstance(g, BlaschkeCubic):
        bad |= mods < r_min
    if bad.any():
        k = int(np.argmax(bad))
        raise NotOnLocusError(f"orbit of {c} left [{r_min}, {r_max}] at step {k}")
    return BoundaryCloud(pts, complex(c), g.map_id)


def julia_cloud(cloud, g, radius=None):
    """Cloud points plus their co-preimages (the other solutions of ``g(z) = g(p)``).

    Near a simple critical point the co-preimage branch is the local deck
    involution, so this adds the mirror piece of the Julia set that meets
    the boundary at the critical point.  With ``radius`` only points within
    that distance of the cloud center get co-preimages.
    """
    pts = cloud.points
    sel = pts if radius is None else pts[np.abs(pts - cloud.center) < radius]
    if isinstance(g, QuadraticSiegel):
        extra = [-g.lam - sel]
    elif isinstance(g, BlaschkeCubic):
        r1, r2 = co_preimages(g, sel, eval_f(g, sel))
        extra = [r1, r2]
    else:
        raise TypeError(f"unsupported map {type(g).__name__}")
    out = np.concatenate([pts] + extra)
    return out[np.isfinite(out)]


@njit
def _calipers(hx, hy):
    # hull vertices in counter-clockwise order
    n = hx.shape[0]
    best = 0.0
    if n <= 3:
        for i in range(n):
            for j in range(n):
                best = max(best, math.hypot(hx[i] - hx[j], hy[i] - hy[j]))
        return best
    j = 1
    for i in range(n):
        i1 = (i + 1) % n
        ex = hx[i1] - hx[i]
        ey = hy[i1] - hy[i]
        while True:
            j1 = (j + 1) % n
            cur = ex * (hy[j] - hy[i]) - ey * (hx[j] - hx[i])
            nxt = ex * (hy[j1] - hy[i]) - ey * (hx[j1] - hx[i])
            if nxt > cur:
                j = j1
            else:
                break
        best = max(best, math.hypot(hx[i] - hx[j], hy[i] - hy[j]), math.hypot(hx[i1] - hx[j], hy[i1] - hy[j]))
    return best


def cloud_diameter(points):
    """Largest pairwise distance (rotating calipers on the convex hull)."""
    pts = np.asarray(points, dtype=np.complex128).ravel()
    pts = pts[np.isfinite(pts)]
    if len(pts) < 2:
        return 0.0
    if len(pts) <= 64:
        return float(np.abs(pts[:, None] - pts[None, :]).max())
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(np.column_stack([pts.real, pts.imag]))
    except QhullError:
        # collinear: the diameter is the spread along the line
        far = pts[np.argmax(np.abs(pts - pts[0]))]
        if far == pts[0]:
            return 0.0
        u = (far - pts[0]) / abs(far - pts[0])
        s = ((pts - pts[0]) * np.conj(u)).real
        return float(s.max() - s.min())
    h = pts[hull.vertices]
    return float(_calipers(np.ascontiguousarray(h.real), np.ascontiguousarray(h.imag)))


def local_inverse(g, points, w0, z0, steps=40):
    """The branch of ``g^{-1}`` sending ``w0`` to ``z0``, applied to ``points`` near ``w0``.

    Newton from the linear guess ``z0 + (p - w0)/g'(z0)``; ``z0`` must not be
    critical.  Points that fail to converge come back as NaN.
    """
    p = np.asarray(points, dtype=np.complex128)
    d0 = complex(g.derivative(z0))
    if d0 == 0:
        raise ValueError("branch point is critical")
    z = z0 + (p - w0) / d0
    with np.errstate(all="ignore"):
        for _ in range(steps):
            z = z - (g(z) - p) / g.derivative(z)
        bad = ~(np.abs(g(z) - p) <= 1e-9 * np.maximum(1.0, np.abs(p)))
    z[bad] = np.nan
    return z
