"""The two map families and their orbit machinery.

``P(z) = lam z + z^2`` with ``lam = e^{2 pi i theta}`` and the degree-3
Blaschke family ``f(z) = b z^2 (az + 1)/(z + a)``.  Infinity is represented
by ``INF`` (any complex with an infinite part is treated as infinity).
"""

import cmath
import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mp

from . import kernels
from .cfrac import RotationNumber, WORK_DPS

INF = kernels.INF

R_OUT = 1e4
R_IN = 1e-4


class DegenerateMapError(ValueError):
    """``a = 0`` collapses the family to ``z -> bz``."""


class DoubleCriticalPointError(ValueError):
    """``a^2`` is 1 or 1/9 and the two free critical points collide."""


def is_infinite(z):
    return cmath.isinf(z)


class Fate(enum.IntEnum):
    BOUNDED = kernels.BOUNDED
    TO_ZERO = kernels.TO_ZERO
    TO_INFINITY = kernels.TO_INFINITY


@dataclass(frozen=True)
class OrbitFate:
    tag: Fate
    iterations: int
    last: complex


@dataclass(frozen=True)
class QuadraticSiegel:
    """``P(z) = lam z + z^2`` with a Siegel disk of rotation number ``theta``."""

    theta: RotationNumber
    lam: complex = field(init=False)
    omega: complex = field(init=False)

    def __post_init__(self):
        with mp.workdps(WORK_DPS):
            lam = mpmath.expjpi(2 * self.theta.value)
            object.__setattr__(self, "lam", complex(lam))
            object.__setattr__(self, "omega", complex(-lam / 2))

    kind = "P"

    @property
    def map_id(self):
        return f"P:theta={mpmath.nstr(self.theta.value, 20)}"

    def lam_mp(self, dps):
        with mp.workdps(dps):
            return mpmath.expjpi(2 * self.theta.value)

    def omega_mp(self, dps):
        with mp.workdps(dps):
            return -self.lam_mp(dps) / 2

    def __call__(self, z):
        return eval_P(self, z)

    def derivative(self, z):
        return self.lam + 2 * np.asarray(z)

    def preimages(self, w):
        """Both solutions of ``z^2 + lam z - w = 0``."""
        lam = self.lam
        d = cmath.sqrt(lam * lam + 4 * w)
        return ((-lam + d) / 2, (-lam - d) / 2)


def critical_points(a):
    """Free critical points ``(omega1, omega2)`` of ``f_{a,b}``, ``|omega1| <= |omega2|``.

    They solve ``2a z^2 + (3a^2 + 1) z + 2a = 0`` (clear denominators in
    ``f'/f = 2/z + a/(az+1) - 1/(z+a)``), so their product is 1.
    """
    a = complex(a)
    if a == 0:
        raise DegenerateMapError("a = 0: f reduces to z -> bz")
    a2 = a * a
    if abs(a2 - 1) < 1e-14 or abs(a2 - 1 / 9) < 1e-14:
        raise DoubleCriticalPointError(f"a = {a}: discriminant (9a^2-1)(a^2-1) vanishes")
    B = 3 * a2 + 1
    disc = cmath.sqrt((9 * a2 - 1) * (a2 - 1))
    # stable pair: large root by the sign-matched formula, small one from the product
    big = (-B - disc) / (4 * a) if (B.conjugate() * disc).real >= 0 else (-B + disc) / (4 * a)
    small = 1 / big
    roots = sorted([small, big], key=lambda z: (abs(z), cmath.phase(z)))
    return roots[0], roots[1]


@dataclass(frozen=True)
class BlaschkeCubic:
    """``f(z) = b z^2 (az + 1)/(z + a)``; superattracting at 0 and infinity."""

    a: complex
    b: complex
    omega1: complex = field(init=False)
    omega2: complex = field(init=False)

    kind = "f"

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.b == 0:
            raise DegenerateMapError("b = 0")
        w1, w2 = critical_points(self.a)
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)

    @property
    def pole(self):
        return -self.a

    @property
    def map_id(self):
        return f"f:a={self.a!r},b={self.b!r}"

    def critical(self, j):
        if j == 1:
            return self.omega1
        if j == 2:
            return self.omega2
        raise ValueError("j must be 1 or 2")

    def __call__(self, z):
        return eval_f(self, z)

    def derivative(self, z):
        z = np.asarray(z, dtype=np.complex128)
        a, b = self.a, self.b
        return b * z * (a * z * z * 2 + (3 * a * a + 1) * z + 2 * a) / (z + a) ** 2

    def inverse_conjugate(self):
        """``g(w) = 1/f(1/w)``, which is the family member with ``b -> 1/b``."""
        return BlaschkeCubic(self.a, 1 / self.b)

    def preimages(self, w):
        return preimages(self, w)


def eval_P(P, z):
    """``lam z + z^2``; infinity maps to infinity.  Accepts scalars or arrays."""
    if np.ndim(z) == 0:
        z = complex(z)
        if cmath.isinf(z):
            return INF
        return P.lam * z + z * z
    z = np.asarray(z, dtype=np.complex128)
    out = P.lam * z + z * z
    out[~np.isfinite(z)] = INF
    return out


def eval_f(f, z):
    """``b z^2 (az+1)/(z+a)``, total on the sphere (``f(-a) = f(inf) = inf``)."""
    if np.ndim(z) == 0:
        return kernels._f_scalar(f.a, f.b, complex(z))
    return kernels.eval_blaschke(f.a, f.b, z)


def preimages(f, w):
    """The three roots of ``ab z^3 + b z^2 - w z - w a = 0`` (i.e. ``f(z) = w``)."""
    w = complex(w)
    if f.a == 0 or f.b == 0:
        raise DegenerateMapError("leading coefficient ab vanishes")
    if cmath.isinf(w):
        raise ValueError("w must be finite")
    coeffs = [f.a * f.b, f.b, -w, -w * f.a]
    roots = np.roots(coeffs).astype(np.complex128)
    cubic = lambda z: ((coeffs[0] * z + coeffs[1]) * z + coeffs[2]) * z + coeffs[3]
    # two Newton steps on f(z) - w in cleared form, kept only where they help
    # (double roots at w = 0 make the step 0/0)
    with np.errstate(all="ignore"):
        for _ in range(2):
            val = cubic(roots)
            der = (3 * coeffs[0] * roots + 2 * coeffs[1]) * roots + coeffs[2]
            step = roots - val / der
            better = np.isfinite(step) & (np.abs(cubic(step)) < np.abs(val))
            roots[better] = step[better]
    return tuple(sorted(roots.tolist(), key=lambda z: (z.real, z.imag)))


def co_preimages(f, points, images):
    """For each ``p`` with ``f(p) = w``, the other two solutions of ``f(z) = w``.

    Deflates the cubic by the known root and solves the remaining quadratic
    with the cancellation-free formula; vectorised over ``points``.
    """
    p = np.asarray(points, dtype=np.complex128)
    w = np.asarray(images, dtype=np.complex128)
    A = f.a * f.b
    B = f.b + A * p
    C = -w + p * B
    disc = np.sqrt(B * B - 4 * A * C)
    sign = np.where((np.conj(B) * disc).real >= 0, 1.0, -1.0)
    r1 = (-B - sign * disc) / (2 * A)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(r1 != 0, C / (A * r1), -B / A)
    return r1, r2


def orbit(g, z0, n, dps=None, backend=None):
    """``[z0, g(z0), ..., g^n(z0)]``.

    Double precision goes through the compiled kernels and returns a numpy
    array in which infinity sticks once reached.  With ``dps`` set, the
    orbit is computed with mpmath at that many digits and returned as a
    list of ``mpc``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if dps is not None:
        return _orbit_mp(g, z0, n, dps)
    if isinstance(g, QuadraticSiegel):
        return kernels.orbit_quadratic(g.lam, z0, n, backend=backend)
    if isinstance(g, BlaschkeCubic):
        return kernels.orbit_blaschke(g.a, g.b, z0, n, backend=backend)
    raise TypeError(f"unsupported map {type(g).__name__}")


def _orbit_mp(g, z0, n, dps):
    with mp.workdps(dps):
        if isinstance(g, QuadraticSiegel):
            lam = g.lam_mp(dps)
            z = mpmath.mpc(z0) if not isinstance(z0, mpmath.mpc) else +z0
            out = [z]
            for _ in range(n):
                z = lam * z + z * z
                out.append(z)
            return out
        if isinstance(g, BlaschkeCubic):
            a, b = mpmath.mpc(g.a), mpmath.mpc(g.b)
            z = mpmath.mpc(z0) if not isinstance(z0, mpmath.mpc) else +z0
            out = [z]
            for _ in range(n):
                if mpmath.isinf(z) or z + a == 0:
                    z = mpmath.mpc(mpmath.inf, mpmath.inf)
                else:
                    z = b * z * z * (a * z + 1) / (z + a)
                out.append(z)
            return out
    raise TypeError(f"unsupported map {type(g).__name__}")


def critical_point_mp(f, j, dps):
    """``omega_j`` of ``f`` recomputed at ``dps`` digits (same ordering as double)."""
    with mp.workdps(dps):
        a = mpmath.mpc(f.a)
        B = 3 * a * a + 1
        disc = mpmath.sqrt((9 * a * a - 1) * (a * a - 1))
        r1 = (-B + disc) / (4 * a)
        r2 = (-B - disc) / (4 * a)
        target = f.critical(j)
        return r1 if abs(complex(r1) - target) <= abs(complex(r2) - target) else r2


def classify(g, z, maxiter=1000, r_in=R_IN, r_out=R_OUT, backend=None):
    """Fate of the orbit of ``z``: first threshold crossing wins.

    For ``P`` only the escape radius matters (the origin is a neutral
    fixed point there, not an attractor), so ``r_in`` is ignored.
    """
    if maxiter < 1:
        raise ValueError("maxiter must be >= 1")
    if not 0 < r_in < 1 < r_out:
        raise ValueError("need 0 < r_in < 1 < r_out")
    tags, iters = classify_points(g, np.array([complex(z)]), maxiter, r_in, r_out, backend)
    k = int(iters[0])
    last = orbit(g, z, k, backend=backend)[-1]
    return OrbitFate(Fate(int(tags[0])), k, complex(last))


def classify_points(g, pts, maxiter, r_in=R_IN, r_out=R_OUT, backend=None):
    """Vectorised :func:`classify` returning ``(tags, iterations)`` arrays."""
    pts = np.asarray(pts, dtype=np.complex128)
    shape = pts.shape
    if isinstance(g, QuadraticSiegel):
        tags, iters = kernels.escape_quadratic(g.lam, pts.ravel(), maxiter, r_out, backend=backend)
    elif isinstance(g, BlaschkeCubic):
        tags, iters = kernels.escape_blaschke(g.a, g.b, pts.ravel(), maxiter, r_in, r_out, backend=backend)
    else:
        raise TypeError(f"unsupported map {type(g).__name__}")
    return tags.reshape(shape), iters.reshape(shape)


def is_finite_orbit(points):
    return bool(np.all(np.isfinite(points)))


def slice_map(a, t):
    """Blaschke map on the symmetric slice: real ``a`` and ``b = e^{2 pi i t}``."""
    return BlaschkeCubic(complex(float(a), 0.0), cmath.exp(2j * math.pi * t))
