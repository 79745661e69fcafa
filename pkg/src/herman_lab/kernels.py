"""Inner loops: orbits, escape-time classification and circle-lift averages.

Every public kernel has a numba implementation (``_nb_*``) and a numpy or
plain-Python twin (``_np_*``).  The twins compute the same thing with the
same formulas so the two backends agree to rounding; ``benchmarks/`` times
them against each other.
"""

import cmath
import math

import numpy as np

from ._accel import njit, resolve

BOUNDED = 0
TO_ZERO = 1
TO_INFINITY = 2

INF = complex(math.inf, math.inf)

POLE_SWITCH = 1e-8
HUGE = 1e100


# ---------------------------------------------------------------------------
# map evaluation
# ---------------------------------------------------------------------------

def _f_scalar(a, b, z):
    if cmath.isinf(z) or cmath.isnan(z):
        return INF
    d = z + a
    if abs(d) < POLE_SWITCH:
        den = b * z * z * (a * z + 1.0)
        w = d / den
        if w == 0:
            return INF
        return 1.0 / w
    if abs(z) > HUGE:
        w = 1.0 / z
        g = w * w * (a * w + 1.0) / (b * (w + a))
        if g == 0:
            return INF
        return 1.0 / g
    return b * z * z * (a * z + 1.0) / d


_nb_f = njit(_f_scalar)


def _p_scalar(lam, z):
    if cmath.isinf(z) or cmath.isnan(z):
        return INF
    if abs(z) > HUGE:
        return INF
    return lam * z + z * z


_nb_p = njit(_p_scalar)


def eval_blaschke(a, b, z):
    """Vectorised ``b z^2 (az+1)/(z+a)`` with the reciprocal switch near the pole."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    flat_in = z.ravel()
    flat_out = out.ravel()
    finite = np.isfinite(flat_in)
    d = flat_in + a
    near = finite & (np.abs(d) < POLE_SWITCH)
    far = finite & (np.abs(flat_in) > HUGE)
    regular = finite & ~near & ~far
    zr = flat_in[regular]
    flat_out[regular] = b * zr * zr * (a * zr + 1.0) / d[regular]
    flat_out[~finite] = INF
    for idx in np.flatnonzero(near | far):
        flat_out[idx] = _f_scalar(a, b, complex(flat_in[idx]))
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

@njit
def _nb_orbit_quadratic(lam, z0, n):
    out = np.empty(n + 1, dtype=np.complex128)
    z = z0
    out[0] = z
    for k in range(1, n + 1):
        z = _nb_p(lam, z)
        out[k] = z
    return out


def _np_orbit_quadratic(lam, z0, n):
    out = np.empty(n + 1, dtype=np.complex128)
    z = complex(z0)
    lam = complex(lam)
    out[0] = z
    for k in range(1, n + 1):
        z = _p_scalar(lam, z)
        out[k] = z
    return out


@njit
def _nb_orbit_blaschke(a, b, z0, n):
    out = np.empty(n + 1, dtype=np.complex128)
    z = z0
    out[0] = z
    for k in range(1, n + 1):
        z = _nb_f(a, b, z)
        out[k] = z
    return out


def _np_orbit_blaschke(a, b, z0, n):
    out = np.empty(n + 1, dtype=np.complex128)
    a, b, z = complex(a), complex(b), complex(z0)
    out[0] = z
    for k in range(1, n + 1):
        z = _f_scalar(a, b, z)
        out[k] = z
    return out


def orbit_quadratic(lam, z0, n, backend=None):
    """``z0, P(z0), ..., P^n(z0)`` for ``P(z) = lam z + z^2``; infinity sticks."""
    if resolve(backend) == "numba":
        return _nb_orbit_quadratic(complex(lam), complex(z0), int(n))
    return _np_orbit_quadratic(lam, z0, int(n))


def orbit_blaschke(a, b, z0, n, backend=None):
    """Forward orbit of length ``n + 1`` under ``b z^2 (az+1)/(z+a)``."""
    if resolve(backend) == "numba":
        return _nb_orbit_blaschke(complex(a), complex(b), complex(z0), int(n))
    return _np_orbit_blaschke(a, b, z0, int(n))


# ---------------------------------------------------------------------------
# escape-time classification
# ---------------------------------------------------------------------------

@njit
def _nb_escape_one(lr, li, x, y, maxiter, r2):
    for k in range(1, maxiter + 1):
        xn = x * x - y * y + lr * x - li * y
        y = 2.0 * x * y + lr * y + li * x
        x = xn
        if x * x + y * y > r2:
            return k
    return 0


@njit
def _nb_escape_quadratic(lam, pts, maxiter, r_out):
    # four pixels in lockstep: independent dependency chains roughly double throughput
    m = pts.shape[0]
    tags = np.zeros(m, dtype=np.uint8)
    iters = np.full(m, maxiter, dtype=np.uint32)
    lr = lam.real
    li = lam.imag
    r2 = r_out * r_out
    m4 = m - m % 4
    for i in range(0, m4, 4):
        x0 = pts[i].real
        y0 = pts[i].imag
        x1 = pts[i + 1].real
        y1 = pts[i + 1].imag
        x2 = pts[i + 2].real
        y2 = pts[i + 2].imag
        x3 = pts[i + 3].real
        y3 = pts[i + 3].imag
        a0 = a1 = a2 = a3 = True
        for k in range(1, maxiter + 1):
            t = x0 * x0 - y0 * y0 + lr * x0 - li * y0
            y0 = 2.0 * x0 * y0 + lr * y0 + li * x0
            x0 = t
            t = x1 * x1 - y1 * y1 + lr * x1 - li * y1
            y1 = 2.0 * x1 * y1 + lr * y1 + li * x1
            x1 = t
            t = x2 * x2 - y2 * y2 + lr * x2 - li * y2
            y2 = 2.0 * x2 * y2 + lr * y2 + li * x2
            x2 = t
            t = x3 * x3 - y3 * y3 + lr * x3 - li * y3
            y3 = 2.0 * x3 * y3 + lr * y3 + li * x3
            x3 = t
            # finished lanes are parked at the fixed point 0 so they never overflow
            if a0 and x0 * x0 + y0 * y0 > r2:
                a0 = False
                tags[i] = TO_INFINITY
                iters[i] = k
                x0 = y0 = 0.0
            if a1 and x1 * x1 + y1 * y1 > r2:
                a1 = False
                tags[i + 1] = TO_INFINITY
                iters[i + 1] = k
                x1 = y1 = 0.0
            if a2 and x2 * x2 + y2 * y2 > r2:
                a2 = False
                tags[i + 2] = TO_INFINITY
                iters[i + 2] = k
                x2 = y2 = 0.0
            if a3 and x3 * x3 + y3 * y3 > r2:
                a3 = False
                tags[i + 3] = TO_INFINITY
                iters[i + 3] = k
                x3 = y3 = 0.0
            if not (a0 or a1 or a2 or a3):
                break
    for i in range(m4, m):
        k = _nb_escape_one(lr, li, pts[i].real, pts[i].imag, maxiter, r2)
        if k > 0:
            tags[i] = TO_INFINITY
            iters[i] = k
    return tags, iters


def _np_escape_quadratic(lam, pts, maxiter, r_out):
    m = pts.shape[0]
    tags = np.zeros(m, dtype=np.uint8)
    iters = np.full(m, maxiter, dtype=np.uint32)
    x = pts.real.copy()
    y = pts.imag.copy()
    idx = np.arange(m)
    lr, li = lam.real, lam.imag
    r2 = r_out * r_out
    for k in range(1, maxiter + 1):
        if idx.size == 0:
            break
        xn = x * x - y * y + lr * x - li * y
        y = 2.0 * x * y + lr * y + li * x
        x = xn
        out = x * x + y * y > r2
        if out.any():
            hit = idx[out]
            tags[hit] = TO_INFINITY
            iters[hit] = k
            keep = ~out
            idx, x, y = idx[keep], x[keep], y[keep]
    return tags, iters


@njit
def _nb_escape_blaschke(a, b, pts, maxiter, r_in, r_out):
    m = pts.shape[0]
    tags = np.zeros(m, dtype=np.uint8)
    iters = np.full(m, maxiter, dtype=np.uint32)
    ri2 = r_in * r_in
    ro2 = r_out * r_out
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    sw2 = POLE_SWITCH * POLE_SWITCH
    for i in range(m):
        x = pts[i].real
        y = pts[i].imag
        for k in range(1, maxiter + 1):
            # real-arithmetic b z^2 (a z + 1) / (z + a); the guarded scalar handles the pole
            dr = x + ar
            di = y + ai
            dd = dr * dr + di * di
            if dd < sw2 or not math.isfinite(x) or not math.isfinite(y):
                z = _nb_f(a, b, complex(x, y))
                x = z.real
                y = z.imag
            else:
                zr = x * x - y * y
                zi = 2.0 * x * y
                ur = ar * x - ai * y + 1.0
                ui = ar * y + ai * x
                nr = zr * ur - zi * ui
                ni = zr * ui + zi * ur
                tr = br * nr - bi * ni
                ti = br * ni + bi * nr
                x = (tr * dr + ti * di) / dd
                y = (ti * dr - tr * di) / dd
            if math.isinf(x) or math.isinf(y) or math.isnan(x):
                tags[i] = TO_INFINITY
                iters[i] = k
                break
            s = x * x + y * y
            if s > ro2:
                tags[i] = TO_INFINITY
                iters[i] = k
                break
            if s < ri2:
                tags[i] = TO_ZERO
                iters[i] = k
                break
    return tags, iters


def _np_escape_blaschke(a, b, pts, maxiter, r_in, r_out):
    m = pts.shape[0]
    tags = np.zeros(m, dtype=np.uint8)
    iters = np.full(m, maxiter, dtype=np.uint32)
    z = pts.astype(np.complex128).copy()
    idx = np.arange(m)
    ri2, ro2 = r_in * r_in, r_out * r_out
    with np.errstate(all="ignore"):
        for k in range(1, maxiter + 1):
            if idx.size == 0:
                break
            z = eval_blaschke(a, b, z)
            s = z.real * z.real + z.imag * z.imag
            inf_mask = ~np.isfinite(s) | (s > ro2)
            zero_mask = ~inf_mask & (s < ri2)
            done = inf_mask | zero_mask
            if done.any():
                tags[idx[inf_mask]] = TO_INFINITY
                tags[idx[zero_mask]] = TO_ZERO
                iters[idx[done]] = k
                keep = ~done
                idx, z = idx[keep], z[keep]
    return tags, iters


def escape_quadratic(lam, pts, maxiter, r_out, backend=None):
    """Classify points under ``P``: tag ``TO_INFINITY`` on leaving ``|z| <= r_out``."""
    pts = np.ascontiguousarray(pts, dtype=np.complex128).ravel()
    if resolve(backend) == "numba":
        return _nb_escape_quadratic(complex(lam), pts, int(maxiter), float(r_out))
    return _np_escape_quadratic(complex(lam), pts, int(maxiter), float(r_out))


def escape_blaschke(a, b, pts, maxiter, r_in, r_out, backend=None):
    """Classify points under ``f`` against the two superattracting basins."""
    pts = np.ascontiguousarray(pts, dtype=np.complex128).ravel()
    if resolve(backend) == "numba":
        return _nb_escape_blaschke(
            complex(a), complex(b), pts, int(maxiter), float(r_in), float(r_out)
        )
    return _np_escape_blaschke(complex(a), complex(b), pts, int(maxiter), float(r_in), float(r_out))


# ---------------------------------------------------------------------------
# rotation numbers
# ---------------------------------------------------------------------------

def bump_weights(n):
    """Normalised ``exp(-1/(u(1-u)))`` weights on the midpoints ``u = (k+1/2)/n``."""
    u = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (u * (1.0 - u)))
    return w / w.sum()


@njit
def _nb_slice_rotation(a, ts, x0, weights):
    n = weights.shape[0]
    out = np.empty(ts.shape[0], dtype=np.float64)
    twopi = 2.0 * math.pi
    for i in range(ts.shape[0]):
        t = ts[i]
        x = x0 % 1.0
        s = 0.0
        for k in range(n):
            d = t + math.atan2(a * math.sin(twopi * x), 1.0 + a * math.cos(twopi * x)) / math.pi
            s += weights[k] * d
            x = (x + d) % 1.0
        out[i] = s
    return out


def _np_slice_rotation(a, ts, x0, weights):
    x = np.full(ts.shape[0], x0 % 1.0)
    s = np.zeros(ts.shape[0])
    twopi = 2.0 * math.pi
    for w in weights:
        d = ts + np.arctan2(a * np.sin(twopi * x), 1.0 + a * np.cos(twopi * x)) / math.pi
        s += w * d
        x = np.mod(x + d, 1.0)
    return s


def slice_rotation(a, ts, x0, n, backend=None):
    """Weighted Birkhoff average of lift displacements, one value per ``t`` in ``ts``.

    The lift is ``F(x) = x + t + arg(1 + a e^{2 pi i x}) / pi`` with the
    iterate kept in ``[0, 1)`` so the sin/cos arguments never lose bits.
    """
    ts = np.ascontiguousarray(np.atleast_1d(ts), dtype=np.float64)
    weights = bump_weights(int(n))
    if resolve(backend) == "numba":
        return _nb_slice_rotation(float(a), ts, float(x0), weights)
    return _np_slice_rotation(float(a), ts, float(x0), weights)


@njit
def _nb_angular_rotation(a, b, z0, weights):
    n = weights.shape[0]
    t = (cmath.phase(b) / (2.0 * math.pi)) % 1.0
    z = z0
    s = 0.0
    for k in range(n):
        g = z * (a * z + 1.0) / (z + a)
        s += weights[k] * (t + cmath.phase(g) / (2.0 * math.pi))
        z = _nb_f(a, b, z)
        if math.isinf(z.real) or math.isinf(z.imag):
            return math.nan
    return s


def _np_angular_rotation(a, b, z0, weights):
    t = (cmath.phase(b) / (2.0 * math.pi)) % 1.0
    z = complex(z0)
    s = 0.0
    for w in weights:
        g = z * (a * z + 1.0) / (z + a)
        s += w * (t + cmath.phase(g) / (2.0 * math.pi))
        z = _f_scalar(a, b, z)
        if cmath.isinf(z):
            return math.nan
    return s


def angular_rotation(a, b, z0, n, backend=None):
    """Average turning of ``f^k(z0)`` about the origin, in turns per step.

    Splits ``arg f(z) - arg z`` into ``arg b`` plus the principal argument of
    ``z(az+1)/(z+a)``, which is small on curves near the unit circle.
    """
    weights = bump_weights(int(n))
    if resolve(backend) == "numba":
        return float(_nb_angular_rotation(complex(a), complex(b), complex(z0), weights))
    return float(_np_angular_rotation(complex(a), complex(b), complex(z0), weights))
