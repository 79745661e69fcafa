"""Circle maps on the symmetric slice (real ``a`` in (0, 1/3), ``|b| = 1``).

For real ``a`` the identity ``|az + 1| = |z + a|`` on ``|z| = 1`` makes the
unit circle invariant, and writing ``f(z) = b z (1 + az)/(1 + a conj(z))``
gives the lift

    F(x) = x + t + arg(1 + a e^{2 pi i x}) / pi,     b = e^{2 pi i t},

with ``F'(x) >= (1 - 3a)/(1 - a) > 0``: an analytic diffeomorphism.  The
free critical points are real and negative, one inside and one outside
the circle.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import BlaschkeCubic, eval_f

SCAN_STEP = 1e-3
SCAN_ITERATES = 2000


class NotADiffeomorphismError(ValueError):
    def __init__(self, x, slope):
        self.x = x
        self.slope = slope
        super().__init__(f"lift is not increasing near x = {x:.6g} (F' = {slope:.3g})")


class NoBracketError(ValueError):
    pass


class SliceError(ValueError):
    pass


@dataclass(frozen=True)
class RotationEstimate:
    value: float
    n: int

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class CircleLift:
    """Lift of ``f_{a,b}`` restricted to the unit circle.

    ``t = arg(b) / 2 pi`` is normalised to ``[0, 1)``.
    """

    a: float
    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t) % 1.0)
        object.__setattr__(self, "a", float(self.a))
        self.check_monotone()

    @classmethod
    def from_map(cls, f, tol=1e-12):
        if abs(f.a.imag) > tol:
            raise SliceError(f"a must be real on the slice, got {f.a}")
        if abs(abs(f.b) - 1.0) > tol:
            raise SliceError(f"|b| must be 1 on the slice, got {abs(f.b)!r}")
        return cls(f.a.real, cmath.phase(f.b) / (2 * math.pi))

    @property
    def b(self):
        return cmath.exp(2j * math.pi * self.t)

    def to_map(self):
        return BlaschkeCubic(complex(self.a, 0.0), self.b)

    def displacement(self, x):
        """``F(x) - x``; periodic in ``x``."""
        x = np.asarray(x, dtype=float)
        s = 2 * math.pi * np.mod(x, 1.0)
        return self.t + np.arctan2(self.a * np.sin(s), 1.0 + self.a * np.cos(s)) / math.pi

    def __call__(self, x):
        return np.asarray(x, dtype=float) + self.displacement(x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        e = self.a * np.exp(2j * math.pi * x)
        return 1.0 + 2.0 * np.real(e / (1.0 + e))

    def check_monotone(self, samples=4096):
        xs = (np.arange(samples) + 0.5) / samples
        d = self.derivative(xs)
        i = int(np.argmin(d))
        if not d[i] > 0:
            raise NotADiffeomorphismError(float(xs[i]), float(d[i]))


def lift_eval(lift, x):
    """Evaluate a lift at ``x`` (scalar or array)."""
    return lift(x)


def circle_defect(f, samples=10_000):
    """``max | |f(e^{2 pi i x})| - 1 |`` over a uniform sample of the circle."""
    xs = np.arange(samples) / samples
    z = np.exp(2j * math.pi * xs)
    return float(np.max(np.abs(np.abs(eval_f(f, z)) - 1.0)))


def rotation_number(lift, x0=0.0, n=100_000, backend=None):
    """Rotation number as a smooth-weighted Birkhoff average of ``F(x) - x``.

    The bump weights ``exp(-1/(u(1-u)))`` make the average converge faster
    than any power of ``1/n`` for smooth maps conjugate to a Diophantine
    rotation; on mode-locked maps it converges to the rational as usual.
    """
    if n < 1000:
        raise ValueError("rotation_number needs n >= 1000")
    if isinstance(lift, CircleLift):
        rho = float(kernels.slice_rotation(lift.a, [lift.t], x0, n, backend=backend)[0])
        return RotationEstimate(rho, int(n))
    # generic lift object with a displacement(x) method: plain loop
    w = kernels.bump_weights(int(n))
    x = float(x0) % 1.0
    s = 0.0
    for wk in w:
        d = float(lift.displacement(x))
        s += wk * d
        x = (x + d) % 1.0
    return RotationEstimate(s, int(n))


def rotation_curve(a, ts, x0=0.0, n=100_000, backend=None):
    """Rotation numbers of the slice maps ``(a, e^{2 pi i t})`` for each ``t``."""
    CircleLift(a, 0.0)  # validates the diffeomorphism regime once
    return kernels.slice_rotation(a, np.asarray(ts, dtype=float), x0, n, backend=backend)


def _theta_value(theta):
    return float(theta)


@dataclass(frozen=True)
class TuneResult:
    a: float
    t: float
    rho: RotationEstimate
    target: float

    @property
    def b(self):
        return cmath.exp(2j * math.pi * self.t)

    @property
    def residual(self):
        return abs(self.rho.value - self.target)

    def to_map(self):
        return BlaschkeCubic(complex(self.a, 0.0), self.b)


def tune_b(a, theta, tol=1e-8, n=100_000, backend=None):
    """Unit ``b`` whose slice map has rotation number ``theta`` (see :func:`tune`)."""
    return tune(a, theta, tol=tol, n=n, backend=backend).b


def tune(a, theta, tol=1e-8, n=100_000, backend=None, max_bisect=200):
    """Unit ``b = e^{2 pi i t}`` whose slice map has rotation number ``theta``.

    Scans ``t`` on a ``1e-3`` grid (with short averages) for the first
    crossing of ``theta``, then bisects with ``n``-step averages down to
    double resolution.  ``rho(t)`` is non-decreasing, so the crossing is
    unique up to plateau edges.

    Raises :class:`NoBracketError` if no ``t`` reaches ``|rho - theta| < tol``.
    """
    if not 0 < a < 1 / 3:
        raise SliceError(f"slice parameter a must lie in (0, 1/3), got {a}")
    target = _theta_value(theta)
    if not 0 <= target < 1:
        raise NoBracketError(f"target {target} outside [0, 1)")
    ts = np.arange(0.0, 1.0, SCAN_STEP)
    rho = rotation_curve(a, ts, 0.0, SCAN_ITERATES, backend=backend)
    exact = np.flatnonzero(np.abs(rho - target) < tol)
    if exact.size and target == 0:
        t = float(ts[exact[0]])
        est = rotation_number(CircleLift(a, t), 0.0, n, backend=backend)
        if abs(est.value - target) < tol:
            return TuneResult(float(a), t, est, target)
    above = np.flatnonzero(rho >= target)
    if above.size == 0:
        # rho(t) -> 1 as t -> 1; the last grid cell closes the bracket
        lo, hi = float(ts[-1]), 1.0
    elif above[0] == 0:
        if abs(rho[0] - target) < tol:
            lo = hi = float(ts[0])
        else:
            raise NoBracketError(f"rho(0) = {rho[0]} already exceeds target {target}")
    else:
        lo, hi = float(ts[above[0] - 1]), float(ts[above[0]])
    # short scan averages can misplace the crossing by a cell; widen with full averages
    for _ in range(16):
        if lo > 0 and rotation_number(CircleLift(a, lo), 0.0, n, backend=backend).value > target:
            lo = max(0.0, lo - SCAN_STEP)
        elif hi < 1 and rotation_number(CircleLift(a, hi), 0.0, n, backend=backend).value < target:
            hi = min(1.0, hi + SCAN_STEP)
        else:
            break
    best_t, best_err, best_est = None, math.inf, None
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        est = rotation_number(CircleLift(a, mid), 0.0, n, backend=backend)
        err = abs(est.value - target)
        if err < best_err:
            best_t, best_err, best_est = mid, err, est
        if est.value < target:
            lo = mid
        else:
            hi = mid
    for t in (lo, hi):
        est = rotation_number(CircleLift(a, t), 0.0, n, backend=backend)
        err = abs(est.value - target)
        if err < best_err:
            best_t, best_err, best_est = t, err, est
    if best_t is None or best_err >= tol:
        raise NoBracketError(
            f"bisection ended with |rho - theta| = {best_err:.3g} >= tol {tol:.3g}"
        )
    return TuneResult(float(a), best_t, best_est, target)


def tuned_map(a, theta, tol=1e-8, n=100_000, backend=None):
    return tune(a, theta, tol=tol, n=n, backend=backend).to_map()
