"""Scaling factor between the two critical orbits and self-similarity of the Siegel orbit."""

from dataclasses import dataclass

import numpy as np
from mpmath import mp

from ..cfrac import detect_period, ostrowski_shift
from ..dynamics import orbit
from ..param_search import EXTENDED_DPS, EXTENDED_THRESHOLD, PrecisionExhaustedError


class PeriodUnconfirmedError(ValueError):
    """Self-similarity needs a period confirmed by the expansion itself."""


def _resolve_dps(q_max, dps):
    if dps == 0:
        return None
    if dps is None and q_max > EXTENDED_THRESHOLD:
        return EXTENDED_DPS
    return dps


def _returns(g, c, qs, dps):
    q_max = max(qs)
    pts = orbit(g, c, q_max, dps=dps)
    with mp.workdps(dps or 15):
        out = np.array([complex(pts[q] - pts[0]) for q in qs])
    return out


def closest_returns_P(P, ns, dps=None):
    """``P^{q_n}(w) - w`` for each ``n`` in ``ns``."""
    ns = list(ns)
    qs = P.theta.extended(max(ns) + 2).denominators()
    sel = [qs[n] for n in ns]
    dps = _resolve_dps(max(sel), dps)
    c = P.omega if dps is None else P.omega_mp(dps)
    return _returns(P, c, sel, dps)


def closest_returns_f(f, theta, ns, j=2, dps=None):
    from ..dynamics import critical_point_mp

    ns = list(ns)
    qs = theta.extended(max(ns) + 2).denominators()
    sel = [qs[n] for n in ns]
    dps = _resolve_dps(max(sel), dps)
    c = f.critical(j) if dps is None else critical_point_mp(f, j, dps)
    out = _returns(f, c, sel, dps)
    if not np.all(np.isfinite(out)):
        raise PrecisionExhaustedError(f"orbit of omega_{j} reached infinity")
    return out


def scaling_from_displacements(d_f, d_P):
    """Elementwise ``d_f / d_P``; refuses vanishing denominators."""
    d_f = np.asarray(d_f, dtype=np.complex128)
    d_P = np.asarray(d_P, dtype=np.complex128)
    if np.any(d_P == 0):
        raise PrecisionExhaustedError("polynomial closest return vanished")
    return d_f / d_P


def scaling_factor(P, f, ns, dps=None):
    """``L_n = (f^{q_n}(w2) - w2) / (P^{q_n}(w) - w)`` for each ``n``."""
    ns = list(ns)
    return scaling_from_displacements(
        closest_returns_f(f, P.theta, ns, dps=dps), closest_returns_P(P, ns, dps=dps)
    )


def scaling_from_orbits(f_points, f_center, p_points, p_center, qs):
    """Scaling estimates from precomputed orbits at the return times ``qs``."""
    f_points = np.asarray(f_points)
    p_points = np.asarray(p_points)
    qs = list(qs)
    return scaling_from_displacements(f_points[qs] - f_center, p_points[qs] - p_center)


def best_limit(seq):
    """Mean of the adjacent pair with the smallest gap before the gaps start growing.

    Cauchy sequences computed in floating point stop improving once
    rounding takes over; this picks the last trustworthy pair.
    """
    seq = np.asarray(seq, dtype=np.complex128)
    if seq.size == 1:
        return complex(seq[0])
    gaps = np.abs(np.diff(seq))
    i = 0
    while i + 1 < gaps.size and gaps[i + 1] < gaps[i]:
        i += 1
    return complex(0.5 * (seq[i] + seq[i + 1]))


def cauchy_gaps(seq):
    return np.abs(np.diff(np.asarray(seq, dtype=np.complex128)))


@dataclass(frozen=True)
class KappaResult:
    ns: tuple
    values: np.ndarray
    s: int
    anticonformal: bool

    @property
    def parity(self):
        return "anticonformal" if self.anticonformal else "conformal"

    @property
    def limit(self):
        return best_limit(self.values)

    def gaps(self):
        return cauchy_gaps(self.values)


def kappa_from_displacements(deltas, s):
    """``delta_{n+s} / sigma(delta_n)`` with ``sigma`` conjugation for odd ``s``."""
    d = np.asarray(deltas, dtype=np.complex128)
    base = d[:-s] if s else d
    if s % 2:
        base = np.conj(base)
    if np.any(base == 0):
        raise PrecisionExhaustedError("closest return vanished")
    return d[s:] / base


def self_similarity_kappa(P, s=None, ns=range(6, 13), dps=None):
    """Self-similarity ratios of the Siegel critical orbit over steps of ``s`` convergents.

    The expansion must show its period (see :func:`detect_period`); ``s``
    defaults to that period and otherwise has to be a multiple of it.
    """
    period = detect_period(P.theta.coefficients)
    if period is None:
        raise PeriodUnconfirmedError("no eventual period confirmed in the stored expansion")
    pre, per = period
    if s is None:
        s = per
    if s < 1 or s % per:
        raise PeriodUnconfirmedError(f"step {s} is not a multiple of the period {per}")
    ns = tuple(int(n) for n in ns)
    if min(ns) < pre:
        raise PeriodUnconfirmedError(f"n = {min(ns)} lies inside the preperiod {pre}")
    full = list(range(min(ns), max(ns) + s + 1))
    deltas = closest_returns_P(P, full, dps=dps)
    ks = kappa_from_displacements(deltas, s)
    vals = np.array([ks[n - full[0]] for n in ns])
    return KappaResult(ns, vals, s, bool(s % 2))


def self_similar_clouds(P, kappa, s=1, N=10**6):
    """Paired clouds ``(shifted, image)`` around ``w`` for the self-similarity check.

    ``image`` is ``kappa * sigma(z_m - w)`` over the orbit points ``z_m``,
    ``m < N``, and ``shifted`` is ``z_{m'} - w`` where ``m'`` shifts the
    Ostrowski digits of ``m`` by ``s`` places.  The self-similarity sends one
    to the other point by point, so both clouds have matching density at
    every scale (two independent orbit clouds do not).
    """
    depth = 2
    while P.theta.extended(depth).denominators()[-1] < 2 * N:
        depth += 1
    qs = P.theta.extended(depth + s + 1).denominators()
    m = np.arange(N, dtype=np.int64)
    m2 = ostrowski_shift(m, qs, s)
    z = orbit(P, P.omega, int(m2.max()))
    base = z[m] - P.omega
    if s % 2:
        base = np.conj(base)
    return z[m2] - P.omega, kappa * base
