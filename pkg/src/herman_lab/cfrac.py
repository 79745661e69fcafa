"""Continued fractions of rotation numbers.

Coefficients are extracted with mpmath at ``WORK_DPS`` digits or more,
because the Gauss map ``x -> 1/x - floor(1/x)`` roughly squares the
relative error every two steps.
"""

from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

WORK_DPS = 40
RATIONAL_CUTOFF = mpf("1e-25")


class TruncatedExpansionError(ValueError):
    """The input looks rational at working precision before the requested depth."""

    def __init__(self, achieved, coefficients):
        self.achieved = achieved
        self.coefficients = list(coefficients)
        super().__init__(
            f"expansion terminated after {achieved} coefficients "
            f"(remainder below {mpmath.nstr(RATIONAL_CUTOFF, 3)})"
        )


class InsufficientDepthError(ValueError):
    def __init__(self, required, available):
        self.required = required
        self.available = available
        super().__init__(f"need at least {required} coefficients, have {available}")


@dataclass(frozen=True)
class ConvergentPair:
    p: int
    q: int
    index: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("convergent denominator must be positive")

    @property
    def value(self):
        return mpf(self.p) / self.q


def _to_mpf(x):
    if isinstance(x, str):
        return mpf(x)
    return mpf(x)


def cf_expand(x, depth, dps=None):
    """First ``depth`` coefficients ``[a_1, ..., a_depth]`` of ``x`` in (0, 1).

    Raises :class:`TruncatedExpansionError` if a remainder drops below
    ``1e-25`` first, which means ``x`` is rational to working precision.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    with mp.workdps(max(dps or 0, WORK_DPS)):
        y = _to_mpf(x)
        if not 0 < y < 1:
            raise ValueError(f"x must lie in (0, 1), got {mpmath.nstr(y, 15)}")
        coeffs = []
        for _ in range(depth):
            if y < RATIONAL_CUTOFF:
                raise TruncatedExpansionError(len(coeffs), coeffs)
            inv = 1 / y
            a = int(mpmath.floor(inv))
            coeffs.append(a)
            y = inv - a
        return coeffs


def evaluate(coefficients, dps=None):
    """Value of the finite fraction ``[a_1, ..., a_N]``, evaluated from the tail."""
    if not coefficients:
        raise ValueError("empty coefficient list")
    with mp.workdps(max(dps or 0, WORK_DPS)):
        acc = mpf(0)
        for a in reversed(coefficients):
            acc = 1 / (a + acc)
        return +acc


def convergents(coefficients):
    """Convergents ``p_n/q_n`` for ``n = 1..N``.

    Seeds are ``p_0 = 0, q_0 = 1`` and ``p_{-1} = 1, q_{-1} = 0``, so that
    ``q_1 = a_1`` and ``p_1 = 1``.
    """
    if not coefficients:
        raise ValueError("empty coefficient list")
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    out = []
    for n, a in enumerate(coefficients, start=1):
        if a < 1:
            raise ValueError(f"coefficient a_{n} = {a} is not a positive integer")
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(ConvergentPair(p, q, n))
    return out


def denominators(coefficients):
    """``[q_0, q_1, ..., q_N]`` with ``q_0 = 1``."""
    return [1] + [c.q for c in convergents(coefficients)]


def brjuno_partial_sum(coefficients, upto):
    """``sum_{k=1}^{upto} log(q_{k+1}) / q_k``; needs ``upto + 1`` coefficients."""
    if upto < 0:
        raise ValueError("upto must be >= 0")
    if upto == 0:
        return 0.0
    if len(coefficients) < upto + 1:
        raise InsufficientDepthError(upto + 1, len(coefficients))
    qs = denominators(coefficients[: upto + 1])
    total = mpf(0)
    for k in range(1, upto + 1):
        total += mpmath.log(qs[k + 1]) / qs[k]
    return float(total)


def ostrowski_digits(m, qs):
    """Greedy digits ``b_i`` with ``m = sum b_i q_i`` (``qs = [q_0, q_1, ...]``)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m >= qs[-1] + qs[-2] if len(qs) > 1 else m >= qs[-1]:
        raise InsufficientDepthError(len(qs), len(qs))
    digits = [0] * len(qs)
    for i in range(len(qs) - 1, -1, -1):
        digits[i], m = divmod(m, qs[i])
    return digits


def ostrowski_shift(ms, qs, s):
    """Map each ``m = sum b_i q_i`` to ``sum b_i q_{i+s}``; vectorised over ``ms``.

    For a rotation number whose expansion has period ``s`` this shift
    carries the return times at one scale to those ``s`` convergents deeper.
    """
    import numpy as np

    ms = np.array(ms, dtype=np.int64, copy=True)
    out = np.zeros_like(ms)
    top = len(qs) - 1 - s
    if top < 1 or ms.size and int(ms.max()) >= qs[top] + qs[top - 1]:
        raise InsufficientDepthError(len(qs) + 1, len(qs))
    for i in range(top, -1, -1):
        b = ms // qs[i]
        ms -= b * qs[i]
        out += b * qs[i + s]
    return out


def bounded_type_witness(coefficients):
    """Largest coefficient seen; a bounded-type witness at this depth only."""
    return max(coefficients)


def detect_period(coefficients):
    """Smallest ``(preperiod, period)`` confirmed by two full repetitions, else ``None``.

    Candidates are ordered by ``preperiod + period`` and then by period.
    """
    a = list(coefficients)
    n = len(a)
    best = None
    for total in range(1, n + 1):
        for s in range(1, total + 1):
            pre = total - s
            if n - pre < 2 * s:
                continue
            if all(a[i] == a[i + s] for i in range(pre, n - s)):
                best = (pre, s)
                break
        if best is not None:
            return best
    return None


def quadratic_irrational(preperiod, period, dps=None):
    """Value of ``[preperiod..., period, period, ...]`` (period repeated forever)."""
    if not period:
        raise ValueError("period block must be nonempty")
    with mp.workdps(max(dps or 0, WORK_DPS) + 10):
        # fixed point y = [period..., y] by iteration; contracts at least like 1/phi^2 per coefficient
        y = mpf(1) / (period[0] + 1)
        for _ in range(max(40, 4 * mp.dps // len(period))):
            acc = y
            for a in reversed(period):
                acc = 1 / (a + acc)
            y = acc
        acc = y
        for a in reversed(preperiod):
            acc = 1 / (a + acc)
        result = +acc
    return result


@dataclass(frozen=True)
class RotationNumber:
    """An irrational in (0, 1) together with a truncated expansion.

    ``value`` is an ``mpmath.mpf`` carried at ``WORK_DPS`` digits or more.
    """

    value: mpf
    coefficients: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not 0 < self.value < 1:
            raise ValueError("rotation number must lie in (0, 1)")
        if any(a < 1 for a in self.coefficients):
            raise ValueError("coefficients must be positive integers")

    @property
    def depth(self):
        return len(self.coefficients)

    def __float__(self):
        return float(self.value)

    @classmethod
    def from_value(cls, x, depth=40, name=""):
        with mp.workdps(WORK_DPS):
            v = _to_mpf(x)
            try:
                coeffs = cf_expand(v, depth)
            except TruncatedExpansionError as exc:
                if exc.achieved == 0:
                    raise
                coeffs = exc.coefficients
        return cls(v, tuple(coeffs), name)

    @classmethod
    def from_period(cls, preperiod, period, depth=40, name=""):
        v = quadratic_irrational(list(preperiod), list(period))
        block = list(preperiod)
        while len(block) < depth:
            block.extend(period)
        return cls(v, tuple(block[:depth]), name)

    @classmethod
    def golden(cls, depth=40):
        return cls.from_period([], [1], depth, name="golden")

    @classmethod
    def silver(cls, depth=40):
        return cls.from_period([], [2], depth, name="silver")

    def convergents(self):
        return convergents(list(self.coefficients))

    def denominators(self):
        """``[q_0, q_1, ..., q_depth]``."""
        return denominators(list(self.coefficients))

    def q(self, n):
        qs = self.denominators()
        if n >= len(qs):
            raise InsufficientDepthError(n, self.depth)
        return qs[n]

    def period(self):
        return detect_period(self.coefficients)

    def extended(self, depth):
        """Same number with at least ``depth`` coefficients."""
        if depth <= self.depth:
            return self
        with mp.workdps(max(WORK_DPS, 2 * depth)):
            coeffs = cf_expand(self.value, depth)
        return RotationNumber(self.value, tuple(coeffs), self.name)
