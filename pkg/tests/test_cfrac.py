import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from mpmath import mp, mpf

from herman_lab.cfrac import (
    InsufficientDepthError,
    RotationNumber,
    TruncatedExpansionError,
    bounded_type_witness,
    brjuno_partial_sum,
    cf_expand,
    convergents,
    denominators,
    detect_period,
    evaluate,
    ostrowski_digits,
    ostrowski_shift,
    quadratic_irrational,
)

def test_golden_and_silver_expansions():
    with mp.workdps(40):
        assert cf_expand((mpmath.sqrt(5) - 1) / 2, 5) == [1] * 5
        assert cf_expand((mpmath.sqrt(5) - 1) / 2, 8) == [1] * 8
        assert cf_expand(mpmath.sqrt(2) - 1, 4) == [2] * 4


def test_convergent_examples():
    pq = lambda cs: [(c.p, c.q) for c in convergents(cs)]
    assert pq([1, 1, 1, 1, 1]) == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]
    assert pq([2, 2, 2]) == [(1, 2), (2, 5), (5, 12)]
    assert pq([7]) == [(1, 7)]


def test_rational_input_truncates():
    with pytest.raises(TruncatedExpansionError) as exc:
        with mp.workdps(40):
            cf_expand(mpf(3) / 7, 10)
    assert exc.value.achieved == 2
    assert exc.value.coefficients == [2, 3]


def test_brjuno_examples():
    assert brjuno_partial_sum([1], 0) == 0.0
    assert brjuno_partial_sum([1, 1], 1) == pytest.approx(math.log(2))
    with pytest.raises(InsufficientDepthError):
        brjuno_partial_sum([1, 1], 5)
    sums = [brjuno_partial_sum([1] * 60, n) for n in range(1, 59)]
    assert np.all(np.diff(sums) >= 0)
    # increments log(q_{n+1})/q_n vanish, so the partial sums level off
    assert sums[-1] - sums[30] < 1e-4
    assert sums[-1] < 4.0


def test_bounded_type_and_period_examples():
    assert bounded_type_witness([1, 1, 1, 1]) == 1
    assert bounded_type_witness([2, 2, 2]) == 2
    assert bounded_type_witness([1, 3, 1, 5]) == 5
    assert detect_period([1] * 6) == (0, 1)
    assert detect_period([3, 2, 2, 2, 2, 2]) == (1, 1)
    assert detect_period([1, 2, 1, 2, 1, 2]) == (0, 2)
    assert detect_period([1, 2, 3, 4]) is None


def test_named_constants():
    g, s = RotationNumber.golden(), RotationNumber.silver()
    with mp.workdps(40):
        assert abs(g.value - (mpmath.sqrt(5) - 1) / 2) < mpf("1e-38")
        assert abs(s.value - (mpmath.sqrt(2) - 1)) < mpf("1e-38")
    assert g.period() == (0, 1) and s.period() == (0, 1)
    assert g.denominators()[:8] == [1, 1, 2, 3, 5, 8, 13, 21]
    assert g.extended(60).depth == 60


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=10**9))
def test_reconstruction_bound(seed):
    # fractional parts of cube roots: irrational unless seed is a cube
    assume(round(seed ** (1 / 3)) ** 3 != seed)
    with mp.workdps(150):
        x = mpmath.frac(mpmath.cbrt(seed))
        cs = cf_expand(x, 26, dps=150)
    conv = convergents(cs)
    # the expansion is only meaningful while q_n^2 stays inside the working precision
    assume(conv[-1].q < 10**70)
    with mp.workdps(300):
        for n in range(25):
            c, nxt = conv[n], conv[n + 1]
            assert abs(x * c.q - c.p) * nxt.q < 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=1, max_size=4), st.lists(st.integers(1, 9), min_size=1, max_size=3))
def test_quadratic_irrational_round_trip(pre, period):
    x = quadratic_irrational(pre, period)
    depth = len(pre) + 6 * len(period)
    with mp.workdps(60):
        cs = cf_expand(x, depth)
    block = list(pre)
    while len(block) < depth:
        block += period
    assert cs == block[:depth]
    found = detect_period(cs)
    assert found is not None
    assert found[0] + found[1] <= len(pre) + len(period)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=12))
def test_evaluate_matches_last_convergent(cs):
    with mp.workdps(50):
        c = convergents(cs)[-1]
        assert abs(evaluate(cs, dps=50) - mpf(c.p) / c.q) < mpf("1e-45")
        assert math.gcd(c.p, c.q) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_ostrowski_reconstructs(m):
    qs = denominators([1] * 40)
    digits = ostrowski_digits(m, qs)
    assert sum(b * q for b, q in zip(digits, qs)) == m


def test_ostrowski_shift_golden():
    qs = denominators([1] * 40)
    ms = np.arange(0, 2000)
    shifted = ostrowski_shift(ms, qs, 1)
    # q_i -> q_{i+1} on the denominators themselves
    for i in range(2, 12):
        assert ostrowski_shift([qs[i]], qs, 1)[0] == qs[i + 1]
    assert np.all(np.diff(shifted) > 0)
    with pytest.raises(InsufficientDepthError):
        ostrowski_shift([qs[-1]], qs, 1)
