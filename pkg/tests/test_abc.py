import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from goormaghtigh.abc_triples import (
    FactorizationError,
    abc_triple,
    exponent_margin,
    factorize,
    rad_upper_bound,
    radical,
)


def trial_radical(n):
    r, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            r *= d
            while n % d == 0:
                n //= d
        d += 1
    return r * n if n > 1 else r


def test_triple_31():
    t = abc_triple(2, 5, 5, 3)
    assert (t.g, t.a, t.b, t.c, t.residual) == (1, 128, -3, 125, 0)
    assert t.rad == 30 == trial_radical(128 * 3 * 125)
    assert t.quality == pytest.approx(math.log(125) / math.log(30), abs=1e-9)
    assert t.quality == pytest.approx(1.4196, abs=1e-4)


def test_triple_8191():
    t = abc_triple(2, 90, 13, 3)
    assert (t.g, t.a, t.b, t.c, t.residual) == (8, 91136, -11, 91125, 0)
    assert 91136 == 2**10 * 89 and 91125 == 3**6 * 5**3
    assert t.rad == 29370 == trial_radical(91136 * 11 * 91125)
    assert t.quality == pytest.approx(1.1101, abs=1e-4)


def test_non_solution_flagged():
    t = abc_triple(2, 3, 5, 3)
    assert t.residual == 64 - 1 - 27 == 36
    assert not t.is_solution
    assert t.rad is None and t.quality is None


def test_triple_invariants_for_known_solutions():
    for x, y, m, n in [(2, 5, 5, 3), (2, 90, 13, 3)]:
        t = abc_triple(x, y, m, n)
        for numer in (x**m * (y - 1), x - y, y**n * (x - 1)):
            assert numer % t.g == 0
        assert t.a + t.b == t.c
        assert math.gcd(t.a, abs(t.b)) == math.gcd(t.a, t.c) == math.gcd(abs(t.b), t.c) == 1
        assert t.rad <= rad_upper_bound(x, y, t.g)
        assert abs(t.a * t.b * t.c) % t.rad == 0


@pytest.mark.parametrize("bad", [(5, 2, 5, 3), (1, 5, 5, 3), (2, 5, 1, 3)])
def test_triple_rejects(bad):
    with pytest.raises(ValueError):
        abc_triple(*bad)


@pytest.mark.parametrize("n,expected", [(1, 1), (48000, 30), (8191, 8191), (2**10, 2), (10**6 + 3, 10**6 + 3)])
def test_radical_examples(n, expected):
    assert radical(n) == expected


@settings(max_examples=200)
@given(st.integers(1, 10**12))
def test_radical_against_trial_division(n):
    r = radical(n)
    assert r == trial_radical(n)
    f = factorize(n)
    assert math.prod(p**e for p, e in f.items()) == n
    assert n % r == 0
    assert all(r % p == 0 for p in f)
    assert all(r % (p * p) for p in f)


def test_rho_beyond_trial_limit():
    p, q = 1000000007, 998244353
    assert factorize(p * q * q * 12) == {2: 2, 3: 1, q: 2, p: 1}
    assert radical(p * q) == p * q
    big = (2**61 - 1) * (2**31 - 1)
    assert factorize(big) == {2**31 - 1: 1, 2**61 - 1: 1}


def test_rho_budget_exhaustion():
    p, q = 2**61 - 1, 2305843009213693967  # both prime, ~2^61
    with pytest.raises(FactorizationError):
        radical(p * q, rho_budget=10)


def test_exponent_margin_examples():
    assert exponent_margin(5, 6) == Fraction(-1, 2)
    assert exponent_margin(5, 7) == Fraction(-5, 4)
    assert exponent_margin(6, 7) == Fraction(-19, 12)


@pytest.mark.parametrize("m,n", [(4, 6), (5, 5), (6, 5)])
def test_exponent_margin_rejects(m, n):
    with pytest.raises(ValueError):
        exponent_margin(m, n)


def test_rad_upper_bound_examples():
    assert rad_upper_bound(2, 5, 1) == 120
    assert rad_upper_bound(2, 90, 8) == 176220
    assert rad_upper_bound(2, 3, 1) == 12


def test_record_fields():
    rec = abc_triple(2, 5, 5, 3).record()
    assert set(rec) == {"type", "x", "y", "m", "n", "g", "a", "b", "c", "residual", "rad", "quality"}
    assert rec["b"] == "-3" and rec["rad"] == "30"
