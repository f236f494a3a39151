from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from modmult.errors import EmptyWindow, NotAProductForm
from modmult.qseries import (LaurentSeries, delta_series, eisenstein_E4, eisenstein_E6, eta_quotient,
                             hurwitz_H, hurwitz_series, hurwitz_table, j_series, peel_product_exponents,
                             product_expansion)


# -- independent oracles ---------------------------------------------------

def brute_product(exps, order):
    """Dense coefficients of prod (1 - q^n)^e_n through q^order, by repeated multiplication."""
    c = [0] * (order + 1)
    c[0] = 1
    for n, e in exps.items():
        for _ in range(abs(e)):
            if e > 0:
                for k in range(order, n - 1, -1):
                    c[k] -= c[k - n]
            else:
                # divide by (1 - q^n): running sum with step n
                for k in range(n, order + 1):
                    c[k] += c[k - n]
    return c


def brute_hurwitz(n):
    """Weighted count over all (a, b, c), b^2 - 4ac = -n, reduced, primitive or not."""
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if a == b == c:
                total += Fraction(1, 3)
            elif b == 0 and a == c:
                total += Fraction(1, 2)
            else:
                total += 1
        a += 1
    return total


def series_coeffs(s, lo, hi):
    return [s.coefficient(n) for n in range(lo, hi + 1)]


# -- examples ----------------------------------------------------------------

def test_geometric_series_inverse():
    geo = LaurentSeries([1] * 11, order=10)
    one_minus_q = LaurentSeries([1, -1], order=10)
    assert one_minus_q * geo == LaurentSeries([1], order=10)


def test_exp_log_roundtrip():
    s = LaurentSeries([1, 1], order=20)
    assert s.log().exp() == s


def test_j_delta_equals_e4_cubed():
    order = 30
    j = j_series(order)
    lhs = (j * delta_series(order + 1)).truncate(order)
    rhs = (eisenstein_E4(order) ** 3).truncate(order)
    assert lhs.agrees_with(rhs, order)


def test_j_leading_coefficients_two_routes():
    order = 20
    j = j_series(order)
    other = eisenstein_E6(order + 1) ** 2 / delta_series(order + 2) + 1728
    assert j.coefficient(-1) == 1 and j.coefficient(0) == 744 and j.coefficient(1) == 196884
    assert series_coeffs(j, -1, order) == series_coeffs(other, -1, order)
    assert all(c.denominator == 1 for c in series_coeffs(j, -1, order))


def test_eta_empty_spec_is_one():
    assert eta_quotient([], 5) == LaurentSeries([1], order=5)


def test_eta_delta_matches_brute_product():
    s = eta_quotient([(1, 24)], 5)
    assert s.offset == 1
    assert series_coeffs(s, 0, 5) == brute_product({n: 24 for n in range(1, 6)}, 5)
    assert series_coeffs(s, 0, 3) == [1, -24, 252, -1472]


def test_eta_hauptmodul_quotient():
    order = 12
    s = eta_quotient([(1, 8), (4, -8)], order)
    assert s.offset == -1
    exps = {}
    for n in range(1, order + 1):
        exps[n] = exps.get(n, 0) + 8
        if 4 * n <= order:
            exps[4 * n] = exps.get(4 * n, 0) - 8
    assert series_coeffs(s, 0, order) == brute_product(exps, order)
    assert s.coefficient(0) == 1 and s.coefficient(1) == -8


def test_eta_window_errors():
    with pytest.raises(EmptyWindow):
        eta_quotient([(1, 24)], -1)


def test_hurwitz_values():
    assert hurwitz_H(0) == Fraction(-1, 12)
    assert hurwitz_H(3) == Fraction(1, 3)
    assert hurwitz_H(4) == Fraction(1, 2)
    assert hurwitz_H(7) == 1
    assert [hurwitz_H(n) for n in (1, 2, 5, 6)] == [0, 0, 0, 0]


def test_hurwitz_brute_force_to_2000():
    for n in range(0, 2001):
        assert hurwitz_H(n) == brute_hurwitz(n), n


def test_hurwitz_series_truncation():
    s = hurwitz_series(8)
    expected = [Fraction(-1, 12), 0, 0, Fraction(1, 3), Fraction(1, 2), 0, 0, 1, 1]
    assert series_coeffs(s, 0, 8) == expected


def test_hurwitz_table_text():
    assert hurwitz_table(7).to_text().splitlines()[-1] == "7 1"


def test_peel_delta():
    assert peel_product_exponents(eta_quotient([(1, 24)], 15)) == {n: 24 for n in range(1, 16)}


def test_peel_constant():
    assert peel_product_exponents(LaurentSeries([1], order=10)) == {}


def test_peel_rejects_non_product():
    with pytest.raises(NotAProductForm):
        peel_product_exponents(LaurentSeries([1, Fraction(1, 2)], order=3))


def test_series_text_roundtrip():
    s = j_series(10)
    assert LaurentSeries.from_text(s.to_text()) == s


# -- properties ---------------------------------------------------------------

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
series = st.builds(lambda cs, lo: LaurentSeries(cs, lo=lo, order=lo + 8),
                   st.lists(small, min_size=9, max_size=9), st.integers(-2, 2))


@given(series, series, series)
def test_ring_laws(a, b, c):
    assert ((a * b) * c).agrees_with(a * (b * c))
    assert (a * (b + c)).agrees_with(a * b + a * c)


@given(st.dictionaries(st.integers(1, 30), st.integers(-4, 4), max_size=8))
def test_peel_inverts_product_expansion(exps):
    exps = {n: e for n, e in exps.items() if e}
    assert peel_product_exponents(product_expansion(exps, 30)) == exps


@given(st.dictionaries(st.integers(1, 12), st.integers(-3, 3), max_size=5))
def test_product_expansion_matches_brute(exps):
    exps = {n: e for n, e in exps.items() if e}
    assert series_coeffs(product_expansion(exps, 12), 0, 12) == brute_product(exps, 12)
