from fractions import Fraction
from pathlib import Path

import mpmath
import pytest
from hypothesis import given, strategies as st

from modmult.balls import PrecisionCtx
from modmult.errors import NotApplicable
from modmult.modfunc import (ModularFunction, divisor_condition_check, eval_j, inverse_j, zeros_poles_in_Fj)
from modmult.quadforms import QuadSurd, in_Fj

from oracles import j_direct

DATA = Path(__file__).parent / "data"
CTX = PrecisionCtx(128)
ZETA6 = QuadSurd(Fraction(1, 2), Fraction(1, 2), -3)


def test_eval_j_special_values():
    with mpmath.workprec(160):
        assert eval_j(ZETA6, CTX).contains(0)
        v = eval_j(QuadSurd(0, 1, -1), CTX)
        assert v.contains(1728)
        hi = eval_j(QuadSurd(0, 1, -1), PrecisionCtx(256))
        assert mpmath.nint(v.mid.real) == mpmath.nint(hi.mid.real) == 1728


def test_eval_j_matches_product_route():
    with mpmath.workprec(200):
        for tau in (mpmath.mpc("0.1", "1.2"), mpmath.mpc("-0.4", "0.95"), mpmath.mpc("0.3", "2.5")):
            v = eval_j(tau, PrecisionCtx(160))
            assert abs(v.mid - j_direct(tau)) <= v.rad
            assert v.rad <= PrecisionCtx(160).tol * max(1, abs(v.mid))


def test_eval_j_periodic():
    with mpmath.workprec(160):
        tau = mpmath.mpc("0.123", "0.9")
        a, b = eval_j(tau, CTX), eval_j(tau + 1, CTX)
        assert abs(a.mid - b.mid) <= a.rad + b.rad + 1e-30 * abs(a.mid)


def test_inverse_j_examples():
    with mpmath.workprec(160):
        assert abs(inverse_j(0, CTX) - ZETA6.to_mpc()) < 1e-30
        assert abs(inverse_j(1728, CTX) - 1j) < 1e-30
        tau = inverse_j(10 ** 6, CTX)
        assert in_Fj(tau, 1e-30)
        assert abs(eval_j(tau, CTX).mid - 10 ** 6) <= CTX.tol * 10 ** 6 * 4


def test_divisor_of_j_and_reciprocal():
    d = zeros_poles_in_Fj(ModularFunction.j(), CTX)
    assert [(p.w, p.multiplicity) for p in d] == [(ZETA6, 1)]
    d = zeros_poles_in_Fj(ModularFunction([1], [0, 1]), CTX)
    assert [(p.w, p.multiplicity) for p in d] == [(ZETA6, -1)]


def two_zeros():
    return ModularFunction.from_text((DATA / "two_zeros.mf").read_text())


def test_two_zeros_at_equal_height():
    d = zeros_poles_in_Fj(two_zeros(), CTX)
    assert [(p.w, p.multiplicity) for p in d] == [
        (QuadSurd(Fraction(-1, 4), 2, -1), 1), (QuadSurd(Fraction(1, 4), 2, -1), 1)]


def test_divisor_condition_examples():
    assert divisor_condition_check(ModularFunction.j(), CTX).verdict == "HOLDS"
    assert divisor_condition_check(ModularFunction([1], [0, 1]), CTX).verdict == "HOLDS"
    res = divisor_condition_check(two_zeros(), CTX)
    assert res.verdict == "FAILS"
    assert res.witness["s"] == Fraction(1, 2)


@pytest.mark.parametrize("f", [ModularFunction.j(), ModularFunction([1], [0, 1]), None])
def test_divisor_verdict_stable_under_doubling(f):
    f = f or two_zeros()
    assert divisor_condition_check(f, PrecisionCtx(128)).verdict == \
        divisor_condition_check(f, PrecisionCtx(256)).verdict


def test_constant_function_not_applicable():
    with pytest.raises(NotApplicable):
        divisor_condition_check(ModularFunction([5]), CTX)


def test_function_text_roundtrip():
    f = ModularFunction([Fraction(1, 3), "2+1/2i", 1], [7, 1])
    assert ModularFunction.from_text(f.to_text()) == f


# -- properties --------------------------------------------------------------

sl2 = st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)).filter(lambda t: t[0] != 0)


@given(sl2, st.floats(-0.5, 0.5), st.floats(0.9, 2.5))
def test_sl2_invariance(abc, x, y):
    a, b, c = abc
    # complete (a, b; c, d) to determinant one when possible
    if (1 + b * c) % a:
        return
    d = (1 + b * c) // a
    with mpmath.workprec(160):
        tau = mpmath.mpc(x, y)
        if abs(tau) < 1:
            return
        g = (a * tau + b) / (c * tau + d)
        v1, v2 = eval_j(tau, CTX), eval_j(g, CTX)
        assert abs(v1.mid - v2.mid) <= v1.rad + v2.rad + 1e-25 * max(1, abs(v1.mid))


@given(st.floats(-0.49, 0.5), st.floats(0.0, 1.5))
def test_inverse_roundtrip(x, extra):
    with mpmath.workprec(160):
        tau = mpmath.mpc(x, max(mpmath.sqrt(1 - x * x) + 0.01, 0.87) + extra)
        back = inverse_j(eval_j(tau, CTX).mid, CTX)
        assert abs(back - tau) < 1e-15


@given(st.complex_numbers(max_magnitude=1e7, allow_nan=False, allow_infinity=False))
def test_eval_after_inverse(x):
    with mpmath.workprec(160):
        v = eval_j(inverse_j(x, CTX), CTX)
        assert abs(v.mid - x) <= 1e-12 * max(1, abs(x))


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=4),
       st.lists(st.integers(-50, 50), min_size=1, max_size=3))
def test_total_multiplicity(num, den):
    if num[-1] == 0 or den[-1] == 0:
        return
    f = ModularFunction(num, den)
    if f.is_constant:
        return
    d = zeros_poles_in_Fj(f, CTX)
    assert d.total_multiplicity() == f.degrees[0] - f.degrees[1]
