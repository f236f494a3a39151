import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from modmult.errors import InvalidDiscriminant, NotQuadratic
from modmult.modfunc import eval_j
from modmult.balls import PrecisionCtx
from modmult.quadforms import (QuadSurd, class_number, discriminant_of_point, enumerate_T, form_to_point,
                               in_Fj, reduce_to_Fj)


def brute_T(D):
    """Reduced primitive (a, b, c) of discriminant D by scanning 0 < a <= sqrt(|D|/3), |b| <= a."""
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a, a + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            if (-a < b <= a < c) or (0 <= b <= a == c):
                out.append((a, b, c))
        a += 1
    return sorted(out)


def valid_discs(limit):
    return [D for D in range(-3, -limit - 1, -1) if D % 4 in (0, 1)]


def test_small_examples():
    assert [tuple(f) for f in enumerate_T(-3)] == [(1, 1, 1)]
    assert [tuple(f) for f in enumerate_T(-4)] == [(1, 0, 1)]
    forms = [tuple(f) for f in enumerate_T(-15)]
    assert len(forms) == 2 and (1, 1, 4) in forms
    assert [class_number(D) for D in (-3, -4, -15)] == [1, 1, 2]


@pytest.mark.parametrize("D", [0, 5, -1, -2, -5, -6])
def test_invalid_discriminants(D):
    with pytest.raises(InvalidDiscriminant):
        enumerate_T(D)


def test_enumeration_matches_brute_force_to_1000():
    for D in valid_discs(1000):
        forms = [tuple(f) for f in enumerate_T(D)]
        assert forms == brute_T(D), D
        assert sum(1 for f in forms if f[0] == 1) == 1


def test_discriminant_of_point():
    zeta6 = QuadSurd(Fraction(1, 2), Fraction(1, 2), -3)
    def disc(tau):
        D, form = discriminant_of_point(tau)
        return D, tuple(form)
    assert disc(zeta6) == (-3, (1, -1, 1))
    assert disc(QuadSurd(0, 1, -1)) == (-4, (1, 0, 1))
    assert disc(QuadSurd(Fraction(1, 4), Fraction(1, 4), -15)) == (-15, (2, -1, 2))
    with pytest.raises(NotQuadratic):
        discriminant_of_point(QuadSurd(3))


def test_reduce_examples():
    tau, g = reduce_to_Fj(QuadSurd(5, 1, -1))
    assert tau == QuadSurd(0, 1, -1) and g == ((1, -5), (0, 1))
    src = QuadSurd(Fraction(1, 10), Fraction(1, 5), -1)
    tau, g = reduce_to_Fj(src)
    assert in_Fj(tau) and src.act(g) == tau
    # Gauss reduction oracle: invert then translate; -1/(0.1+0.2i) = -2+4i, +2 gives 4i
    assert tau == QuadSurd(0, 4, -1)
    interior = QuadSurd(Fraction(1, 5), 2, -1)
    assert reduce_to_Fj(interior) == (interior, ((1, 0), (0, 1)))


def test_numeric_reduce_gauss_oracle():
    with mpmath.workprec(200):
        z, g = reduce_to_Fj(mpmath.mpc("0.1", "0.2"))
        assert abs(z - 4j) < mpmath.mpf(10) ** -40
        (a, b), (c, d) = g
        w = mpmath.mpc("0.1", "0.2")
        assert abs((a * w + b) / (c * w + d) - z) < mpmath.mpf(10) ** -40


def test_T_points_are_reduced_with_top_a1():
    for D in valid_discs(400):
        pts = [form_to_point(f) for f in enumerate_T(D)]
        for p in pts:
            assert in_Fj(p)
            assert reduce_to_Fj(p) == (p, ((1, 0), (0, 1)))
        top = max(pts, key=lambda p: p.imag_squared)
        assert discriminant_of_point(top)[1].a == 1
        assert sum(1 for p in pts if p.imag_squared == top.imag_squared) == 1


upper = st.builds(QuadSurd, st.fractions(-20, 20, max_denominator=30),
                  st.fractions(Fraction(1, 30), 5, max_denominator=30), st.sampled_from([-1, -2, -3, -7, -15]))


@given(upper)
def test_reduction_exact_idempotent(tau):
    red, g = reduce_to_Fj(tau)
    assert in_Fj(red)
    (a, b), (c, d) = g
    assert a * d - b * c == 1
    assert tau.act(g) == red
    assert reduce_to_Fj(red) == (red, ((1, 0), (0, 1)))


@given(upper)
def test_reduction_preserves_j(tau):
    ctx = PrecisionCtx(96)
    red, _ = reduce_to_Fj(tau)
    with mpmath.workprec(128):
        v1 = eval_j(tau.to_mpc(128), ctx)
        v2 = eval_j(red.to_mpc(128), ctx)
        assert v1.overlaps(v2) or abs(v1.mid - v2.mid) <= 1e-15 * max(1, abs(v2.mid))
