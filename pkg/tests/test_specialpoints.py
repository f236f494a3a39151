import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from modmult.balls import PrecisionCtx
from modmult.errors import PoleAtSpecialPoint
from modmult.modfunc import ModularFunction, eval_j
from modmult.quadforms import class_number, enumerate_T, form_to_point
from modmult.specialpoints import (conjugate_orbit, f_special_points, hilbert_class_poly, isogeny_cosets,
                                   modular_relation, singular_moduli)

from oracles import j_direct

CTX = PrecisionCtx(128)
J = ModularFunction.j()


def valid_discs(limit):
    return [D for D in range(-3, -limit - 1, -1) if D % 4 in (0, 1)]


def test_singular_moduli_small():
    assert [m.value.contains(0) for m in singular_moduli(-3, CTX)] == [True]
    assert [m.value.contains(1728) for m in singular_moduli(-4, CTX)] == [True]


def test_singular_moduli_minus_15_against_direct_oracle():
    mods = singular_moduli(-15, PrecisionCtx(160))
    assert len(mods) == 2
    with mpmath.workprec(200):
        for m in mods:
            ref = j_direct(form_to_point(m.form).to_mpc())
            assert abs(m.value.mid - ref) < 1e-25 * abs(ref)
            # both reduced forms of -15 are their own mirror class, so the values are real
            assert abs(m.value.mid.imag) <= m.value.rad
        assert not mods[0].value.overlaps(mods[1].value)


def test_class_polynomial_small():
    assert hilbert_class_poly(-3, CTX) == [0, 1]
    assert hilbert_class_poly(-4, CTX) == [-1728, 1]
    p200 = hilbert_class_poly(-15, PrecisionCtx(200))
    assert len(p200) == 3 and p200[-1] == 1
    assert p200 == hilbert_class_poly(-15, PrecisionCtx(400))


def test_vieta_consistency():
    with mpmath.workprec(300):
        for D in (-15, -20, -23, -31, -39, -47, -56):
            mods = singular_moduli(D, PrecisionCtx(256))
            poly = hilbert_class_poly(D, PrecisionCtx(256))
            s = mpmath.fsum(m.value.mid for m in mods)
            prod = mpmath.fprod(m.value.mid for m in mods)
            h = len(mods)
            assert abs(s + poly[h - 1]) < 1e-20 * max(1, abs(s))
            assert abs(prod - (-1) ** h * poly[0]) < 1e-20 * max(1, abs(prod))


def test_f_special_examples():
    pts = f_special_points(J, -4, CTX)
    assert len(pts) == 1 and pts[0].value.contains(1728) and pts[0].disc == -4
    pts = f_special_points(ModularFunction([0, Fraction(1, 1728)]), -4, CTX)
    assert len(pts) == 1 and pts[0].value.contains(1) and pts[0].disc == -4
    with pytest.raises(PoleAtSpecialPoint):
        f_special_points(ModularFunction([1], [0, 1]), -3, CTX)


def test_f_special_of_j_are_singular_moduli():
    for D in valid_discs(60):
        vals = [p.value for p in f_special_points(J, D, CTX)]
        mods = [m.value for m in singular_moduli(D, CTX)]
        assert len(vals) == len(mods)
        assert all(any(v.overlaps(m) for m in mods) for v in vals)


def test_disc_is_minimum_over_preimages():
    # f = j^2 - 1728 j identifies nothing new; f = (j - 1728)^2 sends 0 and 3456 to the same value
    f = ModularFunction([0, -1728, 1])  # j(j - 1728): j = 0 and j = 1728 both map to 0
    pts = f_special_points(f, -4, CTX)
    assert len(pts) == 1 and pts[0].disc == -4
    assert {m.disc for m in pts[0].preimages} | {m.disc for m in pts[0].other_preimages} >= {-4}


def test_conjugate_orbit():
    sigma = f_special_points(J, -15, CTX)[0]
    orbit = conjugate_orbit(J, sigma, CTX)
    mods = singular_moduli(-15, CTX)
    assert len(orbit) == 2
    assert all(any(o.overlaps(m.value) for o in orbit) for m in mods)
    assert any(o.overlaps(sigma.value) for o in orbit)
    sigma = f_special_points(J, -4, CTX)[0]
    orbit = conjugate_orbit(J, sigma, CTX)
    assert len(orbit) == 1 and orbit[0].contains(1728)


def test_modular_relation_examples():
    with mpmath.workprec(160):
        x = eval_j(mpmath.mpc("0.2", "1.7"), CTX).mid
        assert modular_relation(x, x, 3, CTX)[0] == 1
        ji, j2i = eval_j(1j, CTX).mid, eval_j(2j, CTX).mid
        N, g = modular_relation(ji, j2i, 5, CTX)
        assert N == 2
        t163 = form_to_point(enumerate_T(-163)[0]).to_mpc()
        assert modular_relation(j2i, eval_j(t163, CTX).mid, 5, CTX) is None


def test_coset_counts():
    # number of cyclic N-isogenies: N * prod (1 + 1/p)
    def psi(N):
        out, n, p = N, N, 2
        while p * p <= n:
            if n % p == 0:
                out = out // p * (p + 1)
                while n % p == 0:
                    n //= p
            p += 1
        if n > 1:
            out = out // n * (n + 1)
        return out
    for N in range(1, 30):
        assert len(list(isogeny_cosets(N))) == psi(N)


@settings(max_examples=15)
@given(st.sampled_from(valid_discs(40)), st.integers(0, 10 ** 6), st.integers(2, 3))
def test_modular_relation_symmetric(D, seed, N):
    forms = enumerate_T(D)
    form = forms[seed % len(forms)]
    cosets = list(isogeny_cosets(N))
    (a, b), (_, d) = cosets[seed % len(cosets)]
    ctx = PrecisionCtx(160)
    with mpmath.workprec(200):
        tau = form_to_point(form).to_mpc()
        x1 = eval_j(tau, ctx).mid
        x2 = eval_j((a * tau + b) / d, ctx).mid
        r12 = modular_relation(x1, x2, N, ctx)
        r21 = modular_relation(x2, x1, N, ctx)
    assert r12 is not None and r21 is not None
    assert r12[0] == r21[0]


def test_class_number_degree_to_200():
    for D in valid_discs(200):
        poly = hilbert_class_poly(D, PrecisionCtx(200))
        assert len(poly) - 1 == class_number(D) and poly[-1] == 1
