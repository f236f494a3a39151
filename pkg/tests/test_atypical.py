import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from modmult.atypical import (Bounds, atypicality, classify_point, is_j_special, modular_torsion_search,
                              replay_modular_torsion, replay_root_of_unity, root_of_unity_order,
                              root_of_unity_scan)
from modmult.balls import PrecisionCtx
from modmult.errors import DomainError, PreconditionViolated
from modmult.modfunc import ModularFunction, eval_j

J = ModularFunction.j()
J_OVER_1728 = ModularFunction([0, Fraction(1, 1728)])
# rational singular moduli with their discriminants
RATIONAL_MODULI = {-3: 0, -4: 1728, -7: -3375, -8: 8000, -11: -32768, -12: 54000, -16: 287496,
                   -19: -884736, -27: -12288000, -28: 16581375}


def test_atypicality_examples():
    for n in range(1, 6):
        assert atypicality(0, n, 2 * n - (n + 1), 2 * n)
    assert not atypicality(0, 1, 1, 2)
    assert atypicality(1, 2, 2, 4)
    with pytest.raises(DomainError):
        atypicality(0, 3, 1, 2)


@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
def test_atypicality_is_the_inequality(a, v, t, x):
    if v > x or t > x:
        return
    assert atypicality(a, v, t, x) == (a > v + t - x)


def test_membership_tests():
    D, form = is_j_special(1728, 10)
    assert (D, tuple(form)) == (-4, (1, 0, 1))
    assert is_j_special(1729, 100) is None
    assert is_j_special(8000, 7) is None and is_j_special(8000, 8)[0] == -8
    assert root_of_unity_order(-1, 10) == 2
    with mpmath.workprec(200):
        zeta7 = mpmath.expjpi(mpmath.mpf(2) / 7)
    assert root_of_unity_order(zeta7, 10) == 7
    assert root_of_unity_order(zeta7, 6) is None
    assert root_of_unity_order(2, 10) is None
    assert root_of_unity_order(mpmath.expjpi(mpmath.sqrt(2)), 100) is None


def test_classify_examples():
    reps = classify_point(J_OVER_1728, {"x": [1728], "t": [1]}, 1)
    assert len(reps) == 1 and reps[0].verdict and reps[0].template.name == "{x} x {zeta}"
    assert reps[0].template.modular_conditions[0]["disc"] == -4
    x = eval_j(2j).mid
    assert classify_point(J, {"x": [x], "t": [x]}, 1) == []
    reps = classify_point(J, [5, 5, 5, 5], 2)
    assert [r.template.name for r in reps] == ["(t1, t1, t2, t2)"]
    assert reps[0].dims == (1, 2, 2, 4)


def test_classify_rejects_points_off_the_graph():
    with pytest.raises(PreconditionViolated):
        classify_point(J, [5, 6], 1)
    with pytest.raises(DomainError):
        classify_point(J, [5, 5], 3)


def test_classify_records_bounds():
    b = Bounds(max_disc=3, max_order=4)
    assert classify_point(J_OVER_1728, [1728, 1], 1, b) == []
    reps = classify_point(J_OVER_1728, [1728, 1], 1, Bounds(max_disc=4))
    assert reps[0].bounds.max_disc == 4
    typical = classify_point(J, [1728, 1728], 1, include_typical=True)
    assert [(r.template.name, r.verdict) for r in typical] == [("{x} x G", False)]


def test_root_of_unity_scans():
    assert root_of_unity_scan(J, 100, 100) == []
    hits = root_of_unity_scan(J_OVER_1728, 4, 100)
    assert [(h.disc, h.order, h.certificate.verdict) for h in hits] == [(-4, 1, "VERIFIED")]
    assert abs(hits[0].value.mid - 1) < 1e-30
    hits = root_of_unity_scan(ModularFunction([-1, 1]), 3, 10)
    assert [(h.disc, h.order) for h in hits] == [(-3, 2)]
    assert abs(hits[0].value.mid + 1) < 1e-30
    for h in hits:
        assert replay_root_of_unity(h, 256) == h.certificate.verdict


def test_modular_torsion_scans():
    assert modular_torsion_search(J, 3, 6) == []
    assert modular_torsion_search(J_OVER_1728, 3, 6) == []


def test_planted_modular_torsion_pair():
    with mpmath.workprec(300):
        tau0 = mpmath.mpc("0.1", "1.3")
        x1 = eval_j(tau0, PrecisionCtx(256)).mid
        x2 = eval_j(2 * tau0, PrecisionCtx(256)).mid
        planted = ModularFunction.from_complex([x1 * x2 + 1, -(x1 + x2), 1], digits=70)
    found = modular_torsion_search(planted, 2, 1)
    assert len(found) == 1
    t = found[0]
    assert t.N == 2 and t.zeta1 == t.zeta2 == (0, 1)
    assert min(abs(t.x1 - x1), abs(t.x1 - x2)) < 1e-20 * abs(x2)
    assert replay_modular_torsion(planted, t, 256)


@settings(max_examples=12)
@given(st.sampled_from(sorted(RATIONAL_MODULI)), st.integers(-3, 3), st.integers(1, 4), st.booleans())
def test_classify_agrees_with_scan(D, shift, scale, plant):
    jd = RATIONAL_MODULI[D]
    # planted: f(j_D) = +-1; otherwise a generic shift
    c0 = -jd + (scale if plant else shift * 7 + 3)
    f = ModularFunction([Fraction(c0, scale), Fraction(1, scale)])
    value = Fraction(jd + c0, scale)
    bound = abs(D)
    scanned = {h.disc for h in root_of_unity_scan(f, bound, 12)}
    reps = classify_point(f, [jd, value], 1, Bounds(max_disc=bound, max_order=12))
    flagged = D in scanned
    assert bool(reps) == flagged
    assert flagged == (value in (1, -1))
