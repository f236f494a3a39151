"""Singular moduli, Hilbert class polynomials and f-special points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import _poly
from .balls import Ball, PrecisionCtx
from .errors import NotQuadratic, PoleAtSpecialPoint, PrecisionExhausted
from .modfunc import I, RHO, ModularFunction, eval_j, inverse_j
from .quadforms import (QuadForm, QuadSurd, discriminant_of_point, enumerate_T, form_to_point,
                        in_Fj, recognize_quadratic, _check_disc)

__all__ = [
    "SingularModulus",
    "FSpecialPoint",
    "singular_moduli",
    "hilbert_class_poly",
    "f_special_points",
    "conjugate_orbit",
    "modular_relation",
    "isogeny_cosets",
]

_MAX_BITS = 16384


@dataclass(frozen=True)
class SingularModulus:
    disc: int
    form: QuadForm
    value: Ball

    @property
    def tau(self) -> QuadSurd:
        return form_to_point(self.form)


@dataclass
class FSpecialPoint:
    """A value R(x) at a singular modulus x, with its discriminant.

    ``disc`` is the least (most negative) discriminant among all quadratic
    points of the fundamental domain that f maps to this value.
    """

    value: Ball
    disc: int
    preimages: list = field(default_factory=list)
    other_preimages: list = field(default_factory=list)


def _self_mirror(form: QuadForm) -> bool:
    a, b, c = form
    return b == 0 or b == a or a == c


def _ctx_at(bits: int) -> PrecisionCtx:
    return PrecisionCtx(bits, tol=mpmath.mpf(2) ** (-(bits - 24)))


def _moduli_at(D, bits):
    ctx = _ctx_at(bits)
    out = []
    with mpmath.workprec(bits + 32):
        for form in enumerate_T(D):
            v = eval_j(form_to_point(form), ctx)
            if _self_mirror(form):
                v = Ball(mpmath.mpc(v.mid.real, 0), v.rad + abs(v.mid.imag))
            out.append(SingularModulus(D, form, v))
    return out


def _needed_bits(D) -> int:
    # log2 of the largest singular modulus, plus headroom
    return int(math.pi * math.sqrt(-D) / math.log(2)) + 64


def singular_moduli(D, ctx: PrecisionCtx | None = None) -> list[SingularModulus]:
    """j at each reduced form of discriminant D, as pairwise disjoint balls."""
    D = _check_disc(D)
    ctx = ctx or PrecisionCtx()
    bits = max(ctx.bits, 64)
    while bits <= _MAX_BITS:
        sms = _moduli_at(D, bits)
        if all(not a.value.overlaps(b.value) for k, a in enumerate(sms) for b in sms[k + 1:]):
            return sms
        bits *= 2
    raise PrecisionExhausted(f"could not separate the singular moduli of discriminant {D}")


def _ball_poly_mul(p, q):
    out = [Ball(0) for _ in range(len(p) + len(q) - 1)]
    for i, x in enumerate(p):
        for k, y in enumerate(q):
            out[i + k] = out[i + k] + x * y
    return out


def hilbert_class_poly(D, ctx: PrecisionCtx | None = None) -> list[int]:
    """Integer coefficients, ascending, of the product of (X - j) over T_D."""
    D = _check_disc(D)
    ctx = ctx or PrecisionCtx()
    h = len(enumerate_T(D))
    bits = max(ctx.bits, h * _needed_bits(D) + 64)
    while bits <= _MAX_BITS * 4:
        with mpmath.workprec(bits + 32):
            poly = [Ball(1)]
            for sm in _moduli_at(D, bits):
                poly = _ball_poly_mul(poly, [-sm.value, Ball(1)])
            coeffs = []
            ok = True
            for c in poly:
                n = int(mpmath.nint(c.mid.real))
                if abs(c.mid.real - n) + c.rad >= 0.5 or abs(c.mid.imag) + c.rad >= 0.5:
                    ok = False
                    break
                coeffs.append(n)
        if ok:
            return coeffs
        bits *= 2
    raise PrecisionExhausted(f"could not round the class polynomial of discriminant {D}")


# ---------------------------------------------------------------------------
# f-special points


def _ball_eval(p, x: Ball) -> Ball:
    acc = Ball(0)
    for c in reversed(p):
        acc = acc * x + c.to_mpc()
    return acc


def _is_rational_poly(p) -> bool:
    return all(c.im == 0 for c in p)


def _pole_indices(f: ModularFunction, D, sms, bits):
    if len(f.den) <= 1:
        return set()
    if _is_rational_poly(f.den):
        H = [_poly.QQi(c) for c in hilbert_class_poly(D, _ctx_at(bits))]
        g = _poly.pgcd(list(f.den), H)
        if len(g) <= 1:
            return set()
        return {k for k, sm in enumerate(sms) if _ball_eval(g, sm.value).contains_zero()}
    poles = set()
    for k, sm in enumerate(sms):
        if _ball_eval(list(f.den), sm.value).contains_zero():
            poles.add(k)
    return poles


def _preimage_roots(f: ModularFunction, sigma: Ball, bits: int):
    """Roots x of num(x) - sigma den(x) = 0."""
    n = len(max(f.num, f.den, key=len))
    coeffs = []
    s = sigma.mid
    for k in range(n):
        a = f.num[k].to_mpc() if k < len(f.num) else 0
        b = f.den[k].to_mpc() if k < len(f.den) else 0
        coeffs.append(a - s * b)
    while coeffs and abs(coeffs[-1]) < mpmath.mpf(2) ** (-bits // 2):
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    if len(coeffs) == 2:
        return [-coeffs[0] / coeffs[1]]
    roots = mpmath.polyroots(list(reversed(coeffs)), maxsteps=400, extraprec=bits)
    return [mpmath.mpc(r) for r in roots]


def _classify_root(x, sms, bits):
    """Return (SingularModulus or None) for a preimage root x in the j-plane."""
    for sm in sms:
        if sm.value.contains(x) or abs(sm.value.mid - x) <= mpmath.mpf(2) ** (-bits // 2) * max(1, abs(x)):
            return sm
    ctx = _ctx_at(bits)
    tau = inverse_j(x, ctx)
    try:
        w = recognize_quadratic(tau, max_den=10 ** 8, tol=mpmath.mpf(2) ** (-(bits * 3) // 4))
    except NotQuadratic:
        return None
    if not in_Fj(w):
        return None
    D, form = discriminant_of_point(w)
    a, b, c = form
    # the point is the root (b' + sqrt D)/(2a) of a z^2 - b' z + c with b' = -b
    red = QuadForm(a, -b, c)
    v = eval_j(form_to_point(red), ctx)
    if abs(v.mid - x) > v.rad + mpmath.mpf(2) ** (-bits // 2) * max(1, abs(x)):
        return None
    return SingularModulus(D, red, v)


def f_special_points(f: ModularFunction, D, ctx: PrecisionCtx | None = None) -> list[FSpecialPoint]:
    """Distinct values R(x) over the singular moduli x of discriminant D."""
    D = _check_disc(D)
    ctx = ctx or PrecisionCtx()
    if f.is_constant:
        from .errors import ConstantFunction
        raise ConstantFunction("f is constant")
    bits = max(ctx.bits, 128)
    sms = singular_moduli(D, _ctx_at(bits))
    poles = _pole_indices(f, D, sms, bits)
    out: list[FSpecialPoint] = []
    with mpmath.workprec(bits + 32):
        for k, sm in enumerate(sms):
            if k in poles:
                continue
            val = _ball_eval(list(f.num), sm.value) / _ball_eval(list(f.den), sm.value)
            same = next((p for p in out if p.value.overlaps(val)), None)
            if same is not None:
                continue
            pre, other = [], []
            for x in _preimage_roots(f, val, bits):
                s = _classify_root(x, sms, bits)
                if s is None:
                    other.append(x)
                elif all(s.form != t.form or s.disc != t.disc for t in pre):
                    pre.append(s)
            if all(s.form != sm.form for s in pre):
                pre.append(sm)
            out.append(FSpecialPoint(val, min(s.disc for s in pre), pre, other))
    if poles:
        forms = [sms[k].form for k in sorted(poles)]
        raise PoleAtSpecialPoint(f"f has a pole at {len(forms)} singular moduli of discriminant {D}",
                                 forms=forms, partial=out)
    return out


def conjugate_orbit(f: ModularFunction, sigma: FSpecialPoint, ctx: PrecisionCtx | None = None) -> list[Ball]:
    """{R(j(tau)) : tau over reduced forms of disc(sigma)}, a superset of the conjugates."""
    ctx = ctx or PrecisionCtx()
    bits = max(ctx.bits, 128)
    out = []
    with mpmath.workprec(bits + 32):
        for sm in singular_moduli(sigma.disc, _ctx_at(bits)):
            d = _ball_eval(list(f.den), sm.value)
            if d.contains_zero():
                continue
            out.append(_ball_eval(list(f.num), sm.value) / d)
    return out


# ---------------------------------------------------------------------------
# modular relations


def isogeny_cosets(N: int):
    """Matrices (a, b; 0, d) with ad = N, 0 <= b < d and gcd(a, b, d) = 1."""
    for a in range(1, N + 1):
        if N % a:
            continue
        d = N // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                yield ((a, b), (0, d))


def _as_ball(x, ctx):
    if isinstance(x, Ball):
        return x
    x = mpmath.mpc(x)
    return Ball(x, ctx.tol * max(1, abs(x)))


def modular_relation(x1, x2, N_max: int, ctx: PrecisionCtx | None = None):
    """Smallest N <= N_max with Phi_N(x1, x2) = 0, found by scanning cosets.

    Returns ``(N, g)`` or ``None``.
    """
    ctx = ctx or PrecisionCtx()
    if N_max < 1:
        from .errors import DomainError
        raise DomainError("N_max must be at least 1")
    with mpmath.workprec(ctx.bits + 32):
        b1, b2 = _as_ball(x1, ctx), _as_ball(x2, ctx)
        fine = PrecisionCtx(ctx.bits + 64, tol=mpmath.mpf(2) ** (-ctx.bits))
        if b1.contains(0):
            tau = RHO.to_mpc()
        elif b1.contains(1728):
            tau = I.to_mpc()
        else:
            tau = inverse_j(b1.mid, fine)
        for N in range(1, N_max + 1):
            hits = []
            for g in isogeny_cosets(N):
                (a, b), (_, d) = g
                t = (a * tau + b) / d
                v = eval_j(t, ctx)
                slack = ctx.tol * max(1, abs(v.mid)) * 16
                if abs(v.mid - b2.mid) <= v.rad + b2.rad + slack:
                    hits.append((g, v))
            if hits:
                vals = [v for _, v in hits]
                if any(abs(u.mid - w.mid) > 1e-6 * max(1, abs(u.mid)) for u in vals for w in vals):
                    raise PrecisionExhausted("several coset values match x2")
                return N, hits[0][0]
    return None
