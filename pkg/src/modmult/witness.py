"""Witness points for functional multiplicative independence of translates.

Every ``g`` in GL2+(Q) factors as ``gamma * h`` with gamma in SL2(Z) and
``h z = r z + s``, 0 <= s < 1. For a family of distinct translates grouped
by increasing r, choosing z with ``r_1 z + s_11 = w_r`` (the top zero or pole
of f in F_j) puts exactly one composite on the divisor: the other composites
of the first group land on the open segment to the right of w_r, the rest
lie strictly higher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .balls import Ball, PrecisionCtx
from .borcherds import B0Element, eval_lift, tau_star
from .errors import (DomainError, NotConverged, NotInGroup, NotPairwiseDistinct, PreconditionViolated,
                     PrecisionExhausted)
from .modfunc import (DivisorInFj, ModularFunction, check_divisor_points, eval_j,
                      zeros_poles_in_Fj, _recognition_tol)
from .quadforms import QuadSurd

__all__ = [
    "NormalForm",
    "TranslateFamily",
    "WitnessCertificate",
    "parse_matrix",
    "normal_form",
    "construct_witness",
    "certify_witness",
]

Matrix = tuple


def parse_matrix(text: str) -> Matrix:
    """``"a,b;c,d"`` with rational entries."""
    try:
        rows = [[Fraction(x.strip()) for x in row.split(",")] for row in text.split(";")]
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad matrix {text!r}") from exc
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise DomainError(f"matrix must be 2x2: {text!r}")
    return (tuple(rows[0]), tuple(rows[1]))


def _egcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class NormalForm:
    gamma: Matrix
    r: Fraction
    s: Fraction


def normal_form(g) -> NormalForm:
    """Canonical ``g = gamma * (r z + s)`` as Mobius maps."""
    if isinstance(g, str):
        g = parse_matrix(g)
    (a, b), (c, d) = [[Fraction(x) for x in row] for row in g]
    if a * d - b * c <= 0:
        raise NotInGroup("determinant must be positive")
    L = 1
    for x in (a, b, c, d):
        L = math.lcm(L, x.denominator)
    a, b, c, d = (int(x * L) for x in (a, b, c, d))
    g0, x, y = _egcd(a, c)
    # U = [[x, y], [-c/g0, a/g0]] clears the lower-left entry: U g = [[g0, B], [0, det/g0]]
    B = x * b + y * d
    Dd = (a * d - b * c) // g0
    k = B // Dd
    r = Fraction(g0, Dd)
    s = Fraction(B - k * Dd, Dd)
    gamma = ((a // g0, k * (a // g0) - y), (c // g0, k * (c // g0) + x))
    return NormalForm(gamma, r, s)


@dataclass
class TranslateFamily:
    """Distinct translates z -> g_i z, grouped by r in increasing order."""

    matrices: list
    normal_forms: list = field(init=False)
    groups: list = field(init=False)

    def __post_init__(self):
        self.matrices = [parse_matrix(m) if isinstance(m, str) else m for m in self.matrices]
        if not self.matrices:
            raise DomainError("empty family")
        self.normal_forms = [normal_form(m) for m in self.matrices]
        seen = {}
        for i, nf in enumerate(self.normal_forms):
            key = (nf.r, nf.s)
            if key in seen:
                raise NotPairwiseDistinct(f"translates {seen[key]} and {i} give the same function")
            seen[key] = i
        by_r = {}
        for nf in self.normal_forms:
            by_r.setdefault(nf.r, []).append(nf.s)
        self.groups = [(r, sorted(ss)) for r, ss in sorted(by_r.items())]

    def composites(self):
        """Yield ``((i, k), r, s)`` with 1-based group and member indices."""
        for i, (r, ss) in enumerate(self.groups, 1):
            for k, s in enumerate(ss, 1):
                yield (i, k), r, s


def _as_family(family) -> TranslateFamily:
    return family if isinstance(family, TranslateFamily) else TranslateFamily(list(family))


def _affine(z, r: Fraction, s: Fraction):
    if isinstance(z, QuadSurd):
        return QuadSurd(r * z.x + s, r * z.y, z.D)
    if isinstance(z, Ball):
        m = z.mid * (mpmath.mpf(r.numerator) / r.denominator) + mpmath.mpf(s.numerator) / s.denominator
        return Ball(m, z.rad * abs(r))
    return mpmath.mpc(z) * (mpmath.mpf(r.numerator) / r.denominator) + mpmath.mpf(s.numerator) / s.denominator


def _top_point(obj, ctx):
    if isinstance(obj, B0Element):
        if not obj.basis_exponents:
            raise PreconditionViolated("constant B_0 element")
        return tau_star(max(obj.support))
    div = obj if isinstance(obj, DivisorInFj) else zeros_poles_in_Fj(obj, ctx)
    if not len(div):
        raise PreconditionViolated("f has no zero or pole in F_j")
    tol = 1e-20 if isinstance(obj, DivisorInFj) else _recognition_tol(obj, ctx)
    res = check_divisor_points(div, tol)
    if res.verdict != "HOLDS":
        raise PreconditionViolated(f"divisor condition is {res.verdict}")
    return div.points[-1].w


def construct_witness(divisor, family, ctx: PrecisionCtx | None = None):
    """z with ``r_1 z + s_11 = w_r``; exact when the top point is exact.

    ``divisor`` may be a :class:`DivisorInFj`, a :class:`ModularFunction` or a
    :class:`B0Element`.
    """
    ctx = ctx or PrecisionCtx()
    fam = _as_family(family)
    w = _top_point(divisor, ctx)
    r1, ss = fam.groups[0]
    s11 = ss[0]
    return _affine(w, 1 / r1, -s11 / r1)


@dataclass
class WitnessCertificate:
    verdict: str  # CERTIFIED or UNDECIDED
    z: object
    top: object
    composites: list
    undecided: list = field(default_factory=list)


def _pt_str(p):
    if isinstance(p, QuadSurd):
        return str(p)
    if isinstance(p, Ball):
        return mpmath.nstr(p.mid, 20)
    return mpmath.nstr(p, 20)


def _lift_value(obj: B0Element, p, ctx):
    pt = p.mid if isinstance(p, Ball) else p
    return eval_lift(obj.plus_form(64 * 64), pt, ctx)


def _value_margin(obj, p, ctx):
    """Lower bounds for the numerator and the denominator of f at p."""
    if isinstance(obj, B0Element):
        val = _lift_value(obj, p, ctx)
        # a product of lifts has no finite poles off the divisor; only the size matters
        return max(mpmath.mpf(0), abs(val.value) - val.error), mpmath.mpf(1)
    pt = p.mid if isinstance(p, Ball) else p
    jb = eval_j(pt, ctx)
    if isinstance(p, Ball) and p.rad:
        jb = jb.widen(p.rad * 4 * mpmath.pi * max(1, abs(jb.mid)))
    from .modfunc import _ball_poly
    num = _ball_poly(obj.num, jb)
    den = _ball_poly(obj.den, jb)
    return num.abs_lower(), den.abs_lower()


def certify_witness(f, family, z=None, ctx: PrecisionCtx | None = None) -> WitnessCertificate:
    """Check every composite ``r_i z + s_ik`` of the family at the witness z."""
    ctx = ctx or PrecisionCtx()
    fam = _as_family(family)
    if isinstance(f, DivisorInFj):
        raise DomainError("certify_witness needs the function, not only its divisor")
    top = _top_point(f, ctx)
    if z is None:
        z = construct_witness(f, fam, ctx)
    r1 = fam.groups[0][0]
    tol = mpmath.mpf(ctx.tol)
    rows, undecided = [], []
    with mpmath.workprec(ctx.bits + 32):
        for (i, k), r, s in fam.composites():
            p = _affine(z, r, s)
            row = {"index": (i, k), "r": str(r), "s": str(s), "point": _pt_str(p)}
            if (i, k) == (1, 1):
                row["reason"] = "on-divisor"
                if isinstance(p, QuadSurd) and isinstance(top, QuadSurd):
                    row["exact"] = p == top
                    if not row["exact"]:
                        undecided.append(row)
                else:
                    pm = p.mid if isinstance(p, Ball) else p
                    tm = top.to_mpc() if isinstance(top, QuadSurd) else top.mid
                    dist = abs(pm - tm)
                    row["distance"] = mpmath.nstr(dist, 5)
                    if dist > tol + (p.rad if isinstance(p, Ball) else 0) + (top.rad if isinstance(top, Ball) else 0):
                        undecided.append(row)
                if isinstance(f, B0Element):
                    row["abs_value"] = mpmath.nstr(abs(_lift_value(f, p, ctx).value), 5)
                rows.append(row)
                continue
            if i == 1:
                row["reason"] = f"segment: w_r + {s - fam.groups[0][1][0]} with offset in (0, 1)"
            else:
                row["reason"] = f"above: Im = {r / r1} * Im(w_r) > Im(w_r)"
            try:
                lo, hi = _value_margin(f, p, ctx)
            except (PrecisionExhausted, NotConverged) as exc:
                row["margin"] = f"error: {exc}"
                undecided.append(row)
                rows.append(row)
                continue
            row["margin"] = {"numerator": mpmath.nstr(lo, 5), "denominator": mpmath.nstr(hi, 5)}
            if not (lo > tol and hi > tol):
                undecided.append(row)
            rows.append(row)
    verdict = "UNDECIDED" if undecided else "CERTIFIED"
    return WitnessCertificate(verdict, z, top, rows, undecided)
