"""Atypicality bookkeeping for the graph of R in Y(1)^n x G_m^n, n <= 2.

"j-special" and "root of unity" are only decidable up to explicit bounds
here; every report records the bounds it used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .balls import Ball, PrecisionCtx
from .errors import DomainError, ModmultError, PoleAtSpecialPoint, PreconditionViolated
from .modfunc import ModularFunction, eval_j, _ball_poly
from .multdep import (REFUTED, UNDECIDED, VERIFIED, AlgebraicValue, detect_relations,
                      verify_relation, _valid_discs)
from .quadforms import enumerate_T, form_to_point
from .specialpoints import FSpecialPoint, f_special_points, modular_relation

__all__ = [
    "Bounds",
    "SpecialTemplate",
    "AtypicalityReport",
    "RootOfUnityPoint",
    "ModularTorsionTuple",
    "atypicality",
    "is_j_special",
    "root_of_unity_order",
    "classify_point",
    "root_of_unity_scan",
    "modular_torsion_search",
    "replay_root_of_unity",
    "replay_modular_torsion",
]


@dataclass(frozen=True)
class Bounds:
    max_disc: int = 100
    max_order: int = 100
    nmax: int = 5
    box: int = 6

    def __post_init__(self):
        if min(self.max_disc, self.max_order, self.nmax, self.box) < 1:
            raise DomainError("bounds must be positive")


@dataclass(frozen=True)
class SpecialTemplate:
    name: str
    modular_conditions: tuple = ()
    multiplicative_conditions: tuple = ()


@dataclass(frozen=True)
class AtypicalityReport:
    template: SpecialTemplate
    dims: tuple  # (dim A, dim V, dim T, dim X)
    verdict: bool
    bounds: Bounds | None = None


def atypicality(dimA: int, dimV: int, dimT: int, dimX: int) -> bool:
    """``dim A > dim V + dim T - dim X``, exactly."""
    if min(dimA, dimV, dimT, dimX) < 0:
        raise DomainError("dimensions must be non-negative")
    if dimT > dimX or dimV > dimX:
        raise DomainError("subvarieties cannot exceed the ambient dimension")
    return dimA > dimV + dimT - dimX


# ---------------------------------------------------------------------------
# membership tests


def _ball(x, ctx: PrecisionCtx) -> Ball:
    if isinstance(x, Ball):
        return x
    if isinstance(x, str):
        x = mpmath.mpc(complex(x.replace("i", "j"))) if "i" in x else mpmath.mpf(x)
    if isinstance(x, Fraction):
        x = mpmath.mpf(x.numerator) / x.denominator
    x = mpmath.mpc(x)
    return Ball(x, ctx.tol * max(1, abs(x)))


@lru_cache(maxsize=16)
def _moduli_table(max_disc: int, bits: int):
    ctx = PrecisionCtx(bits, tol=mpmath.mpf(2) ** (-(bits - 24)))
    out = []
    with mpmath.workprec(bits + 32):
        for D in _valid_discs(max_disc):
            for form in enumerate_T(D):
                out.append((D, form, eval_j(form_to_point(form), ctx)))
    return tuple(out)


def is_j_special(x, max_disc: int, ctx: PrecisionCtx | None = None):
    """``(D, form)`` when x matches a singular modulus with |D| <= max_disc, else None."""
    ctx = ctx or PrecisionCtx()
    with mpmath.workprec(ctx.bits + 32):
        b = _ball(x, ctx)
        for D, form, v in _moduli_table(max_disc, ctx.bits):
            if b.overlaps(v.widen(ctx.tol * max(1, abs(v.mid)))):
                return D, form
    return None


def root_of_unity_order(t, max_order: int, ctx: PrecisionCtx | None = None):
    """Order m <= max_order with t^m = 1 numerically, else None.

    The candidate comes from the best rational approximation of arg(t)/2pi.
    """
    ctx = ctx or PrecisionCtx()
    with mpmath.workprec(ctx.bits + 32):
        b = _ball(t, ctx)
        slack = b.rad + ctx.tol
        if b.contains_zero() or abs(abs(b.mid) - 1) > slack:
            return None
        theta = mpmath.arg(b.mid) / (2 * mpmath.pi)
        if theta < 0:
            theta += 1
        cand = Fraction(float(theta)).limit_denominator(max_order)
        m = cand.denominator
        r = b ** m - 1
        if r.abs_lower() > ctx.tol * m:
            return None
        return m


def _multiplicative_relation(ts, box, ctx):
    """Primitive full-support relation among the t's, numerically."""
    balls = [_ball(t, ctx) for t in ts]
    if any(b.contains_zero() for b in balls):
        return None
    vals = [AlgebraicValue.numeric(b) for b in balls]
    for a in detect_relations(vals, box, ctx, all_in_box=True):
        if all(a) and math.gcd(*a) == 1:
            return list(a)
    return None


def _point_parts(point, n):
    if isinstance(point, dict):
        xs, ts = list(point["x"]), list(point["t"])
    else:
        xs, ts = list(point[:n]), list(point[n:])
    if len(xs) != n or len(ts) != n:
        raise DomainError(f"point needs {n} x and {n} t coordinates")
    return xs, ts


def classify_point(f: ModularFunction, point, n: int, bounds: Bounds | None = None,
                   ctx: PrecisionCtx | None = None, include_typical: bool = False) -> list[AtypicalityReport]:
    """Special templates through the point whose intersection with V is atypical."""
    ctx = ctx or PrecisionCtx()
    bounds = bounds or Bounds()
    if n not in (1, 2):
        raise DomainError("only n = 1 and n = 2 are classified")
    xs, ts = _point_parts(point, n)
    with mpmath.workprec(ctx.bits + 32):
        xb = [_ball(x, ctx) for x in xs]
        tb = [_ball(t, ctx) for t in ts]
        for x, t in zip(xb, tb):
            r = _ball_poly(f.num, x) / _ball_poly(f.den, x)
            if abs(r.mid - t.mid) > r.rad + t.rad + ctx.tol * max(1, abs(t.mid)) * 16:
                raise PreconditionViolated("point is not on V: t differs from R(x)")
        fixed = [is_j_special(x, bounds.max_disc, ctx) for x in xb]
        tors = [root_of_unity_order(t, bounds.max_order, ctx) for t in tb]
    out = []

    def add(name, mods, mults, dims):
        rep = AtypicalityReport(SpecialTemplate(name, tuple(mods), tuple(mults)), dims, atypicality(*dims), bounds)
        if rep.verdict or include_typical:
            out.append(rep)

    def fx(i):
        return {"type": "fixed", "coord": i + 1, "disc": fixed[i][0], "form": list(fixed[i][1])}

    def tr(i):
        return {"type": "torsion", "coord": i + 1, "order": tors[i]}

    if n == 1:
        if fixed[0] and tors[0]:
            add("{x} x {zeta}", [fx(0)], [tr(0)], (0, 1, 0, 2))
        elif fixed[0]:
            add("{x} x G", [fx(0)], [], (0, 1, 1, 2))
        elif tors[0]:
            add("Y(1) x {zeta}", [], [tr(0)], (0, 1, 1, 2))
        return out

    equal = xb[0].overlaps(xb[1])
    rel = None if equal else modular_relation(xb[0], xb[1], bounds.nmax, ctx)
    mult = _multiplicative_relation(tb, bounds.box, ctx) if not equal else None
    for i in (0, 1):
        if fixed[i] and tors[i]:
            name = "(x, t1, zeta, t2)" if i == 0 else "(t1, x, t2, zeta)"
            add(name, [fx(i)], [tr(i)], (1, 2, 2, 4))
    if equal:
        add("(t1, t1, t2, t2)", [{"type": "relation", "coords": (1, 2), "N": 1}],
            [{"type": "relation", "exponents": [1, -1]}], (1, 2, 2, 4))
    if fixed[0] and fixed[1] and mult:
        add("special pair with a multiplicative relation", [fx(0), fx(1)],
            [{"type": "relation", "exponents": mult}], (0, 2, 1, 4))
    if rel and tors[0] and tors[1]:
        name = ("modular-torsion tuple" if not (fixed[0] or fixed[1])
                else "modular relation with two torsion coordinates")
        add(name, [{"type": "relation", "coords": (1, 2), "N": rel[0], "g": rel[1]}], [tr(0), tr(1)], (0, 2, 1, 4))
    nfix, ntor = sum(map(bool, fixed)), sum(map(bool, tors))
    if nfix == 2 and ntor == 2:
        add("all coordinates fixed", [fx(0), fx(1)], [tr(0), tr(1)], (0, 2, 0, 4))
    elif nfix + ntor == 3:
        add("three fixed coordinates", [fx(i) for i in (0, 1) if fixed[i]],
            [tr(i) for i in (0, 1) if tors[i]], (0, 2, 1, 4))
    if include_typical:
        for i in (0, 1):
            if fixed[i] and not tors[i]:
                add(f"fixed x{i + 1}", [fx(i)], [], (0, 2, 3, 4))
            if tors[i] and not fixed[i]:
                add(f"fixed t{i + 1}", [], [tr(i)], (0, 2, 3, 4))
    return out


# ---------------------------------------------------------------------------
# scans


@dataclass
class RootOfUnityPoint:
    point: FSpecialPoint
    order: int
    certificate: object

    @property
    def value(self):
        return self.point.value

    @property
    def disc(self) -> int:
        return self.point.disc


def _special_points_upto(f, max_disc, ctx):
    seen = []
    for D in _valid_discs(max_disc):
        try:
            pts = f_special_points(f, D, ctx)
        except PoleAtSpecialPoint as exc:
            pts = exc.partial
        for p in pts:
            if not any(p.value.overlaps(q.value) for q in seen):
                seen.append(p)
    return seen


def root_of_unity_scan(f: ModularFunction, max_disc: int, max_order: int,
                       ctx: PrecisionCtx | None = None) -> list[RootOfUnityPoint]:
    """f-special points with |disc| <= max_disc that are roots of unity of order <= max_order.

    Each hit carries a Liouville-gap certificate for ``sigma^m = 1``; hits
    whose certificate is not VERIFIED are still listed, flagged by it.
    """
    ctx = ctx or PrecisionCtx()
    if max_disc < 1 or max_order < 1:
        raise DomainError("bounds must be at least 1")
    out = []
    for p in _special_points_upto(f, max_disc, ctx):
        m = root_of_unity_order(p.value, max_order, ctx)
        if m is None:
            continue
        src = min(p.preimages, key=lambda s: -s.disc)
        cert = verify_relation([AlgebraicValue.special(f, src.disc, src.form)], [m], ctx=ctx)
        if cert.verdict != REFUTED:
            out.append(RootOfUnityPoint(p, m, cert))
    return out


def replay_root_of_unity(hit: RootOfUnityPoint | dict, bits: int) -> str:
    """Re-verify ``sigma^m = 1`` from the certificate's descriptor at ``bits``."""
    from .multdep import replay_certificate
    cert = hit.certificate if isinstance(hit, RootOfUnityPoint) else hit
    return replay_certificate(cert, bits).verdict


@dataclass
class ModularTorsionTuple:
    x1: object
    x2: object
    zeta1: tuple  # (k, m) for exp(2 pi i k/m)
    zeta2: tuple
    N: int
    g: tuple


def _zeta(k, m):
    return mpmath.expjpi(mpmath.mpf(2 * k) / m)


def _solve_for(f: ModularFunction, zeta):
    n = max(len(f.num), len(f.den))
    coeffs = []
    for k in range(n):
        a = f.num[k].to_mpc() if k < len(f.num) else 0
        b = f.den[k].to_mpc() if k < len(f.den) else 0
        coeffs.append(a - zeta * b)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    if len(coeffs) == 2:
        return [-coeffs[0] / coeffs[1]]
    return [mpmath.mpc(r) for r in mpmath.polyroots(list(reversed(coeffs)), maxsteps=400,
                                                    extraprec=mpmath.mp.prec)]


def modular_torsion_search(f: ModularFunction, nmax: int, max_order: int, ctx: PrecisionCtx | None = None,
                           max_disc: int = 100) -> list[ModularTorsionTuple]:
    """Pairs of non-special preimages of roots of unity linked by a modular relation."""
    ctx = ctx or PrecisionCtx()
    if nmax < 1 or max_order < 1:
        raise DomainError("bounds must be at least 1")
    cands = []
    with mpmath.workprec(ctx.bits + 32):
        for m in range(1, max_order + 1):
            for k in range(m):
                if math.gcd(k, m) != 1:
                    continue
                for x in _solve_for(f, _zeta(k, m)):
                    if abs(_ball_poly(f.den, Ball(x)).mid) <= ctx.tol:
                        continue
                    if x == 0 or is_j_special(x, max_disc, ctx):
                        continue
                    cands.append((x, (k, m)))
    out = []
    for a in range(len(cands)):
        for b in range(a + 1, len(cands)):
            (x1, z1), (x2, z2) = cands[a], cands[b]
            if abs(x1 - x2) <= ctx.tol * max(1, abs(x1)) * 16:
                continue
            try:
                rel = modular_relation(x1, x2, nmax, ctx)
            except ModmultError:
                continue
            if rel:
                out.append(ModularTorsionTuple(x1, x2, z1, z2, rel[0], rel[1]))
    return out


def replay_modular_torsion(f: ModularFunction, t: ModularTorsionTuple, bits: int, max_disc: int = 100) -> bool:
    """Re-run every membership test of a tuple at ``bits``."""
    ctx = PrecisionCtx(bits)
    with mpmath.workprec(bits + 32):
        for x, (k, m) in ((t.x1, t.zeta1), (t.x2, t.zeta2)):
            r = _ball_poly(f.num, Ball(x)) / _ball_poly(f.den, Ball(x))
            if abs(r.mid - _zeta(k, m)) > max(ctx.tol, 1e-20) * 16:
                return False
            if is_j_special(x, max_disc, ctx):
                return False
        rel = modular_relation(t.x1, t.x2, t.N, ctx)
    return rel is not None and rel[0] == t.N
