"""Evaluation of j, its inverse on the fundamental domain, modular functions
``R(j)`` and the divisor condition on their zeros and poles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from . import _poly
from ._poly import QQi, parse_coefficient
from .balls import Ball, PrecisionCtx
from .errors import (DomainError, InversionFailed, NotApplicable, NotQuadratic,
                     PrecisionExhausted)
from .qseries import j_coefficients
from .quadforms import QuadSurd, in_Fj, recognize_quadratic, reduce_to_Fj

__all__ = [
    "eval_j",
    "inverse_j",
    "ModularFunction",
    "DivisorPoint",
    "DivisorInFj",
    "DivisorConditionResult",
    "zeros_poles_in_Fj",
    "divisor_condition_check",
    "check_divisor_points",
    "RHO",
    "I",
]

RHO = QuadSurd(Fraction(1, 2), Fraction(1, 2), -3)
I = QuadSurd(0, 1, -1)

_MAX_TERMS = 4096


# ---------------------------------------------------------------------------
# j and its derivatives on q


def _tail_bound(absq, N):
    """Bound for sum_{n>N} c(n)|q|^n using c(n) <= exp(4 pi sqrt n)."""
    ratio = mpmath.exp(2 * mpmath.pi / mpmath.sqrt(N + 1)) * absq
    if ratio >= 1:
        return mpmath.inf
    return mpmath.exp(4 * mpmath.pi * mpmath.sqrt(N + 1)) * absq ** (N + 1) / (1 - ratio)


def _terms_for(absq, target):
    N = 8
    while _tail_bound(absq, N) > target:
        N = int(N * 1.5) + 1
        if N > _MAX_TERMS:
            raise PrecisionExhausted("too many q-terms needed; |q| too close to 1")
    return N


def _j_sums(q, N, k=1):
    """Return (j, theta j, ..., theta^k j) and sum |c_n q^n| at q, through q^N."""
    c = j_coefficients(N)
    vals = []
    for p in range(k + 1):
        acc = mpmath.mpc(0)
        for n in range(N, -1, -1):
            acc = acc * q + c[n + 1] * (n ** p)
        vals.append(acc + ((-1) ** p) / q)
    absq = abs(q)
    absum = sum(abs(c[n + 1]) * absq ** n for n in range(N + 1)) + 1 / absq
    return vals, absum


def eval_j(tau, ctx: PrecisionCtx | None = None) -> Ball:
    """j(tau) as a ball whose radius bounds truncation and rounding error.

    The tolerance of ``ctx`` is read relative to ``max(1, |j(tau)|)``.
    """
    ctx = ctx or PrecisionCtx()
    wp = ctx.bits + 32
    with mpmath.workprec(wp):
        if isinstance(tau, QuadSurd):
            t, _ = reduce_to_Fj(tau)
            z = t.to_mpc()
        else:
            z = mpmath.mpc(tau)
            if z.imag <= 0:
                raise DomainError("j is defined on the upper half-plane only")
            z, _ = reduce_to_Fj(z, snap=True)
        q = mpmath.expjpi(2 * z)
        absq = abs(q)
        tol = mpmath.mpf(ctx.tol)
        # |j| is about 1/|q| on the fundamental domain
        N = _terms_for(absq, tol / 4 * max(1, 1 / absq - 1000))
        (val, dval), absum = _j_sums(q, N)
        tail = _tail_bound(absq, N)
        eps = mpmath.mpf(2) ** (-wp + 8)
        rounding = eps * (N + 2) * absum + eps * 2 * mpmath.pi * abs(dval) * (1 + abs(z))
        if rounding > tol * max(1, abs(val)):
            raise PrecisionExhausted(
                f"rounding error {mpmath.nstr(rounding, 3)} exceeds tol at {ctx.bits} bits")
        return Ball(val, tail + rounding)


def _j_and_derivative(z, N=None):
    """Direct q-series value of j and dj/dtau at z (no reduction)."""
    q = mpmath.expjpi(2 * z)
    if N is None:
        N = _terms_for(abs(q), mpmath.mpf(2) ** (-mpmath.mp.prec - 8))
    (v, th), _ = _j_sums(q, N)
    return v, 2j * mpmath.pi * th


@lru_cache(maxsize=8)
def _local_constants(prec):
    """Leading Taylor coefficients j''(i)/2 and j'''(rho)/6 at precision prec."""
    with mpmath.workprec(prec):
        zi = mpmath.mpc(0, 1)
        zr = mpmath.mpc(mpmath.mpf(1) / 2, mpmath.sqrt(3) / 2)
        out = []
        for z, k in ((zi, 2), (zr, 3)):
            q = mpmath.expjpi(2 * z)
            N = _terms_for(abs(q), mpmath.mpf(2) ** (-prec - 8))
            vals, _ = _j_sums(q, N, k=k)
            # (d/dtau)^k j = (2 pi i)^k theta^k j when the lower derivatives vanish
            out.append((2j * mpmath.pi) ** k * vals[k] / math.factorial(k))
        return tuple(out)


@lru_cache(maxsize=1)
def _seed_grid():
    with mpmath.workprec(53):
        pts = []
        for a in range(-10, 11):
            x = mpmath.mpf(a) / 20
            y = mpmath.mpf(0.86)
            while y < 4:
                z = mpmath.mpc(x, max(y, mpmath.sqrt(1 - x * x) + 0.005))
                v, _ = _j_and_derivative(z, 40)
                pts.append((complex(z), complex(v)))
                y *= 1.12
        return tuple(pts)


def _seeds(x, prec):
    x = mpmath.mpc(x)
    c2, c3 = _local_constants(prec)
    seeds = []
    if abs(x) > 2000:
        q = 1 / (x - 744)
        seeds.append(mpmath.log(q) / (2j * mpmath.pi))
    rho = mpmath.mpc(mpmath.mpf(1) / 2, mpmath.sqrt(3) / 2)
    r = mpmath.cbrt(x / c3) if x != 0 else mpmath.mpc(0)
    for k in range(3):
        seeds.append(rho + r * mpmath.expjpi(mpmath.mpf(2 * k) / 3))
    s = mpmath.sqrt((x - 1728) / c2)
    seeds.extend([mpmath.mpc(0, 1) + s, mpmath.mpc(0, 1) - s])
    xc = complex(x)
    grid = sorted(_seed_grid(), key=lambda p: abs(p[1] - xc) / (1 + abs(xc)))
    seeds.extend(mpmath.mpc(g[0]) for g in grid[:6])
    return [s for s in seeds if s.imag > 0.3]


def _newton(z, x, max_iter, step_tol):
    res = None
    for _ in range(max_iter):
        if z.imag < 0.5:
            z, _ = reduce_to_Fj(z, snap=True)
        v, dv = _j_and_derivative(z)
        res = abs(v - x)
        if dv == 0:
            return z, res, False
        step = (v - x) / dv
        t = 1
        for _ in range(40):
            cand = z - t * step
            if cand.imag > 0:
                cv, _ = _j_and_derivative(cand)
                if abs(cv - x) < res or abs(t * step) < step_tol:
                    break
            t /= 2
        else:
            return z, res, False
        z = cand
        if abs(t * step) < step_tol:
            v, _ = _j_and_derivative(z)
            return z, abs(v - x), True
    return z, res, False


def inverse_j(x, ctx: PrecisionCtx | None = None):
    """The unique tau in the fundamental domain with j(tau) = x."""
    ctx = ctx or PrecisionCtx()
    wp = ctx.bits + 32
    with mpmath.workprec(wp):
        x = mpmath.mpc(x)
        # j - 1728 and j vanish to order 2 and 3 at i and rho, so Newton only
        # gets the square or cube root of the residual there; snap instead
        if abs(x) <= ctx.tol:
            return RHO.to_mpc(wp)
        if abs(x - 1728) <= ctx.tol * 1728:
            return I.to_mpc(wp)
        scale = max(1, abs(x))
        for seed in _seeds(x, 64):
            with mpmath.workprec(64):
                z, res, _ = _newton(mpmath.mpc(seed), x, 80, mpmath.mpf(2) ** -40)
            if res is None or not res < 1e-6 * scale:
                continue
            z, res, ok = _newton(mpmath.mpc(z), x, 200, mpmath.mpf(2) ** (-ctx.bits - 4))
            if res is None or res > ctx.tol * scale:
                continue
            z, _ = reduce_to_Fj(z, snap=True, tol=mpmath.mpf(2) ** (-ctx.bits))
            check = eval_j(z, ctx)
            if abs(check.mid - x) <= ctx.tol * scale + check.rad:
                return z
        raise InversionFailed(f"no seed converged to a preimage of {mpmath.nstr(x, 15)}")


# ---------------------------------------------------------------------------
# modular functions as rational functions of j


class ModularFunction:
    """``f = num(j) / den(j)`` with exact Gaussian-rational coefficients.

    Coefficient lists are in ascending powers of j. Decimal inputs are stored
    as the exact rational they denote and flagged ``approx_digits`` (the number
    of significant digits carried), which loosens equality and root
    recognition tolerances downstream.
    """

    def __init__(self, num, den=(1,), approx_digits: int | None = None, provenance: str | None = None):
        num = _poly.strip([_coerce(c) for c in num])
        den = _poly.strip([_coerce(c) for c in den])
        if not den:
            raise DomainError("denominator is the zero polynomial")
        if num:
            g = _poly.pgcd(num, den)
            if len(g) > 1:
                num = _poly.pdivmod(num, g)[0]
                den = _poly.pdivmod(den, g)[0]
        lead = den[-1]
        self.num = tuple(c / lead for c in num)
        self.den = tuple(c / lead for c in den)
        self.approx_digits = approx_digits
        self.provenance = provenance

    @classmethod
    def j(cls) -> "ModularFunction":
        return cls([0, 1])

    @classmethod
    def from_complex(cls, num, den=(1,), digits: int = 40, provenance: str | None = None):
        """Build from floating coefficients, rounded to ``digits`` significant digits."""
        def conv(z):
            z = z if isinstance(z, mpmath.mpc) else mpmath.mpc(z)
            return QQi(_dec(z.real, digits), _dec(z.imag, digits))
        with mpmath.workprec(int(digits * 3.33) + 16):
            return cls([conv(c) for c in num], [conv(c) for c in den], approx_digits=digits,
                       provenance=provenance or "decimal literals")

    @property
    def is_constant(self) -> bool:
        return len(self.num) <= 1 and len(self.den) == 1

    @property
    def degrees(self) -> tuple[int, int]:
        return len(self.num) - 1, len(self.den) - 1

    def __eq__(self, other):
        if not isinstance(other, ModularFunction):
            return NotImplemented
        if self.approx_digits is None and other.approx_digits is None:
            return self.num == other.num and self.den == other.den
        digits = min(d for d in (self.approx_digits, other.approx_digits) if d is not None)
        tol = mpmath.mpf(10) ** (-digits + 2)
        if self.degrees != other.degrees:
            return False
        for a, b in zip(self.num + self.den, other.num + other.den):
            za, zb = a.to_mpc(), b.to_mpc()
            if abs(za - zb) > tol * max(1, abs(za), abs(zb)):
                return False
        return True

    def __hash__(self):
        return hash(self.degrees)

    def __repr__(self):
        return f"ModularFunction(num={[str(c) for c in self.num]}, den={[str(c) for c in self.den]})"

    def at_j(self, x):
        x = mpmath.mpc(x)
        d = _poly.peval(self.den, x)
        if d == 0:
            raise ZeroDivisionError("pole")
        return _poly.peval(self.num, x) / d

    def evaluate(self, tau, ctx: PrecisionCtx | None = None) -> Ball:
        ctx = ctx or PrecisionCtx()
        jb = eval_j(tau, ctx)
        with mpmath.workprec(ctx.bits + 32):
            return _ball_poly(self.num, jb) / _ball_poly(self.den, jb)

    def to_text(self) -> str:
        lines = []
        if self.provenance:
            lines.append(f"# provenance: {self.provenance}")
        if self.approx_digits is not None:
            lines.append(f"# digits: {self.approx_digits}")
        lines.append("num: " + ", ".join(str(c) for c in self.num) if self.num else "num: 0")
        lines.append("den: " + ", ".join(str(c) for c in self.den))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModularFunction":
        num, den = [], []
        seen = set()
        digits = None
        prov = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "provenance:" in line:
                    prov = line.split("provenance:", 1)[1].strip()
                elif line[1:].strip().startswith("digits:"):
                    dg = int(line.split("digits:", 1)[1])
                    digits = dg if digits is None else min(digits, dg)
                continue
            key, _, rest = line.partition(":")
            key = key.strip().lower()
            if key not in ("num", "den"):
                raise DomainError(f"unexpected line {raw!r}")
            seen.add(key)
            for tok in rest.split(","):
                if not tok.strip():
                    continue
                v, dg = parse_coefficient(tok)
                if dg is not None:
                    digits = dg if digits is None else min(digits, dg)
                (num if key == "num" else den).append(v)
        if "num" not in seen:
            raise DomainError("missing num: line")
        return cls(num, den or [QQi(1)], approx_digits=digits, provenance=prov)


def _coerce(c):
    if isinstance(c, QQi):
        return c
    if isinstance(c, str):
        return parse_coefficient(c)[0]
    if isinstance(c, float):
        raise DomainError("pass floats through ModularFunction.from_complex")
    return QQi(c)


def _dec(x, digits):
    s = mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
    return Fraction(s) if "." in s or "e" in s else Fraction(int(s))


def _ball_poly(p, b: Ball) -> Ball:
    acc = Ball(0)
    for c in reversed(p):
        acc = acc * b + c.to_mpc()
    return acc


# ---------------------------------------------------------------------------
# zeros and poles in the fundamental domain


@dataclass(frozen=True)
class DivisorPoint:
    """A zero (positive multiplicity) or pole (negative) in the fundamental domain."""

    w: object  # QuadSurd when recognised exactly, Ball otherwise
    multiplicity: int
    jvalue: object = None

    @property
    def exact(self) -> bool:
        return isinstance(self.w, QuadSurd)

    def re(self):
        return mpmath.mpf(self.w.x.numerator) / self.w.x.denominator if self.exact else self.w.mid.real

    def im(self):
        return self.w.to_mpc().imag if self.exact else self.w.mid.imag

    def describe(self) -> str:
        if self.exact:
            return str(self.w)
        return mpmath.nstr(self.w.mid, 20)


@dataclass(frozen=True)
class DivisorInFj:
    points: tuple

    def total_multiplicity(self) -> int:
        return sum(p.multiplicity for p in self.points)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _sort_key(p: DivisorPoint):
    return (p.im(), p.re())


def _certified_roots(poly, ctx: PrecisionCtx):
    if len(poly) == 2:
        return [(-poly[0] / poly[1]).to_mpc()], mpmath.mpf(0)
    bits = ctx.bits
    for _ in range(5):
        with mpmath.workprec(bits + 32):
            coeffs = [c.to_mpc() for c in reversed(poly)]
            try:
                roots, err = mpmath.polyroots(coeffs, maxsteps=400, extraprec=bits, error=True)
            except mpmath.libmp.libhyper.NoConvergence:
                bits *= 2
                continue
            roots = [mpmath.mpc(r) for r in roots]
            sep = min((abs(a - b) for k, a in enumerate(roots) for b in roots[k + 1:]), default=mpmath.inf)
            if sep > 4 * err:
                return roots, err
        bits *= 2
    raise PrecisionExhausted("could not separate polynomial roots")


def _recognition_tol(f: ModularFunction, ctx: PrecisionCtx):
    tol = mpmath.mpf(2) ** (-(ctx.bits * 3 // 4))
    if f.approx_digits is not None:
        tol = max(tol, mpmath.mpf(10) ** (-(f.approx_digits - 6)))
    return tol


def _pull_back(x, f, ctx, err):
    tau = inverse_j(x, ctx)
    rtol = _recognition_tol(f, ctx)
    with mpmath.workprec(ctx.bits + 32):
        try:
            w = recognize_quadratic(tau, max_den=10 ** 6, tol=rtol)
        except NotQuadratic:
            w = None
        if w is not None and in_Fj(w):
            jw = eval_j(w, ctx)
            if abs(jw.mid - x) <= rtol * max(1, abs(x)) * 1e4 + jw.rad + err:
                return w
        _, dv = _j_and_derivative(tau)
        rad = (err + ctx.tol * max(1, abs(x))) / max(abs(dv), mpmath.mpf(ctx.tol))
        return Ball(tau, rad)


def zeros_poles_in_Fj(f: ModularFunction, ctx: PrecisionCtx | None = None) -> DivisorInFj:
    """Zeros and poles of f in the fundamental domain, sorted by (Im, Re).

    Behaviour at the cusp is not part of the result.
    """
    ctx = ctx or PrecisionCtx()
    if f.is_constant:
        raise NotApplicable("constant function has no divisor")
    pts = []
    for poly, sign in ((f.num, 1), (f.den, -1)):
        if len(poly) <= 1:
            continue
        for factor, k in _poly.squarefree_factors(list(poly)):
            roots, err = _certified_roots(factor, ctx)
            for x in roots:
                pts.append(DivisorPoint(_pull_back(x, f, ctx, err), sign * k, x))
    pts.sort(key=_sort_key)
    return DivisorInFj(tuple(pts))


# ---------------------------------------------------------------------------
# the divisor condition


@dataclass
class DivisorConditionResult:
    verdict: str  # HOLDS, FAILS or UNDECIDED
    divisor: DivisorInFj | None = None
    witness: dict | None = None
    certificate: dict = field(default_factory=dict)

    def __str__(self):
        return self.verdict


# bottom rows (c, d) up to sign for which |c w + d| <= 1 is possible on F_j
_ROWS = ((0, 1), (1, -1), (1, 0), (1, 1))


def _gamma(c, d):
    return ((1, 0), (0, 1)) if c == 0 else ((0, -1), (1, d))


def check_divisor_points(div: DivisorInFj, tol: float = 1e-20) -> DivisorConditionResult:
    """Decide the divisor condition for points already placed in F_j.

    Only translates at the height of the top point can meet the segment to its
    right, and for w in F_j this needs |c w + d| = 1; each such translate is
    tested for a nonzero fractional offset along the segment.
    """
    pts = list(div.points)
    if not pts:
        raise NotApplicable("empty divisor")
    top = pts[-1]
    checks = []
    undecided = []
    tol = mpmath.mpf(tol)
    for idx, p in enumerate(pts):
        for c, d in _ROWS:
            if p is top and c == 0:
                continue
            g = _gamma(c, d)
            exact = p.exact and top.exact
            if exact:
                w = p.w
                n2 = (c * w.x + d) ** 2 + c * c * w.imag_squared
                same_level = w.imag_squared == top.w.imag_squared * n2 * n2
                if not same_level:
                    continue
                s = (w.act(g).x - top.w.x) % 1
                entry = {"index": idx, "row": (c, d), "s": str(s)}
                checks.append(entry)
                if s != 0:
                    return DivisorConditionResult("FAILS", div, {
                        "point": p.describe(), "gamma": g, "translate": str(w.act(g)),
                        "s": s}, {"checks": checks})
                continue
            z = p.w.to_mpc() if p.exact else p.w.mid
            zt = top.w.to_mpc() if top.exact else top.w.mid
            slack = tol + (0 if p.exact else p.w.rad) + (0 if top.exact else top.w.rad)
            n2 = abs(c * z + d) ** 2
            gap = z.imag - zt.imag * n2
            if abs(gap) > 4 * slack:
                continue
            gz = (g[0][0] * z + g[0][1]) / (c * z + d)
            s = (gz.real - zt.real) % 1
            entry = {"index": idx, "row": (c, d), "s": mpmath.nstr(s, 15), "level_gap": mpmath.nstr(gap, 5)}
            checks.append(entry)
            if min(s, 1 - s) <= 4 * slack and p is top:
                continue
            undecided.append(entry)
    if undecided:
        return DivisorConditionResult("UNDECIDED", div, None, {"checks": checks, "undecided": undecided})
    return DivisorConditionResult("HOLDS", div, None, {
        "top": top.describe(), "checks": checks,
        "reason": "no translate of any zero or pole lies on the open segment to the right of the top point"})


def divisor_condition_check(f: ModularFunction, ctx: PrecisionCtx | None = None) -> DivisorConditionResult:
    """HOLDS / FAILS / UNDECIDED for the divisor condition of f."""
    ctx = ctx or PrecisionCtx()
    if f.is_constant:
        raise NotApplicable("the divisor condition needs a non-constant function")
    div = zeros_poles_in_Fj(f, ctx)
    return check_divisor_points(div, _recognition_tol(f, ctx))
