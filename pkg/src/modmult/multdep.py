"""Multiplicative and Gamma-dependence: detection, certification, minimal subsets.

Values are described by JSON-able descriptors so that every certificate can be
re-evaluated later at a different precision. Detection reduces the lattice
spanned by ``(log|v|, arg v)`` rows against ``(0, 2 pi)``; verification bounds
``|prod v^a - 1|`` below a Liouville gap computed from degree and height
bounds.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import mpmath

from . import _poly
from .balls import Ball, PrecisionCtx
from .errors import (DomainError, ModmultError, PoleAtSpecialPoint, PreconditionViolated,
                     ZeroInput)
from .modfunc import ModularFunction, eval_j
from .quadforms import QuadForm, _check_disc, enumerate_T, form_to_point

__all__ = [
    "HeightData",
    "AlgebraicValue",
    "RelationCertificate",
    "MinimalSubset",
    "SearchReport",
    "exponent_bound",
    "lll_reduce",
    "detect_relations",
    "verify_relation",
    "relations_in_box",
    "minimal_dependent_subset",
    "box_oracle",
    "gamma_dependence",
    "search_dependent_tuples",
    "replay_certificate",
]

VERIFIED, REFUTED, UNDECIDED = "VERIFIED", "REFUTED", "UNDECIDED"

_MAX_BITS = 1 << 15
_LOG2 = math.log(2)


@dataclass(frozen=True)
class HeightData:
    """Upper bounds for the absolute logarithmic height and the degree."""

    h: float
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("degree bound must be at least 1")
        if self.h < 0:
            raise DomainError("height bound must be non-negative")


# ---------------------------------------------------------------------------
# values


def _ctx_at(bits: int) -> PrecisionCtx:
    return PrecisionCtx(bits, tol=mpmath.mpf(2) ** (-(bits - 24)))


@lru_cache(maxsize=64)
def _function(text: str) -> ModularFunction:
    return ModularFunction.from_text(text)


@lru_cache(maxsize=256)
def _log_mahler_of_modulus(D: int) -> float:
    # h(j(tau)) for an algebraic integer: mean of log+ |conjugate|
    with mpmath.workprec(96):
        ctx = PrecisionCtx(64)
        total = mpmath.mpf(0)
        forms = enumerate_T(D)
        for form in forms:
            v = eval_j(form_to_point(form), ctx)
            total += mpmath.log(max(mpmath.mpf(1), v.abs_upper()))
        return float(total / len(forms)) * (1 + 1e-9) + 1e-12


def _coefficient_height(f: ModularFunction) -> float:
    coeffs = list(f.num) + list(f.den)
    den = 1
    for c in coeffs:
        den = math.lcm(den, c.re.denominator, c.im.denominator)
    top = max(abs(complex(int(c.re * den), int(c.im * den))) for c in coeffs)
    return math.log(max(top, 1)) * (1 + 1e-12) + 1e-12


class AlgebraicValue:
    """A number given by a descriptor, evaluable at any precision.

    Kinds: ``rational``, ``gaussian``, ``special`` (R(j(tau)) at a reduced
    form), ``product`` (integer power product of other descriptors) and
    ``numeric`` (a bare ball, with no height data).
    """

    __slots__ = ("desc", "_height", "_field")

    def __init__(self, desc: dict):
        if desc.get("kind") not in ("rational", "gaussian", "special", "product", "numeric"):
            raise DomainError(f"unknown value kind {desc.get('kind')!r}")
        self.desc = desc
        self._height = None
        self._field = None

    # construction helpers
    @classmethod
    def rational(cls, x) -> "AlgebraicValue":
        return cls({"kind": "rational", "value": str(Fraction(x))})

    @classmethod
    def gaussian(cls, z) -> "AlgebraicValue":
        z = _poly._q(z) if not isinstance(z, str) else _poly.parse_coefficient(z)[0]
        if not z.im:
            return cls.rational(z.re)
        return cls({"kind": "gaussian", "value": str(z)})

    @classmethod
    def special(cls, f: ModularFunction, disc: int, form) -> "AlgebraicValue":
        return cls({"kind": "special", "function": f.to_text(), "disc": int(disc),
                    "form": [int(x) for x in form]})

    @classmethod
    def product(cls, factors) -> "AlgebraicValue":
        return cls({"kind": "product",
                    "factors": [[coerce_value(v).desc, int(e)] for v, e in factors]})

    @classmethod
    def numeric(cls, ball) -> "AlgebraicValue":
        b = ball if isinstance(ball, Ball) else Ball(mpmath.mpc(ball), 0)
        return cls({"kind": "numeric", "mid": [mpmath.nstr(b.mid.real, 60), mpmath.nstr(b.mid.imag, 60)],
                    "rad": mpmath.nstr(b.rad, 10)})

    def __repr__(self):
        return f"AlgebraicValue({self.desc})"

    def __getstate__(self):
        return self.desc

    def __setstate__(self, desc):
        self.desc = desc
        self._height = None
        self._field = None

    def evaluate(self, bits: int) -> Ball:
        k = self.desc["kind"]
        with mpmath.workprec(bits + 32):
            if k in ("rational", "gaussian"):
                z = _poly.parse_coefficient(self.desc["value"])[0]
                m = z.to_mpc()
                return Ball(m, abs(m) * mpmath.mpf(2) ** (-bits))
            if k == "numeric":
                re, im = self.desc["mid"]
                return Ball(mpmath.mpc(re, im), mpmath.mpf(self.desc["rad"]))
            if k == "special":
                f = _function(self.desc["function"])
                tau = form_to_point(QuadForm(*self.desc["form"]))
                jb = eval_j(tau, _ctx_at(bits))
                num = _ball_poly(f.num, jb)
                den = _ball_poly(f.den, jb)
                if den.contains_zero():
                    raise ZeroDivisionError("pole of f at this singular modulus")
                return num / den
            out = Ball(1)
            for sub, e in self.desc["factors"]:
                out = out * AlgebraicValue(sub).evaluate(bits) ** int(e)
            return out

    @property
    def height(self) -> HeightData | None:
        if self._height is None:
            self._height = self._compute_height()
        return self._height or None

    def _compute_height(self):
        k = self.desc["kind"]
        if k == "numeric":
            return False
        if k == "rational":
            x = Fraction(self.desc["value"])
            return HeightData(math.log(max(abs(x.numerator), x.denominator)), 1)
        if k == "gaussian":
            z = _poly.parse_coefficient(self.desc["value"])[0]
            den = math.lcm(z.re.denominator, z.im.denominator)
            top = abs(complex(int(z.re * den), int(z.im * den)))
            return HeightData(math.log(max(top, den)) * (1 + 1e-12), 2)
        if k == "special":
            f = _function(self.desc["function"])
            if f.approx_digits is not None:
                return False
            D = self.desc["disc"]
            deg_r = max(len(f.num), len(f.den)) - 1
            h = deg_r * _log_mahler_of_modulus(D) + _coefficient_height(f) + math.log(deg_r + 1)
            e = 1 if all(not c.im for c in f.num + f.den) else 2
            return HeightData(h, len(enumerate_T(D)) * e)
        total, parts = 0.0, []
        for sub, e in self.desc["factors"]:
            hd = AlgebraicValue(sub).height
            if hd is None:
                return False
            total += abs(int(e)) * hd.h
            parts.append(AlgebraicValue(sub))
        return HeightData(total, _degree_bound(parts))

    @property
    def field(self):
        """(tag, degree of a field holding every value with this tag) or None."""
        k = self.desc["kind"]
        if k == "gaussian":
            return ("gaussian",), 2
        if k == "special":
            f = _function(self.desc["function"])
            e = 1 if all(not c.im for c in f.num + f.den) else 2
            D = self.desc["disc"]
            return ("ringclass", D, e), 2 * len(enumerate_T(D)) * e
        return None


def _ball_poly(p, b: Ball) -> Ball:
    acc = Ball(0)
    for c in reversed(p):
        acc = acc * b + c.to_mpc()
    return acc


def coerce_value(v) -> AlgebraicValue:
    if isinstance(v, AlgebraicValue):
        return v
    if isinstance(v, dict):
        return AlgebraicValue(v)
    if isinstance(v, (int, Fraction)):
        return AlgebraicValue.rational(v)
    if isinstance(v, str):
        z, digits = _poly.parse_coefficient(v)
        if digits is not None:
            return AlgebraicValue.numeric(z.to_mpc())
        return AlgebraicValue.gaussian(z)
    if isinstance(v, _poly.QQi):
        return AlgebraicValue.gaussian(v)
    return AlgebraicValue.numeric(v)


def _degree_bound(values: Sequence[AlgebraicValue]) -> int:
    """Degree bound for the field generated by ``values``."""
    groups: dict = {}
    loose = 1
    for v in values:
        hd = v.height
        if hd is None:
            raise DomainError("no degree data")
        fld = v.field
        if fld is None:
            loose *= hd.d
            continue
        tag, cap = fld
        prod, _ = groups.get(tag, (1, cap))
        groups[tag] = (min(prod * hd.d, cap), cap)
    out = loose
    for prod, _ in groups.values():
        out *= prod
    return out


# ---------------------------------------------------------------------------
# exponent bounds


def _phi(m: int) -> int:
    out, k, n = m, 2, m
    while k * k <= n:
        if n % k == 0:
            while n % k == 0:
                n //= k
            out -= out // k
        k += 1
    if n > 1:
        out -= out // n
    return out


def max_root_of_unity_order(d: int) -> int:
    """Largest m with phi(m) <= d; phi(m) >= sqrt(m/2) caps the scan at 2 d^2."""
    return max(m for m in range(1, 2 * d * d + 3) if _phi(m) <= d)


def exponent_bound(n: int, d: int, heights: Sequence[float], c_n: float = 1.0) -> list:
    """Per-index bounds ``c_n d^n log d prod_{j != i} h_j`` on minimal exponents."""
    if d < 2:
        raise DomainError("degree bound must be at least 2")
    if len(heights) != n:
        raise DomainError("need one height per value")
    if any(not h > 0 for h in heights) or not c_n > 0:
        raise DomainError("heights and c_n must be positive")
    if n == 1:
        return [max_root_of_unity_order(d)]
    base = c_n * d ** n * math.log(d)
    out = []
    for i in range(n):
        p = base
        for k, h in enumerate(heights):
            if k != i:
                p *= h
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# lattice reduction


def lll_reduce(rows: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Integral LLL on linearly independent integer rows (exact, no floats)."""
    n = len(rows)
    if n == 0:
        return []
    p, q = delta.numerator, delta.denominator
    b = [None] + [list(r) for r in rows]
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l]:
            r = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= r * d[l]
            for i in range(1, l):
                lam[k][i] -= r * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    d[1] = dot(b[1], b[1])
    if d[1] == 0:
        raise DomainError("rows are linearly dependent")
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(b[k], b[j])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise DomainError("rows are linearly dependent")
                    d[k] = u
        red(k, k - 1)
        if q * d[k] * d[k - 2] < p * d[k - 1] ** 2 - q * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return b[1:]


def _echelon(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row echelon form over Z with positive pivots (a Hermite-style basis)."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    out = []
    for col in range(len(rows[0])):
        if not rows:
            break
        while True:
            nz = [r for r in rows if r[col]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not piv:
                    t = r[col] // piv[col]
                    r[:] = [x - t * y for x, y in zip(r, piv)]
        if nz:
            piv = nz[0]
            rows = [r for r in rows if r is not piv]
            out.append(piv if piv[col] > 0 else [-x for x in piv])
        rows = [r for r in rows if any(r)]
    return out


def _lattice_points_in_box(basis: Sequence[Sequence[int]], box: Sequence[int]) -> list[tuple]:
    ech = _echelon(basis)
    if not ech:
        return []
    n = len(box)
    pivots = [next(i for i, x in enumerate(r) if x) for r in ech]
    out = []

    def rec(k, v):
        if k == len(ech):
            if any(v) and all(abs(x) <= b for x, b in zip(v, box)):
                out.append(tuple(v))
            return
        col, h = pivots[k], ech[k]
        lo = -((box[col] + v[col]) // h[col])
        hi = (box[col] - v[col]) // h[col]
        for c in range(lo, hi + 1):
            rec(k + 1, [x + c * y for x, y in zip(v, h)] if c else v)

    rec(0, [0] * n)
    return out


def _canonical(a) -> tuple:
    a = tuple(int(x) for x in a)
    first = next((x for x in a if x), 0)
    return tuple(-x for x in a) if first < 0 else a


# ---------------------------------------------------------------------------
# detection


def _boxes(box, n) -> list[int]:
    if isinstance(box, int):
        return [box] * n
    box = [int(b) for b in box]
    if len(box) != n:
        raise DomainError("box must have one bound per value")
    return box


def _log_arg(b: Ball):
    if b.contains_zero():
        raise ZeroInput("value ball contains zero")
    two_pi = 2 * mpmath.pi
    a = mpmath.arg(b.mid)
    if a < 0:
        a += two_pi
    if a >= two_pi:
        a -= two_pi
    return mpmath.log(abs(b.mid)), a


def _residual_small(a, logs, args, thr) -> bool:
    two_pi = 2 * mpmath.pi
    r1 = mpmath.fsum(x * l for x, l in zip(a, logs))
    r2 = mpmath.fsum(x * t for x, t in zip(a, args))
    r2 = r2 - two_pi * mpmath.nint(r2 / two_pi)
    return abs(r1) <= thr and abs(r2) <= thr


def detect_relations(values, box, ctx: PrecisionCtx | None = None, all_in_box: bool = False) -> list[tuple]:
    """Candidate exponent vectors ``a`` with ``prod v^a`` numerically 1.

    With ``all_in_box`` every nonzero vector of the detected relation lattice
    inside the box is returned (one per sign pair); otherwise only the reduced
    basis vectors that fit. Candidates are not verified.
    """
    ctx = ctx or PrecisionCtx()
    vals = [coerce_value(v) for v in values]
    n = len(vals)
    if n == 0:
        return []
    box = _boxes(box, n)
    bits = ctx.bits
    with mpmath.workprec(bits + 32):
        balls = [v.evaluate(bits) for v in vals]
        la = [_log_arg(b) for b in balls]
        # log and arg errors of each value are about rad/|mid|
        eps = max(b.rad / abs(b.mid) for b in balls) + mpmath.mpf(2) ** (-bits)
        logs = [x for x, _ in la]
        args = [t for _, t in la]
        scale = mpmath.mpf(2) ** ((3 * bits) // 4)
        rows = []
        for i in range(n):
            rows.append([int(k == i) for k in range(n)]
                        + [int(mpmath.nint(scale * logs[i])), int(mpmath.nint(scale * args[i]))])
        rows.append([0] * n + [0, int(mpmath.nint(scale * 2 * mpmath.pi))])
        reduced = lll_reduce(rows)
        rel = [r[:n] for r in reduced
               if any(r[:n]) and _residual_small(r[:n], logs, args, 64 * eps * (1 + sum(map(abs, r[:n]))))]
        if not rel:
            return []
        if all_in_box:
            pts = _lattice_points_in_box(rel, box)
            return sorted({_canonical(a) for a in pts}, key=lambda a: (max(map(abs, a)), a))
        out = [_canonical(a) for a in rel if all(abs(x) <= b for x, b in zip(a, box))]
        if not out:
            pts = _lattice_points_in_box(rel, box)
            out = sorted({_canonical(a) for a in pts}, key=lambda a: (max(map(abs, a)), a))[:len(rel)]
        return out


# ---------------------------------------------------------------------------
# verification


@dataclass
class RelationCertificate:
    """``prod values^exponents = prod gamma_values^gamma_exponents`` with a verdict."""

    values: list
    exponents: list
    gamma_values: list = field(default_factory=list)
    gamma_exponents: list = field(default_factory=list)
    residual_bound: str = "inf"
    liouville_gap: str = "0"
    verdict: str = UNDECIDED
    bits: int = 0
    reason: str = ""
    box: list | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RelationCertificate":
        return cls(**d)


def _gap_log(vals, exps, gvals, gexps):
    """Natural log of the Liouville gap, or None when height data is missing."""
    used = [(v, a) for v, a in zip(vals, exps) if a] + [(g, a) for g, a in zip(gvals, gexps) if a]
    if any(v.height is None for v, _ in used):
        return None
    hsum = sum(abs(a) * v.height.h for v, a in used)
    D = _degree_bound([v for v, _ in used])
    return -D * (hsum + _LOG2)


def _residual(vals, exps, gvals, gexps, bits) -> Ball:
    with mpmath.workprec(bits + 32):
        acc = Ball(1)
        for v, a in zip(vals, exps):
            if a:
                acc = acc * v.evaluate(bits) ** int(a)
        for g, a in zip(gvals, gexps):
            if a:
                acc = acc * g.evaluate(bits) ** (-int(a))
        return acc - 1


def verify_relation(values, exponents, gamma_values=(), gamma_exponents=(), ctx: PrecisionCtx | None = None,
                    max_bits: int = _MAX_BITS, box=None) -> RelationCertificate:
    """Certify or refute ``prod v^a = prod b^alpha`` by the Liouville gap."""
    ctx = ctx or PrecisionCtx()
    vals = [coerce_value(v) for v in values]
    gvals = [coerce_value(g) for g in gamma_values]
    exps = [int(a) for a in exponents]
    gexps = [int(a) for a in gamma_exponents]
    if len(exps) != len(vals) or len(gexps) != len(gvals):
        raise DomainError("exponent and value counts differ")
    if not any(exps):
        raise PreconditionViolated("exponents on the values block are all zero")
    cert = RelationCertificate([v.desc for v in vals], exps, [g.desc for g in gvals], gexps,
                               box=list(box) if box is not None else None)
    log_gap = _gap_log(vals, exps, gvals, gexps)
    if log_gap is not None:
        cert.liouville_gap = mpmath.nstr(mpmath.exp(log_gap), 10)
        need = int(-log_gap / _LOG2) + 64
    else:
        need = 2 * ctx.bits
    bits = ctx.bits
    top = min(max_bits, max(need, ctx.bits) if log_gap is not None else 4 * ctx.bits)
    while True:
        try:
            r = _residual(vals, exps, gvals, gexps, bits)
        except ZeroDivisionError as exc:
            raise ZeroInput(str(exc)) from exc
        cert.bits = bits
        with mpmath.workprec(bits + 32):
            if not r.contains_zero():
                cert.verdict = REFUTED
                cert.residual_bound = mpmath.nstr(r.abs_lower(), 10)
                cert.reason = "residual exceeds its error radius"
                return cert
            cert.residual_bound = mpmath.nstr(r.abs_upper(), 10)
            if log_gap is not None and mpmath.log(r.abs_upper()) < log_gap:
                cert.verdict = VERIFIED
                cert.reason = "residual below the Liouville gap"
                return cert
        if bits >= top:
            break
        bits = min(top, max(2 * bits, need if log_gap is not None else 0))
    cert.verdict = UNDECIDED
    cert.reason = ("missing height or degree data" if log_gap is None
                   else "precision cap reached before the Liouville gap")
    return cert


def relations_in_box(values, box, ctx: PrecisionCtx | None = None) -> list[RelationCertificate]:
    """Detect every candidate in the box and verify each."""
    ctx = ctx or PrecisionCtx()
    vals = [coerce_value(v) for v in values]
    b = _boxes(box, len(vals))
    return [verify_relation(vals, a, ctx=ctx, box=b) for a in detect_relations(vals, b, ctx, all_in_box=True)]


def replay_certificate(cert, bits: int | None = None) -> RelationCertificate:
    """Re-run verification from the stored descriptors (default: doubled bits)."""
    if isinstance(cert, dict):
        cert = RelationCertificate.from_dict(cert)
    bits = bits or 2 * max(cert.bits, 64)
    return verify_relation(cert.values, cert.exponents, cert.gamma_values, cert.gamma_exponents,
                           ctx=_ctx_at(max(bits, 128)), box=cert.box)


# ---------------------------------------------------------------------------
# minimal dependent subsets


@dataclass
class MinimalSubset:
    indices: tuple
    exponents: tuple
    verdict: str
    queries: list = field(default_factory=list)


def minimal_dependent_subset(values, relation, oracle: Callable) -> MinimalSubset:
    """Shrink a relation with a nonzero first exponent to a minimal dependent set.

    ``oracle(indices)`` returns a :class:`RelationCertificate` whose exponents
    are aligned with ``indices`` when that subset is dependent, or ``None``.
    Eliminating an element x_m between the current relation a and an oracle
    relation b (with b_1 = 0) uses ``b_m a - a_m b``, which keeps the first
    exponent nonzero.
    """
    a = [int(x) for x in relation]
    if len(a) != len(values):
        raise DomainError("relation length differs from the number of values")
    if not a or a[0] == 0:
        raise PreconditionViolated("the witnessed relation needs a nonzero first exponent")
    rel = {i: x for i, x in enumerate(a) if x}
    queries = []
    while True:
        S = sorted(rel)
        if len(S) == 1:
            return MinimalSubset(tuple(S), tuple(rel[i] for i in S), VERIFIED, queries)
        step = None
        for k in S[1:] + S[:1]:
            sub = tuple(i for i in S if i != k)
            ans = oracle(sub)
            queries.append({"subset": list(sub), "verdict": None if ans is None else ans.verdict})
            if ans is None or ans.verdict == REFUTED:
                continue
            if ans.verdict != VERIFIED:
                return MinimalSubset(tuple(S), tuple(rel[i] for i in S), UNDECIDED, queries)
            b = {i: int(x) for i, x in zip(sub, ans.exponents) if x}
            if 0 in b:
                step = b
            else:
                m = min(b)
                new = {i: b[m] * rel.get(i, 0) - rel[m] * b.get(i, 0) for i in S}
                step = {i: x for i, x in new.items() if x}
            break
        if step is None:
            return MinimalSubset(tuple(S), tuple(rel[i] for i in S), VERIFIED, queries)
        g = 0
        for x in step.values():
            g = math.gcd(g, x)
        rel = {i: x // g for i, x in step.items()}


def box_oracle(values, box, ctx: PrecisionCtx | None = None) -> Callable:
    """Subset oracle backed by detect + verify within a fixed box."""
    ctx = ctx or PrecisionCtx()
    vals = [coerce_value(v) for v in values]

    def oracle(indices):
        sub = [vals[i] for i in indices]
        b = _boxes(box, len(vals))
        sb = [b[i] for i in indices]
        pending = None
        for a in detect_relations(sub, sb, ctx, all_in_box=True):
            cert = verify_relation(sub, a, ctx=ctx, box=sb)
            if cert.verdict == VERIFIED:
                return cert
            if cert.verdict == UNDECIDED:
                pending = cert
        return pending

    return oracle


# ---------------------------------------------------------------------------
# Gamma-dependence


def gamma_dependence(values, generators, box, ctx: PrecisionCtx | None = None,
                     gamma_box=None) -> RelationCertificate | None:
    """Smallest verified ``prod values^a = prod generators^alpha`` with a != 0."""
    ctx = ctx or PrecisionCtx()
    vals = [coerce_value(v) for v in values]
    gens = [coerce_value(g) for g in generators]
    n, k = len(vals), len(gens)
    vb = _boxes(box, n)
    gb = _boxes(gamma_box if gamma_box is not None else max(vb), k) if k else []
    cands = detect_relations(vals + gens, vb + gb, ctx, all_in_box=True)
    cands = [c for c in cands if any(c[:n])]
    cands.sort(key=lambda c: (sum(map(abs, c)), c))
    pending = None
    for c in cands:
        a, alpha = list(c[:n]), [-x for x in c[n:]]
        cert = verify_relation(vals, a, gens, alpha, ctx=ctx, box=vb + gb)
        if cert.verdict == VERIFIED:
            return cert
        if cert.verdict == UNDECIDED and pending is None:
            pending = cert
    return pending


# ---------------------------------------------------------------------------
# search over f-special points


@dataclass
class SearchReport:
    certificates: list
    coverage: dict


def _valid_discs(max_disc: int) -> list[int]:
    return [D for D in range(-3, -max_disc - 1, -1) if D % 4 in (0, 1)]


def _special_values(f: ModularFunction, max_disc: int, ctx: PrecisionCtx, coverage: dict):
    from .specialpoints import f_special_points

    pts = []
    for D in _valid_discs(max_disc):
        try:
            found = f_special_points(f, D, ctx)
        except PoleAtSpecialPoint as exc:
            found = exc.partial
            coverage["poles"].append(D)
        except ModmultError as exc:
            coverage["errors"].append({"disc": D, "error": f"{type(exc).__name__}: {exc}"})
            continue
        coverage["discs"].append(D)
        for p in found:
            if any(p.value.overlaps(q.value) for q, _ in pts):
                continue
            src = min(p.preimages, key=lambda s: -s.disc)
            pts.append((p, AlgebraicValue.special(f, src.disc, src.form)))
    return pts


def _tuple_box(vals, n, cn, box_cap):
    hs = [max(v.height.h, 1.0) for v in vals]
    d = max(2, _degree_bound(vals))
    return [max(1, min(box_cap, math.ceil(b))) for b in exponent_bound(n, d, hs, cn)]


def _scan_tuple(job):
    descs, gdescs, cn, box_cap, bits = job
    ctx = _ctx_at(bits)
    vals = [AlgebraicValue(d) for d in descs]
    gens = [AlgebraicValue(d) for d in gdescs]
    n = len(vals)
    if any(v.height is None for v in vals):
        return [], 1
    box = _tuple_box(vals, n, cn, box_cap)
    if gens:
        cert = gamma_dependence(vals, gens, box, ctx)
        if cert is None:
            return [], 0
        if cert.verdict != VERIFIED:
            return [], 1
        return ([cert] if all(cert.exponents) else []), 0
    certs, undecided = [], 0
    for a in detect_relations(vals, box, ctx):
        cert = verify_relation(vals, a, ctx=ctx, box=box)
        if cert.verdict == UNDECIDED:
            undecided += 1
        if cert.verdict != VERIFIED or not all(a):
            continue
        if n > 1:
            sub = minimal_dependent_subset(vals, a, box_oracle(vals, box, ctx))
            if sub.verdict != VERIFIED:
                undecided += 1
                continue
            if len(sub.indices) != n:
                continue
        certs.append(cert)
    return certs, undecided


def search_dependent_tuples(f: ModularFunction, n: int, max_disc: int, gamma=None,
                            ctx: PrecisionCtx | None = None, cn: float = 1.0, box_cap: int = 50,
                            workers: int = 1) -> SearchReport:
    """Verified minimal (Gamma-)dependences among n distinct f-special points."""
    ctx = ctx or PrecisionCtx()
    if n < 1 or max_disc < 3:
        raise DomainError("need n >= 1 and max_disc >= 3")
    coverage = {"discs": [], "poles": [], "errors": [], "points": 0, "zero_points": 0,
                "tuples": 0, "undecided": 0, "box_cap": box_cap, "cn": cn}
    pts = _special_values(f, max_disc, ctx, coverage)
    usable = []
    for p, v in pts:
        if p.value.contains_zero():
            coverage["zero_points"] += 1
        else:
            usable.append(v)
    coverage["points"] = len(pts)
    gdescs = [coerce_value(g).desc for g in (gamma or [])]
    jobs = [([v.desc for v in combo], gdescs, cn, box_cap, ctx.bits)
            for combo in itertools.combinations(usable, n)]
    coverage["tuples"] = len(jobs)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_tuple, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_scan_tuple(job) for job in jobs]
    certs = []
    for found, undecided in results:
        certs.extend(found)
        coverage["undecided"] += undecided
    return SearchReport(certs, coverage)
