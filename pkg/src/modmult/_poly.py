"""Exact Gaussian rationals and dense univariate polynomials over them.

Polynomials are lists of coefficients in ascending degree.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction

import mpmath

from .errors import DomainError


class QQi:
    """Exact Gaussian rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, QQi):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        o = _q(o)
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-_q(o))

    def __rsub__(self, o):
        return _q(o) - self

    def __mul__(self, o):
        o = _q(o)
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def __truediv__(self, o):
        o = _q(o)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        p = self * o.conjugate()
        return QQi(p.re / n, p.im / n)

    def __rtruediv__(self, o):
        return _q(o) / self

    def __eq__(self, o):
        try:
            o = _q(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def to_mpc(self):
        return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                          mpmath.mpf(self.im.numerator) / self.im.denominator)

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _q(x) -> QQi:
    if isinstance(x, QQi):
        return x
    if isinstance(x, (int, Fraction, complex)):
        return QQi(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to QQi")


def parse_coefficient(text: str) -> tuple[QQi, int | None]:
    """Parse ``p/q``, ``p/q+r/s i`` or decimal forms.

    Returns the exact value and, for decimal literals, the number of
    significant digits carried (``None`` for exact rationals).
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise DomainError("empty coefficient")
    digits = None
    if s.endswith("i"):
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        cut = None
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                cut = k
                break
        if cut is None:
            re_part, im_part = "0", body or "1"
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("+", "-", ""):
            im_part += "1"
    else:
        re_part, im_part = s, "0"
    vals = []
    for part in (re_part, im_part):
        v, dg = _parse_real(part)
        vals.append(v)
        if dg is not None:
            digits = dg if digits is None else min(digits, dg)
    return QQi(vals[0], vals[1]), digits


def _parse_real(s: str):
    if "/" in s or ("." not in s and "e" not in s.lower()):
        try:
            return Fraction(s), None
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad rational {s!r}") from exc
    try:
        d = Decimal(s)
    except InvalidOperation as exc:
        raise DomainError(f"bad decimal {s!r}") from exc
    digits = len(d.as_tuple().digits)
    return Fraction(d), digits


# ---------------------------------------------------------------------------
# polynomials


def strip(p: list) -> list:
    p = [_q(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return p


def degree(p: list) -> int:
    return len(strip(p)) - 1


def padd(p, q):
    n = max(len(p), len(q))
    return strip([(p[k] if k < len(p) else QQi()) + (q[k] if k < len(q) else QQi()) for k in range(n)])


def pscale(p, c):
    return strip([x * c for x in p])


def pmul(p, q):
    if not p or not q:
        return []
    out = [QQi() for _ in range(len(p) + len(q) - 1)]
    for i, x in enumerate(p):
        if x:
            for k, y in enumerate(q):
                out[i + k] = out[i + k] + x * y
    return strip(out)


def pdivmod(p, q):
    p = strip(p)
    q = strip(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    lead = q[-1]
    quot = [QQi() for _ in range(max(0, len(p) - len(q) + 1))]
    r = list(p)
    while len(r) >= len(q) and r:
        c = r[-1] / lead
        k = len(r) - len(q)
        quot[k] = c
        for i, y in enumerate(q):
            r[k + i] = r[k + i] - c * y
        r = strip(r)
    return strip(quot), r


def monic(p):
    p = strip(p)
    if not p:
        return p
    return [c / p[-1] for c in p]


def pgcd(p, q):
    a, b = strip(p), strip(q)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return monic(a)


def pderiv(p):
    return strip([p[k] * k for k in range(1, len(p))])


def squarefree_factors(p) -> list[tuple[list, int]]:
    """Yun's algorithm: ``p = c * prod f_k^k`` with squarefree coprime ``f_k``."""
    p = monic(p)
    if len(p) <= 1:
        return []
    out = []
    dp = pderiv(p)
    a = pgcd(p, dp)
    b = pdivmod(p, a)[0]
    c = pdivmod(dp, a)[0]
    d = padd(c, pscale(pderiv(b), QQi(-1)))
    k = 1
    while len(b) > 1:
        a = pgcd(b, d)
        if len(a) > 1:
            out.append((a, k))
        b = pdivmod(b, a)[0]
        c = pdivmod(d, a)[0]
        d = padd(c, pscale(pderiv(b), QQi(-1)))
        k += 1
    return out


def peval(p, z):
    acc = mpmath.mpc(0)
    for c in reversed(p):
        acc = acc * z + c.to_mpc()
    return acc
