"""Exact truncated Laurent series in the nome q.

A :class:`LaurentSeries` is ``q**offset * sum(c[i] * q**(lo + i))`` with the
coefficients known for exponents ``lo .. order`` and unknown beyond.
Coefficients are exact rationals, stored as integer numerators over one
common denominator so that long integral expansions multiply quickly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import gmpy2

from .errors import DegenerateLeading, DomainError, EmptyWindow, NotAProductForm

__all__ = [
    "LaurentSeries",
    "HurwitzTable",
    "eta_quotient",
    "euler_product",
    "theta_series",
    "eisenstein_E4",
    "eisenstein_E6",
    "delta_series",
    "j_series",
    "hurwitz_H",
    "hurwitz_table",
    "hurwitz_series",
    "peel_product_exponents",
    "product_expansion",
]


# ---------------------------------------------------------------------------
# integer kernels

_KRONECKER_MIN = 24


def _mul_naive(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                if y:
                    out[i + j] += x * y
    return out


def _mul_int(a, b, n):
    """First ``n`` coefficients of the product of two integer lists."""
    a = a[:n]
    b = b[:n]
    if n <= 0:
        return []
    if not a or not b:
        return [0] * n
    if min(len(a), len(b)) < _KRONECKER_MIN:
        return _mul_naive(a, b, n)
    ma = max(abs(x) for x in a)
    mb = max(abs(x) for x in b)
    if ma == 0 or mb == 0:
        return [0] * n
    # Kronecker substitution with byte-aligned slots wide enough for any
    # signed product coefficient.
    bound = ma * mb * min(len(a), len(b))
    kb = (bound.bit_length() + 2 + 7) // 8 + 1

    def pack(v):
        pos = b"".join((x if x > 0 else 0).to_bytes(kb, "little") for x in v)
        neg = b"".join((-x if x < 0 else 0).to_bytes(kb, "little") for x in v)
        return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))

    prod = pack(a) * pack(b)
    m = min(len(a) + len(b) - 1, n)
    half = 1 << (8 * kb - 1)
    bias = int.from_bytes(half.to_bytes(kb, "little") * (len(a) + len(b) - 1), "little")
    buf = (int(prod) + bias).to_bytes(kb * (len(a) + len(b)), "little")
    out = [int.from_bytes(buf[i * kb:(i + 1) * kb], "little") - half for i in range(m)]
    return out + [0] * (n - m)


def _inv_int(a, n):
    """First ``n`` coefficients of 1/a for an integer list with a[0] == 1."""
    g = [1]
    k = 1
    while k < n:
        k = min(2 * k, n)
        e = _mul_int(a, g, k)
        e = [-x for x in e]
        e[0] += 2
        g = _mul_int(g, e, k)
    return g[:n]


def _pow_int(a, e, n):
    """a**e truncated to n terms; a[0] must be 1 when e < 0."""
    if e < 0:
        a = _inv_int(a, n)
        e = -e
    result = [1] + [0] * (n - 1)
    base = list(a[:n]) + [0] * max(0, n - len(a))
    while e:
        if e & 1:
            result = _mul_int(result, base, n)
        e >>= 1
        if e:
            base = _mul_int(base, base, n)
    return result


def _lcm(a, b):
    return a // math.gcd(a, b) * b


# ---------------------------------------------------------------------------
# the series type


class LaurentSeries:
    """Truncated Laurent series with exact rational coefficients.

    ``LaurentSeries([1, -24, 252], lo=1, offset=0)`` is
    ``q - 24 q^2 + 252 q^3 + O(q^4)``.  Values are immutable.
    """

    __slots__ = ("offset", "lo", "order", "_num", "_den")

    def __init__(self, coeffs: Iterable = (), lo: int = 0, order: int | None = None, offset=0):
        fr = [Fraction(c) for c in coeffs]
        if order is None:
            order = lo + len(fr) - 1
        n = order - lo + 1
        if n < 0:
            raise EmptyWindow(f"order {order} lies below lo {lo}")
        fr = fr[:n] + [Fraction(0)] * (n - len(fr))
        den = 1
        for c in fr:
            den = _lcm(den, c.denominator)
        nums = tuple(c.numerator * (den // c.denominator) for c in fr)
        self._set(Fraction(offset), lo, order, nums, den)

    def _set(self, offset, lo, order, nums, den):
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_num", nums)
        object.__setattr__(self, "_den", den)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentSeries is immutable")

    @classmethod
    def _from_ints(cls, nums, den, lo, order, offset=Fraction(0)):
        obj = cls.__new__(cls)
        nums = tuple(nums)
        if den != 1 and nums:
            g = den
            for x in nums:
                if g == 1:
                    break
                g = math.gcd(g, x)
            if g > 1:
                nums = tuple(x // g for x in nums)
                den //= g
        if den < 0:
            nums = tuple(-x for x in nums)
            den = -den
        obj._set(Fraction(offset), lo, order, nums, den)
        return obj

    @classmethod
    def monomial(cls, coeff, exponent: int, order: int, offset=0) -> "LaurentSeries":
        return cls([coeff], lo=exponent, order=order, offset=offset)

    # -- access -----------------------------------------------------------

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(x, self._den) for x in self._num)

    @property
    def is_integral(self) -> bool:
        return self._den == 1

    def integer_coeffs(self) -> list[int]:
        if self._den != 1:
            raise DomainError("series has non-integral coefficients")
        return list(self._num)

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficient(n)

    def coefficient(self, n: int) -> Fraction:
        if n > self.order:
            raise DomainError(f"coefficient at q^{n} is beyond the truncation order {self.order}")
        if n < self.lo:
            return Fraction(0)
        return Fraction(self._num[n - self.lo], self._den)

    def valuation(self) -> int | None:
        """Least exponent with a nonzero known coefficient (offset excluded)."""
        for i, x in enumerate(self._num):
            if x:
                return self.lo + i
        return None

    def leading_coefficient(self) -> Fraction:
        v = self.valuation()
        if v is None:
            raise DegenerateLeading("no nonzero coefficient within the known range")
        return self.coefficient(v)

    def items(self):
        for i, x in enumerate(self._num):
            yield self.lo + i, Fraction(x, self._den)

    # -- normalisation ----------------------------------------------------

    def normalized(self) -> "LaurentSeries":
        """Move the integer part of the offset into the exponents and strip
        known leading zeros, so that ``0 <= offset < 1``."""
        shift = math.floor(self.offset)
        v = self.valuation()
        start = v if v is not None else self.order + 1
        nums = self._num[start - self.lo:]
        return LaurentSeries._from_ints(nums, self._den, start + shift, self.order + shift,
                                        self.offset - shift)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``q**k``."""
        return LaurentSeries._from_ints(self._num, self._den, self.lo + k, self.order + k, self.offset)

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.order:
            raise DomainError(f"cannot extend a series known through {self.order} to {order}")
        n = max(0, order - self.lo + 1)
        lo = self.lo if n else order + 1
        return LaurentSeries._from_ints(self._num[:n], self._den, lo, order, self.offset)

    def _aligned_to(self, offset) -> "LaurentSeries":
        d = self.offset - offset
        if d.denominator != 1:
            raise DomainError(f"offsets {self.offset} and {offset} differ by a non-integer")
        d = int(d)
        return LaurentSeries._from_ints(self._num, self._den, self.lo + d, self.order + d, offset)

    # -- comparison -------------------------------------------------------

    def _key(self):
        s = self.normalized()
        return (s.offset, s.lo, s.order, s._num, s._den)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def agrees_with(self, other: "LaurentSeries", order: int | None = None) -> bool:
        """Coefficient-wise equality through ``order`` (default: common order)."""
        other = other._aligned_to(self.offset)
        top = min(self.order, other.order) if order is None else order
        if top > self.order or top > other.order:
            raise DomainError("requested comparison order exceeds a truncation order")
        lo = min(self.lo, other.lo)
        return all(self.coefficient(n) == other.coefficient(n) for n in range(lo, top + 1))

    def __repr__(self):
        terms = []
        for e, c in self.items():
            if c:
                terms.append(f"{c}*q^{e}")
            if len(terms) >= 6:
                terms.append("...")
                break
        pre = f"q^({self.offset})*" if self.offset else ""
        return f"{pre}({' + '.join(terms) or '0'} + O(q^{self.order + 1}))"

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return LaurentSeries._from_ints([-x for x in self._num], self._den, self.lo, self.order, self.offset)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _scalar_like(other, self)
        other = other._aligned_to(self.offset)
        lo = min(self.lo, other.lo)
        order = min(self.order, other.order)
        if order < lo:
            return LaurentSeries._from_ints((), 1, order + 1, order, self.offset)
        den = _lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        out = []
        for n in range(lo, order + 1):
            x = self._num[n - self.lo] * fa if self.lo <= n else 0
            y = other._num[n - other.lo] * fb if other.lo <= n <= other.order else 0
            out.append(x + y)
        return LaurentSeries._from_ints(out, den, lo, order, self.offset)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _scalar_like(other, self)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, c) -> "LaurentSeries":
        c = Fraction(c)
        return LaurentSeries._from_ints([x * c.numerator for x in self._num], self._den * c.denominator,
                                        self.lo, self.order, self.offset)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self._scale(other)
        va = self.valuation()
        vb = other.valuation()
        ea = va if va is not None else self.order + 1
        eb = vb if vb is not None else other.order + 1
        order = min(self.order + eb, other.order + ea)
        start = ea + eb
        offset = self.offset + other.offset
        n = order - start + 1
        if n <= 0:
            return LaurentSeries._from_ints((), 1, order + 1, order, offset)
        a = list(self._num[ea - self.lo:])
        b = list(other._num[eb - other.lo:])
        return LaurentSeries._from_ints(_mul_int(a, b, n), self._den * other._den, start, order, offset)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        v = self.valuation()
        if v is None:
            raise DegenerateLeading("leading coefficient is zero throughout the known range")
        rel = self.order - v
        a = list(self._num[v - self.lo:])
        lead = a[0]
        n = rel + 1
        if all(x % lead == 0 for x in a):
            unit = [x // lead for x in a]
            if unit[0] == 1:
                inv = _inv_int(unit, n)
                return LaurentSeries._from_ints(inv, 1, -v, self.order - 2 * v, -self.offset)._scale(
                    Fraction(self._den, lead))
        # rational fallback: g_0 = 1/a_0, g_m = -(sum a_k g_{m-k}) / a_0
        af = [Fraction(x, self._den) for x in a]
        g = [1 / af[0]]
        for m in range(1, n):
            s = sum(af[k] * g[m - k] for k in range(1, min(m, len(af) - 1) + 1))
            g.append(-s / af[0])
        return LaurentSeries(g, lo=-v, order=self.order - 2 * v, offset=-self.offset)

    def __truediv__(self, other):
        if not isinstance(other, LaurentSeries):
            return self._scale(1 / Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        k = Fraction(k)
        if k.denominator == 1:
            k = int(k)
            if k < 0:
                return self.inverse() ** (-k)
            v = self.valuation()
            if v is None:
                raise DegenerateLeading("cannot raise a series with no known leading term")
            if k == 0:
                return LaurentSeries._from_ints([1], 1, 0, self.order - v)
            a = list(self._num[v - self.lo:])
            n = self.order - v + 1
            out = _pow_int(a, k, n)
            den = self._den ** k
            return LaurentSeries._from_ints(out, den, v * k, v * k + n - 1, self.offset * k)
        # rational exponent: leading coefficient must be 1
        v = self.valuation()
        if v is None or self.coefficient(v) != 1:
            raise DomainError("rational powers need a series with leading coefficient 1")
        unit = LaurentSeries._from_ints(self._num[v - self.lo:], self._den, 0, self.order - v)
        body = (unit.log() * k).exp()
        shift = v * k
        whole = math.floor(shift)
        return LaurentSeries._from_ints(body._num, body._den, body.lo + whole, body.order + whole,
                                        self.offset * k + (shift - whole))

    def log(self) -> "LaurentSeries":
        s = self.normalized()
        if s.offset != 0 or s.lo != 0 or s.order < 0 or s.coefficient(0) != 1:
            raise DomainError("log needs a series of the form 1 + O(q)")
        a = s.coeffs
        n = s.order + 1
        L = [Fraction(0)] * n
        for m in range(1, n):
            acc = m * a[m]
            for k in range(1, m):
                if L[k] and a[m - k]:
                    acc -= k * L[k] * a[m - k]
            L[m] = acc / m
        return LaurentSeries(L, lo=0, order=s.order)

    def exp(self) -> "LaurentSeries":
        s = self._aligned_to(Fraction(0)) if self.offset.denominator == 1 else None
        if s is None:
            raise DomainError("exp needs an integral offset")
        v = s.valuation()
        if s.order < 0 or (v is not None and v < 1):
            raise DomainError("exp needs a series with zero constant term and no negative powers")
        n = s.order + 1
        L = [s.coefficient(m) if m >= s.lo else Fraction(0) for m in range(n)]
        E = [Fraction(1)] + [Fraction(0)] * (n - 1)
        for m in range(1, n):
            acc = Fraction(0)
            for k in range(1, m + 1):
                if L[k]:
                    acc += k * L[k] * E[m - k]
            E[m] = acc / m
        return LaurentSeries(E, lo=0, order=s.order)

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"offset {self.offset}  lo {self.lo}  order {self.order}"]
        for e, c in self.items():
            lines.append(f"{e} {c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LaurentSeries":
        rows = [r for r in text.splitlines() if r.strip() and not r.lstrip().startswith("#")]
        if not rows:
            raise DomainError("empty series text")
        head = rows[0].split()
        if len(head) != 6 or head[0::2] != ["offset", "lo", "order"]:
            raise DomainError(f"bad series header: {rows[0]!r}")
        offset, lo, order = Fraction(head[1]), int(head[3]), int(head[5])
        coeffs = {}
        for r in rows[1:]:
            e, c = r.split()
            if "." in c or "e" in c.lower():
                raise DomainError(f"coefficient {c!r} is not an exact rational")
            coeffs[int(e)] = Fraction(c)
        return cls([coeffs.get(n, 0) for n in range(lo, order + 1)], lo=lo, order=order, offset=offset)


def _scalar_like(c, s: LaurentSeries) -> LaurentSeries:
    if s.offset.denominator != 1:
        raise DomainError("cannot add a constant to a series with fractional offset")
    # the constant 1 lives at exponent -offset in the frame of s
    e = -int(s.offset)
    c = Fraction(c)
    top = max(e, s.order)
    return LaurentSeries._from_ints([c.numerator] + [0] * (top - e), c.denominator, e, top, s.offset)


# ---------------------------------------------------------------------------
# standard series


@lru_cache(maxsize=64)
def _euler_ints(n: int) -> tuple:
    """prod_{k>=1} (1 - q^k) through q^(n-1), via the pentagonal theorem."""
    out = [0] * n
    k = 0
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= n and g2 >= n:
            break
        sign = -1 if k % 2 else 1
        if g1 < n:
            out[g1] += sign
        if k and g2 < n:
            out[g2] += sign
        k += 1
    return tuple(out)


def _eta_product_ints(m: int, e: int, n: int) -> list:
    base = [0] * n
    for i, c in enumerate(_euler_ints((n - 1) // m + 1)):
        if i * m < n:
            base[i * m] = c
    return _pow_int(base, e, n)


def euler_product(m: int, e: int, order: int) -> LaurentSeries:
    """prod_{n>=1} (1 - q^(m n))^e through q^order."""
    if order < 0:
        raise EmptyWindow("order must be non-negative")
    return LaurentSeries._from_ints(_eta_product_ints(m, e, order + 1), 1, 0, order)


def eta_quotient(spec, order: int) -> LaurentSeries:
    """Eta quotient ``prod eta(m z)^e`` for ``spec = [(m, e), ...]``.

    The returned series carries ``sum(m e)/24`` in its offset; the stored window
    is the integral product part, known through ``q**order``.
    """
    if order < 0:
        raise EmptyWindow(f"order {order} leaves no coefficient in the window")
    n = order + 1
    acc = [1] + [0] * order
    offset = Fraction(0)
    for m, e in spec:
        if m < 1:
            raise DomainError(f"eta level must be positive, got {m}")
        offset += Fraction(m * e, 24)
        if e:
            acc = _mul_int(acc, _eta_product_ints(m, e, n), n)
    return LaurentSeries._from_ints(acc, 1, 0, order, offset)


def theta_series(order: int) -> LaurentSeries:
    """sum over n in Z of q^(n^2)."""
    if order < 0:
        raise EmptyWindow("order must be non-negative")
    out = [0] * (order + 1)
    out[0] = 1
    k = 1
    while k * k <= order:
        out[k * k] = 2
        k += 1
    return LaurentSeries._from_ints(out, 1, 0, order)


def _sigma(k: int, n: int) -> list:
    s = [0] * n
    for d in range(1, n):
        p = d ** k
        for m in range(d, n, d):
            s[m] += p
    return s


def eisenstein_E4(order: int) -> LaurentSeries:
    s = _sigma(3, order + 1)
    return LaurentSeries._from_ints([1] + [240 * x for x in s[1:]], 1, 0, order)


def eisenstein_E6(order: int) -> LaurentSeries:
    s = _sigma(5, order + 1)
    return LaurentSeries._from_ints([1] + [-504 * x for x in s[1:]], 1, 0, order)


def delta_series(order: int) -> LaurentSeries:
    """Delta = q prod (1-q^n)^24 with integer exponents, known through q^order."""
    return eta_quotient([(1, 24)], order - 1).normalized()


@lru_cache(maxsize=16)
def j_series(order: int) -> LaurentSeries:
    """q^-1 + 744 + 196884 q + ... through q^order, computed as E4^3 / Delta."""
    if order < -1:
        raise EmptyWindow("j needs order >= -1")
    n = order + 1
    e4 = eisenstein_E4(n)
    delta = delta_series(n + 1)
    return (e4 ** 3 / delta).truncate(order)


@lru_cache(maxsize=8)
def _j_ints(order: int) -> tuple:
    return tuple(j_series(order).integer_coeffs())


def j_coefficients(order: int) -> tuple:
    """Integer coefficients c(-1), c(0), ..., c(order) of j, cached."""
    size = 64
    while size < order:
        size *= 2
    return _j_ints(size)[: order + 2]


# ---------------------------------------------------------------------------
# Hurwitz class numbers


class HurwitzTable(Mapping):
    """Read-only map ``n -> H(n)`` for ``0 <= n <= max_n``."""

    def __init__(self, max_n: int):
        if max_n < 0:
            raise DomainError("max_n must be non-negative")
        self.max_n = max_n
        self._values = {n: hurwitz_H(n) for n in range(max_n + 1)}

    def __getitem__(self, n):
        return self._values[n]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def to_text(self) -> str:
        return "".join(f"{n} {v}\n" for n, v in self._values.items())


@lru_cache(maxsize=4096)
def hurwitz_H(n: int) -> Fraction:
    """Hurwitz class number H(n), with H(0) = -1/12.

    Weighted count of reduced positive definite forms of discriminant -n,
    primitive or not; classes of a(x^2+y^2) count 1/2, of a(x^2+xy+y^2) 1/3.
    """
    from .quadforms import reduced_forms

    if n < 0:
        raise DomainError("H(n) needs n >= 0")
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    for a, b, c in reduced_forms(-n, primitive=False):
        if a == b == c:
            total += Fraction(1, 3)
        elif b == 0 and a == c:
            total += Fraction(1, 2)
        else:
            total += 1
    return total


def hurwitz_table(max_n: int) -> HurwitzTable:
    return HurwitzTable(max_n)


def hurwitz_series(order: int) -> LaurentSeries:
    """The generating series sum H(n) q^n through q^order."""
    return LaurentSeries([hurwitz_H(n) for n in range(order + 1)], lo=0, order=order)


# ---------------------------------------------------------------------------
# product expansions


def _divisor_sums(exponents: Mapping[int, int], order: int) -> list:
    s = [0] * (order + 1)
    for n, e in exponents.items():
        if n < 1:
            raise DomainError("product exponents are indexed by n >= 1")
        if e and n <= order:
            for m in range(n, order + 1, n):
                s[m] += n * e
    return s


def product_expansion(exponents: Mapping[int, int], order: int) -> LaurentSeries:
    """prod_{n>=1} (1 - q^n)^(e_n) through q^order, via its log-derivative."""
    if order < 0:
        raise EmptyWindow("order must be non-negative")
    s = _divisor_sums(exponents, order)
    g = [1] + [0] * order
    for m in range(1, order + 1):
        acc = 0
        for k in range(1, m + 1):
            if s[k]:
                acc -= s[k] * g[m - k]
        q, r = divmod(acc, m)
        assert r == 0
        g[m] = q
    return LaurentSeries._from_ints(g, 1, 0, order)


def peel_product_exponents(F: LaurentSeries) -> dict:
    """Recover ``{n: e_n}`` with ``F = c q^v prod (1-q^n)^(e_n)`` through F's order.

    Only nonzero exponents are returned. The exponents are determined one at a
    time from the log-derivative of F; a non-integral value at any step raises
    :class:`NotAProductForm`.
    """
    v = F.valuation()
    if v is None:
        raise NotAProductForm("series has no nonzero coefficient")
    lead = F.coefficient(v)
    unit = LaurentSeries._from_ints(F._num[v - F.lo:], F._den, 0, F.order - v) / lead
    N = unit.order
    if N < 1:
        return {}
    # s_m = -(q G'/G)_m = sum_{n | m} n e_n
    qdiff = LaurentSeries._from_ints([m * x for m, x in enumerate(unit._num)], unit._den, 0, N)
    logd = qdiff / unit
    s = [-logd.coefficient(m) for m in range(N + 1)]
    e = {}
    for n in range(1, N + 1):
        acc = s[n] - sum(d * e.get(d, 0) for d in range(1, n // 2 + 1) if n % d == 0)
        val = acc / n
        if val.denominator != 1:
            raise NotAProductForm(f"exponent at n={n} would be {val}")
        if val:
            e[n] = int(val)
    return e
