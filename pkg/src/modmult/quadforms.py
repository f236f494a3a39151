"""Positive definite binary quadratic forms and points of the upper half-plane.

Forms ``(a, b, c)`` are attached to the point ``(b + sqrt(b^2 - 4ac)) / (2a)``,
the root of ``a z^2 - b z + c`` in the upper half-plane.  Exact quadratic
points are :class:`QuadSurd` values ``x + y sqrt(D)`` with ``D < 0`` squarefree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import InvalidDiscriminant, NotQuadratic, UndecidedBoundary

__all__ = [
    "Disc",
    "QuadForm",
    "QuadPoint",
    "QuadSurd",
    "reduced_forms",
    "enumerate_T",
    "class_number",
    "form_to_point",
    "discriminant_of_point",
    "reduce_to_Fj",
    "in_Fj",
    "recognize_quadratic",
    "squarefree_decomposition",
]

Matrix = tuple  # ((a, b), (c, d))
IDENTITY = ((1, 0), (0, 1))


def _matmul(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Write ``n = s * t^2`` with ``s`` squarefree (sign kept on ``s``).

    Trial division runs to the cube root; what remains has at most two prime
    factors, so it is either a square or squarefree.
    """
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, t = 1, 1
    p = 2
    while p * p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            t *= p ** (e // 2)
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(n)
    if r * r == n and n > 1:
        t *= r
    else:
        s *= n
    return sign * s, t


# ---------------------------------------------------------------------------
# discriminants and forms


@dataclass(frozen=True)
class Disc:
    value: int

    def __post_init__(self):
        _check_disc(self.value)

    def __int__(self):
        return self.value


def _check_disc(D) -> int:
    D = int(D)
    if D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminant(f"{D} is not a negative discriminant")
    return D


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        return (-a < b <= a < c) or (0 <= b <= a == c)

    def point(self) -> "QuadSurd":
        return form_to_point(self)

    def __iter__(self):
        return iter((self.a, self.b, self.c))


@dataclass(frozen=True)
class QuadPoint:
    form: QuadForm
    disc: int

    @property
    def tau(self) -> "QuadSurd":
        return form_to_point(self.form)

    @property
    def imag_squared(self) -> Fraction:
        return Fraction(-self.disc, 4 * self.form.a * self.form.a)


@lru_cache(maxsize=2048)
def _reduced(D: int, primitive: bool) -> tuple:
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if primitive and math.gcd(a, b, c) != 1:
                continue
            out.append(QuadForm(a, b, c))
    return tuple(out)


def reduced_forms(D, primitive: bool = True) -> list[QuadForm]:
    """Reduced forms of discriminant D sorted by (a, b)."""
    return list(_reduced(_check_disc(D), primitive))


def enumerate_T(D) -> list[QuadForm]:
    """Reduced primitive triples of discriminant D, one per j-special point."""
    return reduced_forms(D, primitive=True)


def class_number(D) -> int:
    return len(_reduced(_check_disc(D), True))


# ---------------------------------------------------------------------------
# exact quadratic points


class QuadSurd:
    """``x + y*sqrt(D)`` with rational x, y and squarefree ``D < 0``.

    Values with ``y == 0`` are allowed (real rationals); the sign of ``y`` is
    kept so that ``y > 0`` means the upper half-plane.
    """

    __slots__ = ("x", "y", "D")

    def __init__(self, x, y=0, D: int = -1):
        x, y = Fraction(x), Fraction(y)
        if D >= 0:
            raise NotQuadratic("QuadSurd needs a negative radicand")
        s, t = squarefree_decomposition(D)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y * t if y else Fraction(0))
        object.__setattr__(self, "D", s if y else -1)

    def __setattr__(self, k, v):
        raise AttributeError("QuadSurd is immutable")

    @classmethod
    def from_re_imsq(cls, re, im_sq) -> "QuadSurd":
        """Point with real part ``re`` and squared imaginary part ``im_sq``."""
        re, im_sq = Fraction(re), Fraction(im_sq)
        if im_sq <= 0:
            raise NotQuadratic("imaginary part must be positive")
        p, q = im_sq.numerator, im_sq.denominator
        s, t = squarefree_decomposition(p * q)
        return cls(re, Fraction(t, q), -s)

    @property
    def real(self) -> Fraction:
        return self.x

    @property
    def imag_squared(self) -> Fraction:
        return self.y * self.y * (-self.D)

    @property
    def abs_squared(self) -> Fraction:
        return self.x * self.x + self.imag_squared

    def conjugate(self) -> "QuadSurd":
        return QuadSurd(self.x, -self.y, self.D)

    def act(self, g: Matrix) -> "QuadSurd":
        """Mobius action of an integer matrix of determinant 1."""
        (a, b), (c, d) = g
        x, y, D = self.x, self.y, self.D
        nx = c * x + d
        norm = nx * nx - c * c * y * y * D
        if norm == 0:
            raise ZeroDivisionError("point is mapped to infinity")
        re = ((a * x + b) * nx - a * c * y * y * D) / norm
        im = y * (a * d - b * c) / norm
        return QuadSurd(re, im, D)

    def to_mpc(self, prec: int | None = None):
        with mpmath.workprec(prec or mpmath.mp.prec):
            im = mpmath.mpf(self.y.numerator) / self.y.denominator * mpmath.sqrt(-self.D)
            re = mpmath.mpf(self.x.numerator) / self.x.denominator
            return mpmath.mpc(re, im)

    def __complex__(self):
        return complex(float(self.x), float(self.y) * math.sqrt(-self.D))

    def _key(self):
        return (self.x, self.y, self.D if self.y else -1)

    def __eq__(self, other):
        if not isinstance(other, QuadSurd):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"QuadSurd({self.x}, {self.y}, {self.D})"

    def __str__(self):
        return f"{self.x} + {self.y}*sqrt({self.D})"


def form_to_point(form) -> QuadSurd:
    """``(b + sqrt(b^2-4ac)) / (2a)`` for a positive definite form."""
    a, b, c = form
    D = b * b - 4 * a * c
    if a <= 0 or D >= 0:
        raise InvalidDiscriminant(f"({a},{b},{c}) is not positive definite")
    s, t = squarefree_decomposition(D)
    return QuadSurd(Fraction(b, 2 * a), Fraction(t, 2 * a), s)


def discriminant_of_point(tau: QuadSurd) -> tuple[int, QuadForm]:
    """Primitive ``(a, b, c)`` with ``a tau^2 + b tau + c = 0`` and ``a > 0``."""
    if not isinstance(tau, QuadSurd):
        raise NotQuadratic("an exact quadratic point is required")
    if tau.y == 0:
        raise NotQuadratic("point is real")
    # minimal polynomial z^2 - 2x z + |tau|^2
    p = -2 * tau.x
    q = tau.abs_squared
    m = _lcm(p.denominator, q.denominator)
    a, b, c = m, int(p * m), int(q * m)
    g = math.gcd(a, b, c)
    a, b, c = a // g, b // g, c // g
    return b * b - 4 * a * c, QuadForm(a, b, c)


def _lcm(x, y):
    return x // math.gcd(x, y) * y


# ---------------------------------------------------------------------------
# reduction into the fundamental domain


def _ceil_half(x: Fraction) -> int:
    """n with x - n in (-1/2, 1/2]."""
    return math.ceil(x - Fraction(1, 2))


def _reduce_exact(tau: QuadSurd):
    if tau.y <= 0:
        raise NotQuadratic("point is not in the upper half-plane")
    g = IDENTITY
    z = tau
    for _ in range(10_000):
        n = _ceil_half(z.x)
        if n:
            t = ((1, -n), (0, 1))
            z = z.act(t)
            g = _matmul(t, g)
        r2 = z.abs_squared
        if r2 < 1 or (r2 == 1 and z.x < 0):
            s = ((0, -1), (1, 0))
            z = z.act(s)
            g = _matmul(s, g)
            continue
        return z, g
    raise RuntimeError("reduction did not terminate")


def _reduce_numeric(tau, tol, snap: bool):
    tau = mpmath.mpc(tau)
    if tau.imag <= 0:
        raise NotQuadratic("point is not in the upper half-plane")
    g = IDENTITY
    z = tau
    for _ in range(10_000):
        n = int(mpmath.ceil(z.real - mpmath.mpf(1) / 2))
        if n:
            z = z - n
            g = _matmul(((1, -n), (0, 1)), g)
        r2 = z.real ** 2 + z.imag ** 2
        if r2 < 1 - tol or (abs(r2 - 1) <= tol and z.real < 0 and snap):
            z = -1 / z
            g = _matmul(((0, -1), (1, 0)), g)
            continue
        break
    else:
        raise RuntimeError("reduction did not terminate")
    if snap and z.real <= -mpmath.mpf(1) / 2 + tol:
        z = z + 1
        g = _matmul(((1, 1), (0, 1)), g)
    if not snap:
        near_edge = abs(abs(z.real) - mpmath.mpf(1) / 2) <= tol
        near_arc = abs(z.real ** 2 + z.imag ** 2 - 1) <= tol
        if near_edge or near_arc:
            raise UndecidedBoundary(f"{mpmath.nstr(z, 15)} lies within {mpmath.nstr(tol, 3)} of the boundary")
    return z, g


def reduce_to_Fj(tau, tol=None, snap: bool = False):
    """Return ``(tau', g)`` with ``g tau = tau'`` in the standard fundamental domain.

    Exact for :class:`QuadSurd` input. For numeric input, points within ``tol``
    of the boundary raise :class:`UndecidedBoundary` unless ``snap`` is set.
    """
    if isinstance(tau, QuadSurd):
        return _reduce_exact(tau)
    if tol is None:
        tol = mpmath.mpf(2) ** (-mpmath.mp.prec + 12)
    return _reduce_numeric(tau, mpmath.mpf(tol), snap)


def in_Fj(tau, tol=0) -> bool:
    """Membership in ``-1/2 < Re <= 1/2, |z| >= 1`` with ``|z| > 1`` when Re < 0."""
    if isinstance(tau, QuadSurd):
        if tau.y <= 0:
            return False
        x, r2 = tau.x, tau.abs_squared
        half = Fraction(1, 2)
        return -half < x <= half and r2 >= 1 and (r2 > 1 or x >= 0)
    z = mpmath.mpc(tau)
    x, r2 = z.real, z.real ** 2 + z.imag ** 2
    return z.imag > 0 and -0.5 + tol < x <= 0.5 + tol and r2 >= 1 - tol and (r2 > 1 + tol or x >= -tol)


def recognize_quadratic(z, max_den: int = 10 ** 6, tol=None) -> QuadSurd:
    """Recover an exact quadratic point from a high-precision approximation.

    Real part and squared modulus are recognised as rationals with bounded
    denominators; failure raises :class:`NotQuadratic`.
    """
    z = mpmath.mpc(z)
    if tol is None:
        tol = mpmath.mpf(2) ** (-mpmath.mp.prec // 2)
    if z.imag <= tol:
        raise NotQuadratic("point is not in the upper half-plane")
    re = _rational_near(2 * z.real, max_den, tol)
    r2 = _rational_near(z.real ** 2 + z.imag ** 2, max_den, tol)
    if re is None or r2 is None:
        raise NotQuadratic(f"{mpmath.nstr(z, 15)} is not recognisably quadratic")
    # z is a root of a z^2 + b z + c with b = -a * (2 Re z), c = a |z|^2
    a = _lcm(re.denominator, r2.denominator)
    if a > max_den:
        raise NotQuadratic(f"{mpmath.nstr(z, 15)} needs a leading coefficient above {max_den}")
    b, c = -a * re, a * r2
    D = int(b * b - 4 * a * c)
    if D >= 0:
        raise NotQuadratic("recognised polynomial has no complex roots")
    return form_to_point((a, -int(b), int(c)))


def _rational_near(x, max_den, tol):
    s = mpmath.nstr(x, int(mpmath.mp.dps), strip_zeros=False)
    f = Fraction(s).limit_denominator(max_den)
    if abs(x - mpmath.mpf(f.numerator) / f.denominator) <= tol * max(1, abs(x)):
        return f
    return None
