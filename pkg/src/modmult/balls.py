"""Complex midpoint-radius balls and the precision context."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .errors import DomainError

__all__ = ["PrecisionCtx", "Ball"]


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision in bits and an absolute error budget per evaluation.

    When ``tol`` is omitted it defaults to ``2**(-bits/2)``, leaving half the
    working bits as headroom for cancellation.
    """

    bits: int = 128
    tol: float | mpmath.mpf | None = None

    def __post_init__(self):
        if self.bits < 64:
            raise DomainError("precision must be at least 64 bits")
        if self.tol is None:
            object.__setattr__(self, "tol", mpmath.mpf(2) ** (-(self.bits // 2)))
        if not self.tol > 0:
            raise DomainError("tolerance must be positive")

    @property
    def dps(self) -> int:
        return int(self.bits * 0.30103)

    def doubled(self) -> "PrecisionCtx":
        return PrecisionCtx(self.bits * 2, self.tol)

    def workprec(self, extra: int = 32):
        return mpmath.workprec(self.bits + extra)


def _ulp(z) -> mpmath.mpf:
    return abs(z) * mpmath.mpf(2) ** (-mpmath.mp.prec + 2)


class Ball:
    """Complex ball ``mid +- rad``; arithmetic widens radii for rounding."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=0):
        self.mid = mpmath.mpc(mid)
        self.rad = mpmath.mpf(abs(rad))

    @classmethod
    def exact(cls, z) -> "Ball":
        return cls(z, 0)

    def __repr__(self):
        return f"Ball({mpmath.nstr(self.mid, 20)} +- {mpmath.nstr(self.rad, 3)})"

    def _coerce(self, other):
        return other if isinstance(other, Ball) else Ball(other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        m = self.mid + o.mid
        return Ball(m, self.rad + o.rad + _ulp(m))

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        m = self.mid * o.mid
        r = abs(self.mid) * o.rad + abs(o.mid) * self.rad + self.rad * o.rad + _ulp(m)
        return Ball(m, r)

    __rmul__ = __mul__

    def inverse(self) -> "Ball":
        a = abs(self.mid)
        if a <= self.rad:
            raise ZeroDivisionError("ball contains zero")
        m = 1 / self.mid
        return Ball(m, self.rad / (a * (a - self.rad)) + _ulp(m))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Ball(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def conjugate(self) -> "Ball":
        return Ball(mpmath.conj(self.mid), self.rad)

    def abs_upper(self):
        return abs(self.mid) + self.rad

    def abs_lower(self):
        return max(mpmath.mpf(0), abs(self.mid) - self.rad)

    def contains(self, z) -> bool:
        return abs(mpmath.mpc(z) - self.mid) <= self.rad

    def contains_zero(self) -> bool:
        return abs(self.mid) <= self.rad

    def excludes(self, z) -> bool:
        return not self.contains(z)

    def overlaps(self, other: "Ball") -> bool:
        return abs(self.mid - other.mid) <= self.rad + other.rad

    def widen(self, r) -> "Ball":
        return Ball(self.mid, self.rad + abs(r))
