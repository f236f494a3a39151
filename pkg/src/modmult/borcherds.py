"""Weight 1/2 plus-space forms, the basis f_d and Borcherds products.

A form in the plus space is stored by its integer coefficients ``a(n)``; the
basis form ``f_d = q^-d + O(q)`` is obtained by an exact linear solve over
forms ``theta * (function on Gamma_0(4))`` and then extended to any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import mpmath

from .balls import Ball, PrecisionCtx
from .errors import (ConstantFunction, DomainError, NotConverged, NotInBasisIndexSet,
                     SpanningFamilyInsufficient, WindowTooSmall)
from .qseries import (LaurentSeries, _inv_int, _mul_int, eta_quotient, hurwitz_H,
                      product_expansion)
from .quadforms import QuadForm, QuadSurd, enumerate_T, form_to_point

__all__ = [
    "PlusForm",
    "B0Element",
    "LiftResult",
    "LiftValue",
    "B0Certificate",
    "build_fd",
    "lift",
    "lift_divisor",
    "divisor_condition_b0",
    "eval_lift",
    "tau_star",
    "fd_family",
]


def _check_index(d: int) -> int:
    d = int(d)
    if d < 0 or d % 4 not in (0, 3):
        raise NotInBasisIndexSet(f"d = {d} is not a non-negative integer = 0 or 3 mod 4")
    return d


# ---------------------------------------------------------------------------
# plus-space forms


class PlusForm:
    """``sum a(n) q^n`` with integer coefficients, known for n <= order.

    ``recipe`` optionally records the form as an integer combination of basis
    forms ``{d: coeff}`` so that it can be re-extended to a higher order.
    """

    __slots__ = ("lo", "order", "_a", "recipe")

    def __init__(self, coeffs: Mapping[int, int], order: int | None = None, recipe: Mapping[int, int] | None = None):
        nz = {int(n): int(v) for n, v in coeffs.items() if v}
        for n in nz:
            if n % 4 in (2, 3):
                raise DomainError(f"a({n}) must vanish outside n = 0, 1 mod 4")
        if order is None:
            order = max(nz, default=0)
        if any(n > order for n in nz):
            raise DomainError("coefficient beyond the stated order")
        lo = min(nz, default=0)
        self.lo = min(lo, 0)
        self.order = order
        self._a = tuple(nz.get(n, 0) for n in range(self.lo, order + 1))
        self.recipe = dict(recipe) if recipe is not None else None

    @classmethod
    def _dense(cls, lo, vals, recipe=None):
        obj = cls.__new__(cls)
        obj.lo = lo
        obj.order = lo + len(vals) - 1
        obj._a = tuple(vals)
        obj.recipe = dict(recipe) if recipe is not None else None
        return obj

    @classmethod
    def zero(cls, order: int = 0) -> "PlusForm":
        return cls({}, order, recipe={})

    @property
    def principal(self) -> int:
        for i, v in enumerate(self._a):
            if v:
                return self.lo + i
        return self.order + 1

    @property
    def coeffs(self) -> dict:
        return {self.lo + i: v for i, v in enumerate(self._a) if v}

    def a(self, n: int) -> int:
        if n > self.order:
            raise WindowTooSmall(f"a({n}) requested but the form is known only through q^{self.order}")
        if n < self.lo:
            return 0
        return self._a[n - self.lo]

    __getitem__ = a

    @property
    def in_A0(self) -> bool:
        return self.a(0) == 0

    def __eq__(self, other):
        if not isinstance(other, PlusForm):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        items = sorted(self.coeffs.items())[:6]
        return f"PlusForm({items}{'...' if len(self.coeffs) > 6 else ''}, order={self.order})"

    def _combine(self, other, s, t):
        order = min(self.order, other.order)
        lo = min(self.lo, other.lo)
        vals = [s * (self.a(n) if n >= self.lo else 0) + t * (other.a(n) if n >= other.lo else 0)
                for n in range(lo, order + 1)]
        recipe = None
        if self.recipe is not None and other.recipe is not None:
            recipe = dict(self.recipe)
            for d, c in other.recipe.items():
                recipe[d] = recipe.get(d, 0) * s + t * c if d in recipe else t * c
            for d in self.recipe:
                if d not in other.recipe:
                    recipe[d] = s * self.recipe[d]
            recipe = {d: c for d, c in recipe.items() if c}
        return PlusForm._dense(lo, vals, recipe)

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, k: int):
        k = int(k)
        recipe = None if self.recipe is None else {d: k * c for d, c in self.recipe.items() if k * c}
        return PlusForm._dense(self.lo, [k * v for v in self._a], recipe)

    __rmul__ = __mul__

    def extend(self, order: int) -> "PlusForm":
        """Same form known through ``order``, rebuilt from its basis recipe."""
        if order <= self.order:
            return self.truncate(order)
        if self.recipe is None:
            raise WindowTooSmall(f"form known through q^{self.order} and has no basis recipe to extend")
        acc = PlusForm.zero(order)
        for d, c in sorted(self.recipe.items()):
            acc = acc + c * build_fd(d, order)
        return acc

    def truncate(self, order: int) -> "PlusForm":
        if order > self.order:
            raise WindowTooSmall("cannot truncate above the known order")
        return PlusForm._dense(self.lo, self._a[: order - self.lo + 1], self.recipe)

    def to_series(self) -> LaurentSeries:
        return LaurentSeries._from_ints(self._a, 1, self.lo, self.order)

    def to_text(self) -> str:
        return "".join(f"{self.lo + i} {v}\n" for i, v in enumerate(self._a))

    @classmethod
    def from_text(cls, text: str) -> "PlusForm":
        coeffs = {}
        order = None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"bad line {raw!r}; expected 'n a(n)'")
            n, v = int(parts[0]), Fraction(parts[1])
            if v.denominator != 1:
                raise DomainError(f"a({n}) = {v} is not an integer")
            coeffs[n] = int(v)
            order = n if order is None else max(order, n)
        return cls(coeffs, order)


# ---------------------------------------------------------------------------
# building f_d


def _theta_ints(n):
    out = [0] * n
    k = 0
    while k * k < n:
        out[k * k] = 1 if k == 0 else 2
        k += 1
    return out


@lru_cache(maxsize=8)
def _hauptmodul(n: int):
    """Integer lists X, Y with x = q^-1 X and 1/(x + 16) = q Y, n terms each.

    x = eta(z)^8 / eta(4z)^8 has cusp values 0 and -16 away from infinity; the
    second follows from x + 16 = eta(2z)^24 / (eta(z)^8 eta(4z)^16), which is
    verified here on the computed window.
    """
    X = eta_quotient([(1, 8), (4, -8)], n - 1).integer_coeffs()
    other = eta_quotient([(2, 24), (1, -8), (4, -16)], n - 1).integer_coeffs()
    shifted = list(X)
    if n > 1:
        shifted[1] += 16
    if shifted != other:
        raise SpanningFamilyInsufficient("cusp value identity for the Hauptmodul failed")
    Y = _inv_int(other, n)
    return tuple(X), tuple(Y)


def _family_window(d, A0, B, top):
    """Coefficients over exponents -d..top of each family member theta*x^a, theta*y^b."""
    n = top + d + 1
    X, Y = _hauptmodul(n + A0 + 1)
    X, Y = list(X), list(Y)
    th = _theta_ints(n + A0 + 1)
    cols = []
    labels = []
    # theta x^a = q^-a theta X^a for -A0 <= a <= d
    Xinv = _inv_int(X, n + A0 + 1)
    for a in range(-A0, d + 1):
        base = Xinv if a < 0 else X
        p = [1] + [0] * (n + A0)
        for _ in range(abs(a)):
            p = _mul_int(p, base, n + A0 + 1)
        s = _mul_int(th, p, n + A0 + 1)
        # exponent of s[i] is i - a; we need exponents -d..top
        col = [s[e + a] if 0 <= e + a < len(s) else 0 for e in range(-d, top + 1)]
        cols.append(col)
        labels.append(("x", a))
    qY = [0] + Y[: n]
    p = [1] + [0] * (n - 1)
    for b in range(1, B + 1):
        p = _mul_int(p, qY, n)
        s = _mul_int(th, p, n)
        cols.append([s[e] if e >= 0 else 0 for e in range(-d, top + 1)])
        labels.append(("y", b))
    return labels, cols


def _solve(rows, rhs):
    """Exact solve of an overdetermined system; returns (solution, status)."""
    m = len(rows[0]) if rows else 0
    A = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, len(A)) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [vi - f * vr for vi, vr in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
    if any(row[-1] for row in A[r:]):
        return None, "inconsistent"
    if r < m:
        return None, "underdetermined"
    sol = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        sol[c] = A[i][-1]
    return sol, "ok"


def _solve_coefficients(d, A0, B, W):
    labels, cols = _family_window(d, A0, B, W)
    rows, rhs = [], []
    for k, e in enumerate(range(-d, W + 1)):
        if e <= 0 or e % 4 in (2, 3):
            rows.append([col[k] for col in cols])
            rhs.append(1 if e == -d else 0)
    return labels, _solve(rows, rhs)


def _assemble(d, labels, sol, order):
    """theta * (sum c_a x^a + sum c_b y^b) over exponents -d..order, exactly."""
    den = 1
    for c in sol:
        den = den // math.gcd(den, c.denominator) * c.denominator
    ca = {a: int(c * den) for (kind, a), c in zip(labels, sol) if kind == "x"}
    cb = {b: int(c * den) for (kind, b), c in zip(labels, sol) if kind == "y"}
    A0 = -min(ca, default=0)
    n = order + d + 1
    X, Y = _hauptmodul(n + A0 + 1)
    X, Y = list(X[:n]), list(Y[:n])
    # sum_{k=0}^{K} c_{k-A0} x^k = q^-K * acc with acc built by Horner, K = d + A0
    K = d + A0
    acc = [0] * n
    for k in range(K, -1, -1):
        if k < K:
            acc = _mul_int(acc, X, n)
        c = ca.get(k - A0, 0)
        if c and K - k < n:
            acc[K - k] += c
    # multiply by x^-A0 = q^A0 X^-A0, giving q^-d * acc
    if A0:
        Xinv = _inv_int(X, n)
        for _ in range(A0):
            acc = _mul_int(acc, Xinv, n)
    g = acc  # exponent of g[i] is i - d
    if cb:
        Bmax = max(cb)
        qY = [0] + Y[: n - 1]
        t = [0] * n
        for b in range(Bmax, 0, -1):
            if b < Bmax:
                t = _mul_int(t, qY, n)
            t[0] += cb.get(b, 0)
        t = _mul_int(t, qY, n)  # exponent of t[i] is i
        for i in range(n - d):
            g[i + d] += t[i]
    th = _theta_ints(n)
    # theta * g, with theta's exponent 0 aligned so that f[i] has exponent i - d
    f = _mul_int(g, th, n)
    out = []
    for v in f:
        q, r = divmod(v, den)
        if r:
            return None
        out.append(q)
    return out


def _verify(d, vals):
    for i, v in enumerate(vals):
        e = i - d
        if e < 0 and v != (1 if e == -d else 0):
            return False
        if e == 0 and d > 0 and v != 0:
            return False
        if v and e % 4 in (2, 3):
            return False
    return True


@lru_cache(maxsize=64)
def _fd_plan(d: int):
    """Minimal solved family for f_d: (labels, coefficients, window)."""
    A0, B = d // 4, (d + 1) // 4
    W = 4 * d + 40
    for _ in range(12):
        labels, (sol, status) = _solve_coefficients(d, A0, B, W)
        if status == "ok":
            vals = _assemble(d, labels, sol, 2 * W)
            if vals is not None and _verify(d, vals):
                return tuple(labels), tuple(sol), W
            W *= 2
        elif status == "underdetermined":
            W *= 2
        else:
            A0 += 1
            B += 1
    raise SpanningFamilyInsufficient(f"no consistent plus-space solve found for d = {d}")


@lru_cache(maxsize=32)
def _build_fd_cached(d: int, order: int) -> PlusForm:
    if d == 0:
        return PlusForm._dense(0, _theta_ints(order + 1), recipe={0: 1})
    labels, sol, _ = _fd_plan(d)
    vals = _assemble(d, labels, list(sol), order)
    if vals is None or not _verify(d, vals):
        raise SpanningFamilyInsufficient(f"f_{d} failed integrality or the plus condition through q^{order}")
    return PlusForm._dense(-d, vals, recipe={d: 1})


def build_fd(d: int, order: int) -> PlusForm:
    """The plus-space form ``q^-d + sum_{n>0} A(d, n) q^n`` (theta for d = 0)."""
    d = _check_index(d)
    if order < 1:
        raise WindowTooSmall("order must be at least 1")
    return _build_fd_cached(d, int(order))


def fd_family(d: int) -> dict:
    """Size of the spanning family the solve settled on, for diagnostics."""
    labels, _, W = _fd_plan(_check_index(d))
    return {"x_powers": [a for k, a in labels if k == "x"],
            "y_powers": [b for k, b in labels if k == "y"], "window": W}


# ---------------------------------------------------------------------------
# the lift


@dataclass(frozen=True)
class LiftResult:
    """``Psi = q^-h * product_part``."""

    h: Fraction
    product_part: LaurentSeries

    def series(self) -> LaurentSeries:
        p = self.product_part
        return LaurentSeries._from_ints(p._num, p._den, p.lo, p.order, -self.h).normalized()

    def exponents(self, order: int | None = None) -> dict:
        from .qseries import peel_product_exponents
        return peel_product_exponents(self.product_part if order is None else self.product_part.truncate(order))


def weight_shift(f: PlusForm) -> Fraction:
    """The constant term of f times the Hurwitz generating series."""
    return sum((f.a(-m) * hurwitz_H(m) for m in range(0, -min(f.principal, 0) + 1)), Fraction(0))


def lift(f: PlusForm, order: int) -> LiftResult:
    """Borcherds product ``q^-h prod (1 - q^n)^a(n^2)`` through ``q^order``."""
    if order < 0:
        raise WindowTooSmall("order must be non-negative")
    need = order * order
    if f.order < need:
        raise WindowTooSmall(f"lifting through q^{order} needs a(n) for n <= {need}; form known to {f.order}")
    h = weight_shift(f)
    exps = {n: f.a(n * n) for n in range(1, order + 1) if f.a(n * n)}
    return LiftResult(h, product_expansion(exps, order))


def lift_divisor(f: PlusForm, disc_range: Iterable[int]) -> dict:
    """Zero order of Psi(f) at points of discriminant D, as ``sum_{n>0} a(n^2 D)``."""
    out = {}
    for D in disc_range:
        D = int(D)
        if D >= 0 or D % 4 not in (0, 1):
            continue
        total = 0
        n = 1
        while n * n * D >= f.lo:
            total += f.a(n * n * D)
            n += 1
        out[D] = total
    return out


# ---------------------------------------------------------------------------
# numeric evaluation


@dataclass(frozen=True)
class LiftValue:
    value: object
    error: object
    terms: int
    heuristic: bool = True

    def __abs__(self):
        return abs(self.value)


def eval_lift(f: PlusForm, tau, ctx: PrecisionCtx | None = None, max_terms: int = 64) -> LiftValue:
    """Value of the lift at tau from its expanded q-series.

    The product itself diverges on most of the upper half-plane once a(n^2)
    grows, so the expanded series is summed, doubling the truncation until two
    successive sums agree. The error is the last difference: an estimate, not
    a bound.
    """
    ctx = ctx or PrecisionCtx()
    with mpmath.workprec(ctx.bits + 32):
        tau = tau.to_mpc() if isinstance(tau, QuadSurd) else mpmath.mpc(tau)
        if tau.imag <= 0:
            raise DomainError("tau must lie in the upper half-plane")
        q = mpmath.expjpi(2 * tau)
        prev = None
        N = 16
        while N <= max_terms:
            g = f if f.order >= N * N else f.extend(N * N)
            res = lift(g, N)
            acc = mpmath.mpc(0)
            for c in reversed(res.product_part.coeffs):
                acc = acc * q + mpmath.mpf(c.numerator) / c.denominator
            val = mpmath.expjpi(-2 * tau * res.h) * acc
            if prev is not None:
                err = abs(val - prev)
                if err <= ctx.tol * max(1, abs(val)):
                    return LiftValue(val, err, N)
            prev = val
            N *= 2
        raise NotConverged(f"lift series did not stabilise by {max_terms} terms at tau = {mpmath.nstr(tau, 10)}")


# ---------------------------------------------------------------------------
# B_0 elements


@dataclass(frozen=True)
class B0Element:
    """``prod Psi(f_d)^alpha_d`` over d > 0, d = 0, 3 mod 4."""

    basis_exponents: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for d, a in dict(self.basis_exponents).items():
            d = _check_index(d)
            if d == 0:
                raise NotInBasisIndexSet("d = 0 gives a form of non-zero weight, not in B_0")
            if a:
                clean[d] = int(a)
        object.__setattr__(self, "basis_exponents", clean)

    @property
    def support(self) -> list[int]:
        return sorted(self.basis_exponents)

    def plus_form(self, order: int) -> PlusForm:
        acc = PlusForm.zero(order)
        for d, a in self.basis_exponents.items():
            acc = acc + a * build_fd(d, order)
        return acc

    def lift(self, order: int) -> LiftResult:
        return lift(self.plus_form(order * order), order)

    def divisor(self) -> dict:
        """Zero/pole order at each discriminant; only principal parts matter."""
        out = {}
        for d, a in self.basis_exponents.items():
            n = 1
            while n * n <= d:
                if d % (n * n) == 0:
                    D = -d // (n * n)
                    if D % 4 in (0, 1):
                        out[D] = out.get(D, 0) + a
                n += 1
        return {D: m for D, m in sorted(out.items()) if m}


def tau_star(d: int) -> QuadSurd:
    """Point of the a = 1 reduced form of discriminant -d."""
    D = -_check_index(d)
    b = D % 2
    return form_to_point(QuadForm(1, b, (b * b - D) // 4))


@dataclass
class B0Certificate:
    verdict: str
    d_k: int
    tau_star: QuadSurd | None
    route: str
    dominance: list = field(default_factory=list)
    checker: object = None
    numeric: dict | None = None


def divisor_condition_b0(e, numeric_check: bool = False, ctx: PrecisionCtx | None = None) -> B0Certificate:
    """Certify the divisor condition for a non-constant element of B_0."""
    if not isinstance(e, B0Element):
        e = B0Element(dict(e))
    if not e.basis_exponents:
        raise ConstantFunction("empty support: the element is constant")
    from .modfunc import (DivisorInFj, DivisorPoint, ModularFunction,
                          check_divisor_points, divisor_condition_check)

    dk = max(e.support)
    if dk == 3:
        res = divisor_condition_check(ModularFunction.j(), ctx)
        return B0Certificate(res.verdict, 3, tau_star(3), "j", checker=res)
    top = tau_star(dk)
    top_im2 = top.imag_squared
    pts = []
    dominance = []
    for D, m in e.divisor().items():
        for form in enumerate_T(D):
            w = form_to_point(form)
            pts.append(DivisorPoint(w, m))
            if w != top:
                if not w.imag_squared < top_im2:
                    raise AssertionError(f"point {w} is not strictly below tau*")
                dominance.append((str(w), str(w.imag_squared), str(top_im2)))
    pts.sort(key=lambda p: (p.w.imag_squared, p.w.x))
    if pts[-1].w != top or pts[-1].multiplicity != e.basis_exponents[dk]:
        raise AssertionError("tau* is not the unique top point of the divisor")
    checked = check_divisor_points(DivisorInFj(tuple(pts)))
    numeric = None
    if numeric_check:
        ctx = ctx or PrecisionCtx(200)
        val = eval_lift(build_fd(dk, 256), top, ctx)
        numeric = {"abs_lift_at_tau_star": mpmath.nstr(abs(val.value), 5), "terms": val.terms}
    return B0Certificate(checked.verdict, dk, top, "top point has Im >= 1" if top_im2 >= 1 else "checker",
                         dominance, checked, numeric)
