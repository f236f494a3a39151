"""Independent reference computations shared by the tests."""

import mpmath


def sigma(k, n):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def j_direct(tau, terms=80):
    """j = E4^3 / Delta with E4 from sigma_3 and Delta from its product; no reduction."""
    q = mpmath.expjpi(2 * mpmath.mpc(tau))
    e4 = 1 + 240 * mpmath.fsum(sigma(3, n) * q ** n for n in range(1, terms))
    delta = q * mpmath.fprod((1 - q ** n) ** 24 for n in range(1, terms))
    return e4 ** 3 / delta
