"""Coefficient tables for the uniform large-order Bessel expansion.

The polynomials u_k(t) and the derivative companions v_k(t) are generated
once, in exact rational arithmetic, from the standard recurrences

    u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds
    v_k(t)     = u_k(t) + t (t^2 - 1) [u_{k-1}(t) / 2 + t u_{k-1}'(t)]

and exported as dense float coefficient lists (lowest degree first).  Both
kernel backends read the same tables.
"""
from __future__ import annotations

from fractions import Fraction

#: number of correction terms kept beyond the leading one
N_TERMS = 10


def _add(a, b):
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return [x + y for x, y in zip(a, b)]


def _mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _deriv(a):
    if len(a) == 1:
        return [Fraction(0)]
    return [i * a[i] for i in range(1, len(a))]


def _integrate(a):
    return [Fraction(0)] + [c / (i + 1) for i, c in enumerate(a)]


def u_polynomials(kmax: int = N_TERMS) -> list[list[Fraction]]:
    """Exact u_0 .. u_kmax."""
    half = Fraction(1, 2)
    outer = [Fraction(0), Fraction(0), half, Fraction(0), -half]
    weight = [Fraction(1), Fraction(0), Fraction(-5)]
    u = [[Fraction(1)]]
    for _ in range(kmax):
        uk = u[-1]
        first = _mul(outer, _deriv(uk))
        second = [c / 8 for c in _integrate(_mul(weight, uk))]
        u.append(_add(first, second))
    return u


def w_polynomials(u: list[list[Fraction]]) -> list[list[Fraction]]:
    """Exact w_k = v_k - u_k for k = 0 .. len(u) - 1 (w_0 = 0)."""
    cubic = [Fraction(0), Fraction(-1), Fraction(0), Fraction(1)]
    w = [[Fraction(0)]]
    for k in range(1, len(u)):
        prev = u[k - 1]
        inner = _add([c / 2 for c in prev], _mul([Fraction(0), Fraction(1)], _deriv(prev)))
        w.append(_mul(cubic, inner))
    return w


def _as_float(polys):
    return [[float(c) for c in p] for p in polys]


_U_EXACT = u_polynomials()
U_COEFFS = _as_float(_U_EXACT)
W_COEFFS = _as_float(w_polynomials(_U_EXACT))
