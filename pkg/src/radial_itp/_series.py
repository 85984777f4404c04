"""Truncated power-series arithmetic.

A series is a 1-D float array ``a`` standing for ``sum(a[i] * x**i)``;
every operation truncates to the length of its inputs.
"""

import numpy as np


def mul(a, b):
    n = min(len(a), len(b))
    return np.convolve(a[:n], b[:n])[:n]


def power(a, alpha):
    """``a**alpha`` for a series with nonzero constant term (J.C.P. Miller)."""
    a = np.asarray(a, dtype=float)
    if a[0] == 0.0:
        raise ValueError("power of a series needs a nonzero constant term")
    n = len(a)
    b = np.zeros(n)
    b[0] = a[0] ** alpha
    for j in range(1, n):
        k = np.arange(1, j + 1)
        b[j] = np.sum(((alpha + 1.0) * k - j) * a[k] * b[j - k]) / (j * a[0])
    return b


def exp(a):
    a = np.asarray(a, dtype=float)
    n = len(a)
    b = np.zeros(n)
    b[0] = np.exp(a[0])
    for j in range(1, n):
        k = np.arange(1, j + 1)
        b[j] = np.sum(k * a[k] * b[j - k]) / j
    return b


def reciprocal(a):
    return power(a, -1.0)


def derivative(a):
    a = np.asarray(a, dtype=float)
    out = np.zeros(len(a))
    out[:-1] = a[1:] * np.arange(1, len(a))
    return out


def integral(a):
    """Antiderivative vanishing at 0."""
    a = np.asarray(a, dtype=float)
    out = np.zeros(len(a))
    out[1:] = a[:-1] / np.arange(1, len(a))
    return out


def compose(f, g):
    """``f(g(x))``; requires ``g[0] == 0``."""
    if g[0] != 0.0:
        raise ValueError("inner series must vanish at the origin")
    n = min(len(f), len(g))
    out = np.zeros(n)
    for c in f[:n][::-1]:
        out = mul(out, g[:n])
        out[0] += c
    return out


def reversion(g):
    """Compositional inverse of ``g`` with ``g[0] == 0 != g[1]``."""
    g = np.asarray(g, dtype=float)
    if g[0] != 0.0 or g[1] == 0.0:
        raise ValueError("reversion needs g(0) = 0 and g'(0) != 0")
    n = len(g)
    h = np.zeros(n)
    h[1] = 1.0 / g[1]
    higher = g.copy()
    higher[1] = 0.0
    # each sweep fixes one more coefficient of h in x = g(h(x))
    for _ in range(n):
        h_new = np.zeros(n)
        h_new[1:] = -compose(higher, h)[1:] / g[1]
        h_new[1] += 1.0 / g[1]
        h = h_new
    return h


def shift_down(a, k):
    """Divide by ``x**k``; the first ``k`` coefficients must be negligible."""
    out = np.zeros(len(a))
    out[: len(a) - k] = a[k:]
    return out


def evaluate(a, x):
    return np.polynomial.polynomial.polyval(x, a)
