"""Sign-change bracketing and Brent polishing.

``brent_steps`` is Brent's method written as a generator: it yields the
next abscissa and receives the function value.  ``polish_brackets`` drives
many of them in lockstep so each round costs one batched evaluation.
"""

from dataclasses import dataclass

import numpy as np

_EPS = np.finfo(float).eps


@dataclass
class RootResult:
    root: float
    f_root: float
    bracket: tuple
    bracket_f: tuple
    converged: bool
    iterations: int


def brent_steps(a, b, fa, fb, xtol, rtol=4 * _EPS, maxiter=100):
    """Brent's method as a coroutine.

    Yields abscissae to evaluate; the final ``RootResult`` is the generator's
    return value.  Stops once the sign-change bracket is narrower than
    ``2 * (xtol + rtol * |x|) / 2``.
    """
    if fa * fb > 0.0:
        raise ValueError("no sign change on the bracket")
    xpre, xcur, fpre, fcur = float(a), float(b), float(fa), float(fb)
    if fpre == 0.0:
        return RootResult(xpre, 0.0, (xpre, xpre), (0.0, 0.0), True, 0)
    if fcur == 0.0:
        return RootResult(xcur, 0.0, (xcur, xcur), (0.0, 0.0), True, 0)
    xblk = fblk = spre = scur = 0.0
    for it in range(maxiter):
        if fpre * fcur < 0.0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur
        delta = 0.5 * (xtol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return _finish(xcur, fcur, xblk, fblk, True, it)
        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis
        xpre, fpre = xcur, fcur
        xcur += scur if abs(scur) > delta else (delta if sbis > 0 else -delta)
        fcur = float((yield xcur))
    if fpre * fcur < 0.0:
        xblk, fblk = xpre, fpre
    return _finish(xcur, fcur, xblk, fblk, False, maxiter)


def _finish(x, fx, xb, fb, converged, it):
    if x <= xb:
        return RootResult(x, fx, (x, xb), (fx, fb), converged, it)
    return RootResult(x, fx, (xb, x), (fb, fx), converged, it)


def brentq(f, a, b, xtol=1e-12, rtol=4 * _EPS, maxiter=100):
    """Scalar convenience wrapper around :func:`brent_steps`."""
    gen = brent_steps(a, b, f(a), f(b), xtol, rtol, maxiter)
    try:
        x = next(gen)
        while True:
            x = gen.send(f(x))
    except StopIteration as stop:
        return stop.value


def polish_brackets(fbatch, brackets, xtol, maxiter=100):
    """Polish every ``(a, b, fa, fb)`` bracket; ``fbatch`` maps an array of x to f."""
    results = [None] * len(brackets)
    live = {}
    for i, (a, b, fa, fb) in enumerate(brackets):
        gen = brent_steps(a, b, fa, fb, xtol, maxiter=maxiter)
        try:
            live[i] = (gen, next(gen))
        except StopIteration as stop:
            results[i] = stop.value
    while live:
        order = sorted(live)
        xs = np.array([live[i][1] for i in order])
        fs = np.atleast_1d(fbatch(xs))
        for i, fx in zip(order, fs):
            gen = live[i][0]
            try:
                live[i] = (gen, gen.send(fx))
            except StopIteration as stop:
                results[i] = stop.value
                del live[i]
    return results


def sign_change_brackets(x, f):
    """Indices ``i`` with a strict sign change or an exact zero between ``x[i]`` and ``x[i+1]``."""
    f = np.asarray(f)
    s = np.sign(f)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    zeros = np.nonzero(s == 0)[0]
    return idx, zeros


def dip_candidates(f, window=5, rel=1e-4):
    """Local minima of ``|f|`` far below the local scale without a sign change."""
    a = np.abs(np.asarray(f, dtype=float))
    out = []
    for i in range(1, len(a) - 1):
        if a[i] <= a[i - 1] and a[i] <= a[i + 1]:
            lo, hi = max(0, i - window), min(len(a), i + window + 1)
            scale = np.max(a[lo:hi])
            same_sign = np.sign(f[i - 1]) == np.sign(f[i + 1]) == np.sign(f[i])
            if same_sign and scale > 0 and a[i] < rel * scale:
                out.append(i)
    return out
