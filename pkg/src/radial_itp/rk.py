"""Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)).

The state may carry trailing batch axes: ``y`` has shape
``(n_state, *batch)`` and the error norm is the RMS over the state axis,
maximised over the batch, so every member is integrated to tolerance on one
shared step sequence.
"""

from dataclasses import dataclass

import numpy as np

from . import _dop853 as tab

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
_ORDER = 8


class StepSizeError(RuntimeError):
    """Step size fell below the representable resolution."""

    def __init__(self, t, h):
        super().__init__(f"step size underflow at t={t!r} (h={h:.3g})")
        self.t = t
        self.h = h


@dataclass
class RKResult:
    t: float
    y: np.ndarray
    n_steps: int
    n_rejected: int
    est_error: float
    stopped: bool = False


def _default_scale(y, y_new, ymax, rtol, atol):
    return atol + rtol * np.maximum(np.maximum(np.abs(y), np.abs(y_new)), ymax)


def _error_norm(err5, err3, scale, h):
    m5 = np.mean((err5 / scale) ** 2, axis=0)
    m3 = np.mean((err3 / scale) ** 2, axis=0)
    denom = m5 + 0.01 * m3
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(denom > 0.0, abs(h) * m5 / np.sqrt(denom), 0.0)
    return float(np.max(e))


def dop853(fun, t0, t1, y0, rtol, atol=0.0, *, h0=None, coeffs=None, running_scale=False,
           scale_fn=None, callback=None, max_steps=1_000_000):
    """Integrate ``y' = fun(t, y[, aux])`` from ``t0`` to ``t1 > t0``.

    Parameters
    ----------
    fun : callable
        ``fun(t, y)``, or ``fun(t, y, aux)`` when ``coeffs`` is given.
    coeffs : callable, optional
        ``coeffs(ts)`` is called once per step attempt with all stage times
        and must return a sequence indexed like ``ts``; entry ``i`` is passed
        as ``aux`` to the ``i``-th stage.  Used for coefficients that do not
        depend on ``y``.
    running_scale : bool
        Measure errors relative to the running maximum of ``|y|`` per
        component rather than the local value.
    scale_fn : callable, optional
        ``scale_fn(y, y_new)`` overriding the error scale.
    callback : callable, optional
        ``callback(t, y)`` after each accepted step; returning True stops.
    """
    if not t1 > t0:
        raise ValueError("integration requires t1 > t0")
    y = np.array(y0, dtype=float)
    ymax = np.abs(y) if running_scale else 0.0

    def f(t, yy, aux):
        return fun(t, yy) if coeffs is None else fun(t, yy, aux)

    stage_c = np.append(tab.C, 1.0)
    t = float(t0)
    aux = None if coeffs is None else coeffs(np.array([t]))[0]
    k0 = f(t, y, aux)
    if h0 is None:
        sc = (atol + rtol * np.abs(y) if scale_fn is None else scale_fn(y, y)) + 1e-300
        with np.errstate(over="ignore", invalid="ignore"):
            d0 = np.sqrt(np.mean((y / sc) ** 2))
            d1 = np.sqrt(np.mean((k0 / sc) ** 2))
        ok = np.isfinite(d0) and np.isfinite(d1) and d0 >= 1e-5 and d1 >= 1e-5
        h0 = 0.01 * d0 / d1 if ok else 1e-6
    h = min(float(h0), t1 - t)

    K = np.empty((tab.N_STAGES + 1,) + y.shape)
    n_steps = n_rej = 0
    est = 0.0
    rejected = False
    while t < t1:
        if n_steps + n_rej >= max_steps:
            raise StepSizeError(t, h)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeError(t, h)
        h = min(h, t1 - t)
        auxs = [None] * len(stage_c) if coeffs is None else coeffs(t + stage_c * h)
        K[0] = k0
        for s in range(1, tab.N_STAGES):
            dy = np.tensordot(tab.A[s, :s], K[:s], axes=1)
            K[s] = f(t + tab.C[s] * h, y + h * dy, auxs[s])
        y_new = y + h * np.tensordot(tab.B, K[: tab.N_STAGES], axes=1)
        K[-1] = f(t + h, y_new, auxs[-1])

        if scale_fn is None:
            scale = _default_scale(y, y_new, ymax, rtol, atol)
        else:
            scale = scale_fn(y, y_new)
        err = _error_norm(np.tensordot(tab.E5, K, axes=1), np.tensordot(tab.E3, K, axes=1),
                          scale, h)

        if err <= 1.0:
            t = t1 if t1 - (t + h) < 1e-15 * max(1.0, abs(t1)) else t + h
            y = y_new
            k0 = K[-1].copy()
            if running_scale:
                ymax = np.maximum(ymax, np.abs(y))
            n_steps += 1
            est += err * rtol
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** (-1.0 / _ORDER))
            if rejected:
                factor = min(factor, 1.0)
            rejected = False
            h *= factor
            if callback is not None and callback(t, y):
                return RKResult(t, y, n_steps, n_rej, est, stopped=True)
        else:
            n_rej += 1
            rejected = True
            h *= max(MIN_FACTOR, SAFETY * err ** (-1.0 / _ORDER))
    return RKResult(t, y, n_steps, n_rej, est)
