"""Regular solution of the transformed radial equation.

Solves ``X'' = (m(m+1)/eta^2 + p_m(eta) - k^2) X`` on ``[0, C]`` for the
solution normalised by ``eta^-(m+1) X -> 1`` at the regular singular point.
A Frobenius series supplies Cauchy data at ``delta``; DOP853 carries it to
``C``.  The second (singular) fundamental solution is never needed since
boundedness at the origin selects the regular one.

All entry points accept an array of wavenumbers and integrate them together
on one step sequence.
"""

from dataclasses import dataclass

import numpy as np

from .rk import dop853

SERIES_ORDER = 8


class SeriesConvergenceError(RuntimeError):
    """Frobenius start-up series not converged at the handoff point."""

    def __init__(self, delta, last_term):
        super().__init__(f"Frobenius series not converged at delta={delta:.3g} "
                         f"(last term {last_term:.3g}); shrink delta")
        self.delta = delta
        self.last_term = last_term


@dataclass
class ModeEndpointData:
    m: int
    k: np.ndarray
    value_at_end: np.ndarray
    slope_at_end: np.ndarray
    est_error: float
    n_steps: int = 0


def frobenius_coefficients(frame, m, k, order=SERIES_ORDER):
    """Coefficients ``a_j`` of ``X = eta^(m+1) sum_j a_j eta^j``; shape ``(order+1, nk)``.

    From ``j (j + 2m + 1) a_j = sum_i q_i a_(j-2-i)`` with ``q`` the Taylor
    coefficients of ``p_m - k^2``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    q = np.zeros((max(order - 1, 1), k.size))
    pser = frame.potential_series(m, max(order - 1, 1))
    q[: len(pser)] = pser[:, None]
    q[0] = q[0] - k**2
    a = np.zeros((order + 1, k.size))
    a[0] = 1.0
    for j in range(2, order + 1):
        i = np.arange(j - 1)
        a[j] = np.sum(q[i] * a[j - 2 - i], axis=0) / (j * (j + 2 * m + 1))
    return a


def series_eval(a, m, eta):
    """Value and slope of the truncated Frobenius series at ``eta``."""
    j = np.arange(a.shape[0])[:, None]
    powers = eta ** j
    value = eta ** (m + 1) * np.sum(a * powers, axis=0)
    slope = eta**m * np.sum(a * (j + m + 1) * powers, axis=0)
    return value, slope


def _series_tail(a, delta):
    order = a.shape[0] - 1
    return float(np.max(np.abs(a[-1]) * delta**order + np.abs(a[-2]) * delta ** (order - 1)))


def handoff_radius(frame, tol, k_max, order=SERIES_ORDER):
    delta = min(1e-2 * frame.endpoint, tol ** (1.0 / (order + 1)))
    if k_max > 0:
        delta = min(delta, 0.5 / k_max)
    return delta


def _startup(frame, m, k, tol, order, delta):
    """Handoff point and Frobenius Cauchy data there, shrinking ``delta`` if needed."""
    k_max = float(np.max(k)) if k.size else 0.0
    a = frobenius_coefficients(frame, m, k, order)
    if delta is None:
        delta = handoff_radius(frame, tol, k_max, order)
        for _ in range(30):
            if _series_tail(a, delta) <= tol:
                break
            delta *= 0.5
    tail = _series_tail(a, delta)
    if tail > tol:
        raise SeriesConvergenceError(delta, tail)
    x0, dx0 = series_eval(a, m, delta)
    return delta, np.stack([x0, dx0]), k_max


def _mode_rhs(frame, m, k):
    table = frame.table
    ll = m * (m + 1)
    k2 = k**2

    def coeffs(ts):
        p0, core = table.parts(ts)
        return ll / ts**2 + p0 + ll * core

    def rhs(_, y, v):
        return np.stack([y[1], (v - k2) * y[0]])

    return rhs, coeffs


def _check_args(m, tol, k):
    if m < 0 or int(m) != m:
        raise ValueError("m must be a nonnegative integer")
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise ValueError("k must be finite and nonnegative")
    return int(m), k


def solve_regular(frame, m, k, tol=1e-10, order=SERIES_ORDER, delta=None):
    """Endpoint Cauchy data ``X(C, k), X'(C, k)`` of the normalised regular solution.

    ``k`` may be a scalar or an array; the result fields have the shape of
    ``np.atleast_1d(k)``.  ``tol`` is the relative local tolerance, taken
    against the running maximum of each solution.
    """
    m, k = _check_args(m, tol, k)
    delta, y0, k_max = _startup(frame, m, k, tol, order, delta)
    rhs, coeffs = _mode_rhs(frame, m, k)
    # resolve the local wavelength and the centrifugal scale at the start
    h0 = 0.05 * min(delta, 1.0 / max(k_max, 1e-3))
    res = dop853(rhs, delta, frame.endpoint, y0, tol, h0=h0, coeffs=coeffs, running_scale=True)
    value, slope = res.y
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(slope))):
        raise FloatingPointError(f"overflow integrating mode m={m}")
    return ModeEndpointData(m, k, value, slope, res.est_error, res.n_steps)


def sample_solution(frame, m, k, etas, tol=1e-10, order=SERIES_ORDER):
    """Values of the regular solution at increasing points ``etas`` beyond the handoff point.

    ``k`` is a scalar; returns an array shaped like ``etas``.
    """
    m, kk = _check_args(m, tol, k)
    etas = np.asarray(etas, dtype=float)
    delta, y, k_max = _startup(frame, m, kk, tol, order, None)
    if etas[0] <= delta or np.any(np.diff(etas) <= 0):
        raise ValueError("sample points must increase and lie beyond the handoff point")
    rhs, coeffs = _mode_rhs(frame, m, kk)
    h = 0.05 * min(delta, 1.0 / max(k_max, 1e-3))
    out = np.empty(etas.size)
    t = delta
    for i, target in enumerate(etas):
        res = dop853(rhs, t, target, y, tol, h0=min(h, target - t), coeffs=coeffs,
                     running_scale=True)
        y, t = res.y, target
        out[i] = y[0, 0]
    return out


def residual_check(frame, m, k, etas, samples):
    """Max centred-difference residual of ``X'' - (m(m+1)/eta^2 + p_m - k^2) X``.

    ``etas`` must be uniform; the residual is evaluated at interior points.
    """
    etas = np.asarray(etas, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.size < 5:
        raise ValueError("need at least 5 samples")
    h = etas[1] - etas[0]
    if not np.allclose(np.diff(etas), h, rtol=1e-9, atol=0.0):
        raise ValueError("samples must lie on a uniform grid")
    inner = etas[1:-1]
    second = (samples[2:] - 2 * samples[1:-1] + samples[:-2]) / h**2
    v = m * (m + 1) / inner**2 + frame.potential(m, inner) - k * k
    return float(np.max(np.abs(second - v * samples[1:-1])))
