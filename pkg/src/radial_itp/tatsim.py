"""Radial thermoacoustic forward problem in three dimensions.

Solves ``u_tt = c(r)^2 Lap u`` with ``u(., 0) = f`` and ``u_t(., 0) = 0``
through ``w = r u``, which obeys the 1-D wave equation
``w_tt = c^2 w_rr`` with ``w(0, t) = 0``.  Leapfrog in time, centred
differences in space.  The trace ``g(t) = u(1, t)`` is the thermoacoustic
data.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .profiles import bump_shape

CFL_SAFETY = 0.9


class CFLError(ValueError):
    """Time step too large for the explicit scheme."""


class TruncationError(RuntimeError):
    """Record too short for the Fourier integral to be trusted."""

    def __init__(self, bound):
        super().__init__(f"signal has not decayed by t_max (tail bound {bound:.3g})")
        self.bound = bound


# -- sources -----------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSource:
    """Sum of radial bumps ``sum_i a_i s(r / rho_i)`` with ``s`` the profile bump shape."""

    terms: tuple = ((1.0, 0.5),)

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        for amp, rho in self.terms:
            out += amp * bump_shape(r / rho)
        return out

    def __add__(self, other):
        return RadialSource(self.terms + other.terms)

    def scaled(self, factor):
        return RadialSource(tuple((factor * a, rho) for a, rho in self.terms))

    @property
    def support(self):
        return max((rho for a, rho in self.terms if a != 0.0), default=0.0)

    @property
    def label(self):
        return "+".join(f"{a:g}*bump({rho:g})" for a, rho in self.terms) or "zero"


def bump_source(radius=0.5, amplitude=1.0):
    """Radial bump of height ``amplitude`` supported in ``r < radius``."""
    if not 0.0 < radius < 1.0:
        raise ValueError("source radius must lie in (0, 1)")
    return RadialSource(((float(amplitude), float(radius)),))


ZERO_SOURCE = RadialSource(())


# -- traces ------------------------------------------------------------------------

@dataclass
class WaveTrace:
    """Output of :func:`simulate`.

    Attributes
    ----------
    t : ndarray
        Time levels ``0, dt, ..., t_max``.
    boundary_series : ndarray
        ``g(t) = u(1, t)``.
    snap_r, snapshots : ndarray
        Radii ``r <= 1 + 2h`` and ``u(r, t)`` there, one row per stored level.
    energy : ndarray
        Leapfrog energy of ``w`` at half levels.
    """

    dt: float
    t_max: float
    h: float
    r_domain: float
    t: np.ndarray
    boundary_series: np.ndarray
    source_id: str
    profile_id: str
    snap_r: np.ndarray = field(repr=False, default=None)
    snap_t: np.ndarray = field(repr=False, default=None)
    snapshots: np.ndarray = field(repr=False, default=None)
    energy: np.ndarray = field(repr=False, default=None)
    sponge: float = 0.0

    def metadata(self):
        return {"dt": self.dt, "t_max": self.t_max, "h": self.h, "r_domain": self.r_domain,
                "n_steps": len(self.t) - 1, "source_id": self.source_id,
                "profile_id": self.profile_id, "sponge_width": self.sponge}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "g"])
        for t, g in zip(self.t, self.boundary_series):
            w.writerow([repr(float(t)), repr(float(g))])
        return buf.getvalue()

    def write(self, out_dir, stem="trace"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.csv").write_text(self.to_csv())
        (out / f"{stem}.json").write_text(json.dumps(self.metadata(), indent=2) + "\n")


def _grid(h, r_domain):
    n1 = int(round(1.0 / h))
    if abs(n1 * h - 1.0) > 1e-12:
        raise ValueError("h must divide 1 so that r = 1 is a grid point")
    n = int(round(r_domain / h))
    return np.arange(n + 1) * h, n1


def simulate(profile, source, h=1.0 / 400, t_max=4.0, dt=None, r_domain=None,
             sponge_width=0.0, sponge_strength=40.0, keep_snapshots=True):
    """Leapfrog solution of the radial wave equation; returns a :class:`WaveTrace`.

    ``r_domain`` defaults to ``1 + t_max`` so no signal reaches the outer
    wall.  A positive ``sponge_width`` adds a damping layer ``sigma w_t`` of
    that width against the wall.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if getattr(source, "support", 0.0) >= 1.0:
        raise ValueError("source support must lie inside the unit ball")
    if r_domain is None:
        r_domain = 1.0 + t_max + sponge_width
    if r_domain < 1.0 + 4 * h + sponge_width:
        raise ValueError("domain too small")
    r, n1 = _grid(h, r_domain)
    c = np.ones_like(r)
    inside = r <= 1.0
    c[inside] = profile.c(r[inside])
    cmax = float(np.max(c))
    if dt is None:
        dt = CFL_SAFETY * h / cmax
        n_steps = int(np.ceil(t_max / dt))
        dt = t_max / n_steps
    else:
        n_steps = int(round(t_max / dt))
        if abs(n_steps * dt - t_max) > 1e-9 * t_max:
            raise ValueError("dt must divide t_max")
    if dt * cmax / h > 1.0:
        raise CFLError(f"CFL number {dt * cmax / h:.3f} exceeds 1")

    f = source(r)
    if np.any(f[r >= 1.0] != 0.0):
        raise ValueError("source does not vanish for r >= 1")
    lam2 = (c * dt / h) ** 2
    sigma = np.zeros_like(r)
    if sponge_width > 0:
        x = np.clip((r - (r[-1] - sponge_width)) / sponge_width, 0.0, None)
        sigma = sponge_strength * x**2
    damp_m = 1.0 - 0.5 * sigma * dt
    damp_p = 1.0 + 0.5 * sigma * dt

    def lap(w):
        out = np.zeros_like(w)
        out[1:-1] = w[2:] - 2.0 * w[1:-1] + w[:-2]
        return out

    def energy(w_new, w_old):
        vel = (w_new - w_old) / dt
        grad = ((w_new[1:] - w_new[:-1]) * (w_old[1:] - w_old[:-1])) / h**2
        return 0.5 * h * (np.sum(vel**2 / c**2) + np.sum(grad))

    w_old = r * f
    w_old[0] = w_old[-1] = 0.0
    # Taylor start with zero initial velocity
    w = w_old + 0.5 * lam2 * lap(w_old)
    w[-1] = 0.0

    n_snap = n1 + 3
    snaps = np.empty((n_steps + 1, n_snap)) if keep_snapshots else None
    snap_r = r[:n_snap]

    def u_near(wv):
        u = np.empty(n_snap)
        u[1:] = wv[1:n_snap] / snap_r[1:]
        u[0] = (4.0 * wv[1] - wv[2]) / (2.0 * h)
        return u

    g = np.empty(n_steps + 1)
    en = np.empty(n_steps)
    g[0], g[1] = w_old[n1], w[n1]
    if keep_snapshots:
        snaps[0], snaps[1] = u_near(w_old), u_near(w)
    en[0] = energy(w, w_old)
    for n in range(1, n_steps):
        w_new = (2.0 * w - damp_m * w_old + lam2 * lap(w)) / damp_p
        w_new[0] = w_new[-1] = 0.0
        w_old, w = w, w_new
        g[n + 1] = w[n1]
        en[n] = energy(w, w_old)
        if keep_snapshots:
            snaps[n + 1] = u_near(w)
    t = np.arange(n_steps + 1) * dt
    return WaveTrace(dt, float(t_max), h, float(r[-1]), t, g,
                     getattr(source, "label", "custom"), profile.label,
                     snap_r if keep_snapshots else None, t if keep_snapshots else None,
                     snaps, en, float(sponge_width))


def dalembert_trace(source, t, r=1.0):
    """Exact ``u(r, t)`` for ``c = 1``: ``w = [F(r + t) + F(r - t)] / 2`` with ``F(s) = s f(|s|)``."""
    t = np.asarray(t, dtype=float)

    def F(s):
        return s * source(np.abs(s))

    return 0.5 * (F(r + t) + F(r - t)) / r


# -- decay -------------------------------------------------------------------------

@dataclass
class DecayFit:
    rate: float
    quality: float
    n_points: int


def decay_fit(trace, window, floor=1e-12):
    """Fit ``log sup_{s >= t} |g(s)|`` on ``window`` by a line; ``rate`` is minus the slope.

    Samples below ``floor * max|g|`` count as zero.  A window that is zero
    throughout gives ``rate = inf``.
    """
    t1, t2 = window
    if not t2 > t1:
        raise ValueError("window must satisfy t2 > t1")
    t, g = trace.t, np.abs(trace.boundary_series)
    sel = (t >= t1) & (t <= t2)
    if np.count_nonzero(sel) < 3:
        raise ValueError("window holds fewer than three samples")
    gmax = float(np.max(g))
    tail_sup = np.maximum.accumulate(g[sel][::-1])[::-1]
    live = tail_sup > floor * gmax
    if np.count_nonzero(live) < 3:
        return DecayFit(float("inf"), 1.0, int(np.count_nonzero(live)))
    ts, ys = t[sel][live], np.log(tail_sup[live])
    slope, icpt = np.polyfit(ts, ys, 1)
    pred = slope * ts + icpt
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    quality = 1.0 - float(np.sum((ys - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(-slope), quality, int(ts.size))


# -- Fourier -----------------------------------------------------------------------

def fourier_integral(t, values, k, d0=None):
    """``(1/2pi) int_0^T v(t) e^{ikt} dt`` along axis 0 on a uniform grid.

    Trapezoid rule plus the first Euler-Maclaurin endpoint correction.
    ``d0`` is the exact ``dv/dt`` at ``t = 0`` when known; the right-end
    derivative comes from a one-sided three-point difference.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    dt = t[1] - t[0]
    e = np.exp(1j * k * t)
    shape = (-1,) + (1,) * (v.ndim - 1)
    F = v * e.reshape(shape)
    trap = dt * (np.sum(F, axis=0) - 0.5 * (F[0] + F[-1]))
    if d0 is None:
        dF0 = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * dt)
    else:
        dF0 = (d0 + 1j * k * v[0]) * e[0]
    dFT = (3.0 * F[-1] - 4.0 * F[-2] + F[-3]) / (2.0 * dt)
    return (trap - dt**2 / 12.0 * (dFT - dF0)) / (2.0 * np.pi)


def temporal_ft(trace, k, decay_tol=1e-6, strict=True):
    """``u_hat(r, k)`` on the snapshot radii and at ``r = 1``.

    Returns ``(r, u_hat, u_hat_boundary, tail_bound)``.  ``tail_bound``
    is ``max |u|`` over the final tenth of the record relative to the peak;
    above ``decay_tol`` a :class:`TruncationError` is raised when ``strict``.
    """
    if trace.snapshots is None:
        raise ValueError("trace was recorded without snapshots")
    u = trace.snapshots
    peak = float(np.max(np.abs(u)))
    tail = int(max(3, 0.1 * len(trace.snap_t)))
    bound = float(np.max(np.abs(u[-tail:]))) / peak if peak > 0 else 0.0
    if strict and bound > decay_tol:
        raise TruncationError(bound)
    # u_t(r, 0) = 0 exactly
    uh = fourier_integral(trace.snap_t, u, k, d0=np.zeros(u.shape[1]))
    n1 = int(round(1.0 / trace.h))
    return trace.snap_r, uh, uh[n1], bound


# -- Helmholtz ---------------------------------------------------------------------

@dataclass
class HelmholtzCheck:
    inhomogeneous: float
    homogeneous_real: float


def radial_laplacian(r, v):
    """``(1/r) (r v)''`` at interior points ``r[1:-1]`` by centred differences."""
    h = r[1] - r[0]
    w = r * v
    return (w[2:] - 2.0 * w[1:-1] + w[:-2]) / h**2 / r[1:-1]


def _rel_l2(res, parts, r):
    wts = r**2
    num = np.sqrt(np.sum(wts * np.abs(res) ** 2))
    den = max(np.sqrt(np.sum(wts * np.abs(p) ** 2)) for p in parts)
    return float(num / den) if den > 0 else float(num)


def helmholtz_residual(profile, r, u_hat, source, k):
    """Relative L2 residuals of ``Lap u + k^2 n u = (ik/2pi) n f`` on ``(h, 1]``.

    ``homogeneous_real`` is the residual of ``Lap U + k^2 n U = 0`` for
    ``U = Re(u_hat)``.  Each residual is normalised by the largest of its
    terms.
    """
    r = np.asarray(r, dtype=float)
    h = r[1] - r[0]
    if k * h > 2.0 * np.pi / 4.0:
        raise ValueError("fewer than four points per wavelength")
    sel = slice(1, int(round(1.0 / h)) + 1)
    rr = r[sel]
    n = np.where(rr <= 1.0, profile.n(np.minimum(rr, 1.0)), 1.0)
    f = source(rr)
    u = u_hat[sel]
    lap = radial_laplacian(r, u_hat)[: rr.size]
    rhs = 1j * k / (2.0 * np.pi) * n * f
    res = lap + k**2 * n * u - rhs
    U = u.real
    lap_re = lap.real
    res_re = lap_re + k**2 * n * U
    return HelmholtzCheck(_rel_l2(res, (lap, k**2 * n * u, rhs), rr),
                          _rel_l2(res_re, (lap_re, k**2 * n * U), rr))
