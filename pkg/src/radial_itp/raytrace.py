"""Bicharacteristics of ``H = c(x)^2 |xi|^2 / 2`` for radial speeds.

    x' = c^2 xi,    xi' = -(1/2) grad(c^2) |xi|^2

with ``grad(c^2) = (c^2)'(r) x / r``.  Outside the unit ball ``c = 1`` and
rays are straight lines, so a ray at ``r >= 1`` moving outward has left for
good; its crossing of ``R_exit`` is then computed exactly from that line.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from .profiles import CONSTANT
from .rk import StepSizeError, dop853

R_EXIT = 2.0


@dataclass
class RaySample:
    x0: np.ndarray
    xi0: np.ndarray
    exit_time: float | None
    max_radius: float
    trajectory_checkpoints: list = field(default_factory=list)
    hamiltonian_drift: float = 0.0
    truncated: bool = False


@dataclass
class HerglotzCheck:
    """Grid check of ``d/dr (r / c(r)) > 0`` on ``(0, 1]``."""

    passed: bool
    min_value: float
    r_at_min: float


@dataclass
class ScanReport:
    profile: str
    dimension: int
    n_rays: int
    t_max: float
    all_exit: bool
    worst_exit_time: float | None
    trapped_candidates: list
    herglotz: HerglotzCheck
    exit_times: np.ndarray = field(repr=False, default=None)
    truncated: bool = False

    @property
    def consistent(self):
        """Scan and Herglotz check tell the same story."""
        return self.all_exit == self.herglotz.passed

    def to_dict(self):
        return {
            "profile": self.profile,
            "dimension": self.dimension,
            "n_rays": self.n_rays,
            "t_max": self.t_max,
            "all_exit": self.all_exit,
            "worst_exit_time": self.worst_exit_time,
            "trapped_candidates": self.trapped_candidates,
            "herglotz_check": {"passed": self.herglotz.passed,
                               "min_value": self.herglotz.min_value,
                               "r_at_min": self.herglotz.r_at_min},
            "truncated": self.truncated,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def exit_times_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ray", "exit_time"])
        for i, t in enumerate(self.exit_times):
            w.writerow([i, "" if np.isnan(t) else repr(float(t))])
        return buf.getvalue()


def _speed(profile, r):
    """``c`` and ``c'`` with the exterior value ``c = 1`` beyond ``r = 1``."""
    c, c1 = profile.c_derivs(np.minimum(r, 1.0), 1)
    outside = r >= 1.0
    return np.where(outside, 1.0, c), np.where(outside, 0.0, c1)


def _check_profile(profile):
    if profile.kind == CONSTANT and profile.p["n0"] != 1.0:
        raise ValueError("rays need c = 1 at the boundary; constant test indices other than 1 are not supported")


def hamiltonian(profile, x, xi):
    r = np.linalg.norm(x, axis=0)
    c, _ = _speed(profile, r)
    return 0.5 * c**2 * np.sum(xi**2, axis=0)


def _rhs(profile, dim):
    def rhs(_, y):
        x, xi = y[:dim], y[dim:]
        r = np.sqrt(np.sum(x**2, axis=0))
        c, c1 = _speed(profile, r)
        # grad(c^2)/2 = c c' x / r, and c'(0) = 0 by evenness
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(r > 0.0, c * c1 / r, 0.0)
        return np.concatenate([c**2 * xi, -g * np.sum(xi**2, axis=0) * x])
    return rhs


def _scale(dim, rtol, atol):
    # block norms keep the step control invariant under rotations
    def scale_fn(y, y_new):
        out = np.empty_like(y)
        for blk in (slice(0, dim), slice(dim, 2 * dim)):
            a = np.sqrt(np.sum(y[blk] ** 2, axis=0))
            b = np.sqrt(np.sum(y_new[blk] ** 2, axis=0))
            out[blk] = atol + rtol * np.maximum(np.maximum(a, b), 1.0)
        return out
    return scale_fn


def _as_batch(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != dim:
        raise ValueError(f"expected {dim} coordinates, got {x.shape[0]}")
    return x


def flow(profile, x0, xi0, t, tol=1e-9):
    """Hamiltonian flow for time ``t > 0``; batched over trailing axis."""
    _check_profile(profile)
    dim = np.asarray(x0).shape[0]
    y0 = np.concatenate([_as_batch(x0, dim), _as_batch(xi0, dim)])
    res = dop853(_rhs(profile, dim), 0.0, t, y0, tol, scale_fn=_scale(dim, tol, 1e-3 * tol))
    return res.y[:dim], res.y[dim:]


def _exit_time(t, x, xi, r_exit):
    """Crossing time of ``|x| = r_exit`` for escaping rays, NaN for the others."""
    r2 = np.sum(x**2, axis=0)
    xv = np.sum(x * xi, axis=0)
    v2 = np.sum(xi**2, axis=0)
    escaping = (r2 >= 1.0) & (xv >= 0.0)
    with np.errstate(invalid="ignore"):
        s = (-xv + np.sqrt(xv**2 - v2 * (r2 - r_exit**2))) / v2
    return np.where(escaping, t + s, np.nan)


def _trace_batch(profile, x0, xi0, t_max, tol, r_exit, keep_path=False):
    dim = x0.shape[0]
    y0 = np.concatenate([x0, xi0])
    n = x0.shape[1]
    exit_t = np.full(n, np.nan)
    rmax = np.linalg.norm(x0, axis=0)
    path = [(0.0, x0.copy(), xi0.copy())] if keep_path else None

    def callback(t, y):
        x, xi = y[:dim], y[dim:]
        open_ = np.isnan(exit_t)
        rmax[open_] = np.maximum(rmax[open_], np.linalg.norm(x[:, open_], axis=0))
        te = _exit_time(t, x, xi, r_exit)
        hit = open_ & ~np.isnan(te)
        exit_t[hit] = te[hit]
        if keep_path:
            path.append((t, x.copy(), xi.copy()))
        return not np.any(np.isnan(exit_t))

    truncated = False
    y_end = y0
    try:
        res = dop853(_rhs(profile, dim), 0.0, t_max, y0, tol,
                     scale_fn=_scale(dim, tol, 1e-3 * tol), callback=callback)
        y_end = res.y
    except StepSizeError:
        truncated = True
    rmax[~np.isnan(exit_t)] = r_exit
    return exit_t, rmax, path, truncated, y_end


def trace_ray(profile, d, x0, xi0, t_max, tol=1e-9, r_exit=R_EXIT):
    """Trace one ray until it leaves ``|x| < r_exit`` or ``t_max`` is reached.

    Checkpoints are the accepted step endpoints.
    """
    _check_profile(profile)
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    if x0.shape != (d,) or xi0.shape != (d,):
        raise ValueError(f"x0 and xi0 must have shape ({d},)")
    if not np.linalg.norm(xi0) > 0.0:
        raise ValueError("xi0 must be nonzero")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    exit_t, rmax, path, truncated, _ = _trace_batch(profile, x0[:, None], xi0[:, None], t_max,
                                                    tol, r_exit, keep_path=True)
    checkpoints = [(t, x[:, 0], xi[:, 0]) for t, x, xi in path]
    h = np.array([hamiltonian(profile, x[:, None], xi[:, None])[0] for _, x, xi in checkpoints])
    drift = float(np.max(np.abs(h - h[0])) / h[0])
    et = None if np.isnan(exit_t[0]) else float(exit_t[0])
    return RaySample(x0, xi0, et, float(rmax[0]), checkpoints, drift, truncated)


def herglotz_check(profile, grid=4096):
    r = np.linspace(1.0 / grid, 1.0, grid)
    c, c1 = profile.c_derivs(r, 1)
    slope = (c - r * c1) / c**2
    i = int(np.argmin(slope))
    return HerglotzCheck(bool(slope[i] > 0.0), float(slope[i]), float(r[i]))


def sample_phase_space(profile, d, n_rays, seed=None):
    """Quasi-uniform ``(x0, xi0)`` over the unit ball times the sphere.

    A Halton sequence, scrambled only when ``seed`` is given.  ``xi0`` is
    scaled so that ``c(x0) |xi0| = 1``.
    """
    if seed is None:
        gen = qmc.Halton(d=2 * d + 1, scramble=False)
        gen.fast_forward(1)  # the first point sits on the cube corner
    else:
        gen = qmc.Halton(d=2 * d + 1, scramble=True, seed=seed)
    u = gen.random(n_rays).T
    dirs = norm.ppf(u[:d])
    dirs /= np.linalg.norm(dirs, axis=0)
    x0 = dirs * u[d] ** (1.0 / d)
    om = norm.ppf(u[d + 1:])
    om /= np.linalg.norm(om, axis=0)
    c, _ = _speed(profile, np.linalg.norm(x0, axis=0))
    return x0, om / c


def nontrapping_scan(profile, d=3, n_rays=256, t_max=20.0, tol=1e-8, r_exit=R_EXIT, seed=None):
    """Finite-time escape test paired with the Herglotz sufficient condition."""
    if n_rays < 8:
        raise ValueError("n_rays must be at least 8")
    _check_profile(profile)
    x0, xi0 = sample_phase_space(profile, d, n_rays, seed)
    exit_t, rmax, _, truncated, y_end = _trace_batch(profile, x0, xi0, t_max, tol, r_exit)
    trapped = [
        {"ray": int(i), "x0": x0[:, i].tolist(), "xi0": xi0[:, i].tolist(),
         "max_radius": float(rmax[i])}
        for i in np.nonzero(np.isnan(exit_t))[0]
    ]
    all_exit = not trapped and not truncated
    worst = float(np.nanmax(exit_t)) if np.any(~np.isnan(exit_t)) else None
    return ScanReport(profile.label, d, n_rays, float(t_max), all_exit, worst, trapped,
                      herglotz_check(profile), exit_t, truncated)
