"""Real transmission eigenvalues of radial profile pairs.

For each angular index ``m`` the determinant

    d_m(k) = Z_m(B) X_m'(C) - Z_m'(B) X_m(C)

built from the normalised regular solutions of the two transformed
equations vanishes exactly at the transmission eigenvalues belonging to
``m``.  Zeros are located by sampling ``d_m`` on a uniform ``k`` grid,
bracketing sign changes and polishing with Brent's method.
"""

import csv
import io
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import oracle
from .liouville import LiouvilleFrame
from .mode_solver import solve_regular
from .roots import dip_candidates, polish_brackets

IDENTICAL_FACTOR = 1e3
DIP_REL = 1e-4
DEFAULT_GRID_DENSITY = 50
DEFAULT_TOL = 1e-10
DEFAULT_M_MAX = 12


class NonAdmissibleProfileWarning(UserWarning):
    """A test-only profile was used for a production spectrum run."""


@dataclass
class SpectrumEntry:
    k: float
    m: int
    j: int
    multiplicity: int
    bracket: tuple
    residual: float


@dataclass
class ModeSweep:
    """Everything learned about one ``m``."""

    m: int
    roots: list
    suspects: list
    stagnated: list
    max_abs: float
    scale: float
    identical: bool


@dataclass
class SpectrumReport:
    profile_pair: tuple
    dimension: int
    entries: list
    k_max: float
    m_max: int
    identical_flag: bool
    identical_modes: list = field(default_factory=list)
    suspects: list = field(default_factory=list)
    stagnated: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def eigenvalues(self):
        return np.array([e.k for e in self.entries])

    def for_mode(self, m):
        return np.array([e.k for e in self.entries if e.m == m])

    def to_dict(self):
        doc = {
            "config": self.config,
            "profile_pair": list(self.profile_pair),
            "dimension": self.dimension,
            "k_max": self.k_max,
            "m_max": self.m_max,
            "identical_flag": self.identical_flag,
            "identical_modes": self.identical_modes,
            "entries": [asdict(e) for e in self.entries],
            "suspected_even_order_zeros": self.suspects,
            "stagnated_brackets": self.stagnated,
        }
        for e in doc["entries"]:
            e["bracket"] = list(e["bracket"])
        return doc

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "m", "multiplicity", "residual"])
        for e in self.entries:
            w.writerow([repr(e.k), e.m, e.multiplicity, repr(e.residual)])
        return buf.getvalue()


# -- determinant ---------------------------------------------------------------

def _wronskian_parts(frame_c, frame_b, m, k, tol):
    x = solve_regular(frame_c, m, k, tol)
    z = solve_regular(frame_b, m, k, tol)
    zx = z.value_at_end * x.slope_at_end
    xz = z.slope_at_end * x.value_at_end
    return zx - xz, np.abs(zx) + np.abs(xz)


def wronskian(frame_c, frame_b, m, k, tol=DEFAULT_TOL):
    """``d_m(k) = Z(B) X'(C) - Z'(B) X(C)``; scalar in, scalar out."""
    d, _ = _wronskian_parts(frame_c, frame_b, m, k, tol)
    return float(d[0]) if np.ndim(k) == 0 else d


def k_grid(k_max, grid_density):
    n = max(2, int(round(k_max * grid_density)))
    return np.linspace(0.0, k_max, n + 1)


def _sign_brackets(values):
    """Consecutive nonzero samples of opposite sign, as index pairs."""
    nz = np.nonzero(values != 0.0)[0]
    s = np.sign(values[nz])
    flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return [(int(nz[i]), int(nz[i + 1])) for i in flips]


def _locate(fbatch, ks, values, tol, maxiter=100):
    """Bracket, polish and check every sign change of sampled ``values``.

    Returns ``(roots, stagnated)`` where roots are ``(k, bracket, residual)``.
    """
    pairs = _sign_brackets(values)
    brackets = [(ks[i], ks[j], values[i], values[j]) for i, j in pairs]
    # Brent stops once the bracket is below xtol + 4 eps |k|
    results = polish_brackets(fbatch, brackets, 0.5 * tol, maxiter=maxiter)

    roots, stagnated, picks = [], [], []
    for (i, j), res in zip(pairs, results):
        (lo, hi), (flo, fhi) = res.bracket, res.bracket_f
        if not res.converged:
            stagnated.append({"bracket": [float(lo), float(hi)], "k": float(res.root)})
            continue
        if lo < hi and flo * fhi < 0.0:
            # interior point by regula falsi on the polished bracket
            k = lo - flo * (hi - lo) / (fhi - flo)
            k = min(max(k, np.nextafter(lo, hi)), np.nextafter(hi, lo))
            picks.append((float(k), (float(lo), float(hi))))
        else:
            picks.append((float(res.root), (float(ks[i]), float(ks[j]))))
    if picks:
        resid = np.abs(np.atleast_1d(fbatch(np.array([k for k, _ in picks]))))
        roots = [(k, br, float(r)) for (k, br), r in zip(picks, resid)]
    return roots, stagnated


def sweep_mode(frame_c, frame_b, m, ks, tol=DEFAULT_TOL):
    """Sample, bracket and polish ``d_m`` on the grid ``ks``."""
    values, scale = _wronskian_parts(frame_c, frame_b, m, ks, tol)
    max_abs = float(np.max(np.abs(values)))
    scale = float(np.max(scale))
    identical = max_abs < IDENTICAL_FACTOR * tol * max(scale, 1.0)
    if identical:
        return ModeSweep(m, [], [], [], max_abs, scale, True)

    def fbatch(k):
        return _wronskian_parts(frame_c, frame_b, m, k, tol)[0]

    # k = 0 is a trivial zero whenever both indices meet 1 at the boundary:
    # the equations then coincide with Laplace's.  Noise there must not open
    # a bracket.
    floor = IDENTICAL_FACTOR * tol * max(scale, 1.0)
    if ks[0] == 0.0 and abs(values[0]) < floor:
        values = values.copy()
        values[0] = 0.0
    roots, stagnated = _locate(fbatch, ks, values, tol)
    suspects = [{"m": m, "k": float(ks[i]), "value": float(values[i])}
                for i in dip_candidates(values, rel=DIP_REL)]
    for s in stagnated:
        s["m"] = m
    return ModeSweep(m, roots, suspects, stagnated, max_abs, scale, False)


# -- worker plumbing -----------------------------------------------------------

_WORKER = {}


def _init_worker(profile_c, profile_b):
    _WORKER["c"] = LiouvilleFrame(profile_c)
    _WORKER["b"] = _WORKER["c"] if profile_b == profile_c else LiouvilleFrame(profile_b)


def _worker_sweep(m, ks, tol):
    return sweep_mode(_WORKER["c"], _WORKER["b"], m, ks, tol)


def _check_dimension(d):
    if int(d) != d or d < 3 or d % 2 == 0:
        raise ValueError("dimension d must be an odd integer >= 3")
    return int(d)


def find_spectrum(profile_c, profile_b, d=3, k_max=10.0, m_max=DEFAULT_M_MAX,
                  grid_density=DEFAULT_GRID_DENSITY, tol=DEFAULT_TOL, workers=1,
                  m_values=None, oracle_mode=False):
    """Real transmission eigenvalues of ``(profile_c, profile_b)`` in ``(0, k_max]``.

    Parameters
    ----------
    d : int
        Odd spatial dimension; only ``m = j + (d-3)/2`` are swept.
    m_values : sequence of int, optional
        Restrict the sweep to these ``m`` (each must be admissible for ``d``).
    workers : int
        Process count for the per-``m`` sweeps.  The output does not depend
        on it.
    oracle_mode : bool
        Silence the warning for test-only profiles.

    Returns
    -------
    SpectrumReport
    """
    d = _check_dimension(d)
    shift = (d - 3) // 2
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    if m_max < shift:
        raise ValueError(f"m_max must be at least {shift} for d={d}")
    if grid_density <= 0:
        raise ValueError("grid_density must be positive")
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    if not oracle_mode:
        for prof in (profile_c, profile_b):
            if not prof.admissible:
                warnings.warn(f"profile {prof.label} is a test-only profile",
                              NonAdmissibleProfileWarning, stacklevel=2)
    ms = list(range(shift, int(m_max) + 1))
    if m_values is not None:
        bad = [m for m in m_values if m not in ms]
        if bad:
            raise ValueError(f"m values {bad} are outside {shift}..{m_max}")
        ms = sorted(set(int(m) for m in m_values))
    ks = k_grid(k_max, grid_density)

    workers = max(1, int(workers or 1))
    if workers == 1 or len(ms) == 1:
        _init_worker(profile_c, profile_b)
        sweeps = [_worker_sweep(m, ks, tol) for m in ms]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(ms)), initializer=_init_worker,
                                 initargs=(profile_c, profile_b)) as pool:
            sweeps = list(pool.map(_worker_sweep, ms, [ks] * len(ms), [tol] * len(ms)))

    entries = []
    for sw in sweeps:
        j = sw.m - shift
        mult = oracle.harmonic_dimension(d, j)
        for k, br, res in sw.roots:
            if 0.0 < k <= k_max:
                entries.append(SpectrumEntry(k, sw.m, j, mult, br, res))
    entries.sort(key=lambda e: (e.k, e.m))

    config = {
        "profile_c": profile_c.to_dict(),
        "profile_b": profile_b.to_dict(),
        "d": d,
        "k_max": float(k_max),
        "m_max": int(m_max),
        "m_values": ms,
        "grid_density": float(grid_density),
        "tol": float(tol),
    }
    return SpectrumReport(
        profile_pair=(profile_c.label, profile_b.label),
        dimension=d,
        entries=entries,
        k_max=float(k_max),
        m_max=int(m_max),
        identical_flag=any(sw.identical for sw in sweeps),
        identical_modes=[sw.m for sw in sweeps if sw.identical],
        suspects=[s for sw in sweeps for s in sw.suspects],
        stagnated=[s for sw in sweeps for s in sw.stagnated],
        config=config,
    )


def default_workers():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


# -- single-frame spectra ------------------------------------------------------

def _frame_zeros(frame, m, k_max, tol, grid_density, which):
    ks = k_grid(k_max, grid_density)

    def fbatch(k):
        sol = solve_regular(frame, m, k, tol)
        return sol.value_at_end if which == "value" else sol.slope_at_end

    roots, stagnated = _locate(fbatch, ks, fbatch(ks), tol)
    if stagnated:
        raise RuntimeError(f"root polishing stagnated on {stagnated}")
    return [k for k, _, _ in roots if 0.0 < k <= k_max]


def dirichlet_spectrum(frame, m, k_max, tol=DEFAULT_TOL, grid_density=DEFAULT_GRID_DENSITY):
    """Zeros of ``k -> X_m(C, k)`` on ``(0, k_max]``."""
    return _frame_zeros(frame, m, k_max, tol, grid_density, "value")


def neumann_spectrum(frame, m, k_max, tol=DEFAULT_TOL, grid_density=DEFAULT_GRID_DENSITY):
    """Zeros of ``k -> X_m'(C, k)`` on ``(0, k_max]``."""
    return _frame_zeros(frame, m, k_max, tol, grid_density, "slope")


def interlaces(a, b):
    """True when the sorted lists strictly alternate (either may lead)."""
    merged = sorted([(x, 0) for x in a] + [(x, 1) for x in b])
    tags = [t for _, t in merged]
    return all(t0 != t1 for t0, t1 in zip(tags, tags[1:])) and abs(len(a) - len(b)) <= 1


# -- lower bound ---------------------------------------------------------------

@dataclass
class ContrastBound:
    sign: str
    bound: float | None
    n_star: float | None
    lambda0: float


def contrast_lower_bound(profile_c, profile_b, d=3, grid=4097, zero_tol=1e-14):
    """Sign of ``n_c - n_b`` and the resulting eigenvalue floor ``sqrt(lambda0 / n*)``.

    ``n*`` is the supremum of the larger index.  Mixed contrast gives no
    bound.
    """
    d = _check_dimension(d)
    r = np.linspace(0.0, 1.0, grid)
    nc, nb = profile_c.n(r), profile_b.n(r)
    diff = nc - nb
    lam0 = oracle.dirichlet_ball_eigenvalue(d)
    if np.all(diff >= -zero_tol):
        sign, n_star = "nonneg", float(np.max(nc))
    elif np.all(diff <= zero_tol):
        sign, n_star = "nonpos", float(np.max(nb))
    else:
        return ContrastBound("mixed", None, None, lam0)
    return ContrastBound(sign, float(np.sqrt(lam0 / n_star)), n_star, lam0)
