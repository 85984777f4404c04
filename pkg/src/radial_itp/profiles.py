"""Radially symmetric sound-speed profiles on the unit ball.

Every profile exposes closed-form evaluators for the speed ``c(r)``, the
index of refraction ``n(r) = c(r)**-2`` and their first derivatives, plus
the Taylor coefficients of ``n`` at the origin (needed by the near-origin
expansions in :mod:`radial_itp.liouville`).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _series

BUMP = "parametric-bump"
POLYNOMIAL = "polynomial-window"
CONSTANT = "piecewise-constant-test"
TRAPPING = "trapping-annulus-test"
KINDS = (BUMP, POLYNOMIAL, CONSTANT, TRAPPING)

# exp(-700) is the last value before the bump underflows to zero
_BUMP_CUTOFF = 700.0


class ProfileError(ValueError):
    """Raised for parameters that cannot define an acoustic profile."""


def _bump_shape(x, order):
    """``s(x) = exp(1 - 1/(1-x^2))`` on ``|x| < 1`` and its x-derivatives."""
    x = np.asarray(x, dtype=float)
    out = [np.zeros_like(x) for _ in range(order + 1)]
    u = 1.0 - x * x
    inside = u > 1.0 / _BUMP_CUTOFF
    if not np.any(inside):
        return out
    xi = x[inside]
    ui = u[inside]
    h = 1.0 / ui
    s = np.exp(1.0 - h)
    # g = 1 - 1/u, derivatives of 1/u written out
    g1 = -2 * xi * h**2
    g2 = -(2 * h**2 + 8 * xi**2 * h**3)
    g3 = -(24 * xi * h**3 + 48 * xi**3 * h**4)
    g4 = -(24 * h**3 + 288 * xi**2 * h**4 + 384 * xi**4 * h**5)
    vals = [
        s,
        g1 * s,
        (g2 + g1**2) * s,
        (g3 + 3 * g1 * g2 + g1**3) * s,
        (g4 + 4 * g1 * g3 + 3 * g2**2 + 6 * g1**2 * g2 + g1**4) * s,
    ]
    for i in range(order + 1):
        out[i][inside] = vals[i]
    return out


def bump_shape(x):
    """The unit bump ``exp(1 - 1/(1-x^2))``, zero for ``|x| >= 1``; peak value 1."""
    return _bump_shape(x, 0)[0]


def _bump_taylor(nterms):
    """Coefficients of s(x) in powers of y = x^2."""
    # 1 - 1/(1-y) = -(y + y^2 + ...)
    g = -np.ones(nterms)
    g[0] = 0.0
    return _series.exp(g)


def _window_shape(x, order, power):
    """``(1 - x^2)^p`` on ``|x| < 1`` and its x-derivatives."""
    x = np.asarray(x, dtype=float)
    out = [np.zeros_like(x) for _ in range(order + 1)]
    inside = np.abs(x) < 1.0
    poly = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** power
    for i in range(order + 1):
        out[i][inside] = poly.deriv(i)(x[inside]) if i else poly(x[inside])
    return out


@dataclass(frozen=True)
class RadialProfile:
    """A radially symmetric sound speed ``c(r)`` on ``[0, 1]``.

    Instances are immutable; use the ``make_*`` constructors rather than
    building one by hand.
    """

    kind: str
    params: tuple
    sigma: float
    admissible: bool = True
    name: str = field(default="", compare=False)

    @property
    def p(self):
        return dict(self.params)

    @property
    def label(self):
        if self.name:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({args})"

    # -- speed -----------------------------------------------------------
    def c_derivs(self, r, order=2):
        """Return ``[c, c', ..., c^(order)]`` at ``r`` (order <= 4)."""
        if not 0 <= order <= 4:
            raise ValueError("derivatives available up to order 4")
        r = np.abs(np.asarray(r, dtype=float))
        p = self.p
        if self.kind == CONSTANT:
            c = np.full_like(r, p["n0"] ** -0.5)
            return [c] + [np.zeros_like(r) for _ in range(order)]
        if self.kind == BUMP:
            rho, a = p["rho"], p["a"]
            shape = _bump_shape(r / rho, order)
            scale = [a / rho**i for i in range(order + 1)]
        elif self.kind == POLYNOMIAL:
            rho, a = p["rho"], p["a"]
            shape = _window_shape(r / rho, order, int(p["power"]))
            scale = [a / rho**i for i in range(order + 1)]
        else:
            r0, w, a = p["r0"], p["width"], p["a"]
            shape = _bump_shape((r - r0) / w, order)
            scale = [-a / w**i for i in range(order + 1)]
        out = [sc * s for sc, s in zip(scale, shape)]
        out[0] = out[0] + 1.0
        return out

    def c(self, r):
        return self.c_derivs(r, 0)[0]

    def n_derivs(self, r):
        """Return ``(n, n', n'')`` at ``r``."""
        c, c1, c2 = self.c_derivs(r, 2)
        n = c**-2
        n1 = -2.0 * c1 / c**3
        n2 = -2.0 * c2 / c**3 + 6.0 * c1**2 / c**4
        return n, n1, n2

    def n(self, r):
        return self.c(r) ** -2

    # -- origin expansion -------------------------------------------------
    def taylor_c(self, nterms=20):
        """Taylor coefficients of ``c`` about ``r = 0`` (in powers of r)."""
        p = self.p
        out = np.zeros(nterms)
        if self.kind == CONSTANT:
            out[0] = p["n0"] ** -0.5
            return out
        if self.kind == TRAPPING:
            out[0] = 1.0
            return out
        half = (nterms + 1) // 2
        if self.kind == BUMP:
            ycoef = _bump_taylor(half)
        else:
            ycoef = np.polynomial.Polynomial([1.0, -1.0]) ** int(p["power"])
            ycoef = np.pad(ycoef.coef, (0, half))[:half]
        k = np.arange(half)
        out[2 * k] = p["a"] * ycoef / p["rho"] ** (2 * k)
        out[0] += 1.0
        return out

    def taylor_n(self, nterms=20):
        return _series.power(self.taylor_c(nterms), -2.0)

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        return {"kind": self.kind, "params": self.p}

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def make_bump_profile(a, rho):
    """``c(r) = 1 + a*exp(1 - 1/(1 - (r/rho)^2))`` for ``r < rho``, else 1."""
    a, rho = float(a), float(rho)
    if not a > -1.0:
        raise ProfileError(f"amplitude a={a} makes the speed vanish (need a > -1)")
    if not 0.0 < rho < 1.0:
        raise ProfileError(f"support radius rho={rho} outside (0, 1)")
    return RadialProfile(BUMP, (("a", a), ("rho", rho)), sigma=min(1.0, 1.0 + a) * (1 - 1e-9))


def make_window_profile(a, rho, power=6):
    """Polynomial window ``1 + a*(1-(r/rho)^2)^power``; only C^(power-1) at rho."""
    a, rho, power = float(a), float(rho), int(power)
    if not a > -1.0:
        raise ProfileError(f"amplitude a={a} makes the speed vanish (need a > -1)")
    if not 0.0 < rho < 1.0:
        raise ProfileError(f"support radius rho={rho} outside (0, 1)")
    if power < 5:
        raise ProfileError("window power must be >= 5 so that n'' is continuous")
    return RadialProfile(POLYNOMIAL, (("a", a), ("power", float(power)), ("rho", rho)),
                         sigma=min(1.0, 1.0 + a) * (1 - 1e-9))


def make_constant_test_index(n0):
    """Constant index ``n = n0`` on the closed ball (oracle input)."""
    n0 = float(n0)
    if not n0 > 0.0:
        raise ProfileError(f"index n0={n0} must be positive")
    return RadialProfile(CONSTANT, (("n0", n0),), sigma=n0**-0.5 * (1 - 1e-9),
                         admissible=(n0 == 1.0))


def make_trapping_annulus(a=0.5, r0=0.6, width=0.15):
    """Low-speed annulus ``c = 1 - a*s((r-r0)/width)``; traps rays for strong ``a``."""
    a, r0, width = float(a), float(r0), float(width)
    if not 0.0 <= a < 1.0:
        raise ProfileError("annulus depth must lie in [0, 1)")
    if not (0.0 < r0 - width and r0 + width < 1.0):
        raise ProfileError("annulus must sit strictly inside (0, 1)")
    return RadialProfile(TRAPPING, (("a", a), ("r0", r0), ("width", width)),
                         sigma=(1.0 - a) * (1 - 1e-9), admissible=False)


def from_dict(doc):
    """Build a profile from its JSON document ``{"kind": ..., "params": {...}}``."""
    try:
        kind = doc["kind"]
        params = dict(doc.get("params", {}))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ProfileError(f"malformed profile document: {exc}") from exc
    makers = {
        BUMP: make_bump_profile,
        POLYNOMIAL: make_window_profile,
        CONSTANT: make_constant_test_index,
        TRAPPING: make_trapping_annulus,
    }
    if kind not in makers:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    try:
        return makers[kind](**params)
    except TypeError as exc:
        raise ProfileError(f"bad parameters for {kind}: {exc}") from exc


def load(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc
    prof = from_dict(doc)
    return RadialProfile(prof.kind, prof.params, prof.sigma, prof.admissible,
                         name=doc.get("name", Path(path).stem))


# -- validation --------------------------------------------------------------

@dataclass
class Check:
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class ValidationReport:
    profile: str
    checks: dict
    admissible: bool

    @property
    def passed(self):
        return all(ch.passed for ch in self.checks.values())

    def to_dict(self):
        return {
            "profile": self.profile,
            "passed": self.passed,
            "admissible": self.admissible,
            "checks": {k: {"passed": v.passed, "margin": v.margin, "detail": v.detail}
                       for k, v in self.checks.items()},
        }


def validate(profile, grid=1024, eps_support=1e-3, flat_tol=1e-10, even_tol=1e-6):
    """Check the acoustic-profile invariants on a sample grid.

    Failures are reported, never raised.
    """
    if grid < 16:
        raise ValueError("validation grid needs at least 16 samples")
    r = np.linspace(0.0, 1.0, int(grid))
    c = profile.c(r)
    checks = {}

    cmin = float(np.min(c))
    checks["positivity"] = Check(cmin > 0.0 and cmin > profile.sigma * (1 - 1e-6), cmin,
                                 f"min c = {cmin:.6g}, sigma = {profile.sigma:.6g}")

    edge = np.linspace(1.0 - eps_support, 1.0, 64)
    c0, c1, c2 = profile.c_derivs(edge, 2)
    flat = float(max(np.max(np.abs(c0 - 1.0)), np.max(np.abs(c1)), np.max(np.abs(c2))))
    checks["support"] = Check(flat < flat_tol, flat,
                              f"max(|c-1|, |c'|, |c''|) on [1-{eps_support:g}, 1]")

    n, n1, _ = profile.n_derivs(np.array([1.0]))
    nb = float(max(abs(n[0] - 1.0), abs(n1[0])))
    checks["boundary_index"] = Check(nb < flat_tol, nb, "max(|n(1)-1|, |n'(1)|)")

    # one-sided 5-point estimate of c'(0), O(h^4), relative to the largest slope
    h = 1e-3
    cs = profile.c(h * np.arange(5))
    slope0 = float((-25 * cs[0] + 48 * cs[1] - 36 * cs[2] + 16 * cs[3] - 3 * cs[4]) / (12 * h))
    slope_scale = max(1.0, float(np.max(np.abs(profile.c_derivs(r, 1)[1]))))
    odd = abs(slope0) / slope_scale
    checks["origin_even"] = Check(odd < even_tol, odd, "finite-difference c'(0) / max|c'|")

    return ValidationReport(profile.label, checks, profile.admissible and all(
        ch.passed for ch in checks.values()))
