"""Liouville transformation of the radial Helmholtz equation.

For an index ``n(r)`` the travel-time coordinate is
``eta(r) = int_0^r sqrt(n)``, ``C = eta(1)``, and the radial equation becomes
``-X'' + (m(m+1)/eta^2 + p_m(eta)) X = k^2 X`` with

    p_m = n''/(4 n^2) - 5 n'^2/(16 n^3) + m(m+1) (1/(r^2 n) - 1/eta^2),

derivatives of ``n`` taken in ``r`` and ``r = r(eta)``.  The last bracket is
a 0*inf difference at the origin; below ``eta_c`` it is evaluated from a
power series in ``eta`` in which the cancellation has been carried out on the
coefficients.  Its limit at 0 equals ``-2 phi''(0) / (3 phi(0)^3)`` with
``phi = sqrt(n)``.
"""

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _series


class FrameError(ValueError):
    """Raised when a profile cannot be transformed."""


_SERIES_TERMS = 24
_CROSSOVER_CANDIDATES = (0.2, 0.1, 0.05, 0.03, 0.02, 0.01)


def _panel_integral(f, a, b, nodes, weights):
    half = 0.5 * (b - a)
    x = a + half * (nodes + 1.0)
    return half * np.dot(weights, f(x))


class LiouvilleFrame:
    """Travel-time frame of one profile.

    Attributes
    ----------
    profile : RadialProfile
    endpoint : float
        ``C = int_0^1 sqrt(n)``.
    endpoint_error : float
        Difference between ``C`` on the adaptive panels and on the panels
        split in half.
    eta_c : float
        Crossover below which the singular part of ``p_m`` uses the series:
        the largest of a few fractions of ``C`` at which the series tail is
        below 1e-14, unless ``crossover`` fixes the fraction.
    origin_limit_pm_core : float
        ``lim_{eta -> 0} (1/(r^2 n) - 1/eta^2)``.
    """

    def __init__(self, profile, quad_order=10, panel_tol=1e-15, crossover=None):
        if quad_order < 4:
            raise ValueError("quad_order must be >= 4")
        r_probe = np.linspace(0.0, 1.0, 2049)
        if not np.all(profile.c(r_probe) > 0.0):
            raise FrameError(f"profile {profile.label} has a non-positive speed")
        self.profile = profile
        self.quad_order = int(quad_order)
        self._nodes, self._weights = np.polynomial.legendre.leggauss(self.quad_order)
        self._phi = lambda r: 1.0 / profile.c(r)

        self.edges = self._adapt_panels(panel_tol)
        pieces = self._panel_values(self.edges)
        self.eta_edges = np.concatenate([[0.0], np.cumsum(pieces)])
        self.endpoint = float(self.eta_edges[-1])

        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        split = np.sort(np.concatenate([self.edges, mids]))
        self.endpoint_error = abs(float(np.sum(self._panel_values(split))) - self.endpoint)
        if self.endpoint_error > 1e-12 * max(1.0, self.endpoint):
            raise FrameError(f"endpoint quadrature not converged: {self.endpoint_error:.3g}")

        r_tab = np.unique(np.concatenate([np.linspace(0.0, 1.0, 1025), self.edges]))
        eta_tab = self.eta_of_r(r_tab)
        if np.any(np.diff(eta_tab) <= 0.0):
            raise FrameError("travel-time map is not strictly increasing")
        self._seed = PchipInterpolator(eta_tab, r_tab)

        self._build_series()
        if crossover is None:
            self.eta_c = self._auto_crossover()
        else:
            self.eta_c = crossover * self.endpoint
        self._table = None

    # -- quadrature --------------------------------------------------------
    def _panel_values(self, edges):
        a, b = edges[:-1], edges[1:]
        half = 0.5 * (b - a)
        x = a[:, None] + half[:, None] * (self._nodes[None, :] + 1.0)
        return half * (self._phi(x) @ self._weights)

    def _adapt_panels(self, tol, max_panels=4096):
        nodes2, weights2 = np.polynomial.legendre.leggauss(2 * self.quad_order)
        edges = list(np.linspace(0.0, 1.0, 17))
        done = []
        stack = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]
        while stack:
            a, b = stack.pop()
            lo = _panel_integral(self._phi, a, b, self._nodes, self._weights)
            hi = _panel_integral(self._phi, a, b, nodes2, weights2)
            if abs(lo - hi) <= tol * max(1.0, abs(hi)) * (b - a) or len(done) + len(stack) > max_panels:
                done.append((a, b))
            else:
                mid = 0.5 * (a + b)
                stack.extend([(a, mid), (mid, b)])
        return np.array(sorted({a for a, _ in done} | {1.0}))

    # -- coordinate maps ---------------------------------------------------
    def eta_of_r(self, r):
        """Travel time ``eta(r)``; accepts scalars or arrays."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        if np.any(flat < 0.0) or np.any(flat > 1.0 + 1e-14):
            raise ValueError("r must lie in [0, 1]")
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.edges) - 2)
        a = self.edges[idx]
        half = 0.5 * (flat - a)
        x = a[:, None] + half[:, None] * (self._nodes[None, :] + 1.0)
        out = self.eta_edges[idx] + half * (self._phi(x) @ self._weights)
        return out.reshape(r.shape)

    def r_of_eta(self, eta, tol=1e-13, max_iter=8):
        """Inverse map: monotone interpolation seed, then Newton on ``eta(r) - eta``."""
        eta = np.asarray(eta, dtype=float)
        flat = np.atleast_1d(eta).ravel()
        if np.any(flat < 0.0) or np.any(flat > self.endpoint * (1 + 1e-13)):
            raise ValueError(f"eta must lie in [0, {self.endpoint}]")
        r = np.clip(self._seed(flat), 0.0, 1.0)
        for _ in range(max_iter):
            step = (self.eta_of_r(r) - flat) / self._phi(r)
            r = np.clip(r - step, 0.0, 1.0)
            if np.all(np.abs(step) <= tol * np.maximum(r, 1e-300)):
                break
        return r.reshape(eta.shape)

    # -- potential -----------------------------------------------------------
    def _build_series(self):
        N = _SERIES_TERMS
        nser = self.profile.taylor_n(N)
        phi = _series.power(nser, 0.5)
        eta_r = _series.integral(phi)
        r_eta = _series.reversion(eta_r)
        self.r_series = r_eta

        n_eta = _series.compose(nser, r_eta)
        q = _series.shift_down(r_eta, 1)
        T = _series.mul(_series.mul(q, q), n_eta)
        inv = _series.reciprocal(T[: N - 1])
        inv[0] -= 1.0
        self.core_series = _series.shift_down(inv, 2)[: N - 3]

        n1 = _series.derivative(nser)
        n2 = _series.derivative(n1)
        inv_n = _series.reciprocal(nser)
        p0_r = 0.25 * _series.mul(n2, _series.mul(inv_n, inv_n)) - 0.3125 * _series.mul(
            _series.mul(n1, n1), _series.mul(inv_n, _series.mul(inv_n, inv_n)))
        self.p0_series = _series.compose(p0_r[: N - 2], r_eta[: N - 2])[: N - 3]

        self.origin_limit_pm_core = float(self.core_series[0])
        # phi''(0) = 2 phi[2], phi'(0) = 0 by evenness
        self.origin_limit_formula = float(-4.0 * phi[2] / (3.0 * phi[0] ** 3))

    def _auto_crossover(self, tail_tol=1e-14):
        # the direct bracket loses ~eps/eta^2, so push the crossover out as
        # far as the truncated series stays accurate
        for frac in _CROSSOVER_CANDIDATES:
            eta = frac * self.endpoint
            tail = max(float(np.max(np.abs(ser[-3:]) * eta ** np.arange(len(ser) - 3, len(ser))))
                       for ser in (self.core_series, self.p0_series))
            if tail > tail_tol:
                continue
            # a flat core has a vanishing series whatever happens further out
            probe = np.array([0.5, 1.0]) * eta
            s = _series.evaluate(self.core_series, probe)
            r = self.r_of_eta(probe)
            sr = np.sqrt(self.profile.n(r)) * r
            direct = (probe - sr) * (probe + sr) / (sr * sr * probe * probe)
            if np.max(np.abs(s - direct)) <= 1e-10:
                return eta
        return _CROSSOVER_CANDIDATES[-1] * self.endpoint

    @property
    def table(self):
        """Fast interpolated ``(p0, core)`` evaluator, built on first use."""
        if self._table is None:
            self._table = PotentialTable(self)
        return self._table

    def potential_series(self, m, nterms=None):
        """Taylor coefficients of ``p_m`` in powers of ``eta`` about 0."""
        coef = self.p0_series + m * (m + 1) * self.core_series
        return coef if nterms is None else coef[:nterms]

    def potential_parts(self, eta, method="auto"):
        """Return ``(p0, core)`` with ``p_m = p0 + m(m+1) core``.

        ``method`` is ``"auto"`` (series below ``eta_c``), ``"direct"`` or
        ``"series"``.
        """
        eta = np.asarray(eta, dtype=float)
        flat = np.atleast_1d(eta).ravel()
        if np.any(flat < 0.0) or np.any(flat > self.endpoint * (1 + 1e-13)):
            raise ValueError(f"eta must lie in [0, {self.endpoint}]")
        r = self.r_of_eta(flat)
        n, n1, n2 = self.profile.n_derivs(r)
        p0 = 0.25 * n2 / n**2 - 0.3125 * n1**2 / n**3

        core = np.empty_like(flat)
        if method == "series":
            near = np.ones(flat.shape, dtype=bool)
        elif method == "direct":
            near = flat == 0.0
        else:
            near = flat < self.eta_c
        core[near] = _series.evaluate(self.core_series, flat[near])
        far = ~near
        # factored so the cancellation is exact when sqrt(n) r == eta
        e, sr = flat[far], np.sqrt(n[far]) * r[far]
        core[far] = (e - sr) * (e + sr) / (sr * sr * e * e)
        return p0.reshape(eta.shape), core.reshape(eta.shape)

    def potential(self, m, eta, method="auto"):
        """``p_m(eta)``; bounded on ``[0, C]``."""
        if m < 0:
            raise ValueError("m must be nonnegative")
        p0, core = self.potential_parts(eta, method)
        return p0 + m * (m + 1) * core

    def power_solution(self, m, eta):
        """``u = n^(1/4) / r^m`` at ``r = r(eta)`` and its ``eta``-derivative.

        ``u`` solves the ``k = 0`` transformed equation; it is the solution
        singular at the origin for ``m >= 1``.
        """
        eta = np.asarray(eta, dtype=float)
        if np.any(eta <= 0.0):
            raise ValueError("eta must be positive")
        r = self.r_of_eta(eta)
        n, n1, _ = self.profile.n_derivs(r)
        u = n**0.25 / r**m
        du_dr = (0.25 * n1 / n - m / r) * u
        return u, du_dr / np.sqrt(n)


class PotentialTable:
    """Piecewise-Chebyshev copy of ``(p0, core)`` for the integrator's inner loop.

    Panels are split until the two trailing coefficients on every panel fall
    below ``tol`` times the global magnitude of the parts.
    """

    def __init__(self, frame, degree=16, tol=1e-12, max_panels=2048):
        self.endpoint = frame.endpoint
        probe = np.linspace(0.0, frame.endpoint, 513)
        p0, core = frame.potential_parts(probe)
        scale = max(1.0, float(np.max(np.abs(p0))), float(np.max(np.abs(core))))

        def fit(a, b):
            t = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
            x = a + 0.5 * (b - a) * (t + 1.0)
            vals = frame.potential_parts(x)
            return [np.polynomial.chebyshev.chebfit(t, v, degree) for v in vals]

        panels = []
        start = np.linspace(0.0, frame.endpoint, 33)
        stack = list(zip(start[:-1], start[1:]))
        while stack:
            a, b = stack.pop()
            coefs = fit(a, b)
            tail = max(np.max(np.abs(c[-2:])) for c in coefs)
            if tail <= tol * scale or len(panels) + len(stack) >= max_panels:
                panels.append((a, b, coefs))
            else:
                mid = 0.5 * (a + b)
                stack.extend([(mid, b), (a, mid)])
        panels.sort(key=lambda item: item[0])
        self.edges = np.array([a for a, _, _ in panels] + [frame.endpoint])
        self._p0 = np.array([c[0] for _, _, c in panels]).T
        self._core = np.array([c[1] for _, _, c in panels]).T

    def parts(self, eta):
        eta = np.asarray(eta, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, eta, side="right") - 1, 0, len(self.edges) - 2)
        a, b = self.edges[idx], self.edges[idx + 1]
        t = (2.0 * eta - a - b) / (b - a)
        cheb = np.polynomial.chebyshev.chebval
        return (cheb(t, self._p0[:, idx], tensor=False),
                cheb(t, self._core[:, idx], tensor=False))


def build_frame(profile, quad_order=10):
    return LiouvilleFrame(profile, quad_order=quad_order)
