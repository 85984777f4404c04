"""Closed-form references for constant indices.

With ``n`` constant the potential vanishes and the regular solution of the
transformed radial equation is a Riccati-Bessel function,

    X_m(eta, k) = (2m+1)!! / k^(m+1) * psi_m(k eta),   psi_m(z) = z j_m(z),

normalised so that ``X_m / eta^(m+1) -> 1`` at the origin.  Everything here
is computed from series and recurrences so it does not share code with the
numerical path it is used to check.
"""

import json
import math
from pathlib import Path

import numpy as np

FIXTURE_PATH = Path(__file__).parent / "data" / "oracle_fixtures.json"


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


# -- spherical Bessel functions ---------------------------------------------

def _series_normalized(m, z):
    """``(2m+1)!! j_m(z) / z^m`` from its power series."""
    z2 = -0.5 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 200):
        term = term * z2 / (k * (2 * m + 2 * k + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _upward(m, z):
    j_prev = np.sin(z) / z
    if m == 0:
        return j_prev
    j = np.sin(z) / z**2 - np.cos(z) / z
    for l in range(1, m):
        j_prev, j = j, (2 * l + 1) / z * j - j_prev
    return j


def _miller(m, z):
    """Downward recurrence normalised by ``sum (2l+1) j_l^2 = 1``."""
    start = m + 20 + int(np.max(z)) + int(np.sqrt(40 * (m + 1)))
    j_next = np.zeros_like(z)
    j = np.ones_like(z)
    norm = (2 * start + 1) * j**2
    want = np.zeros_like(z)
    for l in range(start, 0, -1):
        j_next, j = j, (2 * l + 1) / z * j - j_next
        norm = norm + (2 * l - 1) * j**2
        if l - 1 == m:
            want = j.copy()
        # rescale before j**2 can overflow
        s = np.where(np.abs(j) > 1e100, 1e-100, 1.0)
        j, j_next, norm, want = j * s, j_next * s, norm * s * s, want * s
    return want / np.sqrt(norm)


def spherical_jn(m, z):
    """Spherical Bessel function ``j_m(z)`` for real ``z >= 0``."""
    z = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z).ravel()
    out = np.empty_like(flat)
    small = flat * flat <= max(1.0, 2 * m + 3)
    up = ~small & (flat >= m)
    mid = ~small & ~up
    if np.any(small):
        zs = flat[small]
        out[small] = zs**m / double_factorial(2 * m + 1) * _series_normalized(m, zs)
    if np.any(up):
        out[up] = _upward(m, flat[up])
    if np.any(mid):
        out[mid] = _miller(m, flat[mid])
    return out.reshape(z.shape)


def spherical_yn(m, z):
    """Spherical Bessel function of the second kind (upward recurrence)."""
    z = np.asarray(z, dtype=float)
    y_prev = -np.cos(z) / z
    if m == 0:
        return y_prev
    y = -np.cos(z) / z**2 - np.sin(z) / z
    for l in range(1, m):
        y_prev, y = y, (2 * l + 1) / z * y - y_prev
    return y


def normalized_jn(m, z):
    """``(2m+1)!! j_m(z) / z^m``; equals 1 at ``z = 0``."""
    z = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z).ravel()
    out = np.empty_like(flat)
    small = flat * flat <= max(1.0, 2 * m + 3)
    out[small] = _series_normalized(m, flat[small])
    big = ~small
    if np.any(big):
        zb = flat[big]
        # log form keeps (2m+1)!! / z^m finite for large m
        logpref = math.lgamma(2 * m + 2) - math.lgamma(m + 1) - m * math.log(2) - m * np.log(zb)
        out[big] = spherical_jn(m, zb) * np.exp(logpref)
    return out.reshape(z.shape)


# -- Riccati-Bessel regular solution ----------------------------------------

def riccati_bessel_regular(m, k, eta):
    """Value and ``eta``-slope of the normalised regular solution for ``p = 0``.

    Returns ``(X, X')`` with ``X = eta^(m+1) * normalized_jn(m, k eta)``.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be nonnegative")
    eta = np.asarray(eta, dtype=float)
    z = k * eta
    value = eta ** (m + 1) * normalized_jn(m, z)
    if m == 0:
        slope = np.cos(z)
    else:
        slope = eta**m * ((2 * m + 1) * normalized_jn(m - 1, z) - m * normalized_jn(m, z))
    return value, slope


def riccati_bessel_regular_scaled(m, k, eta):
    """Overflow-safe form: ``(X / eta^(m+1), X' / eta^m, log10(eta) * (m+1))``."""
    eta = float(eta)
    z = k * eta
    value = float(normalized_jn(m, z))
    if m == 0:
        slope = math.cos(z)
    else:
        slope = float((2 * m + 1) * normalized_jn(m - 1, z) - m * normalized_jn(m, z))
    return value, slope, (m + 1) * math.log10(eta) if eta > 0 else -math.inf


def constant_index_wronskian(n_c0, n_b0, m, k):
    """``d_m(k) = Z(B) X'(C) - Z'(B) X(C)`` with ``C = sqrt(n_c0)``, ``B = sqrt(n_b0)``."""
    if n_c0 <= 0 or n_b0 <= 0:
        raise ValueError("indices must be positive")
    x, dx = riccati_bessel_regular(m, k, math.sqrt(n_c0))
    z, dz = riccati_bessel_regular(m, k, math.sqrt(n_b0))
    return float(z * dx - dz * x)


# -- misc -------------------------------------------------------------------

def harmonic_dimension(d, j):
    """Dimension of the degree-``j`` spherical harmonics on ``S^(d-1)``."""
    if d < 2 or j < 0:
        raise ValueError("need d >= 2 and j >= 0")
    if j == 0:
        return 1
    return (2 * j + d - 2) * math.factorial(j + d - 3) // (math.factorial(j) * math.factorial(d - 2))


def bessel_j(nu, z):
    """Bessel ``J_nu(z)`` for real ``nu >= 0`` and ``z >= 0``."""
    z = float(z)
    if z == 0.0:
        return 1.0 if nu == 0 else 0.0
    if z > 25.0 + nu:
        # Hankel asymptotic expansion
        mu = 4 * nu * nu
        w = z - (0.5 * nu + 0.25) * math.pi
        p, q, term = 1.0, 0.0, 1.0
        for k in range(1, 30):
            term *= (mu - (2 * k - 1) ** 2) / (k * 8 * z)
            if k % 2:
                q += term * (-1) ** ((k - 1) // 2)
            else:
                p += term * (-1) ** (k // 2)
        return math.sqrt(2 / (math.pi * z)) * (p * math.cos(w) - q * math.sin(w))
    half = 0.5 * z
    total = 0.0
    for k in range(400):
        logt = (2 * k + nu) * math.log(half) - math.lgamma(k + 1) - math.lgamma(k + nu + 1)
        t = math.exp(logt) * (-1) ** k
        total += t
        if k > half and abs(t) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def first_bessel_zero(order, step=0.05, xtol=1e-15):
    """First positive zero of ``J_order`` by scan and bisection."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    a = step
    fa = bessel_j(order, a)
    while True:
        b = a + step
        fb = bessel_j(order, b)
        if fa == 0.0:
            return a
        if fa * fb < 0.0:
            break
        a, fa = b, fb
    while b - a > xtol * b:
        mid = 0.5 * (a + b)
        fm = bessel_j(order, mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def dirichlet_ball_eigenvalue(d):
    """First Dirichlet eigenvalue of the Laplacian on the unit ball in R^d."""
    return first_bessel_zero(0.5 * d - 1.0) ** 2


# -- extended-precision fixtures ---------------------------------------------

def _mp_regular(mp, m, k, eta):
    z = mp.mpf(k) * eta
    pref = mp.mpf(math.prod(range(2 * m + 1, 0, -2))) / mp.mpf(k) ** (m + 1)
    j = lambda l: mp.sqrt(mp.pi / (2 * z)) * mp.besselj(l + mp.mpf(1) / 2, z)
    psi = z * j(m)
    dpsi = mp.cos(z) if m == 0 else z * j(m - 1) - m * j(m)
    return pref * psi, pref * mp.mpf(k) * dpsi


def _mp_bump_core_limit(mp, a, rho):
    """Richardson limit of ``1/(r^2 n) - 1/eta^2`` at 0 for the bump profile."""
    a, rho = mp.mpf(a), mp.mpf(rho)
    phi = lambda s: 1 / (1 + a * mp.exp(1 - 1 / (1 - (s / rho) ** 2)))
    vals = []
    hs = [mp.mpf(10) ** -2, mp.mpf(10) ** -3, mp.mpf(10) ** -4]
    for r in hs:
        eta = mp.quad(phi, [0, r])
        vals.append(1 / (r**2 * phi(r) ** 2) - 1 / eta**2)
    # D(h) = L + A h^2 + B h^4: eliminate the two correction terms
    (h0, h1, h2), (d0, d1, d2) = hs, vals
    m_ = mp.matrix([[1, h0**2, h0**4], [1, h1**2, h1**4], [1, h2**2, h2**4]])
    sol = mp.lu_solve(m_, mp.matrix([d0, d1, d2]))
    return sol[0]


def generate_fixtures(dps=50):
    """Recompute every fixture value with mpmath at ``dps`` digits."""
    import mpmath as mp

    mp.mp.dps = dps
    out = []
    prov = f"mpmath {mp.__version__} at {dps} digits"
    for m, k, eta in [(0, 1.0, 1.0), (1, 2.0, 1.0), (2, 3.0, 1.5), (5, 0.5, 2.0),
                      (10, 10.0, 1.0), (10, 0.5, 1.0), (3, 7.0, 0.2)]:
        v, s = _mp_regular(mp, m, k, mp.mpf(eta))
        out.append({"op": "riccati_bessel_regular", "inputs": {"m": m, "k": k, "eta": eta},
                    "expected": [float(v), float(s)],
                    "provenance": prov + ", besselj of half-integer order"})
    for nc, nb, m, k in [(2.25, 1.0, 2, 3.0), (4.0, 1.0, 0, 0.5 * math.pi), (4.0, 1.0, 1, 2.5),
                         (1.44, 0.81, 4, 6.0)]:
        x, dx = _mp_regular(mp, m, k, mp.sqrt(nc))
        z, dz = _mp_regular(mp, m, k, mp.sqrt(nb))
        out.append({"op": "constant_index_wronskian",
                    "inputs": {"n_c0": nc, "n_b0": nb, "m": m, "k": k},
                    "expected": float(z * dx - dz * x), "provenance": prov})
    for order in [0.0, 0.5, 1.5, 2.5]:
        zero = mp.findroot(lambda t: mp.besselj(order, t), mp.besseljzero(order, 1))
        out.append({"op": "first_bessel_zero", "inputs": {"order": order},
                    "expected": float(zero), "provenance": prov + ", besseljzero"})
    for a, rho in [(0.3, 0.8), (-0.5, 0.6)]:
        lim = _mp_bump_core_limit(mp, a, rho)
        out.append({"op": "bump_core_limit", "inputs": {"a": a, "rho": rho},
                    "expected": float(lim),
                    "provenance": prov + ", quad for eta at r=1e-2,1e-3,1e-4 + Richardson in r^2"})
    for d, j in [(3, 0), (3, 2), (5, 1), (3, 10), (7, 3)]:
        out.append({"op": "harmonic_dimension", "inputs": {"d": d, "j": j},
                    "expected": math.comb(j + d - 1, d - 1) - (math.comb(j + d - 3, d - 1) if j >= 2 else 0),
                    "provenance": "difference of homogeneous-polynomial space dimensions"})
    return out


def write_fixtures(path=FIXTURE_PATH, dps=50):
    fixtures = generate_fixtures(dps)
    Path(path).write_text(json.dumps(fixtures, indent=1) + "\n")
    return fixtures


def load_fixtures(path=FIXTURE_PATH):
    return json.loads(Path(path).read_text())


def evaluate_fixture(entry):
    """Evaluate one fixture entry with the in-repo double-precision code."""
    op, inp = entry["op"], entry["inputs"]
    if op == "riccati_bessel_regular":
        v, s = riccati_bessel_regular(inp["m"], inp["k"], inp["eta"])
        return [float(v), float(s)]
    if op == "constant_index_wronskian":
        return constant_index_wronskian(**inp)
    if op == "first_bessel_zero":
        return first_bessel_zero(inp["order"])
    if op == "harmonic_dimension":
        return harmonic_dimension(inp["d"], inp["j"])
    if op == "bump_core_limit":
        from .liouville import build_frame
        from .profiles import make_bump_profile
        return build_frame(make_bump_profile(inp["a"], inp["rho"])).origin_limit_pm_core
    raise ValueError(f"unknown fixture op {op!r}")


def verify_fixtures(fixtures, rtol=1e-10, atol=1e-12):
    """Return a list of ``(entry, computed, ok)``."""
    rows = []
    for entry in fixtures:
        got = evaluate_fixture(entry)
        want = entry["expected"]
        ok = bool(np.allclose(got, want, rtol=rtol, atol=atol))
        rows.append((entry, got, ok))
    return rows
