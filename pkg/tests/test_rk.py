import numpy as np
import pytest

from radial_itp import rk


def test_exponential_exact():
    res = rk.dop853(lambda t, y: -y, 0.0, 2.0, np.array([1.0]), 1e-12, 1e-14)
    assert res.y[0] == pytest.approx(np.exp(-2.0), rel=1e-11)
    assert res.t == 2.0


def test_harmonic_oscillator_batched():
    k = np.array([0.5, 1.0, 3.0])
    y0 = np.stack([np.zeros(3), np.ones(3)])
    res = rk.dop853(lambda t, y: np.stack([y[1], -k**2 * y[0]]), 0.0, 5.0, y0, 1e-11, 1e-13)
    assert np.allclose(res.y[0], np.sin(k * 5.0) / k, atol=1e-9)
    # a batch follows the same step sequence as its hardest member alone
    one = rk.dop853(lambda t, y: np.stack([y[1], -9.0 * y[0]]), 0.0, 5.0, y0[:, 2:], 1e-11, 1e-13)
    assert abs(one.y[0, 0] - res.y[0, 2]) < 1e-9


def test_error_decreases_with_tolerance():
    errs = []
    for tol in (1e-6, 1e-9):
        res = rk.dop853(lambda t, y: np.cos(t) * y, 0.0, 10.0, np.array([1.0]), tol, tol)
        errs.append(abs(res.y[0] - np.exp(np.sin(10.0))))
    assert errs[1] < errs[0] / 10


def test_coefficient_prefetch_matches_direct():
    def coeffs(ts):
        return np.cos(ts)
    a = rk.dop853(lambda t, y, c: c * y, 0.0, 3.0, np.array([1.0]), 1e-12, 1e-14, coeffs=coeffs)
    assert a.y[0] == pytest.approx(np.exp(np.sin(3.0)), rel=1e-10)


def test_callback_stops():
    res = rk.dop853(lambda t, y: np.ones_like(y), 0.0, 10.0, np.array([0.0]), 1e-8, 1e-10,
                    callback=lambda t, y: y[0] > 1.0)
    assert res.stopped and res.t < 10.0


def test_errors():
    with pytest.raises(ValueError):
        rk.dop853(lambda t, y: y, 1.0, 0.0, np.array([1.0]), 1e-8)
    with pytest.raises(rk.StepSizeError):
        rk.dop853(lambda t, y: y**2, 0.0, 2.0, np.array([1.0]), 1e-10, 1e-10)
