import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radial_itp import mode_solver as M
from radial_itp import oracle
from conftest import frame_of


def test_sine_example():
    fr = frame_of("const", 1.0)
    sol = M.solve_regular(fr, 0, np.pi)
    assert abs(sol.value_at_end[0]) < 1e-9
    assert sol.slope_at_end[0] == pytest.approx(-1.0, abs=1e-9)


def test_zero_wavenumber_is_linear():
    fr = frame_of("const", 1.0)
    sol = M.solve_regular(fr, 0, 0.0)
    assert sol.value_at_end[0] == pytest.approx(1.0, abs=1e-10)
    assert sol.slope_at_end[0] == pytest.approx(1.0, abs=1e-10)


def test_first_mode_example():
    fr = frame_of("const", 1.0)
    sol = M.solve_regular(fr, 1, 2.0)
    want = oracle.riccati_bessel_regular(1, 2.0, 1.0)
    assert sol.value_at_end[0] == pytest.approx(want[0], rel=1e-8)
    assert sol.value_at_end[0] == pytest.approx(0.75 * (np.sin(2) / 2 - np.cos(2)), rel=1e-8)


@pytest.mark.parametrize("n0", [1.0, 4.0])
def test_batch_matches_oracle(n0):
    fr = frame_of("const", n0)
    k = np.linspace(0.0, 10.0, 41)
    for m in (0, 3, 7):
        sol = M.solve_regular(fr, m, k)
        x, dx = oracle.riccati_bessel_regular(m, k, fr.endpoint)
        scale = np.maximum(np.abs(x), np.abs(dx))
        assert np.max(np.abs(sol.value_at_end - x) / scale) < 1e-8
        assert np.max(np.abs(sol.slope_at_end - dx) / scale) < 1e-8


def test_normalisation_near_origin():
    fr = frame_of("bump", 0.3, 0.8)
    for m in (0, 2, 5):
        eta = np.array([2e-2])
        x = M.sample_solution(fr, m, 4.0, eta)
        assert x[0] / eta[0] ** (m + 1) == pytest.approx(1.0, abs=1e-2)
        a = M.frobenius_coefficients(fr, m, 4.0)
        v, _ = M.series_eval(a, m, 1e-3)
        assert v[0] / 1e-3 ** (m + 1) == pytest.approx(1.0, abs=1e-5)


def test_tolerance_refinement_converges():
    fr = frame_of("bump", -0.5, 0.6)
    k = np.array([1.0, 4.0, 9.0])
    vals = [M.solve_regular(fr, 2, k, tol=t).value_at_end for t in (1e-7, 1e-9, 1e-11)]
    d1 = np.max(np.abs(vals[1] - vals[0]))
    d2 = np.max(np.abs(vals[2] - vals[1]))
    assert d2 < d1
    assert d2 < 1e-8 * np.max(np.abs(vals[2]))


def test_series_order_does_not_matter():
    fr = frame_of("bump", 0.3, 0.8)
    k = np.array([2.0, 6.0])
    a = M.solve_regular(fr, 1, k, order=8)
    b = M.solve_regular(fr, 1, k, order=6)
    assert np.allclose(a.value_at_end, b.value_at_end, rtol=1e-8, atol=0)
    assert np.allclose(a.slope_at_end, b.slope_at_end, rtol=1e-8, atol=0)


def test_residual_check_on_exact_and_noisy_samples():
    fr = frame_of("const", 1.0)
    etas = np.linspace(0.2, 1.0, 161)
    exact = np.sin(3.0 * etas) / 3.0
    small = M.residual_check(fr, 0, 3.0, etas, exact)
    h = etas[1] - etas[0]
    assert small < 10 * h * h * np.max(np.abs(exact)) * 9.0
    noisy = exact + 1e-3 * np.random.default_rng(1).standard_normal(etas.size)
    assert M.residual_check(fr, 0, 3.0, etas, noisy) > 100 * small
    with pytest.raises(ValueError):
        M.residual_check(fr, 0, 3.0, etas[:4], exact[:4])


def test_sampled_solution_satisfies_equation():
    fr = frame_of("bump", 0.3, 0.8)
    res = []
    for n in (100, 200):
        etas = np.linspace(0.1, fr.endpoint, n + 1)
        x = M.sample_solution(fr, 2, 5.0, etas)
        res.append(M.residual_check(fr, 2, 5.0, etas, x))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.1)


@pytest.mark.parametrize("tol", [1e-14, 1e-5])
def test_tolerance_range(tol):
    with pytest.raises(ValueError):
        M.solve_regular(frame_of("const", 1.0), 0, 1.0, tol=tol)


def test_bad_arguments():
    fr = frame_of("const", 1.0)
    with pytest.raises(ValueError):
        M.solve_regular(fr, -1, 1.0)
    with pytest.raises(ValueError):
        M.solve_regular(fr, 0, -1.0)
    with pytest.raises(ValueError):
        M.solve_regular(fr, 0, np.nan)


@settings(max_examples=15, deadline=None)
@given(m=st.integers(0, 10), k=st.floats(0.0, 12.0))
def test_constant_index_matches_oracle_anywhere(m, k):
    fr = frame_of("const", 2.25)
    sol = M.solve_regular(fr, m, k)
    x, dx = oracle.riccati_bessel_regular(m, k, fr.endpoint)
    scale = max(abs(float(x)), abs(float(dx)))
    assert abs(sol.value_at_end[0] - x) < 1e-8 * scale
    assert abs(sol.slope_at_end[0] - dx) < 1e-8 * scale
