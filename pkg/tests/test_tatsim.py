import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from radial_itp import profiles as P
from radial_itp import tatsim as T

FREE = P.make_constant_test_index(1.0)
SRC = T.bump_source(0.5)


@pytest.fixture(scope="module")
def free_runs():
    return {n: T.simulate(FREE, SRC, h=1.0 / n, t_max=4.0) for n in (100, 200, 400)}


def test_zero_source_gives_zero(free_runs):
    tr = T.simulate(FREE, T.ZERO_SOURCE, h=1 / 100, t_max=2.0)
    assert np.all(tr.boundary_series == 0.0)


def test_dalembert_convergence(free_runs):
    errs = []
    for n, tr in sorted(free_runs.items()):
        exact = T.dalembert_trace(SRC, tr.t)
        errs.append(np.max(np.abs(tr.boundary_series - exact)) / np.max(np.abs(exact)))
    assert errs[-1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.25)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.25)


def test_huygens(free_runs):
    tr = free_runs[400]
    after = tr.t > 1.0 + SRC.support + 0.05
    assert np.max(np.abs(tr.boundary_series[after])) < 1e-3 * np.max(np.abs(tr.boundary_series))


def test_linearity():
    prof = P.make_bump_profile(0.3, 0.8)
    f1, f2 = T.bump_source(0.5), T.bump_source(0.3, 2.0)
    a = T.simulate(prof, f1, h=1 / 100, t_max=2.0).boundary_series
    b = T.simulate(prof, f2, h=1 / 100, t_max=2.0).boundary_series
    ab = T.simulate(prof, f1 + f2.scaled(-3.0), h=1 / 100, t_max=2.0).boundary_series
    assert np.allclose(ab, a - 3.0 * b, atol=1e-12 * np.max(np.abs(a)))


def test_energy():
    prof = P.make_bump_profile(-0.3, 0.8)
    tr = T.simulate(prof, SRC, h=1 / 200, t_max=3.0)
    assert np.max(np.abs(tr.energy - tr.energy[0])) < 1e-10 * tr.energy[0]
    sp = T.simulate(prof, SRC, h=1 / 200, t_max=6.0, r_domain=3.0, sponge_width=1.0)
    assert np.all(np.diff(sp.energy) <= 1e-12 * sp.energy[0])
    assert sp.energy[-1] < 0.5 * sp.energy[0]


def test_cfl_and_support_errors():
    with pytest.raises(T.CFLError):
        T.simulate(FREE, SRC, h=1 / 100, t_max=1.0, dt=0.02)
    with pytest.raises(ValueError):
        T.simulate(FREE, T.bump_source(1.2), h=1 / 100, t_max=1.0)
    with pytest.raises(ValueError):
        T.simulate(FREE, SRC, h=0.003, t_max=1.0)


def test_free_space_decay_is_infinite(free_runs):
    fit = T.decay_fit(free_runs[400], (2.0, 4.0), floor=1e-3)
    assert fit.rate == np.inf


@pytest.fixture(scope="module")
def decay_rates():
    out = {}
    for a in (0.3, -0.3):
        tr = T.simulate(P.make_bump_profile(a, 0.8), SRC, h=1 / 400, t_max=10.0)
        out[a] = T.decay_fit(tr, (3.0, 10.0))
    return out


def test_decay_rates_pinned(decay_rates):
    # frozen at h = 1/400; the h = 1/800 rates agree to 3 %
    assert decay_rates[0.3].rate == pytest.approx(2.3014035873589607, rel=1e-9)
    assert decay_rates[-0.3].rate == pytest.approx(1.4530736089629317, rel=1e-9)


def test_faster_interior_decays_faster(decay_rates):
    assert decay_rates[0.3].rate > decay_rates[-0.3].rate > 0


def test_decay_window_errors(free_runs):
    with pytest.raises(ValueError):
        T.decay_fit(free_runs[100], (3.0, 2.0))


def test_fourier_of_exponential():
    t = np.linspace(0.0, 40.0, 40001)
    k = 1.7
    got = T.fourier_integral(t, np.exp(-t), k, d0=-1.0)
    want = 1.0 / (1.0 - 1j * k) / (2 * np.pi)
    assert abs(got - want) < 1e-6


def test_temporal_transform_of_zero():
    tr = T.simulate(FREE, T.ZERO_SOURCE, h=1 / 100, t_max=2.0)
    r, uh, ub, bound = T.temporal_ft(tr, 2.0)
    assert np.all(uh == 0) and ub == 0 and bound == 0.0


def test_truncation_guard():
    tr = T.simulate(P.make_bump_profile(-0.3, 0.8), SRC, h=1 / 100, t_max=2.0)
    with pytest.raises(T.TruncationError):
        T.temporal_ft(tr, 2.0)


def test_helmholtz_bridge_converges(free_runs):
    res = []
    for n in (200, 400):
        tr = free_runs[n]
        r, uh, _, _ = T.temporal_ft(tr, 2.0, strict=False)
        res.append(T.helmholtz_residual(FREE, r, uh, SRC, 2.0))
    assert res[1].inhomogeneous < 0.02
    assert res[0].inhomogeneous / res[1].inhomogeneous == pytest.approx(4.0, rel=0.25)
    assert res[0].homogeneous_real / res[1].homogeneous_real == pytest.approx(4.0, rel=0.25)


def test_helmholtz_needs_resolution(free_runs):
    tr = free_runs[100]
    r, uh, _, _ = T.temporal_ft(tr, 2.0, strict=False)
    with pytest.raises(ValueError):
        T.helmholtz_residual(FREE, r, uh, SRC, 200.0)


@settings(max_examples=20, deadline=None)
@given(rho=st.floats(0.1, 0.9), amp=st.floats(-3, 3))
def test_sources_vanish_outside_support(rho, amp):
    assume(amp != 0.0)
    f = T.bump_source(rho, amp)
    r = np.linspace(rho, 2.0, 50)
    assert np.all(f(r) == 0.0)
    assert f.support == pytest.approx(rho)


def test_trace_outputs(free_runs, tmp_path):
    tr = free_runs[100]
    tr.write(tmp_path)
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,g" and len(lines) == len(tr.t) + 1
    assert tr.metadata()["profile_id"] == FREE.label
