import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radial_itp import profiles as P


def test_bump_values():
    p = P.make_bump_profile(0.3, 0.8)
    assert p.c(0.0) == pytest.approx(1.3)
    assert p.c(0.8) == 1.0
    assert p.c(1.0) == 1.0


def test_zero_amplitude_is_flat():
    p = P.make_bump_profile(0.0, 0.5)
    r = np.linspace(0, 1, 101)
    assert np.all(p.c(r) == 1.0)
    assert np.all(p.n(r) == 1.0)


def test_slow_bump_index_at_origin():
    p = P.make_bump_profile(-0.5, 0.6)
    assert p.c(0.0) == pytest.approx(0.5)
    assert p.n(0.0) == pytest.approx(4.0)


@pytest.mark.parametrize("a, rho", [(-1.0, 0.5), (-2.0, 0.5), (0.3, 0.0), (0.3, 1.0), (0.3, 1.2)])
def test_bump_rejects_bad_parameters(a, rho):
    with pytest.raises(P.ProfileError):
        P.make_bump_profile(a, rho)


def test_constant_index():
    p = P.make_constant_test_index(4.0)
    assert p.c(0.3) == pytest.approx(0.5)
    assert not p.admissible
    assert P.make_constant_test_index(1.0).admissible
    with pytest.raises(P.ProfileError):
        P.make_constant_test_index(0.0)


def test_validate_examples():
    rep = P.validate(P.make_bump_profile(0.3, 0.8))
    assert rep.passed and rep.admissible
    rep = P.validate(P.make_constant_test_index(4.0))
    assert not rep.checks["support"].passed
    assert not rep.admissible
    rep = P.validate(P.make_bump_profile(-0.99, 0.5))
    assert rep.checks["positivity"].margin == pytest.approx(0.01, abs=1e-12)
    with pytest.raises(ValueError):
        P.validate(P.make_bump_profile(0.3, 0.8), grid=8)


def test_exact_compact_support():
    for p in (P.make_bump_profile(0.7, 0.4), P.make_window_profile(-0.4, 0.6)):
        rho = p.p["rho"]
        r = np.linspace(rho, 1.0, 500)
        assert np.all(p.c(r) == 1.0)
        assert np.all(np.concatenate(p.c_derivs(r, 4)[1:]) == 0.0)


def test_boundary_index_flat():
    p = P.make_bump_profile(0.3, 0.8)
    n, n1, n2 = p.n_derivs(np.array([1.0]))
    assert n[0] == 1.0 and n1[0] == 0.0 and n2[0] == 0.0


def test_index_times_speed_squared():
    rng = np.random.default_rng(0)
    r = rng.uniform(0, 1, 10_000)
    for p in (P.make_bump_profile(0.3, 0.8), P.make_bump_profile(-0.6, 0.9),
              P.make_window_profile(0.4, 0.5)):
        assert np.max(np.abs(p.n(r) * p.c(r) ** 2 - 1.0)) < 1e-14


@pytest.mark.parametrize("prof", [P.make_bump_profile(0.3, 0.8), P.make_bump_profile(-0.5, 0.6),
                                  P.make_window_profile(0.3, 0.7),
                                  P.make_trapping_annulus()])
def test_derivatives_match_finite_differences(prof):
    r = np.linspace(0.05, 0.95, 37)
    errs = []
    for h in (2e-4, 1e-4):
        d = prof.c_derivs(r, 4)
        for order in range(1, 5):
            lo, hi = prof.c_derivs(r - h, 4)[order - 1], prof.c_derivs(r + h, 4)[order - 1]
            fd = (hi - lo) / (2 * h)
            scale = max(1.0, np.max(np.abs(d[order])))
            errs.append(np.max(np.abs(fd - d[order])) / scale)
    coarse, fine = max(errs[:4]), max(errs[4:])
    assert fine < 1e-3
    assert coarse / fine > 3.0  # O(h^2)


def test_even_at_origin():
    p = P.make_bump_profile(0.3, 0.8)
    r = np.array([0.0])
    d = p.c_derivs(r, 4)
    assert d[1][0] == 0.0 and d[3][0] == 0.0
    tc = p.taylor_c(12)
    assert np.all(tc[1::2] == 0.0)


def test_taylor_matches_values():
    for p in (P.make_bump_profile(0.3, 0.8), P.make_window_profile(-0.2, 0.9)):
        coef = p.taylor_c(24)
        r = np.array([0.02, 0.05])
        assert np.allclose(np.polyval(coef[::-1], r), p.c(r), rtol=0, atol=1e-13)


def test_json_round_trip(tmp_path):
    p = P.make_window_profile(0.2, 0.7, power=7)
    path = tmp_path / "w.json"
    p.dump(path)
    q = P.load(path)
    assert q == p
    assert q.label == "w"


def test_load_errors(tmp_path):
    with pytest.raises(P.ProfileError):
        P.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(P.ProfileError):
        P.load(bad)
    bad.write_text(json.dumps({"kind": "mystery"}))
    with pytest.raises(P.ProfileError):
        P.load(bad)
    bad.write_text(json.dumps({"kind": P.BUMP, "params": {"a": 0.1}}))
    with pytest.raises(P.ProfileError):
        P.load(bad)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-0.95, 3.0), rho=st.floats(0.05, 0.95))
def test_generated_bumps_are_admissible(a, rho):
    p = P.make_bump_profile(a, rho)
    rep = P.validate(p, grid=256)
    assert rep.passed
    r = np.linspace(0, 1, 257)
    assert np.all(p.c(r) > p.sigma)
