import json
import subprocess
import sys

import numpy as np
import pytest

from radial_itp import cli
from radial_itp import profiles as P


@pytest.fixture
def prof_dir(tmp_path):
    P.make_constant_test_index(4.0).dump(tmp_path / "c4.json")
    P.make_constant_test_index(1.0).dump(tmp_path / "c1.json")
    P.make_bump_profile(0.3, 0.8).dump(tmp_path / "fast.json")
    P.make_bump_profile(-0.5, 0.9).dump(tmp_path / "slow.json")
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_constant_spectrum_csv(prof_dir):
    out = prof_dir / "out"
    assert run("spectrum", "--a", prof_dir / "c4.json", "--b", prof_dir / "c1.json",
               "--mmax", 0, "--workers", 1, "--out", out) == 0
    rows = (out / "report.csv").read_text().splitlines()
    assert rows[0] == "k,m,multiplicity,residual"
    ks = [float(r.split(",")[0]) for r in rows[1:]]
    assert np.allclose(ks, [np.pi, 2 * np.pi, 3 * np.pi], rtol=1e-9)
    doc = json.loads((out / "report.json").read_text())
    assert doc["lower_bound"]["bound"] == pytest.approx(np.pi / 2)
    assert doc["config"]["run"]["mmax"] == 0
    assert "workers" not in doc["config"]["run"]


def test_identical_pair_flag(prof_dir):
    out = prof_dir / "same"
    assert run("spectrum", "--a", prof_dir / "fast.json", "--b", prof_dir / "fast.json",
               "--mmax", 2, "--workers", 1, "--out", out) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["identical_flag"] is True and doc["entries"] == []


def test_config_file_precedence(prof_dir):
    cfg = prof_dir / "cfg.json"
    cfg.write_text(json.dumps({"a": str(prof_dir / "slow.json"), "b": str(prof_dir / "c1.json"),
                               "kmax": 7.0, "mmax": 3}))
    out = prof_dir / "cfg_out"
    assert run("spectrum", "--config", cfg, "--mmax", 1, "--workers", 1, "--out", out) == 0
    run_cfg = json.loads((out / "report.json").read_text())["config"]["run"]
    assert run_cfg["kmax"] == 7.0 and run_cfg["mmax"] == 1


def test_unknown_config_key(prof_dir):
    cfg = prof_dir / "bad.json"
    cfg.write_text(json.dumps({"kmaxx": 3}))
    assert run("spectrum", "--config", cfg, "--out", prof_dir / "o") == 2


def test_missing_inputs(prof_dir):
    assert run("spectrum", "--a", prof_dir / "nope.json", "--b", prof_dir / "c1.json",
               "--out", prof_dir / "o") == 2
    assert run("spectrum", "--a", prof_dir / "c4.json", "--out", prof_dir / "o") == 2
    assert run("spectrum", "--a", prof_dir / "c4.json", "--b", prof_dir / "c1.json",
               "--tol", 1e-2, "--out", prof_dir / "o") == 2


def test_validate_exit_codes(prof_dir, capsys):
    assert run("validate", prof_dir / "fast.json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["checks"]["positivity"]["passed"]
    assert run("validate", prof_dir / "c4.json", "--out", prof_dir / "v") == 2
    assert (prof_dir / "v" / "report.json").exists()


def test_raytrace_command(prof_dir):
    out = prof_dir / "rays"
    assert run("raytrace", "--profile", prof_dir / "fast.json", "--rays", 32, "--out", out) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["report"]["all_exit"] is True
    assert len((out / "report.csv").read_text().splitlines()) == 33


def test_tat_command(prof_dir):
    out = prof_dir / "tat"
    assert run("tat", "--profile", prof_dir / "c1.json", "--h", 0.01, "--tmax", 4.0,
               "--window", 2, 4, "--decay-floor", 1e-3, "--out", out) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["decay"]["rate"] == "inf"
    assert doc["fourier"][0]["k"] == 2.0
    assert run("tat", "--profile", prof_dir / "c1.json", "--h", 0.003,
               "--out", out) == 2


def test_oracle_command(tmp_path):
    assert run("oracle", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["n_failed"] == 0 and doc["n_fixtures"] >= 20


def test_reports_independent_of_worker_count(prof_dir):
    out = prof_dir / "det"
    texts = []
    for w in (1, 3, 1):
        assert run("spectrum", "--a", prof_dir / "slow.json", "--b", prof_dir / "c1.json",
                   "--kmax", 8, "--mmax", 3, "--workers", w, "--out", out) == 0
        texts.append(((out / "report.json").read_bytes(), (out / "report.csv").read_bytes()))
    assert texts[0] == texts[1] == texts[2]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "radial_itp", "--version"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip()
