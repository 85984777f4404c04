"""Transmission eigenvalues, ray scans and wave traces for radial sound speeds.

Each subcommand writes ``report.json`` (with the resolved configuration
echoed back) and, where there is tabular output, ``report.csv`` under
``--out``.  Exit codes: 0 success, 2 bad input or failed validation,
3 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, oracle, profiles, raytrace, spectrum, tatsim
from .mode_solver import SeriesConvergenceError
from .rk import StepSizeError

log = logging.getLogger("radial_itp")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "spectrum": {"a": None, "b": None, "d": 3, "kmax": 10.0, "mmax": spectrum.DEFAULT_M_MAX,
                 "tol": spectrum.DEFAULT_TOL, "grid_density": spectrum.DEFAULT_GRID_DENSITY,
                 "workers": None, "oracle_mode": False, "out": None},
    "validate": {"profile": None, "grid": 1024, "out": None},
    "raytrace": {"profile": None, "d": 3, "rays": 256, "tmax": 20.0, "tol": 1e-8, "seed": None,
                 "out": None},
    "tat": {"profile": None, "source_radius": 0.5, "h": 1.0 / 400, "tmax": 4.0, "k": [2.0],
            "window": None, "decay_floor": 1e-12, "sponge": 0.0, "out": None},
    "oracle": {"regenerate": False, "dps": 50, "out": None},
}

# fields that never reach report files because they cannot change the numbers
_NOT_ECHOED = {"workers"}


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _build_parser():
    p = argparse.ArgumentParser(prog="radial-itp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--log-level", default="INFO")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file supplying any of the options below")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("spectrum", help="transmission eigenvalues of a profile pair")
    common(sp)
    sp.add_argument("--a", help="profile JSON for c")
    sp.add_argument("--b", help="profile JSON for b")
    sp.add_argument("--d", type=int)
    sp.add_argument("--kmax", type=float)
    sp.add_argument("--mmax", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--grid-density", type=float)
    sp.add_argument("--workers", type=int, help="processes (default: available CPUs)")
    sp.add_argument("--oracle-mode", action="store_const", const=True,
                    help="allow test-only profiles without a warning")

    sp = sub.add_parser("validate", help="check a profile against the admissibility rules")
    common(sp)
    sp.add_argument("profile", nargs="?")
    sp.add_argument("--grid", type=int)

    sp = sub.add_parser("raytrace", help="non-trapping scan of a profile")
    common(sp)
    sp.add_argument("--profile")
    sp.add_argument("--d", type=int)
    sp.add_argument("--rays", type=int)
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--seed", type=int, help="scramble the quasi-random sample with this seed")

    sp = sub.add_parser("tat", help="forward thermoacoustic simulation")
    common(sp)
    sp.add_argument("--profile")
    sp.add_argument("--source-radius", type=float)
    sp.add_argument("--h", type=float)
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--k", type=float, nargs="+")
    sp.add_argument("--window", type=float, nargs=2, metavar=("T1", "T2"))
    sp.add_argument("--decay-floor", type=float,
                    help="relative level below which the trace counts as zero")
    sp.add_argument("--sponge", type=float, help="sponge layer width")

    sp = sub.add_parser("oracle", help="verify (or regenerate) the reference fixtures")
    common(sp)
    sp.add_argument("--regenerate", action="store_const", const=True)
    sp.add_argument("--dps", type=int)
    return p


def resolve_config(command, args):
    """Defaults, overridden by ``--config``, overridden by explicit flags."""
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(doc) - set(cfg)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise InputError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _load_profile(path):
    try:
        return profiles.load(path)
    except profiles.ProfileError as exc:
        raise InputError(str(exc)) from exc


def _write(out, name, text):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    log.info("wrote %s", out / name)


def _echo(cfg):
    return {k: v for k, v in cfg.items() if k not in _NOT_ECHOED}


def _dump(doc):
    return json.dumps(doc, indent=2) + "\n"


def cmd_spectrum(cfg):
    _need(cfg, "a", "b", "out")
    pc, pb = _load_profile(cfg["a"]), _load_profile(cfg["b"])
    workers = cfg["workers"] or spectrum.default_workers()
    log.info("spectrum %s vs %s, d=%s, k<=%s, m<=%s, %d workers", pc.label, pb.label,
             cfg["d"], cfg["kmax"], cfg["mmax"], workers)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", spectrum.NonAdmissibleProfileWarning)
            rep = spectrum.find_spectrum(pc, pb, d=cfg["d"], k_max=cfg["kmax"], m_max=cfg["mmax"],
                                         grid_density=cfg["grid_density"], tol=cfg["tol"],
                                         workers=workers, oracle_mode=bool(cfg["oracle_mode"]))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    for w in caught:
        log.warning("%s", w.message)
    log.info("%d eigenvalues in %.2fs", len(rep.entries), time.perf_counter() - t0)
    doc = rep.to_dict()
    doc["config"] = {"run": _echo(cfg), "resolved": doc["config"]}
    doc["lower_bound"] = vars(spectrum.contrast_lower_bound(pc, pb, cfg["d"]))
    _write(cfg["out"], "report.json", _dump(doc))
    _write(cfg["out"], "report.csv", rep.to_csv())
    return EXIT_OK


def cmd_validate(cfg):
    _need(cfg, "profile")
    prof = _load_profile(cfg["profile"])
    rep = profiles.validate(prof, grid=cfg["grid"])
    doc = {"config": _echo(cfg), "report": rep.to_dict()}
    if cfg["out"]:
        _write(cfg["out"], "report.json", _dump(doc))
    else:
        sys.stdout.write(_dump(doc))
    for name, chk in rep.checks.items():
        log.info("%-15s %s  %s", name, "pass" if chk.passed else "FAIL", chk.detail)
    return EXIT_OK if rep.passed else EXIT_INPUT


def cmd_raytrace(cfg):
    _need(cfg, "profile", "out")
    prof = _load_profile(cfg["profile"])
    try:
        rep = raytrace.nontrapping_scan(prof, d=cfg["d"], n_rays=cfg["rays"], t_max=cfg["tmax"],
                                        tol=cfg["tol"], seed=cfg["seed"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    log.info("all_exit=%s herglotz=%s trapped=%d", rep.all_exit, rep.herglotz.passed,
             len(rep.trapped_candidates))
    doc = {"config": _echo(cfg), "report": rep.to_dict()}
    _write(cfg["out"], "report.json", _dump(doc))
    _write(cfg["out"], "report.csv", rep.exit_times_csv())
    return EXIT_OK


def cmd_tat(cfg):
    _need(cfg, "profile", "out")
    prof = _load_profile(cfg["profile"])
    try:
        src = tatsim.bump_source(cfg["source_radius"])
        trace = tatsim.simulate(prof, src, h=cfg["h"], t_max=cfg["tmax"],
                                sponge_width=cfg["sponge"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    doc = {"config": _echo(cfg), "trace": trace.metadata(), "fourier": []}
    if cfg["window"]:
        fit = tatsim.decay_fit(trace, tuple(cfg["window"]), floor=cfg["decay_floor"])
        doc["decay"] = {"rate": fit.rate if np.isfinite(fit.rate) else "inf",
                        "quality": fit.quality, "n_points": fit.n_points}
    for k in cfg["k"]:
        r, uh, ub, bound = tatsim.temporal_ft(trace, k, strict=False)
        chk = tatsim.helmholtz_residual(prof, r, uh, src, k)
        doc["fourier"].append({"k": k, "u_hat_boundary": [ub.real, ub.imag],
                               "tail_bound": bound, "residual_inhomogeneous": chk.inhomogeneous,
                               "residual_homogeneous_real": chk.homogeneous_real})
    _write(cfg["out"], "report.json", _dump(doc))
    _write(cfg["out"], "report.csv", trace.to_csv())
    return EXIT_OK


def cmd_oracle(cfg):
    if cfg["regenerate"]:
        oracle.write_fixtures(dps=cfg["dps"])
    results = oracle.verify_fixtures(oracle.load_fixtures())
    bad = [entry for entry, _, ok in results if not ok]
    doc = {"config": _echo(cfg), "n_fixtures": len(results), "n_failed": len(bad), "failed": bad}
    if cfg["out"]:
        _write(cfg["out"], "report.json", _dump(doc))
    log.info("%d fixtures, %d failed", len(results), len(bad))
    return EXIT_OK if not bad else EXIT_NUMERICAL


COMMANDS = {"spectrum": cmd_spectrum, "validate": cmd_validate, "raytrace": cmd_raytrace,
            "tat": cmd_tat, "oracle": cmd_oracle}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=args.log_level.upper(),
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except (InputError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (FloatingPointError, StepSizeError, SeriesConvergenceError, tatsim.TruncationError,
            RuntimeError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
