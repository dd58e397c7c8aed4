"""Command-line front end: ``fcswork {simulate,longtime,sweep,g2,check-ft} --config FILE``.

Exit codes: 0 success, 1 a check-ft gate failed, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from fcswork import longtime, oracles, stats
from fcswork.config import build_model, load_config
from fcswork.errors import ConfigError, NumericalError, PreconditionError

SCHEMA_VERSION = "1.0"

JARZYNSKI_TOL = 1e-3
CROOKS_TOL = 0.05
SYMMETRY_TOL = 1e-6
SYMMETRY_POINTS = 32


def _fmt(x):
    """Shortest round-trip float text, so identical numbers give identical bytes."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path, kind, payload):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(_json_safe(payload))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _out_dir(args, cfg):
    out = Path(args.out or cfg.output.get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dt(args, cfg):
    return args.dt if args.dt is not None else cfg.dt


def _moment_times(cfg, model, t_final):
    if "moment_times" in cfg.run:
        times = cfg.run["moment_times"]
        if not isinstance(times, list) or not times:
            raise ConfigError("run.moment_times", "must be a non-empty list")
        return sorted(float(x) for x in times)
    period = model.drive_period
    if period is not None and t_final >= period:
        # stroboscopic sampling: whole drive periods
        n = int(math.floor(t_final / period + 1e-9))
        return [k * period for k in range(1, n + 1)]
    return list(np.linspace(0, t_final, 11)[1:])


def _distribution_rows(dist):
    return zip(dist.energies, dist.probabilities)


def _symmetry(model, t, dt):
    us = np.linspace(-math.pi, math.pi, SYMMETRY_POINTS) / model.channels[0].transition_energy
    try:
        return stats.check_symmetry(model, t, us, dt=dt)
    except PreconditionError:
        return None


def _crooks(model, t, cfg, dt, source):
    if math.isinf(model.beta):
        return None
    if source == "heat":
        p = stats.heat_distribution(model, t, cfg.spacing, cfg.grid_size, dt=dt)
        return stats.check_crooks(p, p, model.beta)
    fwd = stats.work_distribution(model, t, cfg.spacing, cfg.grid_size, dt=dt)
    rev = stats.work_distribution(model, t, cfg.spacing, cfg.grid_size, reversed=True, dt=dt)
    return stats.check_crooks(fwd, rev, model.beta)


def _jarzynski(model, t, dt, kind="work"):
    if math.isinf(model.beta):
        return None
    return stats.check_jarzynski(model, t, kind=kind, dt=dt)


def cmd_simulate(args, cfg):
    model = build_model(cfg)
    t, dt = cfg.t_final, _dt(args, cfg)
    out = _out_dir(args, cfg)
    work = stats.work_distribution(model, t, cfg.spacing, cfg.grid_size, dt=dt)
    heat = stats.heat_distribution(model, t, cfg.spacing, cfg.grid_size, dt=dt)
    _write_csv(out / "work_distribution.csv", ("energy", "probability"), _distribution_rows(work))
    _write_csv(out / "heat_distribution.csv", ("energy", "probability"), _distribution_rows(heat))

    times = _moment_times(cfg, model, t)
    moments = {"times": times}
    for kind, fn in (("work", stats.work_moments), ("heat", stats.heat_moments)):
        ms = fn(model, times, dt=dt)
        moments[kind] = {
            "mean": [m.mean for m in ms],
            "variance": [m.variance for m in ms],
            "f_ratio": [m.ratio for m in ms],
        }
    _write_json(out / "moments.json", "moments", moments)

    checks = {
        "t": t,
        "jarzynski_residual": _jarzynski(model, t, dt),
        "crooks_max_dev": _crooks(model, t, cfg, dt, "work"),
        "symmetry_max_dev": _symmetry(model, t, dt),
        "heat_jarzynski_residual": _jarzynski(model, t, dt, kind="heat"),
    }
    _write_json(out / "fluctuation_checks.json", "fluctuation_checks", checks)
    print(f"wrote work/heat distributions, moments and checks to {out}")
    return 0


def cmd_longtime(args, cfg):
    model = build_model(cfg)
    if not model.is_static:
        raise ConfigError("system.type", "long-time statistics need a static (rotating-frame) model")
    cs = longtime.cumulant_expansion(model)
    out = _out_dir(args, cfg)
    _write_json(out / "cumulants.json", "cumulants", dict(system=model.name, **cs.as_dict()))
    print(f"fano={cs.fano:.10g} fano_single={cs.fano_single:.10g} lambda1={cs.lambda1:.10g}")
    return 0


def _axis(block, key):
    spec = block.get(key)
    field = f"sweep.{key}"
    if isinstance(spec, list) and spec:
        values = spec
    elif isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(field, "needs numeric start, stop and num") from exc
        if num < 1:
            raise ConfigError(field, "num must be >= 1")
        values = np.linspace(start, stop, num).tolist()
    else:
        raise ConfigError(field, "must be a list or a {start, stop, num} table")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(field, f"values must be positive numbers, got {v!r}")
    return [float(v) for v in values]


def cmd_sweep(args, cfg):
    omegas = _axis(cfg.sweep, "omega")
    omega_xxs = _axis(cfg.sweep, "omega_xx")
    gamma = cfg.bath.get("gamma", 1.0)
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)) or gamma <= 0:
        raise ConfigError("bath.gamma", "must be positive")
    rows = longtime.sweep_fano(omegas, omega_xxs, float(gamma), nu=cfg.nu, threads=args.threads)
    out = _out_dir(args, cfg)
    header = longtime.SWEEP_COLUMNS + ("error",)
    _write_csv(
        out / "sweep.csv",
        header,
        ([r.omega, r.omega_xx, r.fano_double, r.fano_single, r.c12_rate, r.entangled_flag, r.error] for r in rows),
    )
    failed = sum(bool(r.error) for r in rows)
    print(f"{len(rows)} points, {failed} failed")
    return 0


def _g2_oracle(model):
    p = model.params
    if model.name == "three_level":
        return lambda t: oracles.avg_g2(t, p["gamma"], p["omega_r"])
    if model.name == "coupled_qubits" and p["omega_xx"] > 0:
        return lambda t: oracles.avg_g2(t, p["gamma"], p["omega"] ** 2 / p["omega_xx"])
    return None


def cmd_g2(args, cfg):
    model = build_model(cfg)
    if not model.is_static:
        raise ConfigError("system.type", "g2 needs a static model")
    block = cfg.g2
    gamma = model.params.get("gamma", 1.0)
    t_max = float(block.get("t_max", 10.0 / gamma))
    n_points = int(block.get("n_points", 501))
    if t_max <= 0 or n_points < 2:
        raise ConfigError("g2", "t_max must be positive and n_points >= 2")
    window = block.get("window")
    if window is None and model.name == "coupled_qubits" and model.params["omega_xx"] > 0:
        window = 2 * math.pi / model.params["omega_xx"]
    times = np.linspace(0.0, t_max, n_points)
    g2 = longtime.g2_correlator(model, times)
    smooth = longtime.window_average(times, g2, float(window)) if window else g2
    oracle = _g2_oracle(model)
    rows = ([t, a, b, oracle(t) if oracle else None] for t, a, b in zip(times, g2, smooth))
    out = _out_dir(args, cfg)
    _write_csv(out / "g2.csv", ("t", "g2", "g2_smoothed", "avg_g2_oracle"), rows)
    print(f"g2(0)={g2[0]:.6g} smoothed g2(0)={smooth[0]:.6g}")
    return 0


def cmd_check_ft(args, cfg):
    model = build_model(cfg)
    t, dt = cfg.t_final, _dt(args, cfg)
    gates = [
        ("jarzynski", _jarzynski(model, t, dt), JARZYNSKI_TOL),
        (f"crooks[{args.crooks_source}]", _crooks(model, t, cfg, dt, args.crooks_source), CROOKS_TOL),
        ("symmetry", _symmetry(model, t, dt), SYMMETRY_TOL),
    ]
    failed = False
    print(f"{'gate':<14} {'value':>12} {'tolerance':>10}  status")
    for name, value, tol in gates:
        if value is None:
            status, text = "skip", "n/a"
        else:
            ok = value <= tol
            failed |= not ok
            status, text = ("pass" if ok else "FAIL"), f"{value:.3e}"
        print(f"{name:<14} {text:>12} {tol:>10.1e}  {status}")
    return 1 if failed else 0


COMMANDS = {
    "simulate": cmd_simulate,
    "longtime": cmd_longtime,
    "sweep": cmd_sweep,
    "g2": cmd_g2,
    "check-ft": cmd_check_ft,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fcswork", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML or JSON run configuration")
        p.add_argument("--out", help="output directory (default: output.dir or .)")
        p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps (default: all cores)")
        p.add_argument("--dt", type=float, default=None, help="override the base integration step")
        if name == "check-ft":
            p.add_argument("--crooks-source", choices=("work", "heat"), default="work",
                           help="distribution fed to the Crooks gate")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        if args.dt is not None and not args.dt > 0:
            raise ConfigError("--dt", "must be positive")
        if args.threads is None:
            args.threads = os.cpu_count() or 1
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
