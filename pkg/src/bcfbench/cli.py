"""Command-line front end: fit, benchmark, test, simulate, report.

Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration error,
3 instability detected. ``BCFBENCH_THREADS`` caps the worker count used for
sweeps.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bath import bath_from_dict, bath_to_dict
from .errors import InstabilityError, NumericalError
from .fitting import (
    IPParameters,
    SampleGrid,
    aaa_fit,
    delta_L,
    esprit_fit,
    frequency_grid,
    gmt_fit,
    ip_to_exponential,
    model_from_dict,
    model_to_dict,
    subohmic_frequency_grid,
    time_grid,
)
from .heom.generic import GenericHEOM, gibbs_state, rk4_propagate, steady_state, system_from_dict
from .oscillator import OscillatorParams, eq_moment, spectral_correlation
from .testing import assign_surrogate, decompose_transitions, run_surrogate_test

log = logging.getLogger("bcfbench")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_UNSTABLE = 0, 1, 2, 3
UNITS = "hbar=1 unless the bath sets hbar; frequencies in the bath's declared unit"


class ConfigError(Exception):
    """Bad paths, malformed files or invalid overrides."""


def n_threads():
    raw = os.environ.get("BCFBENCH_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BCFBENCH_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("BCFBENCH_THREADS must be >= 1")
    return n


def _pmap(fn, items):
    items = list(items)
    workers = min(n_threads(), max(len(items), 1))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ----------------------------------------------------------------------------
# file helpers


def _read_json(path, what):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} file not found: {p}")
    try:
        with p.open() as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {p} is not valid JSON: {exc}") from None


def _load(path, what, parser):
    data = _read_json(path, what)
    try:
        return parser(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what} file {path} is malformed: {exc}") from None


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _header(cfg):
    return {"tool": "bcfbench", "version": __version__, "units": UNITS, "config": cfg}


def _write_json(path, payload, cfg):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    out = dict(_header(cfg))
    out.update(payload)
    with p.open("w") as fh:
        json.dump(_jsonable(out), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, columns, rows, cfg):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for line in json.dumps(_jsonable(_header(cfg)), sort_keys=True).splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    p.write_text(buf.getvalue())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _read_csv(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"report file not found: {p}")
    lines = [ln for ln in p.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _resolved(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    for k, v in list(cfg.items()):
        if isinstance(v, Path):
            cfg[k] = str(v)
    return cfg


def _parse_grid(spec):
    """``start:stop:num`` to a linspace; empty string means no grid."""
    if spec is None or spec == "":
        return np.array([])
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"grid must be start:stop:num, got {spec!r}") from None


# ----------------------------------------------------------------------------
# subcommands


def _fit_one(args, bath, K):
    if args.method == "esprit":
        if args.grid_preset == "custom":
            grid = _custom_grid(args.grid)
        else:
            t_max = args.t_max if args.t_max is not None else (200.0 if args.grid_preset == "subohmic" else 20.0)
            grid = time_grid(bath, args.dt, t_max)
        return esprit_fit(grid, K)
    if args.method == "aaa":
        if args.grid_preset == "custom":
            grid = _custom_grid(args.grid)
        elif args.grid_preset == "subohmic":
            grid, _ = subohmic_frequency_grid(bath, omega_max=args.omega_max)
        else:
            grid = frequency_grid(bath, args.d_omega, args.omega_max)
        return aaa_fit(grid, K)
    if args.method == "gmt":
        return gmt_fit(bath, K, args.K_matsubara, hbar=bath.hbar)
    raise ConfigError(f"unknown method {args.method!r}")


def _custom_grid(path):
    if path is None:
        raise ConfigError("--grid-preset custom needs --grid FILE")

    def parse(d):
        vals = np.asarray(d["values"], dtype=float)
        return SampleGrid(d["domain"], np.asarray(d["points"], dtype=float), vals[:, 0] + 1j * vals[:, 1])

    return _load(path, "grid", parse)


def cmd_fit(args):
    cfg = _resolved(args)
    if args.method == "ip-convert":
        if args.ip is None:
            raise ConfigError("--method ip-convert needs --ip FILE")

        def parse(d):
            return IPParameters(np.asarray(d["omega"], dtype=float), np.asarray(d["kappa"], dtype=float),
                                np.asarray(d["g"], dtype=float))

        ip = _load(args.ip, "IP parameter", parse)
        model = ip_to_exponential(ip, hbar=args.hbar)
        bath = _load(args.bath, "bath", bath_from_dict) if args.bath else None
    else:
        if args.bath is None:
            raise ConfigError("--bath is required for this method")
        if args.K is None or args.K < 1:
            raise ConfigError("--K must be a positive integer")
        bath = _load(args.bath, "bath", bath_from_dict)
        model = _fit_one(args, bath, args.K)
    meta = dict(model.meta)
    meta.setdefault("method", args.method)
    meta["t_f"] = args.t_f
    meta["deltaL"] = float(delta_L(bath, model, t_f=args.t_f)) if bath is not None else None
    out = model_to_dict(model)
    out["meta"] = meta
    if bath is not None:
        out["bath"] = bath_to_dict(bath)
    _write_json(args.out, out, cfg)
    log.info("wrote %s (K=%d, deltaL=%s)", args.out, model.K, meta["deltaL"])
    return EXIT_OK


def cmd_benchmark(args):
    cfg = _resolved(args)
    bath = _load(args.bath, "bath", bath_from_dict)
    try:
        osc = OscillatorParams(args.omega0, args.v0, bath.hbar)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    q2 = eq_moment(bath, osc, "q2")
    p2 = eq_moment(bath, osc, "p2")
    w = _parse_grid(args.omega_grid)
    rows, flagged = [], 0
    for wi in w:
        row = {"omega": float(wi), "flag": ""}
        try:
            row["F_Cqq"] = float(spectral_correlation(bath, osc, "qq", wi))
            row["F_Cpp"] = float(spectral_correlation(bath, osc, "pp", wi))
        except ZeroDivisionError as exc:
            row.update(F_Cqq="", F_Cpp="", flag=f"pole: {exc}")
            flagged += 1
        rows.append(row)
    summary = {"q2_eq": q2, "p2_eq": p2, "params": {"omega0": osc.omega0, "v0": osc.v0, "bath": bath_to_dict(bath)},
               "flagged_rows": flagged}
    _write_json(args.out, summary, cfg)
    if len(w):
        _write_csv(Path(args.out).with_suffix(".csv"), ["omega", "F_Cqq", "F_Cpp", "flag"], rows, cfg)
    if flagged and args.strict:
        log.error("%d frequency rows hit a pole", flagged)
        return EXIT_NUMERICAL
    return EXIT_OK


def _model_files(args):
    if args.models:
        d = Path(args.models)
        if not d.is_dir():
            raise ConfigError(f"models directory not found: {d}")
        files = sorted(d.glob("*.json"))
        if not files:
            raise ConfigError(f"no model files in {d}")
        return files
    if args.model is None:
        raise ConfigError("give --model FILE or --models DIR")
    return [Path(args.model)]


def cmd_test(args):
    cfg = _resolved(args)
    sysp = _load(args.system, "system", system_from_dict)
    bath = _load(args.bath, "bath", bath_from_dict)
    models = [(str(f), _load(f, "model", model_from_dict)) for f in _model_files(args)]
    if args.K_sweep:
        models.sort(key=lambda fm: fm[1].K)
    trs = decompose_transitions(sysp, bath.beta, lam=bath.lam, allow_zero_freq=args.allow_zero_freq,
                                hbar=bath.hbar)
    asg = _pmap(lambda t: assign_surrogate(t, bath.lam, bath, hbar=bath.hbar), trs)
    w = _parse_grid(args.omega_grid) if args.omega_grid else None

    def run(fm):
        return fm[0], run_surrogate_test(asg, bath, fm[1], what=args.what, t_f=args.t_f, omega_grid=w)

    reports = _pmap(run, models)
    payload = {"assignments": [a.to_dict() for a in asg], "reports": []}
    csv_rows = []
    unstable = 0
    for path, rep in reports:
        payload["reports"].append({"model": path, **rep.to_dict()})
        K = rep.meta["K"]
        unstable += len(rep.unstable)
        for r in rep.rows:
            for metric in ("dq2", "dp2", "dFqq", "dFpp"):
                if metric in r:
                    csv_rows.append({"K": K, "Omega": r["Omega"], "metric": metric, "value": r[metric], "p": r["p"]})
        for metric, v in rep.totals.items():
            csv_rows.append({"K": K, "Omega": "total", "metric": metric, "value": v, "p": 1.0})
    _write_json(args.out, payload, cfg)
    _write_csv(Path(args.out).with_suffix(".csv"), ["K", "Omega", "metric", "value", "p"], csv_rows, cfg)
    if unstable:
        log.error("%d surrogate runs were unstable", unstable)
        return EXIT_UNSTABLE
    return EXIT_OK


def _simulate_once(sysp, bath, model, depth, args):
    rhs = GenericHEOM(sysp, model, depth, lam=bath.lam, hbar=bath.hbar)
    rho_init = gibbs_state(sysp.h_eff(bath.lam), bath.beta)
    names = sorted(sysp.observables)
    series = []

    def record(t, st):
        rho = st.rho0
        row = {"t": t, "trace": float(np.real(np.trace(rho)))}
        for k in names:
            row[k] = float(np.real(np.trace(sysp.observables[k] @ rho)))
        series.append(row)

    if args.steady:
        st = steady_state(rhs, rho_guess=rho_init)
        record(float("inf"), st)
    else:
        st = rk4_propagate(rhs, rhs.initial_state(rho_init), args.dt, args.t_f, observer=record, every=args.every)
    rho = st.rho0
    herm = float(np.abs(rho - rho.conj().T).max())
    steady = {k: series[-1][k] for k in names}
    return series, steady, herm


def cmd_simulate(args):
    cfg = _resolved(args)
    sysp = _load(args.system, "system", system_from_dict)
    bath = _load(args.bath, "bath", bath_from_dict)
    model = _load(args.model, "model", model_from_dict)
    if args.H < 1:
        raise ConfigError("--H must be >= 1")
    depths = [args.H, args.H + 1] if args.check_depth else [args.H]
    results = _pmap(lambda h: _simulate_once(sysp, bath, model, h, args), depths)
    series, steady, herm = results[0]
    cols = ["t", "trace"] + sorted(sysp.observables)
    _write_csv(args.out, cols, series, cfg)
    summary = {"K": model.K, "H": args.H, "steady": steady, "hermiticity_residual": herm,
               "trace": series[-1]["trace"]}
    if args.check_depth:
        s2 = results[1][1]
        summary["depth_check"] = {"H+1": s2, "max_abs_diff": max(abs(s2[k] - steady[k]) for k in steady) if steady else 0.0}
    _write_json(Path(args.out).with_suffix(".json"), summary, cfg)
    return EXIT_OK


_SURR_REQUIRED = {"K", "Omega", "metric", "value"}


def cmd_report(args):
    cfg = _resolved(args)
    table = {}
    for path in args.surrogate:
        rows = _read_csv(path)
        if rows:
            missing = _SURR_REQUIRED - set(rows[0])
            if missing:
                raise ConfigError(f"surrogate report {path} lacks columns {sorted(missing)}")
        for r in rows:
            if r["Omega"] == "total":
                table.setdefault(int(r["K"]), {})[f"HO_{r['metric']}"] = float(r["value"])
    targets = {}
    for path in args.target:
        d = _read_json(path, "simulation summary")
        missing = {"K", "steady"} - set(d)
        if missing:
            raise ConfigError(f"simulation summary {path} lacks keys {sorted(missing)}")
        targets[int(d["K"])] = d["steady"]
    if targets:
        ref_K = args.ref_K if args.ref_K is not None else max(targets)
        if ref_K not in targets:
            raise ConfigError(f"reference K={ref_K} has no simulation summary")
        ref = targets[ref_K]
        keys = set(ref)
        for K, vals in targets.items():
            if set(vals) != keys:
                raise ConfigError(f"observable keys differ for K={K}: {sorted(set(vals) ^ keys)}")
            row = table.setdefault(K, {})
            for k, v in vals.items():
                row[f"d_{k}"] = abs(ref[k] - v) / abs(ref[k]) if ref[k] != 0 else abs(v)
    cols = ["K"] + sorted({c for r in table.values() for c in r})
    rows = [{"K": K, **table[K]} for K in sorted(table)]
    _write_csv(args.out, cols, rows, cfg)
    return EXIT_OK


# ----------------------------------------------------------------------------
# argument parsing


def build_parser():
    p = argparse.ArgumentParser(prog="bcfbench", description="Benchmark exponential BCF models against exact oscillator results.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit an exponential-sum model")
    f.add_argument("--method", choices=["esprit", "aaa", "gmt", "ip-convert"], required=True)
    f.add_argument("--K", type=int)
    f.add_argument("--K-matsubara", dest="K_matsubara", type=int, default=2)
    f.add_argument("--bath")
    f.add_argument("--ip")
    f.add_argument("--grid-preset", choices=["ohmic", "subohmic", "custom"], default="ohmic")
    f.add_argument("--grid", help="custom grid JSON {domain, points, values}")
    f.add_argument("--dt", type=float, default=0.01)
    f.add_argument("--t-max", dest="t_max", type=float)
    f.add_argument("--d-omega", dest="d_omega", type=float, default=0.1)
    f.add_argument("--omega-max", dest="omega_max", type=float, default=300.0)
    f.add_argument("--t-f", dest="t_f", type=float, default=30.0)
    f.add_argument("--hbar", type=float, default=1.0)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("benchmark", help="exact oscillator moments and spectra")
    b.add_argument("--bath", required=True)
    b.add_argument("--omega0", type=float, default=1.0)
    b.add_argument("--v0", type=float, default=1.0)
    b.add_argument("--omega-grid", dest="omega_grid", default="-10:10:201", help="start:stop:num, empty for none")
    b.add_argument("--strict", action="store_true")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_benchmark)

    t = sub.add_parser("test", help="surrogate-oscillator test of model(s) for a system")
    t.add_argument("--system", required=True)
    t.add_argument("--bath", required=True)
    t.add_argument("--model")
    t.add_argument("--models")
    t.add_argument("--K-sweep", dest="K_sweep", action="store_true")
    t.add_argument("--what", choices=["moments", "spectra", "both"], default="moments")
    t.add_argument("--t-f", dest="t_f", type=float, default=1e4)
    t.add_argument("--omega-grid", dest="omega_grid", default=None)
    t.add_argument("--allow-zero-freq", dest="allow_zero_freq", action="store_true")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="generic HEOM run of a system")
    s.add_argument("--system", required=True)
    s.add_argument("--bath", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--H", type=int, default=6)
    s.add_argument("--dt", type=float, default=0.005)
    s.add_argument("--t-f", dest="t_f", type=float, default=300.0)
    s.add_argument("--every", type=int, default=200)
    s.add_argument("--steady", action="store_true", help="solve for the stationary state instead of propagating")
    s.add_argument("--check-depth", dest="check_depth", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="join surrogate totals with target-system errors by K")
    r.add_argument("--surrogate", nargs="*", default=[])
    r.add_argument("--target", nargs="*", default=[])
    r.add_argument("--ref-K", dest="ref_K", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"bcfbench: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"bcfbench: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"bcfbench: instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"bcfbench: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"bcfbench: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
