"""Experiment orchestration: rksign <subcommand> [flags].

Scans sweep (system size x lambda grid x disorder samples), flush one
result cell at a time (so interrupted runs resume with --resume), and
write fixed-schema CSV tables plus a resolved_config.json snapshot.
Exit codes: 0 ok, 2 invalid configuration, 3 capacity exceeded, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .disentangle import AnnealSchedule, efficiency_scan
from .errors import CapacityError, ConfigError
from .fidelity import fidelity_scan
from .frame_potential import design_scan
from .magic import magic_scan
from .results import (
    DISENTANGLE_SCHEMA,
    FIDELITY_SCHEMA,
    FRAME_SCHEMA,
    HISTOGRAM_SCHEMA,
    MAGIC_SCHEMA,
    SCAN_SCHEMA,
    THETA_SCHEMA,
    format_value,
    read_csv,
    write_csv,
    write_json,
)
from .runconfig import (
    EXPERIMENTS,
    RunConfig,
    build_config,
    effective_master_seed,
    load_config_file,
)
from .scaling import (
    exp_extrapolate,
    linear_extrapolate,
    polyfit_derivative_min,
    theta_exponent,
    variance_scan,
)
from .spectrum_stats import GOE, histogram_table, kl_divergence, mean_rtilde, pool_from_ensemble
from .states import EnsembleParams, build_state, draw_realization, save_state


def _params(config: RunConfig, n: int, lam: float) -> EnsembleParams:
    seed = effective_master_seed(config.seed, config.experiment, n)
    return EnsembleParams(
        n_qubits=n, lam=lam, n_samples=config.samples, master_seed=seed
    )


def _cell_entropy(config, n, lam, outdir):
    (row,) = variance_scan(_params(config, n, lam), [lam], workers=config.workers)
    _, mean, err, var, var_err = row
    base = (config.experiment, n, lam)
    tail = (config.samples, config.seed, __version__)
    rows = [base + ("entropy_half_mean", mean, err) + tail]
    if config.experiment == "fluctuations":
        rows.append(base + ("entropy_half_var", var, var_err) + tail)
    return rows


def _cell_ess(config, n, lam, outdir):
    pool = pool_from_ensemble(_params(config, n, lam), workers=config.workers)
    mean, err = mean_rtilde(pool)
    dkl = kl_divergence(pool, GOE)
    if config.histograms:
        write_csv(
            outdir / f"ess_hist_n{n}_lam{lam:g}.csv",
            HISTOGRAM_SCHEMA,
            histogram_table(pool),
        )
    tail = (config.samples, config.seed, __version__)
    return [
        ("ess", n, lam, "rtilde_mean", mean, err) + tail,
        ("ess", n, lam, "dkl_goe", dkl, float("nan")) + tail,
    ]


def _cell_fidelity(config, n, lam, outdir):
    (point,) = fidelity_scan(
        _params(config, n, lam), [lam], epsilon=config.epsilon, workers=config.workers
    )
    return [
        (n, lam, point.g_over_n, point.g_std_error, config.epsilon,
         config.samples, config.seed)
    ]


def _cell_magic(config, n, lam, outdir):
    (res,) = magic_scan(
        _params(config, n, lam), [lam], cap=config.magic_cap, workers=config.workers
    )
    return [(n, lam, res.m2_mean, res.m2_std_error, config.samples, config.seed)]


def _cell_disentangle(config, n, lam, outdir):
    schedule = AnnealSchedule(
        kind=config.schedule,
        t_max=config.t_max_for(n),
        beta0=config.beta0,
        exponent=config.exponent,
        coeff=config.coeff,
    )
    state_paths = None
    if config.states:
        paths = [
            Path(config.states) / f"state_n{n}_lam{lam:g}_s{i}.rks"
            for i in range(config.samples)
        ]
        missing = [p for p in paths if not p.exists()]
        if missing:
            raise ConfigError("states", f"missing state dump {missing[0]}")
        state_paths = {lam: paths}
    (row,) = efficiency_scan(
        _params(config, n, lam), [lam], schedule,
        cost_mode=config.cost_mode, workers=config.workers,
        state_paths=state_paths,
    )
    _, eta, err, used, excluded = row
    return [(n, lam, eta, err, schedule.describe(), schedule.t_max,
             config.samples, excluded)]


def _cell_frame(config, n, lam, outdir):
    results = design_scan(
        _params(config, n, lam), [lam], t_list=config.t_list, workers=config.workers
    )
    return [
        (n, lam, r.t, r.log_phi_tilde_dt, r.log_std_error, r.k_states, config.seed)
        for r in results
    ]


_CELL_FNS = {
    "entropy-scan": (_cell_entropy, SCAN_SCHEMA),
    "fluctuations": (_cell_entropy, SCAN_SCHEMA),
    "ess": (_cell_ess, SCAN_SCHEMA),
    "fidelity-scan": (_cell_fidelity, FIDELITY_SCHEMA),
    "magic": (_cell_magic, MAGIC_SCHEMA),
    "disentangle": (_cell_disentangle, DISENTANGLE_SCHEMA),
    "frame-potential": (_cell_frame, FRAME_SCHEMA),
}


def run_scan(config: RunConfig) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "resolved_config.json", config.resolved())
    cell_fn, schema = _CELL_FNS[config.experiment]
    grid = config.lambda_grid()
    cells = [(n, lam) for n in config.qubits for lam in grid]

    partial_path = outdir / f"{config.experiment}.partial.jsonl"
    done = {}
    if config.resume and partial_path.exists():
        with open(partial_path) as fh:
            for line in fh:
                entry = json.loads(line)
                done[(entry["n"], entry["lam"])] = entry["rows"]
    elif partial_path.exists():
        partial_path.unlink()

    with open(partial_path, "a") as partial:
        for n, lam in cells:
            if (n, lam) in done:
                continue
            start = time.time()
            rows = cell_fn(config, n, lam, outdir)
            done[(n, lam)] = rows
            partial.write(json.dumps({"n": n, "lam": lam, "rows": rows}) + "\n")
            partial.flush()
            print(
                f"[{config.experiment}] N={n} lambda={lam:g} "
                f"({time.time() - start:.1f}s)",
                file=sys.stderr,
            )

    all_rows = [tuple(row) for n, lam in cells for row in done[(n, lam)]]
    write_csv(outdir / f"{config.experiment}.csv", schema, all_rows)
    return 0


def run_generate(config: RunConfig) -> int:
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "resolved_config.json", config.resolved())
    manifest = []
    for n in config.qubits:
        for lam in config.lambda_grid():
            params = _params(config, n, lam)
            for i in range(config.samples):
                state = build_state(draw_realization(params, i), lam)
                name = f"state_n{n}_lam{lam:g}_s{i}.rks"
                path = outdir / name
                if not (config.resume and path.exists()):
                    save_state(path, state)
                manifest.append((n, lam, i, state.realization_seed, name))
            print(f"[generate] N={n} lambda={lam:g}", file=sys.stderr)
    write_csv(
        outdir / "manifest.csv",
        ["n_qubits", "lambda", "sample_index", "seed", "path"],
        manifest,
    )
    return 0


def _parse_scan_rows(path):
    header, raw = read_csv(path)
    if header == SCAN_SCHEMA:
        return [
            {"n": int(r[1]), "lam": float(r[2]), "statistic": r[3],
             "value": float(r[4])}
            for r in raw
        ]
    if header == FIDELITY_SCHEMA:
        return [
            {"n": int(r[0]), "lam": float(r[1]), "statistic": "g_over_n",
             "value": float(r[2])}
            for r in raw
        ]
    if header == MAGIC_SCHEMA:
        return [
            {"n": int(r[0]), "lam": float(r[1]), "statistic": "m2",
             "value": float(r[2])}
            for r in raw
        ]
    raise ConfigError("in", f"{path}: unrecognized table header {header}")


def _fit_derivative_min(args) -> dict:
    rows = [
        r for r in _parse_scan_rows(args.infile)
        if r["statistic"] in (args.statistic, "g_over_n")
    ]
    if not rows:
        raise ConfigError("statistic", f"no rows with statistic {args.statistic!r}")
    by_n = {}
    for r in rows:
        by_n.setdefault(r["n"], []).append((r["lam"], r["value"]))
    params = []
    minima = []
    for n in sorted(by_n):
        pts = sorted(by_n[n])
        lam_min = polyfit_derivative_min(
            [p[0] for p in pts], [p[1] for p in pts], degree=args.degree
        )
        minima.append((n, lam_min))
        params.append({"name": f"lambda_min_n{n}", "value": lam_min, "sigma": 0.0})
    values = [m[1] for m in minima]
    params.append({
        "name": "lambda_estimate",
        "value": float(np.mean(values)),
        "sigma": float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
    })
    return {"model": "poly_derivative_min", "params": params,
            "inputs": str(args.infile), "degree": args.degree}


def _fit_exp(args) -> dict:
    with open(args.infile) as fh:
        payload = json.load(fh)
    ns, minima = [], []
    for p in payload.get("params", []):
        if p["name"].startswith("lambda_min_n"):
            ns.append(int(p["name"].removeprefix("lambda_min_n")))
            minima.append(p["value"])
    if len(ns) < 4:
        raise ConfigError("in", "need per-N minima from a derivative-min fit")
    fit = exp_extrapolate(ns, minima)
    out = fit.to_dict()
    out["inputs"] = str(args.infile)
    return out


def _select_at_lambda(rows, lam):
    at = [r for r in rows if abs(r["lam"] - lam) < 1e-9]
    if not at:
        grid = sorted({r["lam"] for r in rows})
        raise ConfigError("lam", f"lambda={lam} not in table grid {grid}")
    return at


def _fit_theta(args) -> dict | list:
    rows = [r for r in _parse_scan_rows(args.infile)
            if r["statistic"] == "entropy_half_var"]
    if not rows:
        raise ConfigError("in", "need a fluctuations table with entropy_half_var rows")
    if args.per_lambda:
        table = []
        for lam in sorted({r["lam"] for r in rows}):
            at = _select_at_lambda(rows, lam)
            at.sort(key=lambda r: r["n"])
            fit = theta_exponent([r["n"] for r in at], [r["value"] for r in at])
            table.append((lam, fit["theta"].value, fit["theta"].sigma, fit.r_squared))
        return table
    at = _select_at_lambda(rows, args.lam)
    at.sort(key=lambda r: r["n"])
    fit = theta_exponent([r["n"] for r in at], [r["value"] for r in at])
    out = fit.to_dict()
    out["inputs"] = f"{args.infile} @ lambda={args.lam:g}"
    return out


def _fit_linear(args) -> dict:
    rows = _parse_scan_rows(args.infile)
    if rows and rows[0]["statistic"] == "m2":
        picked = _select_at_lambda(rows, args.lam)
        xs = [1.0 / r["n"] for r in picked]
        ys = [r["value"] / r["n"] for r in picked]  # magic density per qubit
    else:
        picked = [r for r in _select_at_lambda(rows, args.lam)
                  if r["statistic"] == args.statistic]
        if not picked:
            raise ConfigError("statistic", f"no rows with {args.statistic!r}")
        xs = [1.0 / r["n"] for r in picked]
        ys = [r["value"] for r in picked]
    order = np.argsort(xs)
    fit = linear_extrapolate(np.asarray(xs)[order], np.asarray(ys)[order])
    out = fit.to_dict()
    out["inputs"] = f"{args.infile} @ lambda={args.lam:g}"
    return out


def run_fit(args) -> int:
    if args.model == "derivative-min":
        payload = _fit_derivative_min(args)
    elif args.model == "exp":
        payload = _fit_exp(args)
    elif args.model == "theta":
        payload = _fit_theta(args)
    elif args.model == "linear":
        payload = _fit_linear(args)
    else:
        raise ConfigError("model", f"unknown fit model {args.model!r}")
    out = Path(args.out)
    if isinstance(payload, list):  # per-lambda theta table
        write_csv(out, THETA_SCHEMA, payload)
    else:
        write_json(out, payload)
    print(f"[fit] wrote {out}", file=sys.stderr)
    return 0


def _add_shared_flags(sub):
    sub.add_argument("--config", help="INI config file ([run] section)")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--samples", type=int, help="disorder samples per cell")
    sub.add_argument("--qubits", help="system sizes, e.g. '8,10,12'")
    sub.add_argument("--lambda-min", type=float, dest="lambda_min")
    sub.add_argument("--lambda-max", type=float, dest="lambda_max")
    sub.add_argument("--lambda-steps", type=int, dest="lambda_steps")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", type=int, help="parallel sample workers")
    sub.add_argument("--resume", action="store_const", const=True, default=None,
                     help="skip cells already in the partial file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rksign",
        description="Ensemble scans over sign-random RK wavefunctions",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        sub = subs.add_parser(name)
        _add_shared_flags(sub)
        if name == "fidelity-scan":
            sub.add_argument("--epsilon", type=float)
        if name == "ess":
            sub.add_argument("--histograms", action="store_const", const=True,
                             default=None)
        if name == "magic":
            sub.add_argument("--magic-cap", type=int, dest="magic_cap")
        if name == "disentangle":
            sub.add_argument("--schedule", choices=("const", "power", "quad"))
            sub.add_argument("--beta0", type=float)
            sub.add_argument("--exponent", type=float)
            sub.add_argument("--coeff", type=float)
            sub.add_argument("--tmax", type=int)
            sub.add_argument("--k", type=int, dest="k_factor",
                             help="t_max = k * N^2 when --tmax is absent")
            sub.add_argument("--cost-mode", choices=("ring", "full"),
                             dest="cost_mode")
            sub.add_argument("--states",
                             help="directory of `generate` state dumps to anneal")
        if name == "frame-potential":
            sub.add_argument("--t-list", dest="t_list",
                             help="moment indices, e.g. '1,2,3,4'")
        sub.set_defaults(func=_run_experiment, experiment=name)

    fit = subs.add_parser("fit", help="fit a result table")
    fit.add_argument("--model", required=True,
                     choices=("derivative-min", "exp", "theta", "linear"))
    fit.add_argument("--in", dest="infile", required=True)
    fit.add_argument("--out", required=True)
    fit.add_argument("--statistic", default="entropy_half_mean")
    fit.add_argument("--degree", type=int, default=7)
    fit.add_argument("--lam", type=float, default=0.0)
    fit.add_argument("--per-lambda", action="store_true", dest="per_lambda")
    fit.set_defaults(func=run_fit)
    return parser


def _run_experiment(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "seed", "samples", "lambda_min", "lambda_max", "lambda_steps",
            "out", "workers", "resume", "epsilon", "histograms", "magic_cap",
            "schedule", "beta0", "exponent", "coeff", "tmax", "k_factor",
            "cost_mode", "states",
        )
    }
    if getattr(args, "qubits", None) is not None:
        overrides["qubits"] = args.qubits
    if getattr(args, "t_list", None) is not None:
        overrides["t_list"] = args.t_list
    config = build_config(args.experiment, file_values, overrides)
    if config.experiment == "generate":
        return run_generate(config)
    return run_scan(config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error: capacity: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: i/o: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
