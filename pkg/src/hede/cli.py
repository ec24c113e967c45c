"""Command-line interface: ``hede estimate|simulate|oracle|benchmark``.

Exit codes: 0 success, 1 malformed input, 2 empty tuning grid,
3 numerical failure. Reports are JSON with a ``"schema": "hede/1"`` key.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .covariance import BlockCovariance, estimate_block_covariance, whiten
from .ensemble import GridConfig, build_grid, run_hede
from .errors import EmptyGrid, HedeError
from .model import DataSet, normalize_genotypes
from .simulation import SimConfig, simulate_dataset
from .state_evolution import (SignalPrior, solve_joint_fixed_point,
                              solve_ridge_scalar)

SCHEMA = "hede/1"
EXIT_INPUT, EXIT_EMPTY_GRID, EXIT_NUMERIC = 1, 2, 3


class InputError(Exception):
    pass


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("HEDE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"HEDE_THREADS is not an integer: {env!r}")
    return 1


def _grid_config(args) -> GridConfig:
    try:
        return GridConfig(t_min=args.t_min, t_max=args.t_max, log_step=args.log_step)
    except ValueError as exc:
        raise InputError(str(exc))


def load_dataset(x_path, y_path, genotypes=False) -> DataSet:
    for p in (x_path, y_path):
        if not Path(p).is_file():
            raise InputError(f"cannot read {p}: no such file")
    try:
        X = io.read_matrix(x_path)
        y = io.read_vector(y_path)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc))
    if X.shape[0] != y.shape[0]:
        raise InputError(f"{x_path} has {X.shape[0]} rows but {y_path} has {y.shape[0]} values")
    if not np.all(np.isfinite(y)):
        raise InputError(f"{y_path} contains missing or non-finite values")
    try:
        if genotypes:
            return normalize_genotypes(X, y)
        if np.isnan(X).any():
            means = np.nanmean(X, axis=0)
            X = np.where(np.isnan(X), means, X)
        if not np.all(np.isfinite(X)):
            raise InputError(f"{x_path} contains non-finite values")
        return DataSet(y=y, X=X)
    except (ValueError, HedeError) as exc:
        raise InputError(str(exc))


def estimate_report(data: DataSet, cfg: GridConfig, blocks=None) -> dict:
    """Run (optional whitening and) the estimator; return the JSON report."""
    whitened = False
    if blocks is not None:
        if blocks == "identity":
            cov = BlockCovariance.identity(data.p)
        else:
            cov = estimate_block_covariance(data, blocks)
        data = whiten(data, cov)
        whitened = True
    grid = build_grid(data, cfg)
    est = run_hede(data, cfg, grid=grid)
    c = est.choice
    n = data.n
    return {
        "schema": SCHEMA,
        "h2": est.h2,
        "alpha_L": c.alpha_L,
        "lambda_L": c.lambda_L,
        "lambda_R": c.lambda_R,
        "tau_C2_min": c.tau_C2_min,
        "raw_numerator": est.raw_numerator,
        "sample_var_y": est.sample_var_y,
        "df_L": c.df_L,
        "df_R": c.df_R,
        "n": n,
        "p": data.p,
        "whitened": whitened,
        "grid": {
            "t_min": cfg.t_min,
            "t_max": cfg.t_max,
            "log_step": cfg.log_step,
            "lambda_L": [float(v) for v in grid.lambda_L],
            "lambda_R": [float(v) for v in grid.lambda_R],
            "df_frac_L": [f.df_hat / n for f in grid.lasso_fits],
            "df_frac_R": [f.df_hat / n for f in grid.ridge_fits],
            "retained_L": len(grid.lambda_L),
            "retained_R": len(grid.lambda_R),
            "dropped_L": grid.n_dropped_L,
            "dropped_R": grid.n_dropped_R,
        },
    }


def cmd_estimate(args) -> int:
    t0 = time.perf_counter()
    cfg = _grid_config(args)
    _threads(args)
    data = load_dataset(args.x, args.y, args.genotypes)
    blocks = None
    if args.blocks is not None:
        if args.blocks == "identity":
            blocks = "identity"
        else:
            if not Path(args.blocks).is_file():
                raise InputError(f"cannot read {args.blocks}: no such file")
            try:
                blocks = io.read_blocks(args.blocks, data.p)
            except ValueError as exc:
                raise InputError(str(exc))
    report = estimate_report(data, cfg, blocks)
    if args.timing:
        report["wall_clock_seconds"] = time.perf_counter() - t0
    _emit(report, args.out)
    return 0


def _emit(report, out):
    text = io.dump_json(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


_SIM_FLAGS = ("n", "p", "h2", "kappa", "noise_sigma2", "seed", "maf_low", "maf_high",
              "signal_kind", "ar_rho", "block_size", "design")


def _sim_config(args) -> SimConfig:
    raw = io.read_config(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in _SIM_FLAGS if getattr(args, k, None) is not None}
    try:
        return io.config_to_dataclass(SimConfig, raw, **overrides)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc))


def cmd_simulate(args) -> int:
    if args.config and not Path(args.config).is_file():
        raise InputError(f"cannot read {args.config}: no such file")
    cfg = _sim_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data, truth = simulate_dataset(cfg)
    io.write_matrix(out / "X.csv", data.X)
    io.write_vector(out / "y.csv", data.y)
    truth_doc = {
        "schema": SCHEMA,
        "h2_target": cfg.h2,
        "h2_true": truth.h2_true,
        "h2_realized": truth.h2_realized,
        "sigma2": truth.sigma2,
        "signal_norm2": float(truth.beta @ truth.beta),
        "n_nonzero": int(np.count_nonzero(truth.beta)),
        "config": {f: getattr(cfg, f) for f in cfg.__dataclass_fields__},
        "beta": [float(b) for b in truth.beta],
    }
    io.dump_json(truth_doc, out / "truth.json")
    return 0


def cmd_oracle(args) -> int:
    if args.lambda_l <= 0 or args.lambda_r <= 0:
        raise InputError("--lambda-l and --lambda-r must be positive")
    if args.delta <= 0 or args.sigma2 <= 0:
        raise InputError("--delta and --sigma2 must be positive")
    if args.beta:
        if args.n is None:
            raise InputError("--beta requires --n")
        try:
            beta = io.read_vector(args.beta)
        except (ValueError, OSError) as exc:
            raise InputError(str(exc))
        prior = SignalPrior.from_vector(beta, args.n)
    elif args.kappa is not None:
        if not 0 < args.kappa <= 1 or args.signal_norm2 < 0:
            raise InputError("need 0 < kappa <= 1 and signal-norm2 >= 0")
        prior = SignalPrior.zero_inflated_normal(args.kappa, args.signal_norm2, args.delta)
    else:
        prior = SignalPrior.point_mass(0.0)
    if args.quad_nodes < 20:
        raise InputError("--quad-nodes must be >= 20")
    sol = solve_joint_fixed_point(args.delta, args.sigma2, prior, args.lambda_l,
                                  args.lambda_r, args.quad_nodes)
    alpha_s, tau_s = solve_ridge_scalar(args.delta, args.sigma2,
                                        prior.signal_norm2(args.delta), args.lambda_r)
    report = {
        "schema": SCHEMA,
        "delta": args.delta,
        "sigma2": args.sigma2,
        "lambda_L": args.lambda_l,
        "lambda_R": args.lambda_r,
        "tau_L": sol.tau_L,
        "tau_R": sol.tau_R,
        "rho": sol.rho,
        "zeta_L": sol.zeta_L,
        "zeta_R": sol.zeta_R,
        "df_L_per_n": sol.df_L,
        "df_R_per_n": sol.df_R,
        "ridge_scalar": {"alpha_star": alpha_s, "tau_star": tau_s},
    }
    _emit(report, args.out)
    return 0


BENCH_FIELDS = ["scenario", "replicate", "n", "p", "kappa", "h2_target", "seed",
                "h2_true", "h2_realized", "h2_hat", "squared_error", "alpha_L",
                "lambda_L", "lambda_R", "grid_ok", "status"]


def _bench_task(task):
    scenario, rep, n, p, kappa, h2, seed, extra, grid_kw = task
    row = {"scenario": scenario, "replicate": rep, "n": n, "p": p, "kappa": kappa,
           "h2_target": h2, "seed": seed}
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        threadpool_limits = None
    try:
        cfg = SimConfig(n=n, p=p, kappa=kappa, h2=h2, seed=seed, **extra)
        data, truth = simulate_dataset(cfg)
        gcfg = GridConfig(**grid_kw)
        if threadpool_limits is not None:
            with threadpool_limits(1):
                rep_doc = estimate_report(data, gcfg)
        else:
            rep_doc = estimate_report(data, gcfg)
        g = rep_doc["grid"]
        ok = all(gcfg.t_min <= d <= gcfg.t_max for d in g["df_frac_L"] + g["df_frac_R"])
        row.update(h2_true=truth.h2_true, h2_realized=truth.h2_realized,
                   h2_hat=rep_doc["h2"], squared_error=(rep_doc["h2"] - truth.h2_true)**2,
                   alpha_L=rep_doc["alpha_L"], lambda_L=rep_doc["lambda_L"],
                   lambda_R=rep_doc["lambda_R"], grid_ok=int(ok), status="ok")
    except (HedeError, ValueError, ArithmeticError) as exc:
        row.update(status=f"failed:{type(exc).__name__}")
    return row


def _parse_list(raw, key, kind, default=None):
    if key not in raw:
        if default is None:
            raise InputError(f"benchmark config needs {key!r}")
        return default
    try:
        return [kind(v) for v in raw[key].split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad value list for {key!r}: {raw[key]!r}")


def benchmark_tasks(raw: dict):
    if not raw:
        raise InputError("empty benchmark config")
    kappas = _parse_list(raw, "kappa", float)
    h2s = _parse_list(raw, "h2", float)
    ns = _parse_list(raw, "n", int)
    ps = _parse_list(raw, "p", int)
    reps = _parse_list(raw, "replicates", int, [1])[0]
    seed = _parse_list(raw, "seed", int, [0])[0]
    grid_kw = {}
    for key in ("t_min", "t_max", "log_step"):
        if key in raw:
            grid_kw[key] = float(raw[key])
    extra = {}
    for key, kind in (("maf_low", float), ("maf_high", float), ("noise_sigma2", float),
                      ("ar_rho", float), ("block_size", int), ("design", str)):
        if key in raw:
            extra[key] = kind(raw[key])
    known = {"kappa", "h2", "n", "p", "replicates", "seed", "t_min", "t_max",
             "log_step", *extra}
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown benchmark keys: {sorted(unknown)}")
    scenarios = list(itertools.product(kappas, h2s, ns, ps))
    if not scenarios or reps < 1:
        raise InputError("benchmark sweep is empty")
    tasks = []
    for s, (kappa, h2, n, p) in enumerate(scenarios):
        for r in range(reps):
            tasks.append((s, r, n, p, kappa, h2, seed + r, extra, grid_kw))
    return tasks


def run_benchmark(tasks, threads=1):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_bench_task, tasks))
    return [_bench_task(t) for t in tasks]


def write_benchmark_csv(rows, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v)
                        for k, v in row.items()})
    finally:
        if out:
            fh.close()


def cmd_benchmark(args) -> int:
    if not Path(args.config).is_file():
        raise InputError(f"cannot read {args.config}: no such file")
    try:
        raw = io.read_config(args.config)
    except ValueError as exc:
        raise InputError(str(exc))
    tasks = benchmark_tasks(raw)
    rows = run_benchmark(tasks, _threads(args))
    write_benchmark_csv(rows, args.out)
    failed = sum(r["status"] != "ok" for r in rows)
    if failed:
        print(f"hede benchmark: {failed} of {len(rows)} runs failed", file=sys.stderr)
    return 0


def _add_grid_flags(p):
    p.add_argument("--t-min", type=float, default=0.01)
    p.add_argument("--t-max", type=float, default=0.5)
    p.add_argument("--log-step", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hede", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate heritability from X and y")
    p.add_argument("--x", required=True, help="headerless CSV, rows = samples")
    p.add_argument("--y", required=True, help="one response value per line")
    p.add_argument("--blocks", "--sigma-blocks", dest="blocks", default=None,
                   help="block file for whitening, or 'identity'")
    p.add_argument("--genotypes", action="store_true",
                   help="X holds raw 0/1/2 counts; normalize before fitting")
    _add_grid_flags(p)
    p.add_argument("--seed", type=int, default=0, help="accepted for interface parity; "
                   "estimation is deterministic")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    p.add_argument("--config", default=None, help="key=value file of SimConfig fields")
    for name, kind in (("n", int), ("p", int), ("h2", float), ("kappa", float),
                       ("noise-sigma2", float), ("seed", int), ("maf-low", float),
                       ("maf-high", float), ("signal-kind", str), ("ar-rho", float),
                       ("block-size", int), ("design", str)):
        p.add_argument(f"--{name}", type=kind, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="solve the fixed-point system")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--lambda-l", type=float, required=True)
    p.add_argument("--lambda-r", type=float, required=True)
    p.add_argument("--beta", default=None, help="file with the coefficient vector")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--signal-norm2", type=float, default=1.0)
    p.add_argument("--quad-nodes", type=int, default=61)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("benchmark", help="simulation sweep, long-format CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"hede {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmptyGrid as exc:
        print(f"hede {args.command}: {exc}", file=sys.stderr)
        return EXIT_EMPTY_GRID
    except (HedeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hede {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
