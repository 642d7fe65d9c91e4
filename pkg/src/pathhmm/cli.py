"""Command-line workflows: simulate, fit, decode, evaluate, smooth.

Exit codes: 0 on success, 2 for config/parse errors, 3 for numerical
failures (zero likelihood, failed factorization), 4 for dimension
mismatches between model and data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FsPath

import numpy as np

from . import io
from .engine import viterbi
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionMismatch,
    NumericalError,
    PathHmmError,
)
from .evaluate import adjusted_rand_index, align_labels, confusion_matrix, relabel
from .fitting import FamilySpec, fit_restarts, observations_for_family
from .paths import DEFAULT_GRID_POINTS, Grid, smooth
from .plotting import save_state_trace_svg
from .simulate import MarkovSpec, simulate_sequence, state_path_sampler

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DIMENSION = 4


def _say(args, message: str):
    if not args.quiet:
        print(message)


def _markov_from_config(sim: dict) -> MarkovSpec:
    if "drifts" in sim:
        p = len(sim["drifts"])
    elif "means" in sim:
        p = len(sim["means"])
    else:
        raise ConfigError("[simulate]: needs drifts (bm/fbm) or means and rates (ou)")
    eta = np.array(sim.get("eta", np.full(p, 1.0 / p)), dtype=float)
    if "trans" in sim and "trans_diag" in sim:
        raise ConfigError("[simulate]: give trans or trans_diag, not both")
    if "trans" in sim:
        trans = np.array(sim["trans"], dtype=float)
    elif "trans_diag" in sim:
        diag = sim["trans_diag"]
        if p == 1:
            trans = np.ones((1, 1))
        else:
            trans = np.full((p, p), (1.0 - diag) / (p - 1))
            np.fill_diagonal(trans, diag)
    else:
        trans = np.full((p, p), 1.0 / p)
    try:
        return MarkovSpec(eta, trans)
    except ValueError as exc:
        raise ConfigError(f"[simulate]: {exc}") from exc


def cmd_simulate(args) -> int:
    config = io.read_config(args.config)
    sim = config.get("simulate")
    if not sim:
        raise ConfigError("config is missing the [simulate] section")
    for required in ("family", "t"):
        if required not in sim:
            raise ConfigError(f"[simulate] {required}: required key missing")
    family = sim["family"]
    T = sim["t"]
    if T < 1:
        raise ConfigError("[simulate] t: must be at least 1")
    seed = args.seed if args.seed is not None else sim.get("seed", 0)
    n_points = args.grid_points or sim.get("grid_points", DEFAULT_GRID_POINTS)
    grid = Grid(n_points)
    markov = _markov_from_config(sim)
    if family in ("bm", "fbm") and len(sim.get("drifts", [])) != markov.n_states:
        raise ConfigError("[simulate] drifts: must list one drift per state")
    if family == "ou" and (
        len(sim.get("means", [])) != markov.n_states
        or len(sim.get("rates", [])) != markov.n_states
    ):
        raise ConfigError("[simulate]: ou needs one mean and one rate per state")
    if family == "fbm" and "hurst" not in sim:
        raise ConfigError("[simulate] hurst: required for fbm")
    try:
        sampler = state_path_sampler(
            family,
            drifts=sim.get("drifts"),
            means=sim.get("means"),
            rates=sim.get("rates"),
            hurst=sim.get("hurst"),
        )
    except ValueError as exc:
        raise ConfigError(f"[simulate]: {exc}") from exc
    paths, states = simulate_sequence(markov, sampler, T, grid, seed)
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_paths_csv(paths, out_dir / "paths.csv")
    io.write_labels_csv(states, out_dir / "labels.csv")
    _say(args, f"wrote {out_dir / 'paths.csv'} and {out_dir / 'labels.csv'} (T={T}, seed={seed})")
    return 0


def cmd_fit(args) -> int:
    config = io.read_config(args.config)
    model_cfg = config.get("model", {})
    fit_cfg = config.get("fit", {})
    data_cfg = config.get("data", {})
    if "family" not in model_cfg:
        raise ConfigError("[model] family: required key missing")
    if "states" not in model_cfg:
        raise ConfigError("[model] states: required key missing")
    family = model_cfg["family"]
    p = model_cfg["states"]
    spec = _family_spec(model_cfg)
    strategy = fit_cfg.get("init", "spread" if family in ("bm", "ou", "fbm") else "kmeans")
    if strategy == "spread" and family in ("euclidean", "nonparametric"):
        raise ConfigError(f"[fit] init: spread does not apply to the {family} family")
    tol = args.tol if args.tol is not None else fit_cfg.get("tol", 1e-6)
    max_iter = args.max_iter if args.max_iter is not None else fit_cfg.get("max_iter", 500)
    restarts = args.restarts if args.restarts is not None else fit_cfg.get("restarts", 1)
    seed = args.seed if args.seed is not None else fit_cfg.get("seed", 0)
    bandwidth = args.bandwidth if args.bandwidth is not None else data_cfg.get("bandwidth")
    n_points = args.grid_points or data_cfg.get("grid_points")

    obs = io.read_paths_csv(args.data, n_points)
    if bandwidth is not None:
        obs = [smooth(o, bandwidth) for o in obs]
    if p > len(obs):
        raise ConfigError(f"[model] states: {p} states but only {len(obs)} observations")
    best = fit_restarts(
        obs, p, spec,
        n_restarts=restarts, seed=seed, strategy=strategy, tol=tol, max_iter=max_iter,
    )
    loglik = float(best.report.loglik_trace[-1])
    grid_points = obs[0].grid.n_points
    io.write_model_json(best.model, grid_points, loglik, args.model_out)
    trace_file = args.trace_out or str(args.model_out) + ".trace.csv"
    lines = ["iteration,loglik"] + [
        f"{i},{float(value)!r}" for i, value in enumerate(best.report.loglik_trace)
    ]
    FsPath(trace_file).write_text("\n".join(lines) + "\n")
    _say(
        args,
        f"fit {family} model with {p} states: loglik {loglik:.6f} after "
        f"{best.report.iterations} iterations (restart {best.restart}, "
        f"converged={best.report.converged}); wrote {args.model_out}",
    )
    return 0


def _family_spec(model_cfg: dict) -> FamilySpec:
    try:
        return FamilySpec(
            family=model_cfg["family"],
            hurst=model_cfg.get("hurst"),
            order=model_cfg.get("sobolev_order", 1),
        )
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc


def cmd_decode(args) -> int:
    model, grid_points = io.read_model_json(args.model)
    obs = io.read_paths_csv(args.data)
    if obs[0].grid.n_points != grid_points:
        raise DimensionMismatch(
            f"model expects {grid_points} grid points, data has {obs[0].grid.n_points}"
        )
    spec = FamilySpec(
        family=io.family_name(model), hurst=getattr(model.emissions[0], "hurst", None)
    )
    states = viterbi(model, observations_for_family(obs, spec))
    io.write_labels_csv(states, args.out)
    _say(args, f"wrote {args.out} ({states.size} decoded states)")
    return 0


def cmd_evaluate(args) -> int:
    truth = io.read_labels_csv(args.truth)
    pred = io.read_labels_csv(args.pred)
    if truth.size != pred.size:
        raise DimensionMismatch(f"label lengths differ: {truth.size} vs {pred.size}")
    mapping = align_labels(truth, pred)
    aligned = relabel(pred, mapping)
    ari = adjusted_rand_index(truth, pred)
    table = confusion_matrix(truth, aligned)
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = {
        "ari": ari,
        "n": int(truth.size),
        "label_mapping": {str(k): v for k, v in sorted(mapping.items())},
        "confusion_trace": int(np.trace(table)),
    }
    (out_dir / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    size = table.shape[0]
    lines = ["truth\\pred," + ",".join(str(j + 1) for j in range(size))]
    for i in range(size):
        lines.append(f"{i + 1}," + ",".join(str(int(v)) for v in table[i]))
    (out_dir / "confusion.csv").write_text("\n".join(lines) + "\n")
    save_state_trace_svg(truth, aligned, out_dir / "states.svg")
    _say(args, f"ARI {ari:.4f}; wrote metrics.json, confusion.csv, states.svg in {out_dir}")
    return 0


def cmd_smooth(args) -> int:
    if args.bandwidth is None or args.bandwidth <= 0:
        raise ConfigError("--bandwidth must be a positive number")
    obs = io.read_paths_csv(args.data, args.grid_points)
    smoothed = [smooth(o, args.bandwidth) for o in obs]
    io.write_paths_csv(smoothed, args.out)
    _say(args, f"wrote {args.out} ({len(smoothed)} smoothed paths)")
    return 0


def _add_common(sub, *flags):
    if "seed" in flags:
        sub.add_argument("--seed", type=int, default=None, help="seed override")
    if "grid" in flags:
        sub.add_argument("--grid-points", type=int, default=None, help="grid resolution override")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathhmm",
        description="Fit and evaluate hidden Markov models over path-valued observations.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="simulate a labeled dataset from a config")
    sim.add_argument("config")
    sim.add_argument("--out-dir", required=True)
    _add_common(sim, "seed", "grid")
    sim.set_defaults(run=cmd_simulate)

    fit = subs.add_parser("fit", help="fit a model to a paths CSV")
    fit.add_argument("config")
    fit.add_argument("data")
    fit.add_argument("--model-out", required=True)
    fit.add_argument("--trace-out", default=None)
    fit.add_argument("--tol", type=float, default=None)
    fit.add_argument("--max-iter", type=int, default=None)
    fit.add_argument("--restarts", type=int, default=None)
    fit.add_argument("--bandwidth", type=float, default=None)
    _add_common(fit, "seed", "grid")
    fit.set_defaults(run=cmd_fit)

    dec = subs.add_parser("decode", help="decode the most probable state sequence")
    dec.add_argument("model")
    dec.add_argument("data")
    dec.add_argument("--out", required=True)
    _add_common(dec)
    dec.set_defaults(run=cmd_decode)

    ev = subs.add_parser("evaluate", help="compare predicted labels against the truth")
    ev.add_argument("truth")
    ev.add_argument("pred")
    ev.add_argument("--out-dir", required=True)
    _add_common(ev)
    ev.set_defaults(run=cmd_evaluate)

    smo = subs.add_parser("smooth", help="kernel-smooth every path in a CSV")
    smo.add_argument("data")
    smo.add_argument("--out", required=True)
    smo.add_argument("--bandwidth", type=float, required=True)
    _add_common(smo, "grid")
    smo.set_defaults(run=cmd_smooth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (ConfigError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DimensionMismatch as exc:
        print(f"dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except PathHmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
