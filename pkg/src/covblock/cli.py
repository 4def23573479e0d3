"""Command-line harness.

Subcommands: simulate, sdp-init, detect, evaluate, sweep, wald, real-data.
Global flags: --seed, --threads, --out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datatypes import Covariates
from .fileio import (
    parse_covariates,
    parse_edge_list,
    parse_labels,
    write_covariates,
    write_edge_list,
    write_labels,
)
from .inference import FitOptions
from .metrics import ari, misclassification_rate, nmi
from .pipeline import (
    ExperimentConfig,
    real_data_pipeline,
    run_pipeline,
    run_record_json,
    resolve_gamma,
    sweep_tuning,
)
from .sdp import SdpConfig, choose_lambda, sdp_init_labels
from .simulate import ScenarioSpec, sample_scenario


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=str, default=None, help="output directory")


def _gamma_rule(args) -> tuple:
    if args.gamma is not None:
        return ("explicit", args.gamma)
    if args.alpha is not None:
        return ("scaled", args.alpha)
    return ("auto", args.gamma_multiplier)


def _add_gamma_flags(p: argparse.ArgumentParser):
    p.add_argument("--gamma", type=float, default=None, help="explicit covariate weight")
    p.add_argument("--alpha", type=float, default=None, help="scaled weight, gamma = alpha/100")
    p.add_argument(
        "--gamma-multiplier", type=float, default=1.0,
        help="multiplier m in the default rule gamma = m*sqrt(log n)/n (use 0.8 for scenario B)",
    )


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    g, X, c = sample_scenario(ScenarioSpec(args.scenario, args.n), args.seed, args.rep)
    out = _out_dir(args)
    (out / "edges.txt").write_text(write_edge_list(g))
    (out / "covariates.csv").write_text(write_covariates(X))
    (out / "labels.txt").write_text(write_labels(c))
    print(f"wrote n={g.n} graph with {g.edge_count} edges to {out}")
    return 0


def _load_graph_covariates(args):
    g = parse_edge_list(Path(args.edges).read_text()).graph
    if args.covariates:
        X = parse_covariates(Path(args.covariates).read_text())
    else:
        X = Covariates(np.zeros((g.n, 1)))
    return g, X


def cmd_sdp_init(args) -> int:
    g, X = _load_graph_covariates(args)
    gamma = resolve_gamma(_gamma_rule(args), g.n)
    truth = parse_labels(Path(args.truth).read_text(), K=args.K) if args.truth else None
    lam = choose_lambda(args.lambda_strategy, n=g.n, K=args.K, truth=truth, graph=g, seed=args.seed)
    labels = sdp_init_labels(g, X, SdpConfig(gamma=gamma, lam=lam), args.K, seed=args.seed)
    out = _out_dir(args)
    (out / "init_labels.txt").write_text(write_labels(labels))
    print(f"wrote SDP labels (gamma={gamma:.6g}, lambda={lam:.6g}) to {out}")
    return 0


def _common_run_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=args.scenario,
        n=args.n,
        edge_file=args.edges,
        covariate_file=args.covariates,
        truth_file=args.truth,
        K=args.K,
        method=args.method,
        init=args.init,
        init_file=args.init_file,
        use_covariates=not args.no_covariates,
        gamma_rule=_gamma_rule(args),
        lambda_strategy=args.lambda_strategy,
        restarts=args.restarts,
        reps=args.reps,
        seed=args.seed,
        threads=args.threads,
        opts=FitOptions(),
        output_dir=args.out,
    )


def cmd_detect(args) -> int:
    record = run_pipeline(_common_run_config(args))
    if args.out is None:
        print(run_record_json(record))
    else:
        print(json.dumps(record["aggregate"], sort_keys=True))
    return 0


def cmd_evaluate(args) -> int:
    a = parse_labels(Path(args.truth).read_text(), K=args.K)
    b = parse_labels(Path(args.estimate).read_text(), K=args.K)
    result = {
        "nmi": nmi(a, b),
        "ari": ari(a, b),
        "misclassification": misclassification_rate(a, b),
    }
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    base = ExperimentConfig(
        scenario=args.scenario,
        n=args.n,
        K=args.K,
        method="sdp",
        init="sdp",
        reps=args.reps,
        seed=args.seed,
        threads=args.threads,
    )
    csv = sweep_tuning(base, args.tau, args.alpha_grid)
    out = _out_dir(args)
    (out / "sweep.csv").write_text(csv)
    print(csv, end="")
    return 0


def cmd_wald(args) -> int:
    record = run_pipeline(_common_run_config(args))
    rows = [r.get("wald") for r in record["per_rep"] if r.get("error") is None]
    rows = [w for w in rows if w]
    if not rows:
        print("no Wald tables produced (method must be vem or mpl)", file=sys.stderr)
        return 1
    p = len(rows[0])
    rates = [float(np.mean([w[j]["reject"] for w in rows])) for j in range(p)]
    summary = {"rejection_rates": rates, "reps": len(rows), "level": args.level}
    print(json.dumps(summary, sort_keys=True))
    if args.out:
        (_out_dir(args) / "wald_summary.json").write_text(json.dumps(summary, sort_keys=True))
    return 0


def cmd_real_data(args) -> int:
    weights = np.loadtxt(args.weights, delimiter=",", dtype=np.int64)
    rows = Path(args.attributes).read_text().strip().splitlines()
    header = rows[0].split(",")
    data = [r.split(",") for r in rows[1:]]
    if args.truth_column not in header:
        print(f"ground-truth column {args.truth_column!r} not found", file=sys.stderr)
        return 1
    tcol = header.index(args.truth_column)
    truth_values = np.asarray([float(r[tcol]) for r in data])
    use_cols = (
        [header.index(c) for c in args.attribute_columns]
        if args.attribute_columns
        else [j for j in range(len(header)) if j != tcol]
    )
    attrs = np.asarray([[float(r[j]) for j in use_cols] for r in data])
    table = real_data_pipeline(weights, attrs, truth_values, threshold=args.threshold, seed=args.seed)
    text = json.dumps(table, sort_keys=True, indent=1)
    print(text)
    if args.out:
        (_out_dir(args) / "real_data_report.json").write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covblock", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a scenario dataset")
    p.add_argument("--scenario", choices=("A", "B"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rep", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sdp-init", help="run the SDP relaxation and write labels")
    p.add_argument("--edges", required=True)
    p.add_argument("--covariates", default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--lambda-strategy", choices=("oracle", "balanced", "spectral"), default="balanced")
    _add_gamma_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sdp_init)

    for name, help_text in (("detect", "full pipeline run"), ("wald", "coefficient Wald tests")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", choices=("A", "B"), default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--edges", default=None)
        p.add_argument("--covariates", default=None)
        p.add_argument("--truth", default=None)
        p.add_argument("--K", type=int, default=2)
        p.add_argument("--method", choices=("sdp", "vem", "mpl"), default="mpl")
        p.add_argument("--init", choices=("sdp", "random", "truth", "file"), default="sdp")
        p.add_argument("--init-file", default=None)
        p.add_argument("--no-covariates", action="store_true")
        p.add_argument("--lambda-strategy", choices=("oracle", "balanced", "spectral"), default="balanced")
        p.add_argument("--restarts", type=int, default=15)
        p.add_argument("--reps", type=int, default=1)
        p.add_argument("--level", type=float, default=0.01)
        _add_gamma_flags(p)
        _add_common(p)
        p.set_defaults(func=cmd_detect if name == "detect" else cmd_wald)

    p = sub.add_parser("evaluate", help="compare two label files")
    p.add_argument("--truth", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--K", type=int, default=2)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="tuning-parameter grid for the SDP")
    p.add_argument("--scenario", choices=("A", "B"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--tau", type=float, nargs="+", required=True, help="lambda/n^2 values")
    p.add_argument("--alpha-grid", type=float, nargs="+", required=True, help="100*gamma values")
    p.add_argument("--reps", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("real-data", help="weighted-digraph pipeline with attributes")
    p.add_argument("--weights", required=True, help="CSV weight matrix")
    p.add_argument("--attributes", required=True, help="CSV with header row")
    p.add_argument("--truth-column", required=True)
    p.add_argument("--attribute-columns", nargs="*", default=None)
    p.add_argument("--threshold", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_real_data)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
