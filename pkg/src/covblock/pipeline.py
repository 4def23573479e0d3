"""Experiment orchestration: simulate -> initialize -> refine -> evaluate.

Configs are plain dataclasses; per-replication randomness is derived from
(seed, rep) so serial and parallel execution produce identical records.
Run records serialize to deterministic JSON (timings go to a sidecar so the
record itself is byte-stable for a fixed config and seed).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .datatypes import (
    Covariates,
    Graph,
    Labels,
    align_labels,
    apply_permutation,
    inverse_permutation,
    permute_coefficients,
)
from .fileio import parse_covariates, parse_edge_list, parse_labels
from .inference import (
    FitOptions,
    mpl_fit,
    random_hard_labels,
    random_soft_labels,
    soft_from_labels,
    vem_fit,
)
from .logistic import wald_test
from .metrics import ari, misclassification_rate, nmi
from .sdp import SdpConfig, choose_lambda, sdp_init_labels
from .simulate import ScenarioSpec, rep_rng, sample_scenario

__all__ = ["ExperimentConfig", "run_pipeline", "sweep_tuning", "real_data_pipeline", "run_record_json"]


@dataclass(frozen=True)
class ExperimentConfig:
    # data source: either a scenario or input files
    scenario: Optional[str] = None  # 'A' or 'B'
    n: Optional[int] = None
    edge_file: Optional[str] = None
    covariate_file: Optional[str] = None
    truth_file: Optional[str] = None

    K: int = 2
    method: str = "mpl"  # sdp | vem | mpl
    init: str = "sdp"  # sdp | random | truth | file
    init_file: Optional[str] = None
    use_covariates: bool = True

    # gamma_rule: ("explicit", value) | ("scaled", alpha) with gamma = alpha/100 | ("auto", multiplier)
    gamma_rule: tuple = ("auto", 1.0)
    lambda_strategy: str = "balanced"  # oracle | balanced | spectral
    restarts: int = 15  # random-initialization restarts
    kmeans_restarts: int = 10
    reps: int = 1
    seed: int = 0
    threads: int = 1
    wald_level: float = 0.01
    opts: FitOptions = field(default_factory=FitOptions)
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        sources = (self.scenario is not None) + (self.edge_file is not None)
        if sources != 1:
            raise ValueError("exactly one data source (scenario or edge_file) required")
        if self.method not in ("sdp", "vem", "mpl"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.init not in ("sdp", "random", "truth", "file"):
            raise ValueError(f"unknown init {self.init!r}")


def resolve_gamma(rule: tuple, n: int) -> float:
    kind, value = rule
    if kind == "explicit":
        return float(value)
    if kind == "scaled":  # alpha = 100 * gamma
        return float(value) / 100.0
    if kind == "auto":
        return float(value) * math.sqrt(math.log(n)) / n
    raise ValueError(f"unknown gamma rule {kind!r}")


def _load_data(cfg: ExperimentConfig, rep: int) -> tuple[Graph, Covariates, Optional[Labels]]:
    if cfg.scenario is not None:
        if cfg.n is None:
            raise ValueError("scenario runs need n")
        return sample_scenario(ScenarioSpec(cfg.scenario, cfg.n), cfg.seed, rep)
    g = parse_edge_list(Path(cfg.edge_file).read_text()).graph
    if cfg.covariate_file is not None:
        X = parse_covariates(Path(cfg.covariate_file).read_text())
    else:
        X = Covariates(np.zeros((g.n, 1)))
    truth = None
    if cfg.truth_file is not None:
        truth = parse_labels(Path(cfg.truth_file).read_text(), K=cfg.K)
    return g, X, truth


def _effective_covariates(X: Covariates, use: bool) -> Covariates:
    return X if use else Covariates(np.zeros_like(X.values))


def _initial_labels(
    cfg: ExperimentConfig,
    g: Graph,
    X: Covariates,
    truth: Optional[Labels],
    lam: float,
    gamma: float,
    rep: int,
) -> Optional[Labels]:
    if cfg.init == "sdp":
        sdp_cfg = SdpConfig(gamma=gamma, lam=lam)
        return sdp_init_labels(g, X, sdp_cfg, cfg.K, seed=cfg.seed + 7919 * rep,
                               restarts=cfg.kmeans_restarts)
    if cfg.init == "truth":
        if truth is None:
            raise ValueError("truth initialization requires known labels")
        return truth
    if cfg.init == "file":
        if cfg.init_file is None:
            raise ValueError("file initialization needs init_file")
        return parse_labels(Path(cfg.init_file).read_text(), K=cfg.K)
    return None  # random: handled per-method with restarts


def _run_method(
    cfg: ExperimentConfig,
    g: Graph,
    X: Covariates,
    init: Optional[Labels],
    lam: float,
    gamma: float,
    rep: int,
):
    """Returns (labels, logit_fit, trace_summary)."""
    if cfg.method == "sdp":
        labels = init if cfg.init == "sdp" and init is not None else sdp_init_labels(
            g, X, SdpConfig(gamma=gamma, lam=lam), cfg.K, seed=cfg.seed + 7919 * rep,
            restarts=cfg.kmeans_restarts)
        return labels, None, None
    if cfg.method == "mpl":
        if init is not None:
            res = mpl_fit(g, X, init, cfg.opts)
        else:
            rng = rep_rng(cfg.seed, 10_000 + rep)
            best = None
            for _ in range(cfg.restarts):
                cand = mpl_fit(g, X, random_hard_labels(g.n, cfg.K, rng), cfg.opts)
                if best is None or cand.objective_trace[-1] > best.objective_trace[-1]:
                    best = cand
            res = best
        return res.labels, res.logit_fit, _trace_summary(res.objective_trace, res.converged)
    # vem
    if init is not None:
        res = vem_fit(g, X, soft_from_labels(init), cfg.opts)
    else:
        rng = rep_rng(cfg.seed, 20_000 + rep)
        best = None
        for _ in range(cfg.restarts):
            cand = vem_fit(g, X, random_soft_labels(g.n, cfg.K, rng), cfg.opts)
            if best is None or cand.elbo_trace[-1] > best.elbo_trace[-1]:
                best = cand
        res = best
    return res.labels, res.logit_fit, _trace_summary(res.elbo_trace, res.converged)


def _trace_summary(trace: np.ndarray, converged: bool) -> dict:
    return {
        "first": float(trace[0]),
        "last": float(trace[-1]),
        "steps": int(trace.size),
        "converged": bool(converged),
    }


def _one_rep(cfg: ExperimentConfig, rep: int) -> dict:
    t0 = time.perf_counter()
    try:
        g, X_full, truth = _load_data(cfg, rep)
        X = _effective_covariates(X_full, cfg.use_covariates)
        n = g.n
        gamma = resolve_gamma(cfg.gamma_rule, n) if cfg.use_covariates else 0.0
        lam = choose_lambda(
            cfg.lambda_strategy, n=n, K=cfg.K, truth=truth, graph=g, seed=cfg.seed + rep
        )
        init = _initial_labels(cfg, g, X, truth, lam, gamma, rep)
        labels, logit_fit, trace_summary = _run_method(cfg, g, X, init, lam, gamma, rep)
        record: dict = {"rep": rep, "error": None, "trace": trace_summary}
        if truth is not None:
            sigma = align_labels(truth, labels)
            record["nmi"] = nmi(truth, labels)
            record["ari"] = ari(truth, labels)
            record["misclassification"] = misclassification_rate(truth, labels)
            record["labels"] = (apply_permutation(labels, sigma).assignments - 1).tolist()
            if logit_fit is not None:
                aligned = permute_coefficients(logit_fit.beta, inverse_permutation(sigma))
                record["beta"] = aligned.beta.tolist()
        else:
            record["labels"] = (labels.assignments - 1).tolist()
            if logit_fit is not None:
                record["beta"] = logit_fit.beta.beta.tolist()
        if logit_fit is not None:
            record["wald"] = [
                {
                    "class": r.class_index,
                    "covariate": r.covariate_index,
                    "estimate": r.estimate,
                    "std_error": r.std_error,
                    "statistic": r.statistic,
                    "reject": r.reject,
                }
                for r in wald_test(logit_fit, n, cfg.wald_level)
            ]
    except Exception as exc:  # keep the sweep alive; record the failure
        record = {"rep": rep, "error": f"{type(exc).__name__}: {exc}"}
    record["_wall_time"] = time.perf_counter() - t0
    return record


def _aggregate(per_rep: list[dict]) -> dict:
    agg = {}
    for key in ("nmi", "ari", "misclassification"):
        vals = [r[key] for r in per_rep if r.get("error") is None and key in r]
        if vals:
            arr = np.asarray(vals)
            se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
            agg[key] = {"mean": float(arr.mean()), "se": se, "reps": int(arr.size)}
    agg["failed_reps"] = sum(1 for r in per_rep if r.get("error") is not None)
    return agg


def _config_echo(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["gamma_rule"] = list(cfg.gamma_rule)
    return d


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Execute all replications and return the run record (a JSON-able dict)."""
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            per_rep = list(pool.map(_one_rep, [cfg] * cfg.reps, range(cfg.reps)))
    else:
        per_rep = [_one_rep(cfg, rep) for rep in range(cfg.reps)]
    timings = {str(r["rep"]): r.pop("_wall_time") for r in per_rep}
    record = {
        "config": _config_echo(cfg),
        "per_rep": per_rep,
        "aggregate": _aggregate(per_rep),
    }
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "run_record.json").write_text(run_record_json(record))
        (out / "timings.json").write_text(json.dumps(timings, sort_keys=True))
        for r in per_rep:
            if r.get("labels") is not None:
                (out / f"labels_rep{r['rep']:04d}.txt").write_text(
                    "\n".join(str(v) for v in r["labels"]) + "\n"
                )
    return record


def run_record_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=1)


def sweep_tuning(base: ExperimentConfig, taus: list[float], alphas: list[float]) -> str:
    """Grid over scaled tunings tau = lambda/n^2 and alpha = 100*gamma.

    Returns CSV with columns n,tau,alpha,mean_nmi,se_nmi,reps; failed cells
    carry empty statistics.
    """
    if not taus or not alphas:
        raise ValueError("grid must be non-empty")
    if base.n is None:
        raise ValueError("sweep needs a scenario n")
    lines = ["n,tau,alpha,mean_nmi,se_nmi,reps"]
    for tau in taus:
        for alpha in alphas:
            cfg = replace(base, method="sdp", init="sdp", gamma_rule=("scaled", alpha))
            try:
                record = _run_sweep_cell(cfg, tau)
                agg = record["aggregate"].get("nmi")
                if agg is None:
                    lines.append(f"{base.n},{tau},{alpha},,,0")
                else:
                    lines.append(
                        f"{base.n},{tau},{alpha},{agg['mean']:.6f},{agg['se']:.6f},{agg['reps']}"
                    )
            except Exception:
                lines.append(f"{base.n},{tau},{alpha},,,0")
    return "\n".join(lines) + "\n"


def _run_sweep_cell(cfg: ExperimentConfig, tau: float) -> dict:
    def one(rep: int) -> dict:
        g, X_full, truth = _load_data(cfg, rep)
        X = _effective_covariates(X_full, cfg.use_covariates)
        gamma = resolve_gamma(cfg.gamma_rule, g.n) if cfg.use_covariates else 0.0
        lam = tau * g.n * g.n
        labels = sdp_init_labels(
            g, X, SdpConfig(gamma=gamma, lam=lam), cfg.K,
            seed=cfg.seed + 7919 * rep, restarts=cfg.kmeans_restarts,
        )
        return {"rep": rep, "error": None, "nmi": nmi(truth, labels)}

    per_rep = [one(rep) for rep in range(cfg.reps)]
    return {"per_rep": per_rep, "aggregate": _aggregate(per_rep)}


def real_data_pipeline(
    weights: np.ndarray,
    attributes: np.ndarray,
    truth_values: np.ndarray,
    threshold: int = 3,
    seed: int = 0,
    opts: FitOptions = FitOptions(),
) -> dict:
    """Weighted-digraph pipeline: binarize, drop isolated nodes, run SDP / MPL /
    VEM with and without covariates, report NMI and ARI per cell.

    `weights` is the n x n integer weight matrix, `attributes` the n x p nodal
    covariates, `truth_values` the per-node ground-truth class codes.
    """
    from .simulate import WeightedDigraph, preprocess_weighted_digraph

    g, keep = preprocess_weighted_digraph(WeightedDigraph(weights), threshold)
    X = Covariates(np.asarray(attributes, dtype=np.float64)[keep])
    codes, truth_idx = np.unique(np.asarray(truth_values)[keep], return_inverse=True)
    K = codes.size
    truth = Labels(truth_idx + 1, K)
    n = g.n
    rho_hat = 2.0 * g.edge_count / (n * n)
    gamma = rho_hat / math.log(n)
    lam = choose_lambda("spectral", K=K, graph=g, seed=seed)

    table: dict = {"n": n, "K": K, "lambda": lam, "gamma": gamma, "results": {}}
    for variant, use_cov in (("edge", False), ("edge+nodal", True)):
        Xv = X if use_cov else Covariates(np.zeros_like(X.values))
        gma = gamma if use_cov else 0.0
        init = sdp_init_labels(g, Xv, SdpConfig(gamma=gma, lam=lam), K, seed=seed)
        cells = {"sdp": init}
        cells["mpl"] = mpl_fit(g, Xv, init, opts).labels
        cells["vem"] = vem_fit(g, Xv, soft_from_labels(init), opts).labels
        table["results"][variant] = {
            m: {"nmi": nmi(truth, lab), "ari": ari(truth, lab)} for m, lab in cells.items()
        }
    return table
