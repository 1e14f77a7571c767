"""Experiment configs, seed sweeps and gap reports.

Config file (JSON)::

    {"version": 1, "kind": "sa-gap", "params": {...}, "seeds": [1, 2],
     "outputs": {"report": "out.json", "dir": "artifacts"}}

Unknown keys are rejected at every level.  ``DKSLAB_WORKERS`` sets the
number of worker processes for the seed sweep (default: logical cores);
results are merged in seed order, so output does not depend on it.
"""
from __future__ import annotations

import csv
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .codes import build_generalized_bch, dual_code, min_distance_bruteforce, min_distance_columns
from .csp import audit_expansion, plant_satisfiable_instance, sample_random_instance
from .graphs import (GnpParams, audit_paper_properties, default_p, densest_k_localsearch, density, gen_gnp,
                     sqrt_log_p)
from .lasserre import (SolutionSpace, build_planted_csp_oracle, lift_to_dks, verify_csp_properties,
                       verify_dks_lasserre, verify_min_degree)
from .mixed import check_mixed_psd, level_for_psd
from .rates import annotate_rates
from .reduction import (build_reduction, classify_poorly_satisfied, densest_balanced_subgraph, planted_witness,
                        soundness_report)
from .sa import BUCKETS, Sampler, build_sa_solution, default_density, size_constraint_profile, verify_family

SCHEMA_VERSION = 1
# CSV columns for the size-constraint profile: subset, Steiner size, ratio
# (exact surd and float), dominant bucket, then candidate counts per bucket.
PROFILE_HEADER = ["S", "st", "ratio_exact", "ratio", "dominant_bucket"] + [f"count_{b}" for b in BUCKETS]
WORKERS_ENV = "DKSLAB_WORKERS"

KINDS: dict[str, dict] = {
    "sa-gap": {"n": 1024, "L": 3, "p": "default", "samples": 200, "profile_samples": 50, "restarts": 10},
    "psd": {"n": 500, "L": "auto", "p": "default", "tol": 1e-8},
    "bch": {"q": 3, "D": 4},
    "expansion": {"n": 200, "m": 10, "q": 3, "D": 3, "r": 4, "delta": "3/2"},
    "lasserre-complete": {"q": 3, "D": 3, "n": 10, "m": 10, "beta": 1, "R": 2, "pair_samples": 200},
    "soundness": {"q": 3, "D": 3, "n": 10, "m": 10, "beta": 1, "samples": 20000, "restarts": 5},
    "full-pipeline": {"q": 3, "D": 3, "n": 10, "m": 10, "beta": 1, "R": 2, "pair_samples": 200,
                      "samples": 20000, "restarts": 5},
}

PRESETS = {
    "sa-gap": {"version": 1, "kind": "sa-gap", "params": {"n": 1024, "L": 3}, "seeds": [1, 2, 3, 4, 5]},
    "lasserre-complete": {"version": 1, "kind": "lasserre-complete",
                          "params": {"q": 3, "D": 3, "n": 10, "m": 10, "beta": 1}, "seeds": [0]},
}


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    seeds: list[int]
    outputs: dict = field(default_factory=dict)
    version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("$", "config must be a JSON object")
        allowed = {"version", "kind", "params", "seeds", "outputs"}
        for k in d:
            if k not in allowed:
                raise ConfigError(k, "unknown key")
        if d.get("version") != SCHEMA_VERSION:
            raise ConfigError("version", f"expected {SCHEMA_VERSION}, got {d.get('version')!r}")
        kind = d.get("kind")
        if kind not in KINDS:
            raise ConfigError("kind", f"expected one of {sorted(KINDS)}, got {kind!r}")
        params = dict(KINDS[kind])
        for k, v in (d.get("params") or {}).items():
            if k not in params:
                raise ConfigError(f"params.{k}", "unknown key")
            params[k] = v
        seeds = d.get("seeds")
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seeds", "must be a nonempty list of integers")
        for i, s in enumerate(seeds):
            if not isinstance(s, int) or isinstance(s, bool):
                raise ConfigError(f"seeds[{i}]", "must be an integer")
        outputs = d.get("outputs") or {}
        for k, v in outputs.items():
            if k not in ("report", "dir"):
                raise ConfigError(f"outputs.{k}", "unknown key")
            if not isinstance(v, str):
                raise ConfigError(f"outputs.{k}", "must be a path string")
        cfg = cls(kind=kind, params=params, seeds=list(seeds), outputs=outputs)
        cfg._check_params()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def _check_params(self) -> None:
        p = self.params
        for key in ("n", "m", "q", "D", "beta", "R", "r", "samples", "restarts", "profile_samples", "pair_samples"):
            if key in p and (not isinstance(p[key], int) or p[key] < (0 if key == "m" else 1)):
                raise ConfigError(f"params.{key}", "must be a positive integer")
        if "L" in p and p["L"] != "auto" and (not isinstance(p["L"], int) or p["L"] < 1):
            raise ConfigError("params.L", "must be a positive integer or 'auto'")
        if "p" in p and p["p"] not in ("default", "sqrt-log") and not (isinstance(p["p"], (int, float)) and 0 <= p["p"] <= 1):
            raise ConfigError("params.p", "must be 'default', 'sqrt-log' or a number in [0, 1]")
        if "D" in p and p["D"] < 3:
            raise ConfigError("params.D", "distance target must be at least 3")
        if "q" in p and "D" in p and p["q"] ** 2 - 1 - 2 * p["D"] + 3 < 1:
            raise ConfigError("params.D", "code dimension K-2D+3 would be nonpositive")
        if self.kind in ("lasserre-complete", "soundness", "full-pipeline"):
            if p["m"] != p["beta"] * p["n"]:
                raise ConfigError("params.m", "the reduction needs m = beta * n")
            if p["n"] < p["q"] ** 2 - 1:
                raise ConfigError("params.n", "need n >= K = q^2 - 1")


@dataclass
class GapReport:
    kind: str
    seed: int
    params: dict
    verdicts: dict
    hard_failures: list[str]
    relaxation: dict | None = None
    integral: dict | None = None
    annotations: dict | None = None
    tables: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float | None:
        if not self.relaxation or not self.integral or not self.integral["value"]:
            return None
        return self.relaxation["value"] / self.integral["value"]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "seed": self.seed, "params": self.params,
            "relaxation": self.relaxation, "integral": self.integral, "ratio": self.ratio,
            "annotations": self.annotations, "verdicts": self.verdicts,
            "hard_failures": self.hard_failures,
            "_tables": self.tables,
        }


def _p_value(choice, n: int) -> float:
    if choice == "default":
        return default_p(n)
    if choice == "sqrt-log":
        return sqrt_log_p(n)
    return float(choice)


def run_sa_gap(params: dict, seed: int) -> GapReport:
    n, L = params["n"], params["L"]
    g = gen_gnp(GnpParams(n, _p_value(params["p"], n), seed))
    audit = audit_paper_properties(g)
    a = build_sa_solution(g, L, check=False)
    verdicts = {"audit": audit.to_dict()}
    r = min(L, 4)
    for fam in ("inclusion-exclusion", "dominate"):
        verdicts[fam] = verify_family(a, g, fam, r, sampler=Sampler(samples=params["samples"], seed=seed)).to_dict()
    dens = verify_family(a, g, "density", min(2, L), sampler=Sampler(samples=params["samples"], seed=seed, max_t=0))
    verdicts["density"] = dens.to_dict()
    prof = size_constraint_profile(a, g, Sampler(samples=params["profile_samples"], seed=seed,
                                                 max_s=min(2, L - 1), max_t=0))
    prof_d = prof.to_dict()
    rows = prof_d.pop("rows")
    verdicts["size_profile"] = prof_d
    table = [[" ".join(map(str, r["S"])), r["st"], r["ratio_exact"], r["ratio"], r["dominant_bucket"]]
             + [r["counts"][b] for b in BUCKETS] for r in rows]
    k = max(1, math.isqrt(n))
    _, edges = densest_k_localsearch(g, k, restarts=params["restarts"], seed=seed)
    d = float(default_density(a))
    hard = [f for f in ("inclusion-exclusion", "dominate", "density") if not verdicts[f]["passed"]]
    return GapReport(
        kind="sa-gap", seed=seed, params={"n": n, "L": L, "k": k, "p": _p_value(params["p"], n)},
        verdicts=verdicts, hard_failures=hard,
        relaxation={"value": d, "what": "feasible d = n^(1/4)/L", "method": "exact"},
        integral={"value": density(edges, k), "edges": edges, "what": "average degree 2e/k", "method": "local-search"},
        annotations={"audit_passed": audit.passed, "warnings": a.warnings},
        tables={"size_profile": (PROFILE_HEADER, table)})


def run_psd(params: dict, seed: int) -> GapReport:
    n = params["n"]
    L = level_for_psd(n) if params["L"] == "auto" else params["L"]
    g = gen_gnp(GnpParams(n, _p_value(params["p"], n), seed))
    v = check_mixed_psd(g, L, params["tol"])
    hard = [] if v.passed else ["psd"]
    return GapReport(kind="psd", seed=seed, params={"n": n, "L": L}, verdicts={"psd": v.to_dict()}, hard_failures=hard)


def run_bch(params: dict, seed: int) -> GapReport:
    q, D = params["q"], params["D"]
    c = build_generalized_bch(q, D)
    dual = dual_code(c)
    d_cols = min_distance_columns(c)
    verdicts = {"K": c.K, "dim": c.dim, "dim_expected": c.K - 2 * D + 3, "dual_size": dual.size,
                "dual_size_expected": q ** (2 * D - 3), "distance_columns": d_cols,
                "GHt_zero": not c.field.matmul(c.generator, c.parity.T).any(), "method": "exact"}
    try:
        verdicts["distance_enumeration"] = min_distance_bruteforce(c)
    except Exception as e:  # budget exceeded
        verdicts["distance_enumeration"] = f"skipped: {e}"
    hard = []
    if c.dim != c.K - 2 * D + 3:
        hard.append("dimension")
    if dual.size != q ** (2 * D - 3):
        hard.append("dual_size")
    if d_cols < D:
        hard.append("distance")
    if not verdicts["GHt_zero"]:
        hard.append("GHt")
    return GapReport(kind="bch", seed=seed, params={"q": q, "D": D}, verdicts=verdicts, hard_failures=hard,
                     annotations=annotate_rates(q, Fraction(D, 2), max(q * q, 2)))


def run_expansion(params: dict, seed: int) -> GapReport:
    C = dual_code(build_generalized_bch(params["q"], params["D"]))
    inst = sample_random_instance(params["n"], params["m"], C, seed)
    v = audit_expansion(inst, params["r"], Fraction(params["delta"]))
    return GapReport(kind="expansion", seed=seed, params=dict(params), verdicts={"expansion": v.to_dict()},
                     hard_failures=[] if v.passed else ["expansion"])


def _lasserre_part(params: dict, seed: int):
    C = dual_code(build_generalized_bch(params["q"], params["D"]))
    inst, hidden = plant_satisfiable_instance(params["n"], params["m"], C, seed)
    space = SolutionSpace.from_instance(inst)
    oracle = build_planted_csp_oracle(inst, space)
    bi = build_reduction(inst, params["beta"])
    return C, inst, hidden, space, oracle, bi


def run_lasserre(params: dict, seed: int) -> GapReport:
    C, inst, hidden, space, oracle, bi = _lasserre_part(params, seed)
    v_csp = verify_csp_properties(oracle, inst, oracle.r)
    dks = lift_to_dks(oracle, inst, bi, params["R"])
    v_dks = verify_dks_lasserre(dks, bi, params["R"], seed=seed)
    v_md = verify_min_degree(dks, bi, R=params["R"], pair_samples=params["pair_samples"], seed=seed)
    witness = planted_witness(bi, hidden)
    hard = [n for n, v in (("csp", v_csp), ("dks", v_dks), ("min_degree", v_md)) if not v.passed]
    obj = bi.beta * bi.m * bi.K
    return GapReport(
        kind="lasserre-complete", seed=seed,
        params={"q": bi.q, "K": bi.K, "t": C.dim, "n": bi.n, "m": bi.m, "beta": bi.beta, "N": bi.N, "k": bi.k,
                "R": params["R"], "solution_rank": space.rank, "solutions": space.size},
        verdicts={"csp": v_csp.to_dict(), "dks": v_dks.to_dict(), "min_degree": v_md.to_dict(),
                  "planted_witness_edges": witness.edges},
        hard_failures=hard,
        relaxation={"value": obj, "what": "Lasserre objective", "method": "exact"},
        integral={"value": witness.edges, "what": "planted subgraph edges", "method": "exact"},
        annotations=annotate_rates(bi.q, Fraction(params["D"], 2), bi.N))


def run_soundness(params: dict, seed: int) -> GapReport:
    C = dual_code(build_generalized_bch(params["q"], params["D"]))
    inst = sample_random_instance(params["n"], params["m"], C, seed)
    bi = build_reduction(inst, params["beta"])
    res = densest_balanced_subgraph(bi, samples=params["samples"], restarts=params["restarts"], seed=seed)
    rep = soundness_report(bi, res.edges, res.method)
    right = {(bi.right_label(v)[0], bi.right_label(v)[1]) for v in res.right}
    poor = classify_poorly_satisfied(inst, right)
    rep["poorly_satisfied_for_best_right"] = int(poor.sum())
    hard = ["soundness"] if rep["status"] == "fail" else []
    return GapReport(kind="soundness", seed=seed, params={"q": bi.q, "K": bi.K, "n": bi.n, "m": bi.m,
                                                          "beta": bi.beta, "N": bi.N, "k": bi.k},
                     verdicts={"soundness": rep, "best": res.to_dict()}, hard_failures=hard,
                     relaxation={"value": rep["completeness"], "what": "beta m K", "method": "exact"},
                     integral={"value": res.edges, "what": "best k x k subgraph found", "method": "local-search"},
                     annotations=annotate_rates(bi.q, Fraction(params["D"], 2), bi.N))


def run_full(params: dict, seed: int) -> GapReport:
    parts = {
        "bch": run_bch({"q": params["q"], "D": params["D"]}, seed),
        "lasserre": run_lasserre({k: params[k] for k in KINDS["lasserre-complete"]}, seed),
        "soundness": run_soundness({k: params[k] for k in KINDS["soundness"]}, seed),
    }
    las, snd = parts["lasserre"], parts["soundness"]
    hard = [f"{name}.{f}" for name, r in parts.items() for f in r.hard_failures]
    return GapReport(kind="full-pipeline", seed=seed, params=las.params,
                     verdicts={k: _strip(v.to_dict()) for k, v in parts.items()}, hard_failures=hard,
                     relaxation=las.relaxation, integral=snd.integral, annotations=las.annotations)


def _strip(d: dict) -> dict:
    d.pop("_tables", None)
    return d


RUNNERS = {"sa-gap": run_sa_gap, "psd": run_psd, "bch": run_bch, "expansion": run_expansion,
           "lasserre-complete": run_lasserre, "soundness": run_soundness, "full-pipeline": run_full}


def _run_one(args) -> dict:
    kind, params, seed = args
    return RUNNERS[kind](params, seed).to_dict()


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> dict:
    """Run every seed; returns the merged report (seed order)."""
    workers = worker_count() if workers is None else workers
    jobs = [(cfg.kind, cfg.params, s) for s in cfg.seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    tables = [r.pop("_tables") for r in runs]
    ratios = [r["ratio"] for r in runs if r["ratio"] is not None]
    report = {
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "kind": cfg.kind,
        "params": cfg.params,
        "seeds": cfg.seeds,
        "runs": runs,
        "median_ratio": statistics.median(ratios) if ratios else None,
        "hard_failures": sorted({f"seed {r['seed']}: {f}" for r in runs for f in r["hard_failures"]}),
    }
    report["passed"] = not report["hard_failures"]
    out = cfg.outputs.get("report")
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(dumps(report))
    out_dir = cfg.outputs.get("dir")
    if out_dir:
        write_tables(Path(out_dir), cfg.seeds, tables)
    return report


def write_tables(out_dir: Path, seeds, tables) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for seed, tabs in zip(seeds, tables):
        for name, (header, rows) in sorted(tabs.items()):
            path = out_dir / f"{name}_seed{seed}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
            written.append(path)
    return written


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (tuple, set)):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def gap_trend(ns=(256, 1024, 4096), seeds=(1, 2, 3, 4, 5), L: int = 3, restarts: int = 5) -> dict:
    """Median of (feasible d) / (local-search density at k = sqrt n) per ``n``."""
    out = {}
    for n in ns:
        ratios = []
        for s in seeds:
            g = gen_gnp(GnpParams(n, default_p(n), s))
            k = math.isqrt(n)
            _, e = densest_k_localsearch(g, k, restarts=restarts, seed=s)
            ratios.append((n ** 0.25 / L) / density(e, k))
        out[n] = {"median": statistics.median(ratios), "ratios": ratios, "method": "local-search"}
    return out
