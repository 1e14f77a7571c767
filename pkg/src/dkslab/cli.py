"""Command-line entry point: ``dkslab <subcommand> ...``.

Exit status is 0 when every hard check passes, 1 when one fails and 2 on
usage or input errors.  Reports are JSON; ``--report -`` prints to stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import comb
from pathlib import Path

from . import __version__
from .codes import (DimensionError, build_generalized_bch, dual_code, min_distance_bruteforce, min_distance_columns,
                    read_code, write_code)
from .csp import (CspInstance, audit_expansion, plant_satisfiable_instance, read_instance, sample_random_instance,
                  satisfaction_frequency, satisfaction_probability, write_instance)
from .graphs import BudgetExceeded, GnpParams, audit_paper_properties, default_p, gen_gnp, read_graph, sqrt_log_p, \
    write_graph
from .lab import ConfigError, ExperimentConfig, dumps, run_experiment
from .lasserre import (EmptySolutionSpace, NotServed, RoundBoundError, SolutionSpace, build_planted_csp_oracle,
                       csp_labels_upto, export_gram, import_gram, lift_to_dks, verify_csp_properties,
                       verify_dks_lasserre, verify_min_degree)
from .mixed import check_mixed_psd, level_for_psd
from .reduction import build_reduction, densest_balanced_subgraph, read_bipartite, soundness_report, write_bipartite
from .sa import (FAMILIES, MissingValue, Sampler, TableAssignment, build_sa_solution, load_table, verify_family,
                 write_table)
from .steiner import DisconnectedTerminals, steiner_size


def _emit(report: dict, path: str | None) -> None:
    text = dumps(report)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _status(ok: bool) -> int:
    return 0 if ok else 1


def _p(text: str, n: int) -> float:
    if text == "default":
        return default_p(n)
    if text == "sqrt-log":
        return sqrt_log_p(n)
    return float(text)


# -- graphs / steiner --------------------------------------------------------------

def cmd_gen(a) -> int:
    g = gen_gnp(GnpParams(a.n, _p(a.p, a.n), a.seed))
    write_graph(g, a.out)
    print(f"wrote {a.out}: n={g.n} m={g.m}")
    return 0


def cmd_audit(a) -> int:
    rep = audit_paper_properties(read_graph(a.graph))
    _emit(rep.to_dict(), a.report)
    return _status(rep.passed)


def cmd_steiner(a) -> int:
    g = read_graph(a.graph)
    terms = [int(t) for t in a.terminals.split(",") if t.strip()]
    res = steiner_size(g, terms)
    print(f"size {res.size}")
    for u, v in res.witness:
        print(f"{u} {v}")
    return 0


# -- sherali-adams / psd ----------------------------------------------------------

def cmd_sa_build(a) -> int:
    g = read_graph(a.graph)
    sa = build_sa_solution(g, a.level, check=False, graph_ref=str(a.graph))
    count = write_table(sa, a.out, a.max_size)
    for w in sa.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {a.out}: {count} values")
    return 0


def cmd_sa_verify(a) -> int:
    doc = load_table(a.table)
    graph = a.graph or doc.get("graph")
    if not graph:
        raise ValueError("table names no graph file; pass --graph")
    g = read_graph(graph)
    sa = TableAssignment(g, doc)
    r = a.rounds if a.rounds is not None else int(doc.get("complete_to_size", sa.L))
    d = None if a.d == "auto" else Fraction(a.d)
    fams = FAMILIES if a.family == "all" else tuple(a.family.split(","))
    mode = "exhaustive" if a.exhaustive else "random"
    out = {"n": g.n, "L": sa.L, "r": r, "families": {}}
    ok = True
    for fam in fams:
        sampler = Sampler(mode=mode, samples=a.samples, seed=a.seed, max_t=0 if fam == "density" else None)
        try:
            v = verify_family(sa, g, fam, r, d=d, k=None if a.k is None else Fraction(a.k), sampler=sampler)
        except MissingValue as e:
            out["families"][fam] = {"passed": False, "error": f"missing table value: {e}"}
            ok = False
            continue
        out["families"][fam] = v.to_dict()
        ok = ok and v.passed
    out["passed"] = ok
    _emit(out, a.report)
    return _status(ok)


def cmd_psd_check(a) -> int:
    g = read_graph(a.graph)
    L = level_for_psd(g.n) if a.level == "auto" else int(a.level)
    v = check_mixed_psd(g, L, a.tol)
    _emit(v.to_dict(), a.report)
    return _status(v.passed)


# -- codes / csp ---------------------------------------------------------------------

def cmd_bch_gen(a) -> int:
    c = build_generalized_bch(a.q, a.distance)
    write_code(c, a.out)
    print(f"wrote {a.out}: q={c.q} K={c.K} dim={c.dim}")
    return 0


def cmd_code_audit(a) -> int:
    c = read_code(a.code)
    F = c.field
    out = {"q": c.q, "K": c.K, "dim": c.dim, "dual_dim": c.K - c.dim,
           "GHt_zero": not F.matmul(c.generator, c.parity.T).any(),
           "distance_columns": min_distance_columns(c), "method": "exact"}
    try:
        out["distance_enumeration"] = min_distance_bruteforce(c, a.budget)
    except BudgetExceeded as e:
        out["distance_enumeration"] = None
        out["distance_enumeration_skipped"] = str(e)
    ok = out["GHt_zero"]
    if a.distance is not None:
        out["distance_target"] = a.distance
        out["dim_expected"] = c.K - 2 * a.distance + 3
        ok = ok and out["distance_columns"] >= a.distance and c.dim == out["dim_expected"]
    out["passed"] = ok
    _emit(out, a.report)
    return _status(ok)


def _code_for(a):
    if a.code:
        return read_code(a.code)
    return dual_code(build_generalized_bch(a.q, a.distance))


def cmd_csp_gen(a) -> int:
    inst = sample_random_instance(a.n, a.m, _code_for(a), a.seed)
    write_instance(inst, a.out)
    print(f"wrote {a.out}: n={inst.n} m={inst.m} K={inst.K}")
    return 0


def cmd_csp_plant(a) -> int:
    inst, _ = plant_satisfiable_instance(a.n, a.m, _code_for(a), a.seed)
    write_instance(inst, a.out)
    print(f"wrote {a.out}: n={inst.n} m={inst.m} K={inst.K} (planted)")
    return 0


def cmd_csp_audit(a) -> int:
    inst = read_instance(a.instance)
    p = satisfaction_probability(inst.code)
    freq = satisfaction_frequency(inst, a.trials, a.seed)
    out = {"n": inst.n, "m": inst.m, "q": inst.q, "K": inst.K,
           "satisfaction": {"expected": str(p), "observed": freq, "trials": a.trials,
                            "method": f"sampled({a.trials * inst.m})"}}
    ok = True
    if a.expansion:
        r, delta = int(a.expansion[0]), Fraction(a.expansion[1])
        v = audit_expansion(inst, r, delta, budget=a.budget, seed=a.seed)
        out["expansion"] = v.to_dict()
        ok = v.passed
    out["passed"] = ok
    _emit(out, a.report)
    return _status(ok)


# -- reduction / soundness -------------------------------------------------------------

def cmd_reduce(a) -> int:
    bi = build_reduction(read_instance(a.instance), a.beta)
    write_bipartite(bi, a.out)
    print(f"wrote {a.out}: N={bi.N} k={bi.k} edges={len(bi.edges())}")
    return 0


def cmd_soundness(a) -> int:
    bi = read_bipartite(a.bip)
    if comb(bi.n_left, min(bi.k, bi.n_left)) <= a.budget:
        res = densest_balanced_subgraph(bi, mode="exhaustive", budget=a.budget)
    else:
        res = densest_balanced_subgraph(bi, samples=a.budget, restarts=a.restarts, seed=a.seed)
    rep = soundness_report(bi, res.edges, res.method)
    rep["best"] = res.to_dict()
    _emit(rep, a.report)
    return _status(rep["status"] != "fail")


# -- lasserre ------------------------------------------------------------------------

def cmd_lasserre_build(a) -> int:
    inst = read_instance(a.instance)
    if not a.planted:
        raise ValueError("only the planted construction is available; pass --planted")
    space = SolutionSpace.from_instance(inst)
    oracle = build_planted_csp_oracle(inst, space, a.rounds)
    labels = csp_labels_upto(inst.n, inst.q, min(a.label_size, oracle.r))
    export_gram(oracle, labels, a.out)
    doc = json.loads(Path(a.out).read_text())
    doc.update({"instance": inst.to_dict(), "rounds": oracle.r, "beta": a.beta})
    Path(a.out).write_text(json.dumps(doc))
    print(f"wrote {a.out}: {len(labels)} labels, |A|={space.size}, rank={space.rank}")
    return 0


def cmd_lasserre_verify(a) -> int:
    doc = json.loads(Path(a.oracle).read_text())
    gram = import_gram(a.oracle)
    if "instance" not in doc:
        raise ValueError("oracle file carries no instance; rebuild it with lasserre-build")
    inst = CspInstance.from_dict(doc["instance"])
    if a.what == "csp":
        v = verify_csp_properties(gram, inst, int(doc.get("rounds", gram.r)), max_label=a.max_label)
        out = v.to_dict()
    else:
        # DkS vectors are recomputed from the embedded instance after checking the
        # file's CSP Gram table against the same construction.
        base = build_planted_csp_oracle(inst, r=int(doc.get("rounds", inst.n)))
        if (base.block(gram.labels, gram.labels) * gram.den != gram.num * base.den).any():
            raise ValueError("Gram table does not match the planted construction for its instance")
        bi = build_reduction(inst, int(doc.get("beta", 1)))
        dks = lift_to_dks(base, inst, bi, a.rounds)
        if a.what == "dks":
            v = verify_dks_lasserre(dks, bi, a.rounds, seed=a.seed)
        else:
            v = verify_min_degree(dks, bi, R=a.rounds, seed=a.seed)
        out = v.to_dict()
    _emit(out, a.report)
    return _status(v.passed)


def cmd_run(a) -> int:
    cfg = ExperimentConfig.load(a.config)
    report = run_experiment(cfg, workers=a.workers)
    if not cfg.outputs.get("report"):
        print(dumps(report))
    for f in report["hard_failures"]:
        print(f"hard failure: {f}", file=sys.stderr)
    return _status(report["passed"])


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dkslab", description="DkS integrality-gap verification lab")
    ap.add_argument("--version", action="version", version=f"dkslab {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    p = add("gen", cmd_gen, "sample a G(n,p) graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", default="default", help="'default' (ln n/sqrt n), 'sqrt-log' or a number")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("audit", cmd_audit, "degree and common-neighbour audit")
    p.add_argument("--graph", required=True)
    p.add_argument("--report")

    p = add("steiner", cmd_steiner, "minimum Steiner tree for a terminal set")
    p.add_argument("--graph", required=True)
    p.add_argument("--terminals", required=True, help='comma separated, e.g. "0,4,7"')

    p = add("sa-build", cmd_sa_build, "write a Sherali-Adams value table")
    p.add_argument("--graph", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--max-size", type=int, help="largest subset to materialise (default: level)")
    p.add_argument("--out", required=True)

    p = add("sa-verify", cmd_sa_verify, "check constraint families against a table")
    p.add_argument("--table", required=True)
    p.add_argument("--graph", help="graph file (default: the one named in the table)")
    p.add_argument("--family", default="all", help="all or comma list of " + ",".join(FAMILIES))
    p.add_argument("--d", default="auto")
    p.add_argument("--k", help="size bound (default sqrt n)")
    p.add_argument("--rounds", type=int, help="|S|+|T| bound (default: table size)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")

    p = add("psd-check", cmd_psd_check, "mixed-hierarchy PSD check")
    p.add_argument("--graph", required=True)
    p.add_argument("--level", default="auto", help="L or 'auto' (ceil(4 sqrt(ln n)))")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--report")

    p = add("bch-gen", cmd_bch_gen, "build a generalised BCH code")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("code-audit", cmd_code_audit, "dimension, distance and G H^T = 0")
    p.add_argument("--code", required=True)
    p.add_argument("--distance", type=int, help="designed distance to check against")
    p.add_argument("--budget", type=int, default=10 ** 7)
    p.add_argument("--report")

    for name, fn, help_ in (("csp-gen", cmd_csp_gen, "random CSP instance"),
                            ("csp-plant", cmd_csp_plant, "satisfiable CSP instance")):
        p = add(name, fn, help_)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--code", help="code file for the constraint predicate")
        p.add_argument("--q", type=int, default=3)
        p.add_argument("--distance", type=int, default=3, help="used when --code is absent (dual of the BCH code)")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", required=True)

    p = add("csp-audit", cmd_csp_audit, "satisfaction frequency and expansion")
    p.add_argument("--instance", required=True)
    p.add_argument("--expansion", nargs=2, metavar=("R", "DELTA"))
    p.add_argument("--trials", type=int, default=10 ** 4)
    p.add_argument("--budget", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")

    p = add("reduce", cmd_reduce, "CSP to bipartite DkS reduction")
    p.add_argument("--instance", required=True)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("soundness", cmd_soundness, "best balanced subgraph and soundness report")
    p.add_argument("--bip", required=True)
    p.add_argument("--budget", type=int, default=10 ** 5)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")

    p = add("lasserre-build", cmd_lasserre_build, "export the planted CSP Gram table")
    p.add_argument("--instance", required=True)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--rounds", type=int)
    p.add_argument("--beta", type=int, default=1, help="copies used when the file is lifted to DkS")
    p.add_argument("--label-size", type=int, default=2)
    p.add_argument("--out", default="gram.json")

    p = add("lasserre-verify", cmd_lasserre_verify, "check an exported Gram family")
    p.add_argument("--oracle", required=True)
    p.add_argument("--what", choices=("csp", "dks", "mindeg"), required=True)
    p.add_argument("--rounds", type=int, default=2, help="DkS round count R")
    p.add_argument("--max-label", type=int, default=2)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")

    p = add("run", cmd_run, "run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, help="override DKSLAB_WORKERS")
    return ap


INPUT_ERRORS = (ConfigError, ValueError, FileNotFoundError, BudgetExceeded, DimensionError, DisconnectedTerminals,
                EmptySolutionSpace, RoundBoundError, NotServed, json.JSONDecodeError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except INPUT_ERRORS as e:
        print(f"dkslab {args.cmd}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
