import json

import pytest

from dkslab.cli import build_parser, main


def run(tmp_path, *args):
    return main([str(a) for a in args])


def test_seed_is_mandatory_on_stochastic_commands():
    parser = build_parser()
    for argv in (["gen", "--n", "10", "--out", "g.txt"],
                 ["csp-gen", "--n", "10", "--m", "2", "--out", "x.json"],
                 ["soundness", "--bip", "b.json"],
                 ["lasserre-verify", "--oracle", "g.json", "--what", "csp"],
                 ["sa-verify", "--table", "t.json"]):
        with pytest.raises(SystemExit):
            parser.parse_args(argv)


def test_graph_pipeline(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert run(tmp_path, "gen", "--n", 40, "--p", 0.3, "--seed", 1, "--out", g) == 0
    assert run(tmp_path, "steiner", "--graph", g, "--terminals", "0,5,9") == 0
    out = capsys.readouterr().out
    assert "size" in out
    rep = tmp_path / "audit.json"
    code = run(tmp_path, "audit", "--graph", g, "--report", rep)
    assert code in (0, 1)
    assert "pass_degree" in json.loads(rep.read_text())
    t = tmp_path / "t.json"
    assert run(tmp_path, "sa-build", "--graph", g, "--level", 2, "--out", t) == 0
    r = tmp_path / "v.json"
    run(tmp_path, "sa-verify", "--table", t, "--family", "inclusion-exclusion,dominate", "--samples", 50,
        "--seed", 1, "--report", r)
    fams = json.loads(r.read_text())["families"]
    assert fams["inclusion-exclusion"]["passed"] and fams["dominate"]["passed"]
    p = tmp_path / "psd.json"
    run(tmp_path, "psd-check", "--graph", g, "--report", p)
    assert {"lambda_min_Z", "pass_Z"} <= set(json.loads(p.read_text()))


def test_code_and_csp_pipeline(tmp_path):
    c = tmp_path / "c.json"
    assert run(tmp_path, "bch-gen", "--q", 3, "--distance", 4, "--out", c) == 0
    rep = tmp_path / "a.json"
    assert run(tmp_path, "code-audit", "--code", c, "--distance", 4, "--report", rep) == 0
    assert json.loads(rep.read_text())["distance_enumeration"] == 5
    assert run(tmp_path, "bch-gen", "--q", 2, "--distance", 3, "--out", c) == 2
    inst = tmp_path / "p.json"
    assert run(tmp_path, "csp-plant", "--n", 10, "--m", 10, "--seed", 0, "--out", inst) == 0
    assert run(tmp_path, "csp-audit", "--instance", inst, "--trials", 200, "--seed", 0,
               "--report", tmp_path / "ca.json") == 0
    bip = tmp_path / "b.json"
    assert run(tmp_path, "reduce", "--instance", inst, "--beta", 1, "--out", bip) == 0
    s = tmp_path / "s.json"
    assert run(tmp_path, "soundness", "--bip", bip, "--budget", 2000, "--restarts", 2, "--seed", 1, "--report", s) == 0
    rep = json.loads(s.read_text())
    assert rep["completeness"] == 80 and rep["status"] == "informational"
    gram = tmp_path / "gram.json"
    assert run(tmp_path, "lasserre-build", "--instance", inst, "--planted", "--label-size", 1, "--out", gram) == 0
    v = tmp_path / "lv.json"
    assert run(tmp_path, "lasserre-verify", "--oracle", gram, "--what", "csp", "--seed", 0, "--report", v) == 0
    assert json.loads(v.read_text())["passed"]


def test_lasserre_build_requires_planted(tmp_path):
    inst = tmp_path / "p.json"
    run(tmp_path, "csp-plant", "--n", 10, "--m", 10, "--seed", 0, "--out", inst)
    assert run(tmp_path, "lasserre-build", "--instance", inst, "--out", tmp_path / "g.json") == 2


def test_run_config(tmp_path):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({"version": 1, "kind": "bch", "params": {"q": 3, "D": 3}, "seeds": [1],
                                "outputs": {"report": str(tmp_path / "r.json")}}))
    assert run(tmp_path, "run", "--config", cfgp, "--workers", 1) == 0
    assert json.loads((tmp_path / "r.json").read_text())["passed"]
    cfgp.write_text(json.dumps({"version": 1, "kind": "bch", "seeds": []}))
    assert run(tmp_path, "run", "--config", cfgp) == 2
