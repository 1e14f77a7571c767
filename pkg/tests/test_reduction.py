import numpy as np
import pytest

from dkslab.codes import repetition_code
from dkslab.csp import sample_random_instance
from dkslab.graphs import BudgetExceeded
from dkslab.reduction import (build_reduction, classify_poorly_satisfied, classify_poorly_satisfied_bruteforce,
                              densest_balanced_subgraph, exhaustive_right, greedy_right, planted_witness,
                              read_bipartite, soundness_report, write_bipartite)


@pytest.fixture(scope="module")
def preset(planted_preset):
    inst, hidden = planted_preset
    return build_reduction(inst, 1), hidden


def test_preset_sizes(preset):
    bi, _ = preset
    assert (bi.n_left, bi.n_right, bi.N, bi.k) == (270, 30, 300, 20)
    assert len(bi.edges()) == 270 * 8
    assert bi.full_biadjacency().sum(axis=1).tolist() == [8] * 270


def test_edges_follow_definition(preset):
    bi, _ = preset
    inst = bi.inst
    edges = {tuple(e) for e in bi.edges().tolist()}
    expected = set()
    for i in range(inst.m):
        for c, alpha in enumerate(bi.patterns[i].tolist()):
            word = [(a + b) % 3 for a, b in zip(alpha, inst.shifts[i].tolist())]
            assert inst.code.contains(np.array(word))[0]
            for pos, var in enumerate(inst.tuples[i].tolist()):
                expected.add((bi.left_id(i, c), bi.right_id(var, alpha[pos])))
    assert edges == expected


def test_label_round_trip(preset):
    bi, _ = preset
    for v in range(bi.n_left):
        i, alpha = bi.left_label(v)
        assert bi.left_id(i, bi.patterns[i].tolist().index(list(alpha))) == v
    for v in range(bi.n_left, bi.N):
        j, val, copy = bi.right_label(v)
        assert bi.right_id(j, val, copy) == v


def test_requires_m_equals_beta_n(code_q3):
    inst = sample_random_instance(10, 7, code_q3, 0)
    with pytest.raises(ValueError, match="m = beta"):
        build_reduction(inst, 1)


def test_copies_share_neighbourhoods():
    code = repetition_code(3, 3)
    inst = sample_random_instance(4, 8, code, 2)
    bi = build_reduction(inst, 2)
    for j in range(4):
        for val in range(3):
            a = bi.neighbors(bi.right_id(j, val, 0))
            b = bi.neighbors(bi.right_id(j, val, 1))
            assert np.array_equal(a, b)


def test_planted_witness(preset):
    bi, hidden = preset
    w = planted_witness(bi, hidden)
    assert len(w.left) == bi.m and len(w.right) == bi.n
    assert w.edges == bi.beta * bi.m * bi.K == 80


def test_poorly_satisfied_matches_bruteforce(code_q3):
    inst = sample_random_instance(20, 12, code_q3, 5)
    rng = np.random.default_rng(0)
    for trial in range(10):
        size = int(rng.integers(1, 40))
        labels = {(int(j), int(v)) for j, v in zip(rng.integers(0, 20, size), rng.integers(0, 3, size))}
        fast = classify_poorly_satisfied(inst, labels)
        assert fast.tolist() == classify_poorly_satisfied_bruteforce(inst, labels)


def small_instances():
    code = repetition_code(3, 3)
    for n, beta, seed in [(4, 1, 0), (5, 1, 1), (6, 1, 2), (3, 2, 3), (4, 1, 4)]:
        inst = sample_random_instance(n, beta * n, code, seed)
        yield build_reduction(inst, beta)


def test_greedy_right_equals_exhaustive():
    checked = 0
    for bi in small_instances():
        assert bi.n_right <= 20
        rng = np.random.default_rng(bi.n)
        for _ in range(5):
            left = rng.choice(bi.n_left, size=min(bi.k, bi.n_left), replace=False)
            for size in range(1, bi.n_right + 1):
                _, g = greedy_right(bi, left, size)
                assert g == exhaustive_right(bi, left, size)
                checked += 1
    assert checked > 100


def test_search_matches_exhaustive_on_tiny():
    for bi in list(small_instances())[:3]:
        ex = densest_balanced_subgraph(bi, mode="exhaustive", left_size=3, right_size=3, budget=10 ** 6)
        se = densest_balanced_subgraph(bi, left_size=3, right_size=3, samples=2000, restarts=5, seed=1)
        assert se.edges <= ex.edges
        assert bi.edge_count(ex.left, ex.right) == ex.edges
        assert bi.edge_count(se.left, se.right) == se.edges


def test_search_budget(preset):
    bi, _ = preset
    with pytest.raises(BudgetExceeded):
        densest_balanced_subgraph(bi, mode="exhaustive", budget=100)


def test_search_is_deterministic(preset):
    bi, _ = preset
    a = densest_balanced_subgraph(bi, samples=3000, restarts=2, seed=3)
    b = densest_balanced_subgraph(bi, samples=3000, restarts=2, seed=3)
    assert a == b
    assert a.edges <= bi.k * bi.beta * bi.K
    assert a.edges >= planted_witness(bi, bi.inst.planted).edges


def test_soundness_report_fields(preset):
    bi, _ = preset
    rep = soundness_report(bi, 120)
    assert rep["completeness"] == 80
    assert rep["ratio"] == pytest.approx(80 / 120)
    assert rep["status"] == "informational"
    assert rep["bound_17_exact"] == "1360/3"


def test_round_trip(tmp_path, preset):
    bi, _ = preset
    write_bipartite(bi, tmp_path / "b.json")
    back = read_bipartite(tmp_path / "b.json")
    assert np.array_equal(back.edges(), bi.edges())
