import itertools

import numpy as np
import pytest

from dkslab.codes import (DimensionError, LinearCode, build_generalized_bch, code_from_generator, code_from_parity,
                          dual_code, full_space, min_distance_bruteforce, min_distance_columns, read_code,
                          repetition_code, vandermonde_rank_check, write_code)
from dkslab.gf import field_pair
from dkslab.graphs import BudgetExceeded


def naive_min_distance(c: LinearCode) -> int:
    """Weight of every nonzero combination of generator rows, with plain modular loops for prime q."""
    best = c.K + 1
    F = c.field
    for msg in itertools.product(range(c.q), repeat=c.dim):
        if not any(msg):
            continue
        word = np.zeros(c.K, dtype=np.int64)
        for coef, row in zip(msg, c.generator):
            for j in range(c.K):
                word[j] = F.add(word[j], F.mul(coef, int(row[j])))
        best = min(best, int(np.count_nonzero(word)))
    return best


@pytest.mark.parametrize("q,D,dim,dist", [(3, 3, 5, 3), (3, 4, 3, 5)])
def test_small_bch(q, D, dim, dist):
    c = build_generalized_bch(q, D)
    assert c.K == q * q - 1
    assert c.dim == dim == c.K - 2 * D + 3
    assert dual_code(c).size == q ** (2 * D - 3)
    assert not c.field.matmul(c.generator, c.parity.T).any()
    assert naive_min_distance(c) == min_distance_bruteforce(c) == min_distance_columns(c) == dist
    assert dist >= D


def test_bch_codewords_vanish_at_gamma_powers():
    q, D = 3, 4
    c = build_generalized_bch(q, D)
    E = field_pair(q)[1]
    for word in c.codewords():
        for i in range(D - 1):
            acc = 0
            for j, cj in enumerate(word.tolist(), start=1):
                acc = E.add(acc, E.mul(E.pack(cj, 0), E.pow(E.gamma, i * j)))
            assert acc == 0


def test_dimension_error():
    with pytest.raises(DimensionError):
        build_generalized_bch(2, 3)
    with pytest.raises(ValueError):
        build_generalized_bch(3, 2)


def test_repetition_and_full_space():
    rep = repetition_code(3, 5)
    assert rep.size == 3 and min_distance_bruteforce(rep) == 5 == min_distance_columns(rep)
    full = full_space(2, 4)
    assert full.size == 16 and min_distance_bruteforce(full) == 1
    assert dual_code(rep).same_space(code_from_parity(3, rep.generator))


def test_inconsistent_code_rejected():
    with pytest.raises(ValueError):
        LinearCode(q=3, K=3, generator=np.array([[1, 0, 0]]), parity=np.array([[1, 0, 0], [0, 1, 0]]))


def test_contains_and_syndrome():
    c = build_generalized_bch(3, 3)
    words = c.codewords()
    assert c.contains(words).all()
    bad = words[1].copy()
    bad[0] = (bad[0] + 1) % 3
    assert not c.contains(bad[None, :])[0]
    msg = np.array([1, 2, 0, 1, 1])
    assert c.contains(c.encode(msg)).all()


def test_budget():
    c = build_generalized_bch(5, 3)
    with pytest.raises(BudgetExceeded):
        min_distance_bruteforce(c, budget=1000)


def test_round_trip(tmp_path):
    c = build_generalized_bch(4, 3)
    write_code(c, tmp_path / "c.json")
    back = read_code(tmp_path / "c.json")
    assert back.same_space(c)
    assert set(c.to_dict()) >= {"q", "modulus", "K", "dim", "generator", "parity"}


def test_generator_constructor_matches_parity():
    c = build_generalized_bch(3, 3)
    assert code_from_generator(3, c.generator).same_space(code_from_parity(3, c.parity))


def test_vandermonde_blocks_nonsingular():
    assert vandermonde_rank_check(4, 3, 50, np.random.default_rng(0)) == []
