import itertools

import numpy as np
import pytest

from dkslab.gf import GF, FieldSpec, field_ops, field_pair

QS = [2, 3, 4, 5, 7, 8, 9]


def check_axioms(F):
    q = F.size
    e = np.arange(q)
    add, mul = F.add_t, F.mul_t
    assert np.array_equal(add, add.T) and np.array_equal(mul, mul.T)
    assert np.array_equal(add[0], e) and np.array_equal(mul[1], e)
    for a, b, c in itertools.product(range(q), repeat=3):
        assert add[add[a, b], c] == add[a, add[b, c]]
        assert mul[mul[a, b], c] == mul[a, mul[b, c]]
        assert mul[a, add[b, c]] == add[mul[a, b], mul[a, c]]
    for a in range(q):
        assert add[a, F.neg(a)] == 0
        assert F.sub(a, a) == 0
        if a:
            assert mul[a, F.inv(a)] == 1
    assert sorted(set(mul[1:, 1:].ravel().tolist())) == list(range(1, q))


@pytest.mark.parametrize("q", QS)
def test_base_field_axioms(q):
    check_axioms(GF(q))


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_extension_axioms(q):
    check_axioms(field_pair(q)[1])


@pytest.mark.parametrize("q", QS)
def test_gamma_primitive(q):
    E = field_pair(q)[1]
    assert E.order(E.gamma) == q * q - 1
    assert E.is_primitive(E.gamma)


def test_gf4_known_product():
    F = GF(4)
    assert F.mul(2, 2) == 3
    assert field_ops(4, "mul", 2, 2) == 3


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        GF(5).inv(0)


def test_prime_field_is_modular():
    F = GF(7)
    for a, b in itertools.product(range(7), repeat=2):
        assert F.mul(a, b) == a * b % 7
        assert F.add(a, b) == (a + b) % 7


def test_not_prime_power():
    with pytest.raises(ValueError):
        GF(6)


def y_order(F, a, b) -> int:
    """Multiplicative order of y in F[y]/(y^2 + a y + b), by repeated y-multiplication."""
    u, v, k = 1, 0, 0
    while True:
        u, v = F.neg(F.mul(v, b)), F.sub(u, F.mul(v, a))
        k += 1
        if (u, v) == (1, 0) or k > F.size ** 2:
            return k


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7])
def test_extension_choice_is_lexicographic(q):
    F, E = field_pair(q)
    first = next((a, b) for a, b in itertools.product(range(q), range(1, q)) if y_order(F, a, b) == q * q - 1)
    assert E.poly == first


def test_field_parameters():
    s = FieldSpec.for_q(9)
    assert (s.p, s.e, s.gamma) == (3, 2, 9)


def random_matrix(F, rng, r, c):
    return rng.integers(0, F.size, size=(r, c))


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_linear_algebra(q):
    F = GF(q)
    rng = np.random.default_rng(q)
    for _ in range(20):
        M = random_matrix(F, rng, 4, 7)
        N = F.nullspace(M)
        assert N.shape[0] == 7 - F.rank(M)
        if N.size:
            assert not F.matmul(M, N.T).any()
        R, piv = F.rref(M)
        assert F.rank(R) == F.rank(M) == len(piv)
        x = rng.integers(0, q, size=7)
        rhs = F.matmul(M, x[:, None]).ravel()
        sol = F.solve_affine(M, rhs)
        assert sol is not None
        part, basis = sol
        assert np.array_equal(F.matmul(M, part[:, None]).ravel(), rhs)


def test_span_size():
    F = GF(3)
    rows = np.array([[1, 0, 2], [0, 1, 1]])
    span = F.span(rows)
    assert len(span) == 9
    assert len({tuple(r) for r in span.tolist()}) == 9
