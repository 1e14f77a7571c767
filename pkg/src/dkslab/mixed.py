"""First-level PSD witness for the mixed SA+ hierarchy.

``Z`` has diagonal ``x_i = 1/(sqrt(n) L)``, edge entries
``x_ij = 1/(n^(3/4) L^2)`` and non-edge entries ``1/(n L^2)``, so

    Z = J/(n L^2) + (1/(sqrt(n) L) - 1/(n L^2)) I + (1/(n^(3/4) L^2) - 1/(n L^2)) A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Graph
from .steiner import INF
from .surd import FourthRootField, Surd


class SymmetricMatrix:
    """Dense symmetric float64 matrix kept as its lower triangle."""

    def __init__(self, full: np.ndarray):
        full = np.asarray(full, dtype=np.float64)
        if full.ndim != 2 or full.shape[0] != full.shape[1]:
            raise ValueError("matrix must be square")
        if not np.isfinite(full).all():
            raise ValueError("matrix has non-finite entries")
        self.dim = full.shape[0]
        self.lower = np.tril(full)

    def to_dense(self) -> np.ndarray:
        return self.lower + np.tril(self.lower, -1).T

    def __getitem__(self, ij):
        i, j = ij
        return self.lower[max(i, j), min(i, j)]


def min_eigenvalue(m: SymmetricMatrix | np.ndarray) -> float:
    if not isinstance(m, SymmetricMatrix):
        m = SymmetricMatrix(m)
    if m.dim < 1:
        raise ValueError("empty matrix")
    return float(np.linalg.eigvalsh(m.lower, UPLO="L")[0])


def z_entries(n: int, L: int) -> dict[str, Surd]:
    """Exact diagonal, edge and non-edge values of ``Z``."""
    f = FourthRootField(n)
    return {
        "diag": f.monomial(2, Fraction(1, L)),
        "edge": f.monomial(3, Fraction(1, L * L)),
        "non_edge": f.monomial(4, Fraction(1, L * L)),
    }


def build_Z(g: Graph, L: int) -> SymmetricMatrix:
    n = g.n
    z = np.full((n, n), 1.0 / (n * L * L))
    if g.m:
        u, v = g.edges[:, 0], g.edges[:, 1]
        z[u, v] = z[v, u] = n ** -0.75 / L ** 2
    np.fill_diagonal(z, n ** -0.5 / L)
    return SymmetricMatrix(z)


def adjacency_min_eigenvalue(g: Graph) -> float:
    if g.n == 0:
        return 0.0
    return min_eigenvalue(g.dense(np.float64))


@dataclass
class PsdVerdict:
    n: int
    L: int
    tol: float
    lambda_min_Z: float
    lambda_min_A: float
    bound_A: float
    decomposition_bound: float

    @property
    def pass_Z(self) -> bool:
        return self.lambda_min_Z >= -self.tol

    @property
    def pass_A(self) -> bool:
        return self.lambda_min_A >= self.bound_A

    @property
    def passed(self) -> bool:
        return self.pass_Z and self.pass_A

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "tol": self.tol,
            "lambda_min_Z": self.lambda_min_Z,
            "lambda_min_A": self.lambda_min_A,
            "bound_A": self.bound_A,
            "decomposition_bound": self.decomposition_bound,
            "pass_Z": self.pass_Z,
            "pass_A": self.pass_A,
            "method": "float-tol",
        }


def spectral_bound(n: int) -> float:
    """``-4 n^(1/4) sqrt(ln n)``."""
    return -4.0 * n ** 0.25 * math.sqrt(math.log(n)) if n > 1 else 0.0


def decomposition_floor(n: int, L: int, lam_a: float) -> float:
    """Lower bound on ``lambda_min(Z)`` from ``J >= 0`` (valid when ``lam_a <= 0``)."""
    j = 1.0 / (n * L * L)
    return (n ** -0.5 / L - j) + (n ** -0.75 / L ** 2 - j) * lam_a


def level_for_psd(n: int) -> int:
    """Smallest ``L`` with ``L >= 4 sqrt(ln n)``, where the identity term
    dominates the worst adjacency eigenvalue allowed by the spectral bound."""
    return max(1, math.ceil(4 * math.sqrt(math.log(n))))


def check_mixed_psd(g: Graph, L: int, tol: float = 1e-8) -> PsdVerdict:
    z = build_Z(g, L)
    lam_z = min_eigenvalue(z)
    lam_a = adjacency_min_eigenvalue(g)
    return PsdVerdict(n=g.n, L=L, tol=tol, lambda_min_Z=lam_z, lambda_min_A=lam_a,
                      bound_A=spectral_bound(g.n), decomposition_bound=decomposition_floor(g.n, L, lam_a))


def compare_with_sa(g: Graph, L: int, assignment) -> list[tuple[int, int]]:
    """Pairs where ``Z`` differs from the SA table, compared exactly.

    Each distinct ``(st, adjacent)`` class is compared once as field
    elements; unreachable pairs (``x = 0``) never match ``Z``.
    """
    if assignment.L != L or assignment.n != g.n:
        raise ValueError("assignment does not match the graph or level")
    ent = z_entries(g.n, L)
    bad = [(i, i) for i in range(g.n) if assignment.value((i,)) != ent["diag"]]
    adj = g.dense(bool)
    verdict: dict[tuple[int, bool], bool] = {}
    for i in range(g.n):
        st = assignment.engine.extension_sizes((i,))
        for j in range(i + 1, g.n):
            key = (int(st[j]), bool(adj[i, j]))
            ok = verdict.get(key)
            if ok is None:
                want = ent["edge"] if key[1] else ent["non_edge"]
                ok = key[0] < INF and assignment.term(key[0], 2) == want
                verdict[key] = ok
            if not ok:
                bad.append((i, j))
    return bad
