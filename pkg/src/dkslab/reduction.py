"""CSP to Densest k-subgraph: the constraint/variable bipartite graph with
replicated right side, plus the soundness-side search and bookkeeping.

Vertex ids in ``G'``:

* left ``(i, c)`` -> ``i * |C| + c``, where ``c`` is the rank of the codeword
  ``alpha + b_i`` in the lexicographic enumeration of ``C``;
* right ``(j, value, copy)`` -> ``m |C| + copy * n q + j q + value``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

from ._random import stream
from .csp import CspInstance
from .graphs import BudgetExceeded


@dataclass
class BipartiteInstance:
    inst: CspInstance
    beta: int
    patterns: np.ndarray  # (m, |C|, K) satisfying local assignments on T_i
    biadjacency: np.ndarray  # (m |C|, n q) 0/1, one copy of the right side

    @property
    def n(self) -> int:
        return self.inst.n

    @property
    def m(self) -> int:
        return self.inst.m

    @property
    def q(self) -> int:
        return self.inst.q

    @property
    def K(self) -> int:
        return self.inst.K

    @property
    def code_size(self) -> int:
        return self.patterns.shape[1]

    @property
    def n_left(self) -> int:
        return self.m * self.code_size

    @property
    def n_right(self) -> int:
        return self.beta * self.n * self.q

    @property
    def N(self) -> int:
        return self.n_left + self.n_right

    @property
    def k(self) -> int:
        return 2 * self.m

    # -- labels ---------------------------------------------------------------
    def left_id(self, i: int, c: int) -> int:
        return i * self.code_size + c

    def left_label(self, v: int) -> tuple[int, tuple[int, ...]]:
        i, c = divmod(v, self.code_size)
        return i, tuple(int(x) for x in self.patterns[i, c])

    def right_id(self, j: int, value: int, copy: int = 0) -> int:
        return self.n_left + copy * self.n * self.q + j * self.q + value

    def right_label(self, v: int) -> tuple[int, int, int]:
        copy, rest = divmod(v - self.n_left, self.n * self.q)
        j, value = divmod(rest, self.q)
        return j, value, copy

    def base_right(self, v: int) -> int:
        """Column of the unreplicated biadjacency for right vertex ``v``."""
        return (v - self.n_left) % (self.n * self.q)

    def is_left(self, v: int) -> bool:
        return v < self.n_left

    # -- graph views -------------------------------------------------------------
    def full_biadjacency(self) -> np.ndarray:
        return np.tile(self.biadjacency, (1, self.beta))

    def edges(self) -> np.ndarray:
        """Edge list ``(left id, right id)`` of ``G'``, sorted."""
        li, ri = np.nonzero(self.full_biadjacency())
        return np.stack([li, ri + self.n_left], axis=1)

    def neighbors(self, v: int) -> np.ndarray:
        if self.is_left(v):
            return np.flatnonzero(self.full_biadjacency()[v]) + self.n_left
        return np.flatnonzero(self.biadjacency[:, self.base_right(v)])

    def edge_count(self, left, right) -> int:
        left = np.asarray(list(left), dtype=np.int64)
        right = np.asarray(list(right), dtype=np.int64)
        if not len(left) or not len(right):
            return 0
        return int(self.full_biadjacency()[np.ix_(left, right - self.n_left)].sum())

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "q": self.q, "K": self.K, "beta": self.beta,
            "k": self.k, "N": self.N,
            "left_labels": [[i, list(alpha)] for i, alpha in map(self.left_label, range(self.n_left))],
            "right_labels": [list(self.right_label(v)) for v in range(self.n_left, self.N)],
            "edges": self.edges().tolist(),
            "instance": self.inst.to_dict(),
        }


def build_reduction(inst: CspInstance, beta: int) -> BipartiteInstance:
    if int(beta) != beta or beta < 1:
        raise ValueError(f"beta must be a positive integer, got {beta}")
    beta = int(beta)
    if inst.m != beta * inst.n:
        raise ValueError(f"the reduction needs m = beta * n so that k = 2m covers both sides; "
                         f"got m={inst.m}, beta={beta}, n={inst.n}")
    F = inst.code.field
    words = inst.code.codewords()
    q, n, K = inst.q, inst.n, inst.K
    patterns = F.sub_t[words[None, :, :], inst.shifts[:, None, :]] if inst.m else np.zeros((0, len(words), K), np.int64)
    B = np.zeros((inst.m * len(words), n * q), dtype=np.int8)
    if inst.m:
        rows = np.arange(inst.m * len(words))
        cols = (inst.tuples[:, None, :] * q + patterns).reshape(-1, K)
        B[rows[:, None], cols] = 1
    return BipartiteInstance(inst=inst, beta=beta, patterns=patterns, biadjacency=B)


# -- poorly satisfied constraints -------------------------------------------------------

def _right_mask(bi_or_inst, R) -> np.ndarray:
    inst = bi_or_inst.inst if isinstance(bi_or_inst, BipartiteInstance) else bi_or_inst
    mask = np.zeros((inst.n, inst.q), dtype=bool)
    for j, val in R:
        mask[j, val] = True
    return mask


def agreement(inst: CspInstance, i: int, alpha: np.ndarray, R) -> int:
    mask = _right_mask(inst, R)
    return int(mask[inst.tuples[i], alpha].sum())


def classify_poorly_satisfied(inst: CspInstance, R) -> np.ndarray:
    """Per constraint: ``max_alpha agr(alpha, R) <= 8K/q`` over satisfying ``alpha``.

    ``R`` is an iterable of ``(variable, value)`` labels of the unreplicated
    right side.
    """
    mask = _right_mask(inst, R)
    F = inst.code.field
    words = inst.code.codewords()
    thresh = Fraction(8 * inst.K, inst.q)
    flags = np.zeros(inst.m, dtype=bool)
    for i in range(inst.m):
        alphas = F.sub_t[words, inst.shifts[i][None, :]]
        agr = mask[inst.tuples[i][None, :], alphas].sum(axis=1)
        flags[i] = int(agr.max()) <= thresh
    return flags


def classify_poorly_satisfied_bruteforce(inst: CspInstance, R) -> list[bool]:
    """Same flags by scanning all ``q^K`` local patterns and filtering by
    parity check (no use of the generator)."""
    R = {(int(j), int(v)) for j, v in R}
    thresh = Fraction(8 * inst.K, inst.q)
    patterns = np.array(list(itertools.product(range(inst.q), repeat=inst.K)), dtype=np.int64)
    out = []
    for i in range(inst.m):
        T = [int(v) for v in inst.tuples[i]]
        ok = inst.code.contains(inst.code.field.add_t[patterns, inst.shifts[i][None, :]])
        hits = np.array([[(T[p], v) in R for v in range(inst.q)] for p in range(inst.K)])
        agr = hits[np.arange(inst.K)[None, :], patterns[ok]].sum(axis=1)
        out.append(int(agr.max()) <= thresh)
    return out


# -- balanced densest subgraph ---------------------------------------------------------------

def greedy_right(bi: BipartiteInstance, left, size: int) -> tuple[np.ndarray, int]:
    """Top ``size`` right vertices of ``G'`` by degree into ``left``
    (ties to the smaller id) and the resulting edge count."""
    deg = bi.full_biadjacency()[np.asarray(list(left), dtype=np.int64)].sum(axis=0)
    order = np.lexsort((np.arange(len(deg)), -deg))[:size]
    return np.sort(order) + bi.n_left, int(deg[order].sum())


def exhaustive_right(bi: BipartiteInstance, left, size: int, budget: int = 10 ** 6) -> int:
    deg = bi.full_biadjacency()[np.asarray(list(left), dtype=np.int64)].sum(axis=0)
    total = comb(len(deg), size)
    if total > budget:
        raise BudgetExceeded("right subsets", total, budget)
    return max((int(deg[list(c)].sum()) for c in itertools.combinations(range(len(deg)), size)), default=0)


@dataclass
class BalancedResult:
    left: tuple[int, ...]
    right: tuple[int, ...]
    edges: int
    method: str

    def to_dict(self) -> dict:
        return {"left": list(self.left), "right": list(self.right), "edges": self.edges, "method": self.method}


def _top_sum(deg: np.ndarray, b: int) -> np.ndarray:
    """Row-wise sum of the ``b`` largest entries."""
    if b >= deg.shape[-1]:
        return deg.sum(axis=-1)
    return np.partition(deg, deg.shape[-1] - b, axis=-1)[..., -b:].sum(axis=-1)


def densest_balanced_subgraph(bi: BipartiteInstance, mode: str = "search", left_size: int | None = None,
                              right_size: int | None = None, budget: int = 10 ** 6, samples: int = 10 ** 5,
                              restarts: int = 10, seed: int = 0) -> BalancedResult:
    """Best ``left_size`` x ``right_size`` subgraph (defaults ``k`` x ``k``).

    For a fixed left set the greedy right side is optimal, so only left sets
    are searched: ``exhaustive`` enumerates them (within ``budget``),
    ``search`` scores ``samples`` random left sets and then runs swap local
    search from the best ``restarts`` of them.
    """
    a = bi.k if left_size is None else left_size
    b = bi.k if right_size is None else right_size
    a, b = min(a, bi.n_left), min(b, bi.n_right)
    A = bi.full_biadjacency().astype(np.int64)
    if a == 0 or b == 0:
        return BalancedResult((), (), 0, mode)
    if mode == "exhaustive":
        total = comb(bi.n_left, a)
        if total > budget:
            raise BudgetExceeded("left subsets", total, budget)
        best, arg = -1, None
        for L in itertools.combinations(range(bi.n_left), a):
            val = int(_top_sum(A[list(L)].sum(axis=0), b))
            if val > best:
                best, arg = val, L
        right, val = greedy_right(bi, arg, b)
        return BalancedResult(tuple(arg), tuple(int(v) for v in right), val, "exhaustive")
    if mode != "search":
        raise ValueError(f"unknown mode {mode!r}")
    rng = stream(seed, 0xB5)
    pool = []
    for start in range(0, samples, 4096):
        cnt = min(4096, samples - start)
        sets = np.argsort(rng.random((cnt, bi.n_left)), axis=1)[:, :a]
        vals = _top_sum(A[sets].sum(axis=1), b)
        pool.extend(zip(vals.tolist(), map(tuple, np.sort(sets, axis=1).tolist())))
    pool.sort(key=lambda t: (-t[0], t[1]))
    best_val, best_set = -1, None
    for _, L in pool[:restarts]:
        L, val = _swap_search(A, list(L), b)
        if val > best_val or (val == best_val and tuple(L) < best_set):
            best_val, best_set = val, tuple(L)
    right, val = greedy_right(bi, best_set, b)
    return BalancedResult(best_set, tuple(int(v) for v in right), val, f"local-search(sampled({samples}))")


def _swap_search(A: np.ndarray, L: list[int], b: int) -> tuple[list[int], int]:
    inside = np.zeros(A.shape[0], dtype=bool)
    inside[L] = True
    deg = A[L].sum(axis=0)
    val = int(_top_sum(deg, b))
    while True:
        outs = np.flatnonzero(~inside)
        best = (val, None, None)
        for u in np.flatnonzero(inside):
            cand = deg[None, :] - A[u][None, :] + A[outs]
            vals = _top_sum(cand, b)
            j = int(np.argmax(vals))
            if vals[j] > best[0]:
                best = (int(vals[j]), int(u), int(outs[j]))
        if best[1] is None:
            return sorted(np.flatnonzero(inside).tolist()), val
        val, u, w = best
        inside[u], inside[w] = False, True
        deg = deg - A[u] + A[w]


def planted_witness(bi: BipartiteInstance, hidden: np.ndarray) -> BalancedResult:
    """Left vertices ``(C_i, a*|T_i)`` and every copy of ``(x_j, a*_j)``."""
    left = []
    for i in range(bi.m):
        alpha = hidden[bi.inst.tuples[i]]
        hit = np.flatnonzero((bi.patterns[i] == alpha[None, :]).all(axis=1))
        if len(hit) != 1:
            raise ValueError(f"hidden assignment does not satisfy constraint {i}")
        left.append(bi.left_id(i, int(hit[0])))
    right = [bi.right_id(j, int(hidden[j]), c) for c in range(bi.beta) for j in range(bi.n)]
    return BalancedResult(tuple(left), tuple(sorted(right)), bi.edge_count(left, right), "exact")


# -- report ------------------------------------------------------------------------------

def soundness_report(bi: BipartiteInstance, best_edges: int, method: str = "local-search") -> dict:
    completeness = bi.beta * bi.m * bi.K
    bound = Fraction(17 * completeness, bi.q)
    hypotheses = bi.q > 1000 and Fraction(bi.K) > Fraction(bi.q * bi.q, 2)
    if hypotheses:
        status = "pass" if best_edges <= bound else "fail"
    else:
        status = "informational"
    return {
        "n": bi.n, "m": bi.m, "q": bi.q, "K": bi.K, "beta": bi.beta, "N": bi.N, "k": bi.k,
        "completeness": completeness,
        "best_edges": best_edges,
        "best_method": method,
        "ratio": None if best_edges == 0 else completeness / best_edges,
        "bound_17": float(bound),
        "bound_17_exact": str(bound),
        "q_over_17": bi.q / 17,
        "status": status,
    }


def write_bipartite(bi: BipartiteInstance, path) -> None:
    Path(path).write_text(json.dumps(bi.to_dict()))


def read_bipartite(path) -> BipartiteInstance:
    d = json.loads(Path(path).read_text())
    bi = build_reduction(CspInstance.from_dict(d["instance"]), d["beta"])
    if bi.edges().tolist() != d["edges"]:
        raise ValueError("bipartite file edges do not match its embedded instance")
    return bi
