"""Linear codes over ``F_q`` and the generalized BCH construction.

The BCH code of length ``K = q^2 - 1`` consists of ``c = (c_1..c_K)`` with
``c(X) = sum_j c_j X^j`` vanishing at ``1, gamma, ..., gamma^(D-2)`` for a
primitive ``gamma`` of ``F_{q^2}``.  Each condition at ``gamma^i`` (``i>0``)
splits into two ``F_q`` rows (the two coordinates of ``gamma^(ij)``), the
condition at ``1`` into one.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gf import GF, field_pair
from .graphs import BudgetExceeded

DEFAULT_CODEWORD_BUDGET = 10 ** 7


class DimensionError(ValueError):
    pass


@dataclass
class LinearCode:
    """``generator`` (dim x K) and ``parity`` ((K-dim) x K) over ``GF(q)``."""

    q: int
    K: int
    generator: np.ndarray
    parity: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.generator = np.asarray(self.generator, dtype=np.int64).reshape(-1, self.K)
        self.parity = np.asarray(self.parity, dtype=np.int64).reshape(-1, self.K)
        F = self.field
        if F.rank(self.generator) != self.generator.shape[0]:
            raise ValueError("generator rows are dependent")
        if F.rank(self.parity) != self.parity.shape[0]:
            raise ValueError("parity-check rows are dependent")
        if self.generator.shape[0] + self.parity.shape[0] != self.K:
            raise ValueError("dim(G) + dim(H) != K")
        if self.generator.size and self.parity.size and F.matmul(self.generator, self.parity.T).any():
            raise ValueError("G H^T != 0")

    @property
    def field(self) -> GF:
        return field_pair(self.q)[0]

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def size(self) -> int:
        return self.q ** self.dim

    def syndrome(self, words: np.ndarray) -> np.ndarray:
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        if not self.parity.size:
            return np.zeros((words.shape[0], 0), dtype=np.int64)
        return self.field.matmul(words, self.parity.T)

    def contains(self, words: np.ndarray) -> np.ndarray:
        """Membership by parity check, one flag per row."""
        return ~self.syndrome(words).any(axis=1)

    def codewords(self, budget: int = DEFAULT_CODEWORD_BUDGET) -> np.ndarray:
        if self.size > budget:
            raise BudgetExceeded("codewords", self.size, budget)
        if not self.dim:
            return np.zeros((1, self.K), dtype=np.int64)
        return self.field.span(self.generator)

    def encode(self, message: np.ndarray) -> np.ndarray:
        return self.field.matmul(np.atleast_2d(message), self.generator)

    def same_space(self, other: "LinearCode") -> bool:
        if (self.q, self.K, self.dim) != (other.q, other.K, other.dim):
            return False
        if not self.dim:
            return True
        return bool(np.array_equal(self.field.rref(self.generator)[0], self.field.rref(other.generator)[0]))

    def to_dict(self) -> dict:
        F = self.field
        return {
            "q": self.q,
            "modulus": None if F.modulus is None else list(F.modulus),
            "K": self.K,
            "dim": self.dim,
            "generator": self.generator.reshape(-1).tolist(),
            "parity": self.parity.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearCode":
        q, K = int(d["q"]), int(d["K"])
        mod = GF(q).modulus
        if (None if mod is None else list(mod)) != (None if d.get("modulus") is None else list(d["modulus"])):
            raise ValueError("code file uses a different field modulus")
        G = np.array(d["generator"], dtype=np.int64).reshape(int(d["dim"]), K) if d["dim"] else np.zeros((0, K), np.int64)
        H = np.array(d["parity"], dtype=np.int64).reshape(K - int(d["dim"]), K) if K - d["dim"] else np.zeros((0, K), np.int64)
        return cls(q=q, K=K, generator=G, parity=H)


def code_from_generator(q: int, G: np.ndarray, label: str = "") -> LinearCode:
    F = field_pair(q)[0]
    G = np.asarray(G, dtype=np.int64)
    K = G.shape[1]
    R, _ = F.rref(G) if G.size else (np.zeros((0, K), np.int64), [])
    return LinearCode(q=q, K=K, generator=R, parity=F.nullspace(R, cols=K), label=label)


def code_from_parity(q: int, H: np.ndarray, label: str = "") -> LinearCode:
    F = field_pair(q)[0]
    H = np.asarray(H, dtype=np.int64)
    K = H.shape[1]
    R, _ = F.rref(H) if H.size else (np.zeros((0, K), np.int64), [])
    return LinearCode(q=q, K=K, generator=F.nullspace(R, cols=K), parity=R, label=label)


def repetition_code(q: int, K: int) -> LinearCode:
    return code_from_generator(q, np.ones((1, K), dtype=np.int64), label=f"rep{K}")


def full_space(q: int, K: int) -> LinearCode:
    return code_from_generator(q, np.eye(K, dtype=np.int64), label="full")


def dual_code(c: LinearCode) -> LinearCode:
    return LinearCode(q=c.q, K=c.K, generator=c.parity.copy(), parity=c.generator.copy(),
                      label=f"dual({c.label})" if c.label else "dual")


def bch_constraint_rows(q: int, D: int) -> np.ndarray:
    """``F_q`` rows of ``c(gamma^i) = 0`` for ``i = 0 .. D-2``."""
    F, E = field_pair(q)
    K = q * q - 1
    rows = []
    for i in range(D - 1):
        pts = [E.pow(E.gamma, i * j) for j in range(1, K + 1)]
        coords = np.array([E.unpack(z) for z in pts], dtype=np.int64)
        rows.append(coords[:, 0])
        if i:
            rows.append(coords[:, 1])
    return np.array(rows, dtype=np.int64)


def build_generalized_bch(q: int, D: int) -> LinearCode:
    """Length ``q^2-1`` code of distance ``>= D`` and dimension ``K-2D+3``.

    When the constraint rows are dependent the kernel is larger than
    ``K-2D+3``; trailing rows of its reduced generator are dropped.
    """
    if D < 3:
        raise ValueError("distance target must be at least 3")
    K = q * q - 1
    target = K - 2 * D + 3
    if target < 1:
        raise DimensionError(f"dimension K-2D+3 = {K}-{2 * D}+3 = {target} is not positive (q={q}, D={D})")
    F = field_pair(q)[0]
    H_raw = bch_constraint_rows(q, D)
    G = F.rref(F.nullspace(H_raw))[0]
    if G.shape[0] < target:
        raise AssertionError("constraint rows exceed 2D-3")
    return code_from_generator(q, G[:target], label=f"BCH(q={q},D={D})")


# -- minimum distance --------------------------------------------------------

def min_distance_bruteforce(c: LinearCode, budget: int = DEFAULT_CODEWORD_BUDGET) -> int:
    """Minimum weight over all nonzero codewords; ``K+1`` for the zero code.

    Codewords are enumerated as ``span(head) + span(tail)`` in blocks so that
    memory stays at ``O(sqrt(|C|) K)``.
    """
    if not c.dim:
        return c.K + 1
    if c.size > budget:
        raise BudgetExceeded("codewords", c.size, budget)
    F = c.field
    split = c.dim // 2
    head = F.span(c.generator[:split]) if split else np.zeros((1, c.K), np.int64)
    tail = F.span(c.generator[split:])
    best = c.K + 1
    tail_w = np.count_nonzero(tail, axis=1)
    best = min(best, int(tail_w[1:].min())) if len(tail) > 1 else best
    for h in head[1:]:
        w = np.count_nonzero(F.add_t[h[None, :], tail], axis=1)
        best = min(best, int(w.min()))
        if best == 1:
            break
    return best


def min_distance_columns(c: LinearCode, limit: int | None = None) -> int:
    """Smallest number of linearly dependent columns of the parity-check
    matrix, which equals the minimum distance.  Searches up to ``limit``
    columns (default ``K``); returns ``K+1`` for the zero code."""
    if not c.dim:
        return c.K + 1
    F = c.field
    H = c.parity
    top = c.K if limit is None else limit
    for w in range(1, top + 1):
        if w > H.shape[0]:
            return w
        for cols in itertools.combinations(range(c.K), w):
            if F.rank(H[:, cols]) < w:
                return w
    raise BudgetExceeded("column subsets", c.K, top)


def vandermonde_rank_check(q: int, D: int, trials: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Random sets of ``D-1`` positions whose ``(gamma^(ij))`` block over
    ``F_{q^2}`` is singular (expected: none)."""
    _, E = field_pair(q)
    K = q * q - 1
    bad = []
    for _ in range(trials):
        pos = tuple(sorted(int(v) for v in rng.choice(np.arange(1, K + 1), size=D - 1, replace=False)))
        M = np.array([[E.pow(E.gamma, i * j) for j in pos] for i in range(D - 1)], dtype=np.int64)
        if E.rank(M) != D - 1:
            bad.append(pos)
    return bad


def write_code(c: LinearCode, path) -> None:
    Path(path).write_text(json.dumps(c.to_dict()))


def read_code(path) -> LinearCode:
    return LinearCode.from_dict(json.loads(Path(path).read_text()))
