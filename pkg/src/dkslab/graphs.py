"""Random graphs at the gap construction's parameter point, plus the audits
the construction depends on (degree window, common-neighbour window) and two
densest-k-subgraph solvers used as integral baselines."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ._random import stream

DEFAULT_ENUM_BUDGET = 50_000_000
_DRAW_CHUNK = 1 << 24


class BudgetExceeded(RuntimeError):
    """An exhaustive routine would enumerate more objects than allowed."""

    def __init__(self, what: str, needed: int, budget: int):
        super().__init__(f"{what}: {needed} candidates exceeds enumeration budget {budget}")
        self.needed = needed
        self.budget = budget


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    Edges are kept as a lexicographically sorted ``(m, 2)`` array with
    ``u < v``; adjacency is CSR with sorted neighbour lists.
    """

    def __init__(self, n: int, edges: Iterable[Sequence[int]] | np.ndarray = ()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise ValueError("self-loops are not allowed")
            arr = np.sort(arr, axis=1)
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            if np.any(np.all(arr[1:] == arr[:-1], axis=1)):
                raise ValueError("duplicate edge")
        self.n = int(n)
        self.edges = arr
        self.edges.setflags(write=False)
        both = np.concatenate([arr, arr[:, ::-1]]) if len(arr) else arr
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.zeros(0, dtype=np.int64)
        both = both[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        if len(both):
            np.add.at(self.indptr, both[:, 0] + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = both[:, 1].copy() if len(both) else np.zeros(0, dtype=np.int64)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    # -- access -----------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(u) for u in range(self.n)]

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float32)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def dense(self, dtype=bool) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        if self.m:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    @cached_property
    def bitsets(self) -> list[int]:
        """Neighbourhoods as Python-int bitmasks (small graphs only)."""
        out = []
        for u in range(self.n):
            mask = 0
            for v in self.neighbors(u):
                mask |= 1 << int(v)
            out.append(mask)
        return out

    def induced_edge_count(self, vertices: Iterable[int]) -> int:
        vs = np.fromiter((int(v) for v in vertices), dtype=np.int64)
        if len(vs) < 2:
            return 0
        inside = np.zeros(self.n, dtype=bool)
        inside[vs] = True
        return int(sum(inside[self.neighbors(v)].sum() for v in vs) // 2)

    def neighbors_of_set(self, vertices: np.ndarray) -> np.ndarray:
        """Boolean mask of vertices adjacent to at least one of ``vertices``."""
        mask = np.zeros(self.n, dtype=bool)
        if len(vertices):
            starts, ends = self.indptr[vertices], self.indptr[np.asarray(vertices) + 1]
            total = int((ends - starts).sum())
            if total:
                mask[np.concatenate([self.indices[s:e] for s, e in zip(starts, ends)])] = True
        return mask

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # -- named graphs -----------------------------------------------------
    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, list(itertools.combinations(range(n), 2)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        return cls(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    @classmethod
    def perfect_matching(cls, n: int) -> "Graph":
        if n % 2:
            raise ValueError("perfect matching needs an even vertex count")
        return cls(n, [(2 * i, 2 * i + 1) for i in range(n // 2)])


# -- file format ------------------------------------------------------------

def write_graph(g: Graph, path: str | Path) -> None:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path: str | Path) -> Graph:
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'n m' header")
    n, m = int(tokens[0]), int(tokens[1])
    body = np.array(tokens[2:], dtype=np.int64)
    if len(body) != 2 * m:
        raise ValueError(f"{path}: header declares {m} edges, found {len(body) // 2}")
    edges = body.reshape(-1, 2)
    if np.any(edges[:, 0] >= edges[:, 1]):
        raise ValueError(f"{path}: edges must be written as 'u v' with u < v")
    return Graph(n, edges)


# -- generation -------------------------------------------------------------

def default_p(n: int) -> float:
    """Default edge probability ln(n)/sqrt(n)."""
    return math.log(n) / math.sqrt(n)


def sqrt_log_p(n: int) -> float:
    """Sparser variant sqrt(ln n)/sqrt(n)."""
    return math.sqrt(math.log(n)) / math.sqrt(n)


@dataclass(frozen=True)
class GnpParams:
    n: int
    p: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (0.0 <= self.p <= 1.0) or math.isnan(self.p):
            raise ValueError(f"edge probability {self.p} outside [0, 1]")

    @property
    def expected_degree(self) -> float:
        return (self.n - 1) * self.p


def gen_gnp(params: GnpParams) -> Graph:
    """Sample G(n, p).

    Pairs are visited in lexicographic order ``(0,1), (0,2), ..., (n-2,n-1)``
    with one uniform variate each from a single seeded stream; the chunking
    below only bounds memory and does not change the draw sequence.
    """
    n, p = params.n, params.p
    rng = stream(params.seed)
    chunks: list[np.ndarray] = []
    u = 0
    while u < n - 1:
        rows = [u]
        count = n - 1 - u
        while rows[-1] + 1 < n - 1 and count + (n - 2 - rows[-1]) <= _DRAW_CHUNK:
            rows.append(rows[-1] + 1)
            count += n - 1 - rows[-1]
        draws = rng.random(count)
        hit = np.flatnonzero(draws < p)
        if len(hit):
            lengths = n - 1 - np.arange(rows[0], rows[-1] + 1)
            offsets = np.concatenate([[0], np.cumsum(lengths)])
            r = np.searchsorted(offsets, hit, side="right") - 1
            src = rows[0] + r
            dst = src + 1 + (hit - offsets[r])
            chunks.append(np.stack([src, dst], axis=1))
        u = rows[-1] + 1
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    return Graph(n, edges)


# -- audits -----------------------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    min_degree: int
    max_degree: int
    min_common: int
    max_common: int
    pass_degree: bool
    pass_common_lower: bool
    pass_common_upper: bool
    degree_window: tuple[float, float] = field(default=(0.0, 0.0))
    common_upper: float = 0.0

    @property
    def passed(self) -> bool:
        return self.pass_degree and self.pass_common_lower and self.pass_common_upper

    def to_dict(self) -> dict:
        return {
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "min_common": self.min_common,
            "max_common": self.max_common,
            "pass_degree": self.pass_degree,
            "pass_common_lower": self.pass_common_lower,
            "pass_common_upper": self.pass_common_upper,
        }


def common_neighbor_extremes(g: Graph, block: int = 1024) -> tuple[int, int]:
    """Min and max of ``|N(u) & N(v)|`` over unordered pairs ``u != v``."""
    if g.n < 2:
        return 0, 0
    a = g.dense(np.float32)
    lo, hi = None, None
    for start in range(0, g.n, block):
        stop = min(g.n, start + block)
        c = a[start:stop] @ a
        rows = np.arange(start, stop)
        c[rows - start, rows] = np.nan
        blo, bhi = np.nanmin(c), np.nanmax(c)
        lo = blo if lo is None else min(lo, blo)
        hi = bhi if hi is None else max(hi, bhi)
    return int(lo), int(hi)


def audit_paper_properties(g: Graph) -> PropertyReport:
    n = g.n
    ln = math.log(n) if n > 1 else 0.0
    deg_lo, deg_hi = math.sqrt(n) * ln / 2, 2 * math.sqrt(n) * ln
    common_hi = 2 * ln * ln
    degs = g.degrees
    min_deg = int(degs.min()) if n else 0
    max_deg = int(degs.max()) if n else 0
    min_c, max_c = common_neighbor_extremes(g)
    return PropertyReport(
        min_degree=min_deg,
        max_degree=max_deg,
        min_common=min_c,
        max_common=max_c,
        pass_degree=deg_lo <= min_deg and max_deg <= deg_hi,
        pass_common_lower=min_c >= 1,
        pass_common_upper=max_c <= common_hi,
        degree_window=(deg_lo, deg_hi),
        common_upper=common_hi,
    )


def has_common_neighbor_property(g: Graph) -> bool:
    """Every pair of distinct vertices is adjacent or shares a neighbour."""
    if g.n < 2:
        return True
    a = g.dense(np.float32)
    for start in range(0, g.n, 1024):
        stop = min(g.n, start + 1024)
        reach = (a[start:stop] @ a) + a[start:stop]
        rows = np.arange(start, stop)
        reach[rows - start, rows] = 1
        if not np.all(reach > 0):
            return False
    return True


# -- densest k-subgraph -----------------------------------------------------

def density(edge_count: int, k: int) -> float:
    """Average degree of a k-vertex subgraph."""
    return 2.0 * edge_count / k if k else 0.0


def densest_k_bruteforce(g: Graph, k: int, budget: int = DEFAULT_ENUM_BUDGET) -> tuple[tuple[int, ...], int]:
    """Exhaustive densest k-subgraph; first maximum in lexicographic order."""
    if not 0 <= k <= g.n:
        raise ValueError(f"k={k} outside [0, {g.n}]")
    total = math.comb(g.n, k)
    if total > budget:
        raise BudgetExceeded(f"C({g.n}, {k}) subsets", total, budget)
    adj = g.bitsets
    n = g.n
    best = [-1, ()]
    chosen: list[int] = []

    def rec(start: int, mask: int, edges: int) -> None:
        if len(chosen) == k:
            if edges > best[0]:
                best[0], best[1] = edges, tuple(chosen)
            return
        for v in range(start, n - (k - len(chosen)) + 1):
            chosen.append(v)
            rec(v + 1, mask | (1 << v), edges + (adj[v] & mask).bit_count())
            chosen.pop()

    rec(0, 0, 0)
    return best[1], best[0]


def _local_search_once(a: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    n = a.shape[0]
    inside = np.zeros(n, dtype=bool)
    inside[rng.choice(n, size=k, replace=False)] = True
    deg_in = a[:, inside].sum(axis=1).astype(np.int64)
    while True:
        s = np.flatnonzero(inside)
        out = np.flatnonzero(~inside)
        if not len(out):
            break
        gain = deg_in[out][None, :] - deg_in[s][:, None] - a[np.ix_(s, out)]
        flat = int(np.argmax(gain))
        if gain.flat[flat] <= 0:
            break
        u, v = s[flat // len(out)], out[flat % len(out)]
        inside[u], inside[v] = False, True
        deg_in -= a[u]
        deg_in += a[v]
    s = np.flatnonzero(inside)
    return s, int(deg_in[s].sum() // 2)


def densest_k_localsearch(g: Graph, k: int, restarts: int = 10, seed: int = 0) -> tuple[tuple[int, ...], int]:
    """Best of ``restarts`` steepest-ascent swap searches from random k-sets.

    Restart ``r`` draws from the substream ``(seed, r)``; ties across
    restarts keep the earliest restart.
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} outside [1, {g.n}]")
    a = g.dense(np.int32)
    best_set, best_edges = None, -1
    for r in range(max(1, restarts)):
        s, e = _local_search_once(a, k, stream(seed, r))
        if e > best_edges:
            best_set, best_edges = s, e
    return tuple(int(v) for v in best_set), best_edges


@dataclass
class DensitySample:
    k: int
    samples: int
    max_density: float
    witness: tuple[int, ...]
    bound: float

    @property
    def passed(self) -> bool:
        return self.max_density <= self.bound


def sampled_density_audit(g: Graph, k: int, samples: int, seed: int,
                          extra: Sequence[Sequence[int]] = ()) -> DensitySample:
    """Max average degree over random k-subsets plus any supplied sets,
    compared with the 5 ln n ceiling for sqrt(n)-subgraphs."""
    a = g.dense(np.float32)
    rng = stream(seed, 0xD5)
    best, witness = -1.0, ()
    batch = 256
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        sets = np.argsort(rng.random((b, g.n)), axis=1)[:, :k]
        for row in sets:
            e = float(a[np.ix_(row, row)].sum() / 2)
            d = density(int(e), k)
            if d > best:
                best, witness = d, tuple(sorted(int(v) for v in row))
        done += b
    for s in extra:
        d = density(g.induced_edge_count(s), len(s))
        if d > best:
            best, witness = d, tuple(sorted(int(v) for v in s))
    return DensitySample(k=k, samples=samples, max_density=best, witness=witness, bound=5 * math.log(g.n))
