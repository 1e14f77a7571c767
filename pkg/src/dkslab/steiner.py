"""Exact minimum Steiner tree sizes (vertex counts) by terminal-subset DP.

``dp[D][v]`` is the edge count of a smallest tree spanning ``D | {v}``; the
vector ``dp[S] + 1`` therefore gives ``st(S | {i})`` for every vertex ``i`` at
once, which is what the extension counts and the Sherali-Adams size profile
consume.

On graphs where every pair of vertices is at distance at most two, the
shortest-path relaxation step collapses to a single neighbourhood gather
(values never exceed ``min + 2``).  That shortcut is only taken after the
distance-two property has been checked on the graph; otherwise a full
bucketed BFS is used.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graphs import Graph

INF = np.iinfo(np.int32).max // 4
MAX_TERMINALS = 8


class DisconnectedTerminals(ValueError):
    """Terminals lie in more than one connected component."""

    def __init__(self, partition: list[tuple[int, ...]]):
        super().__init__(f"terminals are disconnected: {partition}")
        self.partition = partition


@dataclass(frozen=True)
class SteinerResult:
    size: int
    witness: tuple[tuple[int, int], ...]


def diameter_at_most_two(g: Graph, block: int = 512) -> bool:
    """True iff every pair of distinct vertices is adjacent or shares a neighbour."""
    n = g.n
    if n <= 1:
        return True
    words = (n + 63) // 64
    packed = np.zeros((n, words), dtype=np.uint64)
    if g.m:
        for col_u, col_v in ((0, 1), (1, 0)):
            u, v = g.edges[:, col_u], g.edges[:, col_v]
            np.bitwise_or.at(packed, (u, v // 64), np.left_shift(np.uint64(1), (v % 64).astype(np.uint64)))
    full = np.full(words, np.uint64(0xFFFFFFFFFFFFFFFF))
    if n % 64:
        full[-1] = np.uint64((1 << (n % 64)) - 1)
    for u in range(n):
        nb = g.neighbors(u)
        if not len(nb):
            return False
        reach = np.bitwise_or.reduce(packed[nb], axis=0) | packed[u]
        reach[u // 64] |= np.uint64(1 << (u % 64))
        if not np.array_equal(reach, full):
            return False
    return True


class SteinerEngine:
    """Per-graph Steiner solver with memoised distance rows and st values.

    The caches are plain dicts; share an engine across threads only under a
    single-writer discipline.
    """

    def __init__(self, g: Graph, two_hop: bool | None = None):
        self.g = g
        self._two_hop = two_hop
        self._dist: dict[int, np.ndarray] = {}
        self._st: dict[tuple[int, ...], int] = {}
        self._components: np.ndarray | None = None

    @property
    def two_hop(self) -> bool:
        if self._two_hop is None:
            self._two_hop = diameter_at_most_two(self.g)
        return self._two_hop

    # -- shortest-path machinery ---------------------------------------------
    def _relax(self, f: np.ndarray) -> np.ndarray:
        """``r[v] = min_u f[u] + dist(u, v)``."""
        r = f.copy()
        finite = r < INF
        if not finite.any():
            return r
        if self.two_hop:
            lo = int(r.min())
            np.minimum(r, lo + 2, out=r)
            near = self.g.neighbors_of_set(np.flatnonzero(f == lo))
            r[near & (r > lo + 1)] = lo + 1
            return r
        c = int(r[finite].min())
        top = int(r[finite].max())
        while c <= top:
            frontier = np.flatnonzero(r == c)
            if len(frontier):
                hit = self.g.neighbors_of_set(frontier) & (r > c + 1)
                if hit.any():
                    r[hit] = c + 1
                    top = max(top, c + 1)
            c += 1
        return r

    def distances_from(self, t: int) -> np.ndarray:
        row = self._dist.get(t)
        if row is None:
            f = np.full(self.g.n, INF, dtype=np.int64)
            f[t] = 0
            row = self._relax(f)
            row.setflags(write=False)
            self._dist[t] = row
        return row

    def _tables(self, terms: Sequence[int]):
        """DP vectors over all non-empty subsets of ``terms`` (bitmask keyed)."""
        dp: dict[int, np.ndarray] = {}
        base: dict[int, np.ndarray] = {}
        s = len(terms)
        for i, t in enumerate(terms):
            dp[1 << i] = self.distances_from(t)
        for size in range(2, s + 1):
            for combo in itertools.combinations(range(s), size):
                mask = sum(1 << i for i in combo)
                low = mask & -mask
                best = None
                sub = (mask - 1) & mask
                while sub:
                    if sub & low:
                        cand = dp[sub] + dp[mask ^ sub]
                        best = cand if best is None else np.minimum(best, cand)
                    sub = (sub - 1) & mask
                np.minimum(best, INF, out=best)
                base[mask] = best
                dp[mask] = self._relax(best)
        return dp, base

    def _component_labels(self) -> np.ndarray:
        if self._components is None:
            _, self._components = connected_components(self.g.sparse, directed=False)
        return self._components

    def _partition(self, terms: Iterable[int]) -> list[tuple[int, ...]]:
        labels = self._component_labels()
        groups: dict[int, list[int]] = {}
        for t in terms:
            groups.setdefault(int(labels[t]), []).append(int(t))
        return sorted(tuple(sorted(v)) for v in groups.values())

    # -- public API -----------------------------------------------------------
    def size(self, terminals: Iterable[int]) -> int:
        terms = _normalise(terminals, self.g.n)
        hit = self._st.get(terms)
        if hit is not None:
            return hit
        if len(terms) <= 1:
            val = len(terms)
        else:
            dp, _ = self._tables(terms[1:])
            edges = int(dp[(1 << (len(terms) - 1)) - 1][terms[0]])
            if edges >= INF:
                raise DisconnectedTerminals(self._partition(terms))
            val = edges + 1
        self._st[terms] = val
        return val

    def size_or_none(self, terminals: Iterable[int]) -> int | None:
        try:
            return self.size(terminals)
        except DisconnectedTerminals:
            return None

    def extension_sizes(self, terminals: Iterable[int]) -> np.ndarray:
        """``st(S | {i})`` for every vertex ``i``; ``INF`` where unreachable."""
        terms = _normalise(terminals, self.g.n)
        if not terms:
            return np.ones(self.g.n, dtype=np.int64)
        dp, _ = self._tables(terms)
        vec = dp[(1 << len(terms)) - 1]
        return np.where(vec >= INF, INF, vec + 1)

    def solve(self, terminals: Iterable[int]) -> SteinerResult:
        terms = _normalise(terminals, self.g.n)
        if len(terms) <= 1:
            return SteinerResult(size=len(terms), witness=())
        root, rest = terms[0], terms[1:]
        dp, base = self._tables(rest)
        full = (1 << len(rest)) - 1
        if dp[full][root] >= INF:
            raise DisconnectedTerminals(self._partition(terms))
        for i in range(len(rest)):
            f = np.full(self.g.n, INF, dtype=np.int64)
            f[rest[i]] = 0
            base[1 << i] = f
        edges: set[tuple[int, int]] = set()
        self._trace(dp, base, full, root, edges)
        witness = tuple(sorted(edges))
        result = SteinerResult(size=int(dp[full][root]) + 1, witness=witness)
        check_witness(self.g, terms, result)
        self._st[terms] = result.size
        return result

    def _trace(self, dp, base, mask, v, edges) -> None:
        val = dp[mask][v]
        if val == 0 and base[mask][v] == 0:
            return
        if base[mask][v] == val:
            low = mask & -mask
            for sub in _submasks_ascending(mask):
                if sub & low and sub != mask and dp[sub][v] + dp[mask ^ sub][v] == val:
                    self._trace(dp, base, sub, v, edges)
                    self._trace(dp, base, mask ^ sub, v, edges)
                    return
            raise AssertionError("no split reproduces the DP value")
        for u in self.g.neighbors(v):
            if dp[mask][u] == val - 1:
                edges.add((min(int(u), int(v)), max(int(u), int(v))))
                self._trace(dp, base, mask, int(u), edges)
                return
        raise AssertionError("no predecessor reproduces the DP value")

    def count_extensions(self, terminals: Iterable[int]) -> tuple[int, int]:
        same, plus_one, _ = self.extension_buckets(terminals)
        return same, plus_one

    def extension_buckets(self, terminals: Iterable[int]) -> tuple[int, int, int]:
        """Counts of ``i`` outside ``S`` with ``st(S|i) - st(S)`` equal to 0, 1, >= 2."""
        terms = _normalise(terminals, self.g.n)
        base_size = self.size(terms)
        ext = self.extension_sizes(terms)
        outside = np.ones(self.g.n, dtype=bool)
        outside[list(terms)] = False
        delta = ext[outside] - base_size
        return int((delta == 0).sum()), int((delta == 1).sum()), int((delta >= 2).sum())


def _submasks_ascending(mask: int) -> list[int]:
    subs = []
    sub = mask
    while sub:
        subs.append(sub)
        sub = (sub - 1) & mask
    return sorted(subs)


def _normalise(terminals: Iterable[int], n: int) -> tuple[int, ...]:
    terms = tuple(sorted({int(t) for t in terminals}))
    if terms and (terms[0] < 0 or terms[-1] >= n):
        raise ValueError("terminal out of range")
    if len(terms) > MAX_TERMINALS:
        raise ValueError(f"at most {MAX_TERMINALS} terminals supported, got {len(terms)}")
    return terms


def check_witness(g: Graph, terminals: Sequence[int], result: SteinerResult) -> None:
    """Raise if the witness is not a tree in ``g`` spanning the terminals with
    ``result.size`` vertices."""
    verts = {v for e in result.witness for v in e} | set(int(t) for t in terminals)
    if len(verts) != result.size:
        raise AssertionError(f"witness has {len(verts)} vertices, size says {result.size}")
    if len(result.witness) != len(verts) - 1:
        raise AssertionError("witness edge count is not |V| - 1")
    for u, v in result.witness:
        if not g.has_edge(u, v):
            raise AssertionError(f"witness edge ({u}, {v}) not in graph")
    if verts:
        adj: dict[int, list[int]] = {v: [] for v in verts}
        for u, v in result.witness:
            adj[u].append(v)
            adj[v].append(u)
        start = next(iter(verts))
        seen = {start}
        todo = [start]
        while todo:
            x = todo.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        if seen != verts:
            raise AssertionError("witness is not connected")


def steiner_size(g: Graph, terminals: Iterable[int]) -> SteinerResult:
    return SteinerEngine(g).solve(terminals)


def count_extensions(g: Graph, terminals: Iterable[int]) -> tuple[int, int]:
    return SteinerEngine(g).count_extensions(terminals)
