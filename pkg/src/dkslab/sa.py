"""The explicit Sherali-Adams value table ``x_S = n^(-(st(S)+1)/4) L^(-|S|)``
and exact checkers for the SA_r constraint families (size, density,
inclusion-exclusion) plus the dominate bounds used to drop ``T``.

All sums are evaluated exactly in Q(n^(1/4)) (see :mod:`dkslab.surd`).  A
sum of table values is first accumulated as integer counts per
``(st, |S|)`` exponent pair and only then turned into a field element, which
keeps neighbourhood-sized sums cheap.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._random import stream
from .graphs import Graph, audit_paper_properties
from .steiner import INF, SteinerEngine
from .surd import FourthRootField, Surd

FAMILIES = ("size", "density", "inclusion-exclusion", "dominate")


class MissingValue(KeyError):
    """A constraint referenced a subset larger than the table's level."""


class SAAssignment:
    """Lazily materialised value table for a graph at level ``L``.

    ``x_{}`` is fixed to 1 and disconnected subsets get 0; everything else
    follows the Steiner-tree formula.  Values are memoised through the
    Steiner engine's cache, keyed by the sorted subset.
    """

    def __init__(self, g: Graph, L: int, engine: SteinerEngine | None = None, graph_ref: str = ""):
        if L < 1:
            raise ValueError("level L must be at least 1")
        self.g = g
        self.n = g.n
        self.L = int(L)
        self.graph_ref = graph_ref
        self.field = FourthRootField(g.n)
        self.engine = engine or SteinerEngine(g)
        self.warnings: list[str] = []
        ln = math.log(g.n) if g.n > 1 else 0.0
        regime = ln / (10 * math.log(ln)) if ln > 1 else 0.0
        if self.L > regime:
            self.warnings.append(f"L={self.L} exceeds ln n/(10 ln ln n) = {regime:.3f}")

    def check_properties(self) -> bool:
        report = audit_paper_properties(self.g)
        if not report.passed:
            msg = "graph fails the random-graph property audit; feasibility is not promised"
            self.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return report.passed

    def _key(self, S: Iterable[int]) -> tuple[int, ...]:
        key = tuple(sorted({int(v) for v in S}))
        if len(key) > self.L:
            raise MissingValue(f"subset of size {len(key)} beyond level L={self.L}: {key}")
        return key

    def exponent(self, S: Iterable[int]) -> tuple[int, int] | None:
        """``(st(S), |S|)`` or ``None`` when the value is zero."""
        key = self._key(S)
        if not key:
            return (-1, 0)
        st = self.engine.size_or_none(key)
        return None if st is None else (st, len(key))

    def value(self, S: Iterable[int]) -> Surd:
        key = self._key(S)
        if not key:
            return self.field.one()
        st = self.engine.size_or_none(key)
        if st is None:
            return self.field.zero()
        return self.field.monomial(st + 1, Fraction(1, self.L ** len(key)))

    def term(self, st: int, size: int) -> Surd:
        if size == 0:
            return self.field.one()
        return self.field.monomial(st + 1, Fraction(1, self.L ** size))

    def extension_exponents(self, S: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """For every vertex ``i``: ``st(S | i)`` and ``|S | i|``."""
        key = self._key(S)
        if len(key) + 1 > self.L:
            raise MissingValue(f"extensions of a size-{len(key)} set exceed level L={self.L}")
        st = self.engine.extension_sizes(key)
        sizes = np.full(self.n, len(key) + 1, dtype=np.int64)
        if key:
            sizes[list(key)] = len(key)
        return st, sizes

    def pair_value(self, i: int, j: int) -> Surd:
        return self.value((i, j))


# -- exact accumulation ------------------------------------------------------

class Accumulator:
    """Integer combination of table terms, keyed by ``(st, size)``."""

    def __init__(self, a: SAAssignment):
        self.a = a
        self.counts: Counter = Counter()

    def add_set(self, S: Iterable[int], sign: int = 1) -> None:
        e = self.a.exponent(S)
        if e is not None:
            self.counts[e] += sign

    def add_arrays(self, st: np.ndarray, sizes: np.ndarray, sign: int = 1) -> None:
        ok = st < INF
        if not ok.any():
            return
        pairs, cnt = np.unique(np.stack([st[ok], sizes[ok]], axis=1), axis=0, return_counts=True)
        for (s, z), c in zip(pairs, cnt):
            self.counts[(int(s), int(z))] += sign * int(c)

    def value(self) -> Surd:
        f = self.a.field
        total = f.zero()
        terms = []
        for (st, size), c in self.counts.items():
            if not c:
                continue
            if size == 0:
                terms.append((0, Fraction(c)))
            else:
                terms.append((st + 1, Fraction(c, self.a.L ** size)))
        return total + f.from_terms(terms)


def alternating_sum(a: SAAssignment, S: Sequence[int], T: Sequence[int]) -> Surd:
    """``sum_{J subset T} (-1)^|J| x_{S | J}``."""
    acc = Accumulator(a)
    for r in range(len(T) + 1):
        for J in itertools.combinations(T, r):
            acc.add_set(tuple(S) + J, -1 if r % 2 else 1)
    return acc.value()


# -- verdicts -----------------------------------------------------------------

@dataclass
class Violation:
    S: tuple[int, ...]
    T: tuple[int, ...]
    lhs: Surd
    rhs: Surd
    i: int | None = None

    def to_dict(self) -> dict:
        d = {"S": list(self.S), "T": list(self.T), "lhs": str(self.lhs), "rhs": str(self.rhs),
             "lhs_float": float(self.lhs), "rhs_float": float(self.rhs)}
        if self.i is not None:
            d["i"] = self.i
        return d


@dataclass
class SAVerdict:
    family: str
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    worst_slack: Surd | None = None
    worst_at: tuple | None = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, slack: Surd, where: tuple, violation: Violation | None) -> None:
        self.checked += 1
        if self.worst_slack is None or slack < self.worst_slack:
            self.worst_slack, self.worst_at = slack, where
        if violation is not None:
            self.violations.append(violation)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "checked": self.checked,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations[:50]],
            "violation_count": len(self.violations),
            "worst_slack": None if self.worst_slack is None else str(self.worst_slack),
            "worst_slack_float": None if self.worst_slack is None else float(self.worst_slack),
            "worst_at": None if self.worst_at is None else [list(x) if isinstance(x, tuple) else x for x in self.worst_at],
            "method": "exact",
        }


# -- sampling of (S, T) ---------------------------------------------------------

@dataclass
class Sampler:
    """Source of disjoint ``(S, T)`` pairs with ``|S| + |T| <= r``.

    ``mode='exhaustive'`` walks every pair (small graphs only);
    ``mode='random'`` draws ``samples`` pairs from the ``(seed, 0x5A)``
    stream, half of them grown along edges so that connected subsets are
    represented.
    """

    mode: str = "random"
    samples: int = 1000
    seed: int = 0
    max_s: int | None = None
    max_t: int | None = None
    i_scope: str = "S"

    def pairs(self, g: Graph, r: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        shapes = [(s, t) for s in range(r + 1) for t in range(r + 1 - s)
                  if (self.max_s is None or s <= self.max_s) and (self.max_t is None or t <= self.max_t)
                  and s + t <= g.n]
        if self.mode == "exhaustive":
            for s, t in shapes:
                for U in itertools.combinations(range(g.n), s + t):
                    for S in itertools.combinations(U, s):
                        yield S, tuple(v for v in U if v not in S)
            return
        if self.mode != "random":
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        rng = stream(self.seed, 0x5A)
        for k in range(self.samples):
            s, t = shapes[int(rng.integers(len(shapes)))]
            U = _draw_subset(g, s + t, rng, local=bool(k % 2))
            perm = rng.permutation(len(U))
            S = tuple(sorted(int(U[p]) for p in perm[:s]))
            T = tuple(sorted(int(U[p]) for p in perm[s:]))
            yield S, T


def _draw_subset(g: Graph, size: int, rng: np.random.Generator, local: bool) -> list[int]:
    if size == 0:
        return []
    if not local:
        return [int(v) for v in rng.choice(g.n, size=size, replace=False)]
    chosen = [int(rng.integers(g.n))]
    while len(chosen) < size:
        frontier = np.setdiff1d(np.concatenate([g.neighbors(v) for v in chosen]), chosen)
        if len(frontier):
            chosen.append(int(frontier[int(rng.integers(len(frontier)))]))
        else:
            rest = np.setdiff1d(np.arange(g.n), chosen)
            chosen.append(int(rest[int(rng.integers(len(rest)))]))
    return chosen


# -- construction and checks ------------------------------------------------------

def build_sa_solution(g: Graph, L: int, check: bool = True, graph_ref: str = "") -> SAAssignment:
    a = SAAssignment(g, L, graph_ref=graph_ref)
    if check:
        a.check_properties()
    return a


def default_density(a: SAAssignment) -> Surd:
    """``d = n^(1/4) / L``."""
    return a.field.monomial(-1, Fraction(1, a.L))


def check_dominate(a: SAAssignment, S: Sequence[int], T: Sequence[int]) -> tuple[bool, bool, Surd]:
    """Upper bound ``sum <= x_S`` and lower bound ``sum >= x_S / 2``."""
    if set(S) & set(T):
        raise ValueError(f"S and T overlap: {sorted(set(S) & set(T))}")
    if len(S) + len(T) > a.L:
        raise MissingValue(f"|S|+|T| = {len(S) + len(T)} exceeds L={a.L}")
    total = alternating_sum(a, S, T)
    xs = a.value(S)
    return total <= xs, total * 2 >= xs, total


def _subsets(T: Sequence[int]):
    for r in range(len(T) + 1):
        for J in itertools.combinations(T, r):
            yield J, (-1 if r % 2 else 1)


def verify_family(a: SAAssignment, g: Graph, family: str, r: int, d: Surd | Fraction | None = None,
                  k: int | Fraction | None = None, sampler: Sampler | None = None) -> SAVerdict:
    """Check one constraint family on every sampled ``(S, T)`` exactly.

    ``d`` defaults to ``n^(1/4)/L``; ``k`` to ``sqrt(n)`` (an exact surd when
    ``n`` is not a square).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if r > a.L:
        raise ValueError(f"r={r} exceeds the table level L={a.L}")
    sampler = sampler or Sampler()
    f = a.field
    if d is None:
        d = default_density(a)
    elif not isinstance(d, Surd):
        d = f.monomial(0, Fraction(d))
    if k is None:
        k = f.monomial(-2)
    elif not isinstance(k, Surd):
        k = f.monomial(0, Fraction(k))
    verdict = SAVerdict(family=family)
    for S, T in sampler.pairs(g, r):
        if family == "inclusion-exclusion":
            v = alternating_sum(a, S, T)
            lo_ok, hi_ok = v.sign() >= 0, v <= 1
            slack = v if v < 1 - v else 1 - v
            viol = None if (lo_ok and hi_ok) else Violation(S, T, v, f.zero() if not lo_ok else f.one())
            verdict.record(slack, (S, T), viol)
        elif family == "dominate":
            upper, lower, v = check_dominate(a, S, T)
            xs = a.value(S)
            slack = min(xs - v, v - xs * Fraction(1, 2))
            viol = None if (upper and lower) else Violation(S, T, v, xs)
            verdict.record(slack, (S, T), viol)
        elif family == "size":
            lhs_acc = Accumulator(a)
            for J, sign in _subsets(T):
                st, sizes = a.extension_exponents(S + J)
                lhs_acc.add_arrays(st, sizes, sign)
            lhs = lhs_acc.value()
            rhs = k * alternating_sum(a, S, T)
            viol = None if lhs <= rhs else Violation(S, T, lhs, rhs)
            verdict.record(rhs - lhs, (S, T), viol)
        else:
            scope = S if sampler.i_scope == "S" else range(g.n)
            for i in scope:
                lhs_acc, rhs_acc = Accumulator(a), Accumulator(a)
                nb = g.neighbors(i)
                for J, sign in _subsets(T):
                    base = tuple(sorted(set(S + J) | {int(i)}))
                    st, sizes = a.extension_exponents(base)
                    lhs_acc.add_arrays(st[nb], sizes[nb], sign)
                    rhs_acc.add_set(base, sign)
                lhs, rhs = lhs_acc.value(), d * rhs_acc.value()
                viol = None if lhs >= rhs else Violation(S, T, lhs, rhs, int(i))
                verdict.record(lhs - rhs, (S, T, int(i)), viol)
    return verdict


# -- size-constraint profile -----------------------------------------------------

BUCKETS = ("inside", "same", "plus_one", "plus_two_or_more")


@dataclass
class ProfileRow:
    S: tuple[int, ...]
    st: int
    ratio: Surd
    contributions: dict[str, Surd]
    counts: dict[str, int]

    @property
    def dominant_bucket(self) -> str:
        return max(BUCKETS, key=lambda b: float(self.contributions[b]))

    def to_dict(self) -> dict:
        return {
            "S": list(self.S),
            "st": self.st,
            "ratio": float(self.ratio),
            "ratio_exact": str(self.ratio),
            "contributions": {b: float(v) for b, v in self.contributions.items()},
            "counts": self.counts,
            "dominant_bucket": self.dominant_bucket,
        }


@dataclass
class SizeProfile:
    n: int
    L: int
    rows: list[ProfileRow]
    bound: Surd
    skipped: int = 0

    @property
    def max_row(self) -> ProfileRow | None:
        return max(self.rows, key=lambda r: r.ratio) if self.rows else None

    @property
    def passed(self) -> bool:
        top = self.max_row
        return top is None or top.ratio <= self.bound

    def localize(self) -> dict:
        """For the worst row: which Steiner bucket carries the excess."""
        top = self.max_row
        if top is None:
            return {}
        out = {"S": list(top.S), "ratio": float(top.ratio), "bound": float(self.bound),
               "dominant_bucket": top.dominant_bucket}
        excess = top.ratio - self.bound
        out["violating_buckets"] = [b for b in BUCKETS if excess.sign() > 0 and top.contributions[b] >= excess]
        return out

    def to_dict(self) -> dict:
        top = self.max_row
        return {
            "n": self.n,
            "L": self.L,
            "bound": float(self.bound),
            "samples": len(self.rows),
            "skipped_disconnected": self.skipped,
            "max_ratio": None if top is None else float(top.ratio),
            "passed": self.passed,
            "localization": self.localize() if not self.passed else None,
            "rows": [r.to_dict() for r in self.rows],
            "method": "exact",
        }


def size_constraint_profile(a: SAAssignment, g: Graph, sampler: Sampler) -> SizeProfile:
    """Ratio ``sum_i x_{S|i} / x_S`` per sampled ``S`` split by Steiner bucket."""
    f = a.field
    rows = []
    skipped = 0
    seen = set()
    r = sampler.max_s if sampler.max_s is not None else a.L - 1
    for S, _ in sampler.pairs(g, r):
        if S in seen:
            continue
        seen.add(S)
        e = a.exponent(S)
        if e is None:
            skipped += 1
            continue
        xs = a.value(S)
        st_s = e[0] if S else 0
        st, sizes = a.extension_exponents(S)
        inside = np.zeros(g.n, dtype=bool)
        inside[list(S)] = True
        delta = np.where(st < INF, st - st_s, INF)
        masks = {
            "inside": inside,
            "same": ~inside & (delta == 0),
            "plus_one": ~inside & (delta == 1),
            "plus_two_or_more": ~inside & (delta >= 2) & (st < INF),
        }
        contributions, counts = {}, {}
        for b, m in masks.items():
            acc = Accumulator(a)
            acc.add_arrays(st[m], sizes[m])
            val = acc.value()
            contributions[b] = _divide(val, xs)
            counts[b] = int(m.sum())
        ratio = f.zero()
        for v in contributions.values():
            ratio = ratio + v
        rows.append(ProfileRow(S=S, st=st_s, ratio=ratio, contributions=contributions, counts=counts))
    return SizeProfile(n=g.n, L=a.L, rows=rows, bound=f.monomial(-2), skipped=skipped)


def _divide(val: Surd, xs: Surd) -> Surd:
    """``val / xs`` where ``xs`` is a single monomial ``c * w^p``."""
    nz = [(i, c) for i, c in enumerate(xs.coeffs) if c]
    if len(nz) != 1:
        raise ValueError("divisor must be a monomial")
    power, c = nz[0]
    return val.times_w(-power) * (1 / c)


# -- table files -----------------------------------------------------------------

def _key_text(S: Sequence[int]) -> str:
    return ",".join(str(v) for v in S)


def write_table(a: SAAssignment, path: str | Path, max_size: int | None = None) -> int:
    """Materialise every subset up to ``max_size`` (default ``L``)."""
    top = a.L if max_size is None else min(max_size, a.L)
    values = {}
    for size in range(top + 1):
        for S in itertools.combinations(range(a.n), size):
            values[_key_text(S)] = str(a.value(S))
    doc = {"n": a.n, "L": a.L, "graph": a.graph_ref, "w": "n^(-1/4)",
           "complete_to_size": top, "values": values}
    Path(path).write_text(json.dumps(doc))
    return len(values)


class TableAssignment(SAAssignment):
    """Assignment served from a table file; subsets absent from it raise."""

    def __init__(self, g: Graph, doc: dict):
        super().__init__(g, int(doc["L"]), graph_ref=doc.get("graph", ""))
        if int(doc["n"]) != g.n:
            raise ValueError("table vertex count does not match the graph")
        self._values = {k: self.field.parse(v) for k, v in doc["values"].items()}

    def value(self, S):
        key = self._key(S)
        try:
            return self._values[_key_text(key)]
        except KeyError:
            raise MissingValue(f"table has no value for {key}") from None


def load_table(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
