"""Exact inner-product oracles for Lasserre vector families.

A CSP label ``(S, alpha)`` and a DkS label (a set of vertices of ``G'``) both
reduce to a *literal set*: a partial assignment stored as a length-``n``
array with ``-1`` for unassigned variables.  For the planted construction

    <V_(S1,a1), V_(S2,a2)> = #{a in A : a agrees with a1 and a2} / |A|,

which depends only on the merged literal set (0 on a conflict).  The count is
``q^(d - rank N_U)`` when the restricted affine system is solvable and 0
otherwise, where ``A = a0 + rowspace(N)`` and ``U`` is the set of assigned
variables.  Oracles return *counts* (integers) together with the common
denominator ``|A|`` so that every identity can be checked in integers.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path

import numpy as np

from ._random import stream
from .csp import CspInstance
from .gf import TableField
from .reduction import BipartiteInstance

UNSET = -1
PSD_TOL = 1e-8


class EmptySolutionSpace(ValueError):
    pass


class RoundBoundError(ValueError):
    pass


class NotServed(KeyError):
    """The oracle has no value for a requested label or set."""


def merge(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union of literal arrays (broadcasting) and a conflict flag per row."""
    conflict = ((a >= 0) & (b >= 0) & (a != b)).any(axis=-1)
    return np.maximum(a, b), conflict


# -- affine solution space ---------------------------------------------------

class SolutionSpace:
    """``A = particular + rowspace(basis)`` inside ``F_q^n``."""

    def __init__(self, F: TableField, particular: np.ndarray, basis: np.ndarray):
        self.field = F
        self.particular = np.asarray(particular, dtype=np.int64)
        self.basis = np.asarray(basis, dtype=np.int64).reshape(-1, len(self.particular))
        self.n = len(self.particular)
        self.q = F.size
        self.dim = self.basis.shape[0]
        self._info: dict = {}
        self._dtype = np.int64 if self.q ** self.dim < 2 ** 62 else object

    @property
    def size(self) -> int:
        return self.q ** self.dim

    @property
    def rank(self) -> int:
        """Rank of the instance's linear system."""
        return self.n - self.dim

    @classmethod
    def from_instance(cls, inst: CspInstance) -> "SolutionSpace":
        """Solve ``H (x|T_i + b_i) = 0`` for all constraints by elimination."""
        F = inst.code.field
        H = inst.code.parity
        r = H.shape[0]
        M = np.zeros((inst.m * r, inst.n), dtype=np.int64)
        rhs = np.zeros(inst.m * r, dtype=np.int64)
        for i in range(inst.m):
            M[i * r:(i + 1) * r, inst.tuples[i]] = H
            rhs[i * r:(i + 1) * r] = F.neg_t[F.matmul(H, inst.shifts[i][:, None])[:, 0]]
        if not M.size:
            return cls(F, np.zeros(inst.n, dtype=np.int64), np.eye(inst.n, dtype=np.int64))
        sol = F.solve_affine(M, rhs)
        if sol is None:
            raise EmptySolutionSpace("the instance has no satisfying assignment")
        x, kernel = sol
        return cls(F, x, kernel)

    def contains(self, a: np.ndarray) -> bool:
        y = self.field.sub_t[np.asarray(a, dtype=np.int64), self.particular]
        if not self.dim:
            return not y.any()
        return self.field.rank(np.vstack([self.basis, y])) == self.dim

    def enumerate(self, budget: int = 10 ** 6) -> np.ndarray:
        """Every element of ``A`` (test oracle; materialises ``|A|`` rows)."""
        if self.size > budget:
            raise ValueError(f"|A| = {self.size} exceeds budget {budget}")
        if not self.dim:
            return self.particular[None, :].copy()
        return self.field.add_t[self.field.span(self.basis), self.particular[None, :]]

    def _var_info(self, key, U: np.ndarray):
        hit = self._info.get(key)
        if hit is None:
            F = self.field
            P = self.basis[:, U]
            rank = F.rank(P) if P.size else 0
            W = F.nullspace(P, cols=len(U)) if len(U) else np.zeros((0, 0), dtype=np.int64)
            hit = self._info[key] = (rank, W)
        return hit

    def counts(self, lits: np.ndarray) -> np.ndarray:
        """Number of ``a in A`` extending each literal row."""
        lits = np.atleast_2d(np.asarray(lits, dtype=np.int64))
        B = lits.shape[0]
        out = np.zeros(B, dtype=self._dtype)
        if not B:
            return out
        assigned = lits >= 0
        if self.n <= 62:
            keys = assigned.astype(np.int64) @ (np.int64(1) << np.arange(self.n, dtype=np.int64))
            uniq, inverse = np.unique(keys, return_inverse=True)
            key_of = [int(k) for k in uniq]
        else:
            uniq, inverse = np.unique(assigned, axis=0, return_inverse=True)
            key_of = [row.tobytes() for row in uniq]
        inverse = inverse.reshape(-1)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(key_of) + 1))
        F = self.field
        for g, key in enumerate(key_of):
            rows = order[bounds[g]:bounds[g + 1]]
            U = np.flatnonzero(assigned[rows[0]])
            rank, W = self._var_info(key, U)
            if W.size:
                y = F.sub_t[lits[np.ix_(rows, U)], self.particular[U][None, :]]
                ok = ~F.matmul(y, W.T).any(axis=1)
            else:
                ok = np.ones(len(rows), dtype=bool)
            out[rows[ok]] = self.q ** (self.dim - rank)
        return out


# -- CSP oracle ----------------------------------------------------------------

def csp_label(S, alpha) -> tuple[tuple[int, ...], tuple[int, ...]]:
    pairs = sorted(zip((int(v) for v in S), (int(a) for a in alpha)))
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


EMPTY = ((), ())


class PlantedCspOracle:
    """``V_(S, alpha)`` = scaled indicator of ``{a in A : a|_S = alpha}``."""

    kind = "csp"

    def __init__(self, space: SolutionSpace, r: int | None = None):
        if space.size == 0:
            raise EmptySolutionSpace("empty solution space")
        self.space = space
        self.n = space.n
        self.q = space.q
        self.r = space.n if r is None else int(r)
        if self.r < 1:
            raise ValueError("round bound must be at least 1")

    @property
    def den(self) -> int:
        return self.space.size

    def lits(self, labels) -> np.ndarray:
        out = np.full((len(labels), self.n), UNSET, dtype=np.int64)
        for row, (S, alpha) in enumerate(labels):
            if len(S) > self.r:
                raise RoundBoundError(f"label on {len(S)} variables exceeds round bound r={self.r}")
            if len(set(S)) != len(S):
                raise ValueError(f"label repeats a variable: {S}")
            out[row, list(S)] = alpha
        return out

    def block(self, A, B) -> np.ndarray:
        la, lb = self.lits(A), self.lits(B)
        out = np.zeros((len(A), len(B)), dtype=self.space._dtype)
        step = max(1, 200_000 // max(len(B), 1))
        for s in range(0, len(A), step):
            u, bad = merge(la[s:s + step, None, :], lb[None, :, :])
            c = self.space.counts(u.reshape(-1, self.n)).reshape(u.shape[:2])
            c[bad] = 0
            out[s:s + step] = c
        return out

    def inner(self, a, b) -> Fraction:
        return Fraction(int(self.block([a], [b])[0, 0]), self.den)

    def moment_lits(self, lits: np.ndarray, conflict: np.ndarray | None = None) -> np.ndarray:
        c = self.space.counts(lits)
        if conflict is not None:
            c[conflict] = 0
        return c


def build_planted_csp_oracle(inst: CspInstance, space: SolutionSpace | None = None, r: int | None = None) -> PlantedCspOracle:
    return PlantedCspOracle(space or SolutionSpace.from_instance(inst), r)


class ExplicitCspOracle(PlantedCspOracle):
    """Same inner products by scanning an explicit list of solutions."""

    def __init__(self, space: SolutionSpace, r: int | None = None, budget: int = 10 ** 6):
        super().__init__(space, r)
        self.points = space.enumerate(budget)

    def block(self, A, B) -> np.ndarray:
        la, lb = self.lits(A), self.lits(B)
        agree_a = ((la[:, None, :] < 0) | (la[:, None, :] == self.points[None, :, :])).all(axis=2)
        agree_b = ((lb[:, None, :] < 0) | (lb[:, None, :] == self.points[None, :, :])).all(axis=2)
        return agree_a.astype(np.int64) @ agree_b.astype(np.int64).T


# -- lifted DkS oracle ---------------------------------------------------------------

class LiftedDksOracle:
    """``U_S = V_(S', alpha)`` where ``(S', alpha)`` collects the literals of
    the vertices in ``S``; zero when they disagree.  Copies share vectors."""

    kind = "dks"

    def __init__(self, base: PlantedCspOracle, bi: BipartiteInstance, R: int):
        need = min(R * bi.K, bi.n)
        if need > base.r:
            raise RoundBoundError(f"R={R} rounds need {need} variables, oracle serves r={base.r}")
        self.base, self.bi, self.R = base, bi, int(R)
        self.n = base.n
        lits = np.full((bi.N, bi.n), UNSET, dtype=np.int64)
        for i in range(bi.m):
            rows = slice(i * bi.code_size, (i + 1) * bi.code_size)
            lits[rows, bi.inst.tuples[i]] = bi.patterns[i]
        for v in range(bi.n_left, bi.N):
            j, val, _ = bi.right_label(v)
            lits[v, j] = val
        self.vertex_lits = lits
        self.edges = bi.edges()
        self.edge_lits, bad = merge(lits[self.edges[:, 0]], lits[self.edges[:, 1]])
        if bad.any():
            raise AssertionError("an edge joins inconsistent labels")

    @property
    def den(self) -> int:
        return self.base.den

    def set_lits(self, sets) -> tuple[np.ndarray, np.ndarray]:
        out = np.full((len(sets), self.n), UNSET, dtype=np.int64)
        bad = np.zeros(len(sets), dtype=bool)
        for row, S in enumerate(sets):
            if len(S) > self.R:
                raise RoundBoundError(f"vertex set of size {len(S)} exceeds R={self.R}")
            for v in S:
                out[row], c = merge(out[row], self.vertex_lits[v])
                bad[row] |= c
        return out, bad

    def block(self, A, B) -> np.ndarray:
        la, ba = self.set_lits(A)
        lb, bb = self.set_lits(B)
        u, bad = merge(la[:, None, :], lb[None, :, :])
        bad |= ba[:, None] | bb[None, :]
        c = self.base.space.counts(u.reshape(-1, self.n)).reshape(u.shape[:2])
        c[bad] = 0
        return c

    def inner(self, a, b) -> Fraction:
        return Fraction(int(self.block([tuple(a)], [tuple(b)])[0, 0]), self.den)

    def around_many(self, sets, extra_lits: np.ndarray, batch: int = 256) -> np.ndarray:
        """``(len(sets), len(extra_lits))`` counts of each set united with each row."""
        ls, bs = self.set_lits(sets)
        out = np.zeros((len(sets), len(extra_lits)), dtype=self.base.space._dtype)
        for s in range(0, len(sets), batch):
            u, bad = merge(ls[s:s + batch, None, :], extra_lits[None, :, :])
            bad |= bs[s:s + batch, None]
            c = self.base.space.counts(u.reshape(-1, self.n)).reshape(u.shape[:2])
            c[bad] = 0
            out[s:s + batch] = c
        return out

    def around(self, S, extra_lits: np.ndarray) -> np.ndarray:
        """Counts of ``S`` united with each row of ``extra_lits``."""
        ls, bs = self.set_lits([tuple(S)])
        u, bad = merge(ls, extra_lits)
        if bs[0]:
            bad[:] = True
        return self.base.moment_lits(u, bad)


def lift_to_dks(oracle: PlantedCspOracle, inst: CspInstance, bi: BipartiteInstance, R: int) -> LiftedDksOracle:
    if bi.inst is not inst and bi.inst.to_dict() != inst.to_dict():
        raise ValueError("bipartite instance was built from a different CSP")
    return LiftedDksOracle(oracle, bi, R)


# -- imported Gram families ------------------------------------------------------------

class GramOracle:
    """Inner products read from an explicit Gram table."""

    def __init__(self, kind: str, labels: list, num: np.ndarray, den: int):
        if kind not in ("csp", "dks"):
            raise ValueError(f"unknown label kind {kind!r}")
        self.kind = kind
        self.labels = [self._norm(l) for l in labels]
        self.index = {l: i for i, l in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate labels in Gram table")
        self.num = np.asarray(num, dtype=object)
        self.den = int(den)
        self.r = max((len(l[0]) if kind == "csp" else len(l) for l in self.labels), default=0)

    def _norm(self, label):
        if self.kind == "csp":
            return csp_label(*label)
        return tuple(sorted(int(v) for v in label))

    def _idx(self, labels) -> list[int]:
        try:
            return [self.index[self._norm(l)] for l in labels]
        except KeyError as e:
            raise NotServed(f"label {e.args[0]} not in Gram table") from None

    def block(self, A, B) -> np.ndarray:
        ia, ib = self._idx(A), self._idx(B)
        return self.num[np.ix_(ia, ib)]

    def inner(self, a, b) -> Fraction:
        return Fraction(int(self.block([a], [b])[0, 0]), self.den)

    def serves(self, label) -> bool:
        return self._norm(label) in self.index


def _label_to_json(kind: str, label):
    if kind == "csp":
        return {"vars": list(label[0]), "values": list(label[1])}
    return {"vertices": list(label)}


def _label_from_json(kind: str, obj):
    if kind == "csp":
        return tuple(obj["vars"]), tuple(obj["values"])
    return tuple(obj["vertices"])


def export_gram(oracle, labels, path) -> None:
    num = oracle.block(labels, labels)
    doc = {
        "kind": oracle.kind,
        "labels": [_label_to_json(oracle.kind, l) for l in labels],
        "gram": [f"{Fraction(int(v), oracle.den).numerator}/{Fraction(int(v), oracle.den).denominator}"
                 for v in num.reshape(-1)],
    }
    Path(path).write_text(json.dumps(doc))


def import_gram(path) -> GramOracle:
    doc = json.loads(Path(path).read_text())
    kind = doc["kind"]
    labels = [_label_from_json(kind, o) for o in doc["labels"]]
    vals = [Fraction(s) for s in doc["gram"]]
    if len(vals) != len(labels) ** 2:
        raise ValueError("gram size does not match label count")
    den = lcm(*(v.denominator for v in vals)) if vals else 1
    num = np.array([v.numerator * (den // v.denominator) for v in vals], dtype=object).reshape(len(labels), len(labels))
    return GramOracle(kind, labels, num, den)


class CorruptedOracle:
    """Wraps an oracle and negates (or overrides) one symmetric entry."""

    def __init__(self, base, a, b, value: int | None = None):
        self.base, self.kind = base, base.kind
        self.den, self.r = base.den, getattr(base, "r", None)
        self._a, self._b = self._key(a), self._key(b)
        self.value = value

    def _key(self, label):
        if self.kind == "csp":
            return csp_label(*label)
        return tuple(sorted(label))

    def block(self, A, B) -> np.ndarray:
        out = self.base.block(A, B).copy()
        ka = [self._key(l) for l in A]
        kb = [self._key(l) for l in B]
        for i, x in enumerate(ka):
            for j, y in enumerate(kb):
                if (x, y) in ((self._a, self._b), (self._b, self._a)):
                    out[i, j] = -out[i, j] if self.value is None else self.value
        return out

    def inner(self, a, b) -> Fraction:
        return Fraction(int(self.block([a], [b])[0, 0]), self.den)

    def __getattr__(self, name):
        return getattr(self.base, name)


# -- verdicts ----------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    checked: int = 0
    witness: object = None
    detail: dict = field(default_factory=dict)
    method: str = "exact"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked,
                "witness": _jsonable(self.witness), "detail": _jsonable(self.detail), "method": self.method}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


@dataclass
class Verdict:
    what: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"what": self.what, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _min_eig(num: np.ndarray, den: int) -> float:
    m = np.array(num, dtype=np.float64) / den
    return float(np.linalg.eigvalsh(m)[0]) if m.size else 0.0


def _first(mask: np.ndarray):
    idx = np.argwhere(mask)
    return None if not len(idx) else tuple(int(v) for v in idx[0])


def csp_labels_upto(n: int, q: int, size: int) -> list:
    out = []
    for s in range(size + 1):
        for S in itertools.combinations(range(n), s):
            for alpha in itertools.product(range(q), repeat=s):
                out.append((S, alpha))
    return out


def verify_csp_properties(oracle, inst: CspInstance, r: int, max_label: int = 2) -> Verdict:
    """Vector-solution properties, the zero observation residual and Gram PSD, all exact.

    Pairwise checks (symmetry, nonnegativity, conflicts, union consistency)
    run over every pair of labels with at most ``min(r, max_label)``
    variables; labels an imported family does not serve are dropped and
    counted.
    """
    n, q = inst.n, inst.q
    den = oracle.den
    labels = csp_labels_upto(n, q, min(r, max_label))
    dropped = 0
    if hasattr(oracle, "serves"):
        kept = [l for l in labels if oracle.serves(l)]
        dropped, labels = len(labels) - len(kept), kept
    checks = []
    G = oracle.block(labels, labels)
    checks.append(Check("symmetry", bool((G == G.T).all()), G.size, _first(G != G.T)))
    neg = G < 0
    w = _first(neg)
    checks.append(Check("nonnegative", not neg.any(), G.size,
                        None if w is None else {"labels": [labels[w[0]], labels[w[1]]], "value": Fraction(int(G[w]), den)},
                        {"dropped_labels": dropped}))
    # conflicts and union consistency via merged literal sets
    keys = []
    for a in labels:
        keys.append(dict(zip(*a)))
    conflict_bad, union_groups, union_bad = None, {}, None
    n_conf = 0
    for i, a in enumerate(keys):
        for j, b in enumerate(keys):
            clash = any(b.get(v, x) != x for v, x in a.items())
            if clash:
                n_conf += 1
                if G[i, j] != 0 and conflict_bad is None:
                    conflict_bad = {"labels": [labels[i], labels[j]], "value": Fraction(int(G[i, j]), den)}
                continue
            key = tuple(sorted({**a, **b}.items()))
            prev = union_groups.setdefault(key, (i, j))
            if G[i, j] != G[prev] and union_bad is None:
                union_bad = {"pair_1": [labels[prev[0]], labels[prev[1]]], "pair_2": [labels[i], labels[j]]}
    checks.append(Check("zero_on_conflict", conflict_bad is None, n_conf, conflict_bad))
    checks.append(Check("union_consistency", union_bad is None, G.size - n_conf, union_bad,
                        {"classes": len(union_groups), "mode": "exhaustive over label pairs"}))
    # per-variable marginals
    bad, cnt = None, 0
    for v in range(n):
        singles = [((v,), (a,)) for a in range(q)]
        if hasattr(oracle, "serves") and not all(oracle.serves(l) for l in singles):
            continue
        tot = sum(int(x) for x in np.diag(oracle.block(singles, singles)))
        cnt += 1
        if tot != den and bad is None:
            bad = {"variable": v, "sum": Fraction(tot, den)}
    checks.append(Check("variable_marginals", bad is None, cnt, bad))
    # perfect value and zero residual
    perfect_bad, obs_bad, cnt = None, None, 0
    for i in range(inst.m):
        T = tuple(int(v) for v in inst.tuples[i])
        cons = [csp_label(T, alpha) for alpha in inst.satisfying_patterns(i)]
        if hasattr(oracle, "serves") and not all(oracle.serves(l) for l in cons + [EMPTY]):
            continue
        cnt += 1
        B = oracle.block(cons + [EMPTY], cons + [EMPTY])
        value = sum(int(B[k, k]) for k in range(len(cons)))
        if value != den and perfect_bad is None:
            perfect_bad = {"constraint": i, "value": Fraction(value, den)}
        inner = B[:len(cons), :len(cons)]
        residual = sum(int(x) for x in inner.reshape(-1)) - 2 * sum(int(x) for x in B[:len(cons), -1]) + int(B[-1, -1])
        if residual != 0 and obs_bad is None:
            obs_bad = {"constraint": i, "residual": Fraction(residual, den)}
    checks.append(Check("perfect_value", perfect_bad is None, cnt, perfect_bad))
    checks.append(Check("observation_residual_zero", obs_bad is None, cnt, obs_bad))
    unit = EMPTY if not hasattr(oracle, "serves") or oracle.serves(EMPTY) else None
    if unit is not None:
        e = int(oracle.block([EMPTY], [EMPTY])[0, 0])
        checks.append(Check("empty_norm_one", e == den, 1, None if e == den else Fraction(e, den)))
    base = [l for l in labels if len(l[0]) <= 1]
    lam = _min_eig(oracle.block(base, base), den)
    checks.append(Check("gram_psd_singletons", lam >= -PSD_TOL, len(base), None, {"lambda_min": lam}, "float-tol"))
    if len(labels) <= 1000:
        lam_all = _min_eig(G, den)
        checks.append(Check("gram_psd_enumerated", lam_all >= -PSD_TOL, len(labels), None,
                            {"lambda_min": lam_all}, "float-tol"))
    return Verdict("csp", checks)


def dks_sets_upto(N: int, size: int) -> list[tuple[int, ...]]:
    return [S for s in range(size + 1) for S in itertools.combinations(range(N), s)]


def verify_dks_lasserre(oracle, bi: BipartiteInstance, R: int, k: int | None = None, max_set: int = 2,
                        union_samples: int = 10 ** 4, seed: int = 0) -> Verdict:
    """Lasserre DkS checks on the lifted DkS vectors, exact in integers."""
    k = bi.k if k is None else k
    den = oracle.den
    N = bi.N
    singles = [(v,) for v in range(N)]
    singles_lits = getattr(oracle, "vertex_lits", None)
    checks = []
    e = int(oracle.block([()], [()])[0, 0])
    checks.append(Check("empty_norm_one", e == den, 1, None if e == den else Fraction(e, den)))
    size_bad, ident_bad, neg_bad, cnt = None, None, None, 0
    sets = dks_sets_upto(N, min(R, max_set))
    fast = hasattr(oracle, "around_many")
    step = 2048
    for s0 in range(0, len(sets), step):
        chunk = sets[s0:s0 + step]
        if fast:
            rows = oracle.around_many(chunk, singles_lits)
            norms = oracle.around_many(chunk, np.full((1, bi.n), UNSET, dtype=np.int64))[:, 0]
        else:
            rows = oracle.block(chunk, singles)
            norms = np.array([oracle.block([S], [S])[0, 0] for S in chunk], dtype=object)
        for S, row, norm in zip(chunk, rows, norms):
            norm = int(norm)
            total = int(sum(int(x) for x in row)) if row.dtype == object else int(row.sum())
            cnt += 1
            if neg_bad is None and (norm < 0 or (row < 0).any()):
                neg_bad = {"S": S}
            if total > k * norm and size_bad is None:
                size_bad = {"S": S, "lhs": Fraction(total, den), "rhs": Fraction(k * norm, den)}
            if total != (bi.m + bi.beta * bi.n) * norm and ident_bad is None:
                ident_bad = {"S": S, "sum": Fraction(total, den), "norm": Fraction(norm, den)}
    checks.append(Check("nonnegative", neg_bad is None, cnt, neg_bad))
    checks.append(Check("size_constraint", size_bad is None, cnt, size_bad, {"k": k}))
    checks.append(Check("size_identity_m_plus_beta_n", ident_bad is None, cnt, ident_bad,
                        {"m_plus_beta_n": bi.m + bi.beta * bi.n, "two_m": 2 * bi.m}))
    # union consistency on sampled quadruples
    rng = stream(seed, 0x1A)
    bad, done = None, 0
    for _ in range(union_samples):
        size = int(rng.integers(1, min(2 * min(R, max_set), 4) + 1))
        W = sorted(int(v) for v in rng.choice(N, size=size, replace=False))
        p1, p2 = _split(W, min(R, max_set), rng), _split(W, min(R, max_set), rng)
        if p1 is None or p2 is None:
            continue
        v1 = int(oracle.block([p1[0]], [p1[1]])[0, 0])
        v2 = int(oracle.block([p2[0]], [p2[1]])[0, 0])
        done += 1
        if v1 != v2 and bad is None:
            bad = {"pair_1": p1, "pair_2": p2}
    checks.append(Check("union_consistency", bad is None, done, bad, method=f"sampled({done})"))
    # objective over the edges of G'
    edges = bi.edges()
    if hasattr(oracle, "edge_lits"):
        vals = oracle.base.moment_lits(oracle.edge_lits)
        obj = int(sum(int(x) for x in vals))
    else:
        obj = sum(int(oracle.block([(int(u),)], [(int(v),)])[0, 0]) for u, v in edges)
    want = bi.beta * bi.m * bi.K
    checks.append(Check("objective", obj == want * den, len(edges), None,
                        {"objective": Fraction(obj, den), "beta_m_K": want}))
    # copy invariance of right singletons
    if bi.beta > 1:
        bad, cnt = None, 0
        for v in range(bi.n_left, bi.n_left + bi.n * bi.q):
            copies = [(bi.right_id(*bi.right_label(v)[:2], c),) for c in range(bi.beta)]
            B = oracle.block(copies, copies)
            cnt += 1
            if len({int(x) for x in np.asarray(B).reshape(-1)}) != 1 and bad is None:
                bad = {"vertex": v}
        checks.append(Check("copy_invariance", bad is None, cnt, bad))
    # marginal identity: sum over alpha with alpha(x_j)=a' of U_(C_i,alpha) = U_(x_j,a')
    bad, cnt = None, 0
    for i in range(bi.m):
        for p, j in enumerate(bi.inst.tuples[i]):
            for val in range(bi.q):
                group = [(bi.left_id(i, c),) for c in np.flatnonzero(bi.patterns[i][:, p] == val)]
                x = (bi.right_id(int(j), val),)
                B = oracle.block(group + [x], group + [x])
                g = len(group)
                res = (int(sum(int(t) for t in np.asarray(B[:g, :g]).reshape(-1)))
                       - 2 * int(sum(int(t) for t in B[:g, g])) + int(B[g, g]))
                cnt += 1
                if res != 0 and bad is None:
                    bad = {"constraint": i, "variable": int(j), "value": val, "residual": Fraction(res, den)}
    checks.append(Check("marginal_identity", bad is None, cnt, bad))
    return Verdict("dks", checks)


def _split(W: list[int], cap: int, rng: np.random.Generator):
    """Two sets of size <= cap whose union is W, or None."""
    if len(W) > 2 * cap:
        return None
    for _ in range(20):
        a = [v for v in W if rng.random() < 0.5]
        rest = [v for v in W if v not in a]
        extra = [v for v in a if rng.random() < 0.3]
        b = sorted(set(rest) | set(extra))
        if len(a) <= cap and len(b) <= cap:
            return tuple(a), tuple(b)
    return None


@dataclass
class MinDegreeVerdict:
    d: Fraction
    d_star: Fraction | None
    left_ok: bool
    right_ok: bool
    constraint_ok: bool
    checked_sets: int
    method: str
    witness: object = None
    factors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.left_ok and self.right_ok and self.constraint_ok

    def to_dict(self) -> dict:
        return _jsonable({
            "d": self.d, "d_star": self.d_star, "left_factor_exact": self.left_ok,
            "right_factor_exact": self.right_ok, "constraint_holds": self.constraint_ok,
            "checked_sets": self.checked_sets, "method": self.method, "witness": self.witness,
            "factors": self.factors, "passed": self.passed,
        })


def verify_min_degree(oracle: LiftedDksOracle, bi: BipartiteInstance, d=None, R: int = 2,
                      pair_samples: int = 500, seed: int = 0) -> MinDegreeVerdict:
    """``sum_{v in N(u)} <U_{u,v}, U_S> >= d <U_u, U_S>`` for every vertex ``u``.

    Sets ``S`` with at most one vertex are enumerated; ``pair_samples``
    two-vertex sets are drawn from the ``(seed, 0x3D)`` stream.  Left vertices
    must realise factor ``beta K`` and right vertices the number of
    constraints containing their variable, exactly.
    """
    N = bi.N
    occurrences = np.bincount(bi.inst.tuples.reshape(-1), minlength=bi.n)
    want = np.empty(N, dtype=np.int64)
    want[:bi.n_left] = bi.beta * bi.K
    for v in range(bi.n_left, N):
        want[v] = occurrences[bi.right_label(v)[0]]
    edges = oracle.edges
    sets = [()] + [(v,) for v in range(N)]
    rng = stream(seed, 0x3D)
    if R >= 2:
        for _ in range(pair_samples):
            sets.append(tuple(sorted(int(v) for v in rng.choice(N, size=2, replace=False))))
    left_ok = right_ok = True
    witness = None
    nonzero = np.zeros(N, dtype=bool)
    for S in sets:
        single = oracle.around(S, oracle.vertex_lits)
        pair = oracle.around(S, oracle.edge_lits)
        lhs = np.zeros(N, dtype=single.dtype)
        np.add.at(lhs, edges[:, 0], pair)
        np.add.at(lhs, edges[:, 1], pair)
        ok = lhs == want * single
        nonzero |= single != 0
        if not ok.all():
            u = int(np.flatnonzero(~ok)[0])
            if u < bi.n_left:
                left_ok = False
            else:
                right_ok = False
            if witness is None:
                witness = {"S": S, "u": u, "lhs": Fraction(int(lhs[u]), oracle.den),
                           "expected_factor": int(want[u]), "rhs_unit": Fraction(int(single[u]), oracle.den)}
    d_star = Fraction(int(want[nonzero].min())) if nonzero.any() else None
    d = d_star if d is None else Fraction(d)
    constraint_ok = d_star is None or d_star >= d
    factors = {"left": bi.beta * bi.K,
               "right_min": int(occurrences.min()) if bi.n else 0,
               "right_max": int(occurrences.max()) if bi.n else 0}
    return MinDegreeVerdict(d=d, d_star=d_star, left_ok=left_ok, right_ok=right_ok, constraint_ok=constraint_ok,
                            checked_sets=len(sets), method=f"exact; |S|<=1 exhaustive, sampled({pair_samples}) pairs",
                            witness=witness, factors=factors)
