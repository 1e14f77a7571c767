"""Max K-CSP(C) instances: constraint ``i`` asks ``x|_{T_i} + b_i`` to be a
codeword of ``C``.

Random streams (all derived from the instance seed):
``(seed, 1)`` tuples, ``(seed, 2)`` shifts / planted codewords,
``(seed, 3)`` the hidden planted assignment.  Random and planted instances
with the same seed therefore share their tuples.
"""
from __future__ import annotations

import itertools
import json
from math import comb
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._random import stream
from .codes import LinearCode
from .graphs import BudgetExceeded

DEFAULT_ASSIGNMENT_BUDGET = 10 ** 7
DEFAULT_EXPANSION_BUDGET = 10 ** 6


@dataclass
class CspInstance:
    n: int
    code: LinearCode
    tuples: np.ndarray
    shifts: np.ndarray
    seed: int | None = None
    planted: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        K = self.code.K
        self.tuples = np.asarray(self.tuples, dtype=np.int64).reshape(-1, K)
        self.shifts = np.asarray(self.shifts, dtype=np.int64).reshape(-1, K)
        if self.tuples.shape != self.shifts.shape:
            raise ValueError("tuples and shifts disagree in shape")
        for i, T in enumerate(self.tuples):
            if len(set(T.tolist())) != K:
                raise ValueError(f"constraint {i} repeats a variable")
        if self.tuples.size and (self.tuples.min() < 0 or self.tuples.max() >= self.n):
            raise ValueError("variable index out of range")
        if self.shifts.size and (self.shifts.min() < 0 or self.shifts.max() >= self.q):
            raise ValueError("shift entry outside F_q")

    @property
    def q(self) -> int:
        return self.code.q

    @property
    def K(self) -> int:
        return self.code.K

    @property
    def m(self) -> int:
        return self.tuples.shape[0]

    @property
    def beta(self) -> Fraction:
        return Fraction(self.m, self.n)

    def local_words(self, assignments: np.ndarray) -> np.ndarray:
        """``(trials, m, K)`` shifted restrictions."""
        a = np.atleast_2d(np.asarray(assignments, dtype=np.int64))
        F = self.code.field
        return F.add_t[a[:, self.tuples], self.shifts[None, :, :]]

    def satisfied(self, assignments: np.ndarray) -> np.ndarray:
        """``(trials, m)`` flags."""
        a = np.atleast_2d(np.asarray(assignments, dtype=np.int64))
        if not self.m:
            return np.zeros((a.shape[0], 0), dtype=bool)
        words = self.local_words(a).reshape(-1, self.K)
        return self.code.contains(words).reshape(a.shape[0], self.m)

    def satisfying_patterns(self, i: int) -> np.ndarray:
        """All ``alpha in F_q^K`` (on ``T_i`` order) satisfying constraint ``i``."""
        F = self.code.field
        return F.sub_t[self.code.codewords(), self.shifts[i][None, :]]

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "q": self.q,
            "code": self.code.to_dict(),
            "constraints": [{"vars": T.tolist(), "shift": b.tolist()} for T, b in zip(self.tuples, self.shifts)],
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.planted is not None:
            d["planted"] = self.planted.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CspInstance":
        code = LinearCode.from_dict(d["code"])
        if int(d["q"]) != code.q:
            raise ValueError("instance q does not match its code")
        cons = d["constraints"]
        tuples = np.array([c["vars"] for c in cons], dtype=np.int64).reshape(-1, code.K)
        shifts = np.array([c["shift"] for c in cons], dtype=np.int64).reshape(-1, code.K)
        planted = d.get("planted")
        return cls(n=int(d["n"]), code=code, tuples=tuples, shifts=shifts, seed=d.get("seed"),
                   planted=None if planted is None else np.array(planted, dtype=np.int64))


def constraint_satisfied(inst: CspInstance, i: int, a: np.ndarray) -> bool:
    a = np.asarray(a, dtype=np.int64)
    word = inst.code.field.add_t[a[inst.tuples[i]], inst.shifts[i]]
    return bool(inst.code.contains(word)[0])


def sample_tuples(n: int, m: int, K: int, seed: int) -> np.ndarray:
    """Partial Fisher-Yates: for position ``j`` swap in a uniform index from
    ``[j, n)`` and keep the first ``K`` entries."""
    if n < K:
        raise ValueError(f"need n >= K, got n={n}, K={K}")
    rng = stream(seed, 1)
    out = np.empty((m, K), dtype=np.int64)
    for i in range(m):
        perm = np.arange(n)
        for j in range(K):
            r = j + int(rng.integers(n - j))
            perm[j], perm[r] = perm[r], perm[j]
        out[i] = perm[:K]
    return out


def sample_random_instance(n: int, m: int, code: LinearCode, seed: int) -> CspInstance:
    tuples = sample_tuples(n, m, code.K, seed)
    shifts = stream(seed, 2).integers(0, code.q, size=(m, code.K))
    return CspInstance(n=n, code=code, tuples=tuples, shifts=shifts, seed=seed)


def plant_satisfiable_instance(n: int, m: int, code: LinearCode, seed: int) -> tuple[CspInstance, np.ndarray]:
    """Shifts ``b_i = c_i - a*|T_i`` for uniform codewords ``c_i``, so ``a*``
    satisfies every constraint and ``b_i`` is uniform over the allowed set."""
    tuples = sample_tuples(n, m, code.K, seed)
    hidden = stream(seed, 3).integers(0, code.q, size=n)
    F = code.field
    msgs = stream(seed, 2).integers(0, code.q, size=(m, code.dim))
    words = F.matmul(msgs, code.generator) if code.dim else np.zeros((m, code.K), dtype=np.int64)
    shifts = F.sub_t[words, hidden[tuples]] if m else np.zeros((0, code.K), dtype=np.int64)
    inst = CspInstance(n=n, code=code, tuples=tuples, shifts=shifts, seed=seed, planted=hidden)
    for i in range(m):
        if not constraint_satisfied(inst, i, hidden):
            raise AssertionError(f"planted assignment fails constraint {i}")
    return inst, hidden


def satisfaction_probability(code: LinearCode) -> Fraction:
    """``|C| / q^K``."""
    return Fraction(code.size, code.q ** code.K)


def satisfaction_frequency(inst: CspInstance, trials: int, seed: int) -> float:
    """Fraction of (assignment, constraint) pairs satisfied by uniform assignments."""
    rng = stream(seed, 4)
    hits = 0
    done = 0
    while done < trials:
        step = min(4096, trials - done)
        a = rng.integers(0, inst.q, size=(step, inst.n))
        hits += int(inst.satisfied(a).sum())
        done += step
    return hits / (trials * max(inst.m, 1))


# -- expansion ---------------------------------------------------------------------

@dataclass
class ExpansionVerdict:
    K: int
    delta: Fraction
    r: int
    mode: str
    minima: dict[int, int]
    witnesses: dict[int, tuple[int, ...]]
    checked: int

    def threshold(self, s: int) -> Fraction:
        return (self.K - self.delta) * s

    @property
    def failures(self) -> list[int]:
        return [s for s, v in self.minima.items() if not v > self.threshold(s)]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "delta": str(self.delta),
            "r": self.r,
            "mode": self.mode,
            "checked": self.checked,
            "per_s": {str(s): {"min_union": v, "threshold": str(self.threshold(s)),
                               "pass": v > self.threshold(s), "witness": list(self.witnesses[s])}
                      for s, v in self.minima.items()},
            "passed": self.passed,
            "method": "exact" if self.mode == "exhaustive" else f"sampled({self.checked})",
        }


def audit_expansion(inst: CspInstance, r: int, delta, budget: int = DEFAULT_EXPANSION_BUDGET,
                    samples: int | None = None, seed: int = 0) -> ExpansionVerdict:
    """Minimum ``|union T_i|`` over sets of ``s`` constraints, ``2 <= s <= r``.

    Exhaustive when the number of sets is within ``budget``; otherwise
    ``samples`` random sets per ``s`` are required.
    """
    delta = Fraction(delta)
    masks = [sum(1 << int(v) for v in T) for T in inst.tuples]
    sizes = range(2, min(r, inst.m) + 1)
    total = sum(comb(inst.m, s) for s in sizes)
    exhaustive = total <= budget
    if not exhaustive and samples is None:
        raise BudgetExceeded("constraint sets", total, budget)
    minima, witnesses, checked = {}, {}, 0
    rng = stream(seed, 5)
    for s in sizes:
        best, arg = None, None
        if exhaustive:
            combos = itertools.combinations(range(inst.m), s)
        else:
            combos = (tuple(sorted(int(v) for v in rng.choice(inst.m, size=s, replace=False))) for _ in range(samples))
        for combo in combos:
            u = 0
            for i in combo:
                u |= masks[i]
            size = bin(u).count("1")
            checked += 1
            if best is None or size < best:
                best, arg = size, combo
        minima[s], witnesses[s] = best, arg
    return ExpansionVerdict(K=inst.K, delta=delta, r=r, mode="exhaustive" if exhaustive else "sampled",
                            minima=minima, witnesses=witnesses, checked=checked)


# -- exhaustive optimum ------------------------------------------------------------------

def best_assignment_bruteforce(inst: CspInstance, budget: int = DEFAULT_ASSIGNMENT_BUDGET,
                               reverse: bool = False, block: int = 1 << 14) -> tuple[np.ndarray, int]:
    """Maximum number of satisfied constraints over all ``q^n`` assignments.

    Assignment ``x`` is indexed by its base-``q`` digits (``x_0`` least
    significant); ties go to the first index met in enumeration order.
    """
    q, n = inst.q, inst.n
    total = q ** n
    if total > budget:
        raise BudgetExceeded("assignments", total, budget)
    powers = q ** np.arange(n, dtype=np.int64)
    best_val, best_idx = -1, 0
    starts = range(0, total, block)
    for start in (reversed(starts) if reverse else starts):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        if reverse:
            idx = idx[::-1]
        a = (idx[:, None] // powers[None, :]) % q
        counts = inst.satisfied(a).sum(axis=1) if inst.m else np.zeros(len(idx), dtype=np.int64)
        j = int(np.argmax(counts))
        if counts[j] > best_val:
            best_val, best_idx = int(counts[j]), int(idx[j])
    return (best_idx // powers) % q, best_val


def count_solutions_bruteforce(inst: CspInstance, budget: int = DEFAULT_ASSIGNMENT_BUDGET, block: int = 1 << 14) -> int:
    q, n = inst.q, inst.n
    total = q ** n
    if total > budget:
        raise BudgetExceeded("assignments", total, budget)
    powers = q ** np.arange(n, dtype=np.int64)
    found = 0
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        a = (idx[:, None] // powers[None, :]) % q
        found += int(inst.satisfied(a).all(axis=1).sum())
    return found


def write_instance(inst: CspInstance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()))


def read_instance(path) -> CspInstance:
    return CspInstance.from_dict(json.loads(Path(path).read_text()))
