"""Table-driven finite fields and linear algebra over them.

Elements of every field are small integers ``0 .. size-1`` with ``0`` the
additive and ``1`` the multiplicative identity.  ``GF(p^e)`` encodes the
polynomial ``sum a_i x^i`` as ``sum a_i p^i``; the quadratic extension
``F_q[y]/(y^2 + a y + b)`` encodes ``u + v y`` as ``u + v q``, so the base
field sits inside as the elements below ``q``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# Conway polynomials, coefficients low to high, monic.
CONWAY = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 4, 1),
    (7, 2): (3, 6, 1),
}


def _prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            e, r = 0, q
            while r % p == 0:
                r //= p
                e += 1
            if r != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, e
    raise AssertionError


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


class TableField:
    """Common table arithmetic; subclasses fill ``size``, ``char`` and tables."""

    size: int
    char: int
    add_t: np.ndarray
    mul_t: np.ndarray
    neg_t: np.ndarray
    inv_t: np.ndarray

    def _finish(self) -> None:
        s = self.size
        self.neg_t = np.array([int(np.flatnonzero(self.add_t[a] == 0)[0]) for a in range(s)], dtype=np.int64)
        self.sub_t = self.add_t[:, self.neg_t]
        inv = np.zeros(s, dtype=np.int64)
        for a in range(1, s):
            hit = np.flatnonzero(self.mul_t[a] == 1)
            if len(hit) != 1:
                raise ValueError("multiplication table is not a field")
            inv[a] = hit[0]
        self.inv_t = inv
        for t in (self.add_t, self.mul_t, self.neg_t, self.sub_t, self.inv_t):
            t.setflags(write=False)

    # -- scalar operations ------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return int(self.add_t[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.sub_t[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_t[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_t[a])

    def inv(self, a: int) -> int:
        if a % self.size == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self.inv_t[a])

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        out = 1
        while k:
            if k & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            k >>= 1
        return out

    def order(self, a: int) -> int:
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        x, k = a, 1
        while x != 1:
            x = self.mul(x, a)
            k += 1
        return k

    def is_primitive(self, a: int) -> bool:
        return a != 0 and self.order(a) == self.size - 1

    # -- vectors and matrices --------------------------------------------------
    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(A.shape[1]):
            out = self.add_t[out, self.mul_t[A[:, k, None], B[None, k, :]]]
        return out

    def rref(self, M: np.ndarray) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form and pivot columns."""
        R = np.array(M, dtype=np.int64, copy=True)
        if R.ndim != 2:
            raise ValueError("matrix expected")
        rows, cols = R.shape
        pivots: list[int] = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.flatnonzero(R[r:, c])
            if not len(nz):
                continue
            p = r + int(nz[0])
            if p != r:
                R[[r, p]] = R[[p, r]]
            R[r] = self.mul_t[self.inv_t[R[r, c]], R[r]]
            for i in range(rows):
                if i != r and R[i, c]:
                    R[i] = self.sub_t[R[i], self.mul_t[R[i, c], R[r]]]
            pivots.append(c)
            r += 1
        return R[:r], pivots

    def rank(self, M: np.ndarray) -> int:
        M = np.asarray(M)
        if M.size == 0:
            return 0
        return len(self.rref(M)[1])

    def nullspace(self, M: np.ndarray, cols: int | None = None) -> np.ndarray:
        """Basis (rows) of ``{x : M x = 0}``, in RREF order of free columns."""
        M = np.asarray(M, dtype=np.int64)
        ncols = M.shape[1] if M.ndim == 2 and M.size else cols
        if ncols is None:
            raise ValueError("column count unknown for an empty matrix")
        if M.size == 0:
            return np.eye(ncols, dtype=np.int64)
        R, pivots = self.rref(M)
        free = [c for c in range(ncols) if c not in set(pivots)]
        basis = np.zeros((len(free), ncols), dtype=np.int64)
        for k, f in enumerate(free):
            basis[k, f] = 1
            for row, pc in enumerate(pivots):
                basis[k, pc] = self.neg_t[R[row, f]]
        return basis

    def solve_affine(self, M: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
        """A particular solution and a kernel basis, or ``None`` if inconsistent."""
        M = np.asarray(M, dtype=np.int64)
        rhs = np.asarray(rhs, dtype=np.int64)
        ncols = M.shape[1]
        aug = np.concatenate([M, rhs[:, None]], axis=1)
        R, pivots = self.rref(aug)
        if ncols in pivots:
            return None
        x = np.zeros(ncols, dtype=np.int64)
        for row, pc in enumerate(pivots):
            x[pc] = R[row, ncols]
        return x, self.nullspace(M)

    def span(self, rows: np.ndarray) -> np.ndarray:
        """All ``size^len(rows)`` combinations, lexicographic in coefficients."""
        rows = np.asarray(rows, dtype=np.int64)
        out = np.zeros((1, rows.shape[1]), dtype=np.int64)
        for row in rows:
            scaled = self.mul_t[np.arange(self.size)[:, None], row[None, :]]
            out = self.add_t[out[:, None, :], scaled[None, :, :]].reshape(-1, rows.shape[1])
        return out

    def random_elements(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.size, size=shape)


class GF(TableField):
    """``GF(q)`` for a prime power ``q``."""

    def __init__(self, q: int):
        p, e = _prime_power(q)
        self.size, self.q, self.char, self.degree = q, q, p, e
        if e == 1:
            self.modulus = None
            a = np.arange(q)
            self.add_t = (a[:, None] + a[None, :]) % q
            self.mul_t = (a[:, None] * a[None, :]) % q
            self.modulus_source = "prime"
        else:
            mod = CONWAY.get((p, e))
            self.modulus_source = "conway"
            if mod is None or not self._build(p, e, mod):
                self.modulus_source = "search"
                for tail in itertools.product(range(p), repeat=e):
                    if tail[0] and self._build(p, e, tail + (1,)):
                        mod = tail + (1,)
                        break
                else:
                    raise AssertionError("no primitive polynomial found")
            self._build(p, e, mod)
            self.modulus = tuple(mod)
        self._finish()

    def _digits(self, a: int, p: int, e: int) -> list[int]:
        return [(a // p ** i) % p for i in range(e)]

    def _build(self, p: int, e: int, mod) -> bool:
        """Fill tables for ``F_p[x]/(mod)``; true iff ``x`` is primitive."""
        q = p ** e
        dig = np.array([self._digits(a, p, e) for a in range(q)], dtype=np.int64)
        weights = p ** np.arange(e)
        self.add_t = ((dig[:, None, :] + dig[None, :, :]) % p) @ weights

        def mulpoly(a, b):
            prod = [0] * (2 * e - 1)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
            for d in range(2 * e - 2, e - 1, -1):
                c = prod[d]
                if c:
                    for i in range(e + 1):
                        prod[d - e + i] = (prod[d - e + i] - c * mod[i]) % p
            return sum(v * p ** i for i, v in enumerate(prod[:e]))

        self.mul_t = np.array([[mulpoly(dig[a], dig[b]) for b in range(q)] for a in range(q)], dtype=np.int64)
        x = p if e > 1 else 1
        seen, cur = set(), 1
        for _ in range(q - 1):
            cur = int(self.mul_t[cur, x])
            seen.add(cur)
        return len(seen) == q - 1 and 0 not in seen

    def __repr__(self) -> str:
        return f"GF({self.q})"


class QuadraticExtension(TableField):
    """``F_{q^2} = F_q[y]/(y^2 + a y + b)`` with ``y`` primitive.

    ``(a, b)`` is the lexicographically first pair making ``y`` a generator
    of the multiplicative group; the choice is checked, not assumed.
    """

    def __init__(self, base: GF):
        self.base = base
        q = base.size
        self.size, self.char = q * q, base.char
        for a, b in itertools.product(range(q), range(1, q)):
            if self._build(a, b):
                self.poly = (a, b)
                break
        else:
            raise AssertionError("no primitive quadratic found")
        self._finish()
        self.gamma = q
        if self.order(self.gamma) != self.size - 1:
            raise AssertionError("gamma is not primitive")

    def pack(self, u: int, v: int) -> int:
        return u + v * self.base.size

    def unpack(self, z: int) -> tuple[int, int]:
        return z % self.base.size, z // self.base.size

    def _build(self, a: int, b: int) -> bool:
        F, q = self.base, self.base.size
        u = np.arange(q * q) % q
        v = np.arange(q * q) // q
        self.add_t = F.add_t[u[:, None], u[None, :]] + q * F.add_t[v[:, None], v[None, :]]
        # (u1 + v1 y)(u2 + v2 y) with y^2 = -a y - b
        uu = F.mul_t[u[:, None], u[None, :]]
        vv = F.mul_t[v[:, None], v[None, :]]
        uv = F.add_t[F.mul_t[u[:, None], v[None, :]], F.mul_t[v[:, None], u[None, :]]]
        lo = F.sub_t[uu, F.mul_t[b, vv]]
        hi = F.sub_t[uv, F.mul_t[a, vv]]
        self.mul_t = lo + q * hi
        cur, seen = 1, set()
        for _ in range(q * q - 1):
            cur = int(self.mul_t[cur, q])
            seen.add(cur)
        return len(seen) == q * q - 1 and 0 not in seen

    def __repr__(self) -> str:
        return f"QuadraticExtension({self.base!r}, y^2 + {self.poly[0]}y + {self.poly[1]})"


@dataclass(frozen=True)
class FieldSpec:
    q: int
    p: int
    e: int
    modulus: tuple[int, ...] | None
    ext_poly: tuple[int, int]
    gamma: int

    @classmethod
    def for_q(cls, q: int) -> "FieldSpec":
        F = GF(q)
        E = QuadraticExtension(F)
        return cls(q=q, p=F.char, e=F.degree, modulus=F.modulus, ext_poly=E.poly, gamma=E.gamma)

    def fields(self) -> tuple[GF, QuadraticExtension]:
        return field_pair(self.q)


_PAIRS: dict[int, tuple[GF, QuadraticExtension]] = {}


def field_pair(q: int) -> tuple[GF, QuadraticExtension]:
    """Cached ``(F_q, F_{q^2})``."""
    hit = _PAIRS.get(q)
    if hit is None:
        F = GF(q)
        hit = _PAIRS[q] = (F, QuadraticExtension(F))
    return hit


def field_ops(q: int, op: str, a: int, b: int | None = None) -> int:
    F = GF(q)
    if op == "inv":
        return F.inv(a)
    if op == "neg":
        return F.neg(a)
    return {"add": F.add, "sub": F.sub, "mul": F.mul, "pow": F.pow}[op](a, b)
