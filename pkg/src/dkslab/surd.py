"""Exact arithmetic in Q(w) with w = n^(-1/4).

Every Sherali-Adams value ``n^(-(st+1)/4) * L^(-|S|)`` is a rational multiple
of a power of ``w``, so constraint sums live in this field and can be
compared exactly.  Elements are coefficient vectors in the basis
``1, w, ..., w^(deg-1)`` where ``deg`` is 1, 2 or 4 depending on whether
``n`` is a fourth power, a square, or neither (``x^4 - n`` is irreducible
over Q exactly when ``n`` is not a square).  Signs are decided by interval
evaluation with rational enclosures of ``w`` refined until the enclosure
excludes zero.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable


def _iroot4(x: int) -> int:
    return math.isqrt(math.isqrt(x))


class FourthRootField:
    """The field Q(n^(-1/4)) for a fixed positive integer ``n``."""

    _cache: dict[int, "FourthRootField"] = {}

    def __new__(cls, n: int):
        n = int(n)
        hit = cls._cache.get(n)
        if hit is not None:
            return hit
        if n < 1:
            raise ValueError("n must be a positive integer")
        self = super().__new__(cls)
        self.n = n
        r4 = _iroot4(n)
        r2 = math.isqrt(n)
        if r4 ** 4 == n:
            self.degree, self.root = 1, r4
        elif r2 * r2 == n:
            self.degree, self.root = 2, r2
        else:
            self.degree, self.root = 4, None
        cls._cache[n] = self
        return self

    def __reduce__(self):
        return (FourthRootField, (self.n,))

    def __repr__(self) -> str:
        return f"FourthRootField({self.n})"

    def _basis_power(self, power: int) -> tuple[int, Fraction]:
        """Write ``w^power`` as ``coeff * w^r`` with ``0 <= r < degree``."""
        q, r = divmod(power, 4)
        coeff = Fraction(1, self.n ** q) if q >= 0 else Fraction(self.n ** (-q))
        if self.degree == 1:
            coeff *= Fraction(1, self.root ** r)
            return 0, coeff
        if self.degree == 2:
            coeff *= Fraction(1, self.root ** (r // 2))
            return r % 2, coeff
        return r, coeff

    def zero(self) -> "Surd":
        return Surd(self, (Fraction(0),) * self.degree)

    def one(self) -> "Surd":
        return self.monomial(0, 1)

    def monomial(self, power: int, coeff=1) -> "Surd":
        """``coeff * w^power``."""
        r, c = self._basis_power(power)
        coeffs = [Fraction(0)] * self.degree
        coeffs[r] = Fraction(coeff) * c
        return Surd(self, tuple(coeffs))

    def from_terms(self, terms: Iterable[tuple[int, Fraction]]) -> "Surd":
        coeffs = [Fraction(0)] * self.degree
        for power, coeff in terms:
            if coeff:
                r, c = self._basis_power(power)
                coeffs[r] += Fraction(coeff) * c
        return Surd(self, tuple(coeffs))

    def w_bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational ``lo <= w <= hi`` with width about ``2^-bits``."""
        if self.degree == 1:
            w = Fraction(1, self.root)
            return w, w
        scale = 1 << bits
        x = _iroot4(self.n * scale ** 4)
        return Fraction(scale, x + 1), Fraction(scale, x)

    def parse(self, text: str) -> "Surd":
        return parse_surd(self, text)


@total_ordering
class Surd:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: FourthRootField, coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.field is not self.field:
                raise ValueError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.monomial(0, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Surd(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Surd(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.field, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = []
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    terms.append((i + j, a * b))
        return self.field.from_terms(terms)

    __rmul__ = __mul__

    def times_w(self, power: int) -> "Surd":
        return self * self.field.monomial(power)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def sign(self) -> int:
        if self.is_zero():
            return 0
        if self.field.degree == 1:
            v = self.coeffs[0]
            return (v > 0) - (v < 0)
        bits = 32
        while True:
            lo_w, hi_w = self.field.w_bounds(bits)
            lo = hi = Fraction(0)
            for i, c in enumerate(self.coeffs):
                if not c:
                    continue
                a, b = c * lo_w ** i, c * hi_w ** i
                lo += min(a, b)
                hi += max(a, b)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.field.n, self.coeffs))

    def __float__(self):
        w = self.field.n ** -0.25
        return float(sum(float(c) * w ** i for i, c in enumerate(self.coeffs)))

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            frac = f"{c.numerator}/{c.denominator}"
            parts.append(frac if i == 0 else f"{frac}*w^{i}")
        return " + ".join(parts) if parts else "0/1"

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.field, tuple(a / other for a in self.coeffs))
        return NotImplemented


_TERM = re.compile(r"^\s*(-?\d+)(?:/(\d+))?(?:\s*\*\s*w\^(\d+))?\s*$")


def parse_surd(field: FourthRootField, text: str) -> Surd:
    """Inverse of ``str(Surd)``: terms ``a/b`` or ``a/b*w^k`` joined by ``+``."""
    terms = []
    for part in text.split("+"):
        m = _TERM.match(part)
        if not m:
            raise ValueError(f"cannot parse exact value {text!r}")
        num, den, power = m.groups()
        terms.append((int(power or 0), Fraction(int(num), int(den or 1))))
    return field.from_terms(terms)
