from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dkslab.surd import FourthRootField, parse_surd

getcontext().prec = 80


def decimal_value(s) -> Decimal:
    w = Decimal(s.field.n) ** Decimal(-0.25) if False else Decimal(1) / Decimal(s.field.n).sqrt().sqrt()
    return sum((Decimal(c.numerator) / Decimal(c.denominator)) * w ** i for i, c in enumerate(s.coeffs))


@pytest.mark.parametrize("n,degree", [(4096, 1), (16384, 2), (1024, 2), (10, 4)])
def test_field_degree(n, degree):
    assert FourthRootField(n).degree == degree


def test_pair_values_at_ten_thousand():
    f = FourthRootField(10 ** 4)
    L = 10
    assert f.monomial(2, Fraction(1, L)) == Fraction(1, 1000)
    assert f.monomial(3, Fraction(1, L * L)) == Fraction(1, 100000)


def test_powers_reduce():
    f = FourthRootField(10)
    assert f.monomial(4) == Fraction(1, 10)
    assert f.monomial(1) * f.monomial(3) == Fraction(1, 10)
    assert f.monomial(-4) == 10


coeff = st.fractions(min_value=-50, max_value=50, max_denominator=40)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([10, 17, 1024, 16384, 4096, 5000]), st.lists(coeff, min_size=4, max_size=4),
       st.lists(coeff, min_size=4, max_size=4))
def test_arithmetic_against_decimal(n, xs, ys):
    f = FourthRootField(n)
    a = f.from_terms(enumerate(xs))
    b = f.from_terms(enumerate(ys))
    da, db = decimal_value(a), decimal_value(b)
    assert abs(decimal_value(a + b) - (da + db)) < Decimal("1e-40")
    assert abs(decimal_value(a * b) - da * db) < Decimal("1e-40")
    diff = da - db
    expected = 0 if a == b else (1 if diff > 0 else -1)
    if abs(diff) > Decimal("1e-60") or a == b:
        assert (a - b).sign() == expected


def test_sign_of_near_cancellation():
    f = FourthRootField(10)
    # w^2 = 1/sqrt(10) ~ 0.316227766; 316227766/10^9 is just below it
    x = f.monomial(2) - Fraction(316227766, 10 ** 9)
    assert x.sign() == 1
    y = f.monomial(2) - Fraction(316227767, 10 ** 9)
    assert y.sign() == -1


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([10, 1024, 4096]), st.lists(coeff, min_size=4, max_size=4))
def test_string_round_trip(n, xs):
    f = FourthRootField(n)
    a = f.from_terms(enumerate(xs))
    assert parse_surd(f, str(a)) == a
    assert f.parse(str(a)) == a


def test_mixing_fields_rejected():
    with pytest.raises(ValueError):
        FourthRootField(10).one() + FourthRootField(11).one()
