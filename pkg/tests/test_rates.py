from fractions import Fraction

import pytest

from dkslab.rates import annotate_rates, epsilon, optimal_gamma, round_exponent, t_of


def test_two_over_fifty_three():
    delta = Fraction(2)
    g = optimal_gamma(delta)
    assert g == Fraction(2, 33)
    assert epsilon(g, delta) == Fraction(2, 53)


def test_t():
    assert t_of(Fraction(3, 2)) == 3
    assert t_of(2) == 5


def test_round_exponent_vanishes_at_optimum():
    for two_delta in (3, 4, 5, 6):
        d = Fraction(two_delta, 2)
        assert round_exponent(optimal_gamma(d), d) == 0


def test_spot_value_two_delta_six():
    d = Fraction(3)
    g = optimal_gamma(d)
    assert g == 1 / (10 + Fraction(13, 4))
    assert epsilon(g, d) == g / (1 + 18 * g)


def test_epsilon_increasing_in_gamma():
    d = Fraction(2)
    vals = [epsilon(Fraction(k, 100), d) for k in range(1, 20)]
    assert vals == sorted(vals)


def test_delta_must_exceed_one():
    with pytest.raises(ValueError):
        optimal_gamma(1)


def test_annotation_fields():
    a = annotate_rates(3, 2, 300)
    assert a["epsilon_optimal"] == "2/53"
    assert a["form"] == "asymptotic-form"
    assert a["t"] == "5" and a["two_delta"] == "4"
