"""Closed-form rate annotations for the Lasserre gap parameters.

Lower-order ``o(1)`` and ``O(kappa)`` terms are dropped; every annotation
carries ``form = "asymptotic-form"``.
"""
from __future__ import annotations

import math
from fractions import Fraction


def t_of(delta) -> Fraction:
    """Dual-code dimension ``t = 4 delta - 3``."""
    return 4 * Fraction(delta) - 3


def optimal_gamma(delta) -> Fraction:
    """``gamma = 1 / (10 + 6.5 / (delta - 1))``."""
    delta = Fraction(delta)
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    return 1 / (10 + Fraction(13, 2) / (delta - 1))


def epsilon(gamma, delta) -> Fraction:
    """``gamma / (1 + (8 delta - 6) gamma)``; exact for rational inputs."""
    gamma, delta = Fraction(gamma), Fraction(delta)
    return gamma / (1 + (8 * delta - 6) * gamma)


def round_exponent(gamma, delta) -> Fraction:
    """Exponent ``e`` in ``N^e`` rounds:
    ``1 - gamma (8 delta + 4 + 6.5/(delta-1)) / (1 + gamma (8 delta - 6))``."""
    gamma, delta = Fraction(gamma), Fraction(delta)
    top = gamma * (8 * delta + 4 + Fraction(13, 2) / (delta - 1))
    return 1 - top / (1 + gamma * (8 * delta - 6))


def annotate_rates(q: int, delta, n: int) -> dict:
    """Report echo: ``gamma = ln q / ln n`` at the given instance, plus the
    optimised exact values at the same ``delta``."""
    delta = Fraction(delta)
    g_inst = math.log(q) / math.log(n) if n > 1 else float("nan")
    g_opt = optimal_gamma(delta) if delta > 1 else None
    out = {
        "q": q,
        "n": n,
        "two_delta": str(2 * delta),
        "t": str(t_of(delta)),
        "gamma_instance": g_inst,
        "epsilon_instance": float(epsilon(Fraction(g_inst).limit_denominator(10 ** 12), delta)) if n > 1 else None,
        "form": "asymptotic-form",
        "method": "exact",
    }
    if g_opt is not None:
        out.update({
            "gamma_optimal": str(g_opt),
            "epsilon_optimal": str(epsilon(g_opt, delta)),
            "round_exponent_optimal": str(round_exponent(g_opt, delta)),
        })
    return out
