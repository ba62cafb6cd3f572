"""Exponent calculus and bootstrap recursions."""

from fractions import Fraction

import numpy as np
import pytest

from src.diagnostics import (
    ALPHA_STAR,
    alikakos_holder_exponents,
    alikakos_sequence,
    exponent_report,
    fixed_point_g,
    gradient_space_exponent,
    moser_interpolation_theta,
    moser_sequence,
    moser_step_exponents,
    time_integrability_exponent,
)
from src.diagnostics.exponents import (
    dual_exponent,
    gradient_exponent,
    passes_alpha_star,
    passes_six_fifths,
    theta,
    theta_tilde,
)
from src.harness.tables import exponent_rows, exponent_table
from src.model import ParameterError


def test_exact_exponents_at_five_thirds():
    alpha = Fraction(5, 3)
    assert theta(alpha) == Fraction(7, 12)
    assert gradient_exponent(alpha) == Fraction(1, 8)
    assert theta_tilde(alpha) is None
    assert dual_exponent(alpha) == Fraction(5, 4)
    assert theta_tilde(Fraction(5, 4)) == Fraction(3, 13)


def test_six_fifths_boundary():
    assert gradient_exponent(Fraction(6, 5)) == 1
    assert not passes_six_fifths(Fraction(6, 5))
    assert passes_six_fifths(Fraction(121, 100))
    assert not passes_six_fifths(Fraction(119, 100))


def test_alpha_star_threshold():
    assert ALPHA_STAR == pytest.approx(1.2202, abs=1e-4)
    assert 7 * ALPHA_STAR**2 - 11 * ALPHA_STAR + 3 == pytest.approx(0.0, abs=1e-12)
    assert float(fixed_point_g(ALPHA_STAR)) == pytest.approx(0.5, abs=1e-12)
    assert passes_alpha_star(Fraction(1221, 1000))
    assert not passes_alpha_star(Fraction(122, 100))
    assert passes_alpha_star(1.3)
    assert not passes_alpha_star(1.2)


def test_exponent_report():
    report = exponent_report(Fraction(5, 3))
    assert report.theta == pytest.approx(7 / 12)
    assert report.gradient_exponent == pytest.approx(1 / 8)
    assert report.passes_6_5
    assert report.passes_alpha_star
    with pytest.raises(ParameterError, match="exceed 1"):
        exponent_report(1)


def test_space_and_time_exponents():
    assert gradient_space_exponent(1.3) == pytest.approx(2.6 / 1.7)
    assert gradient_space_exponent(Fraction(5, 3)) == pytest.approx(5 / 3)
    assert time_integrability_exponent(1.3) == pytest.approx(8.75)
    with pytest.raises(ParameterError):
        time_integrability_exponent(1.5)
    with pytest.raises(ParameterError):
        fixed_point_g(Fraction(3, 2))


def test_moser_sequence_reaches_target():
    report = moser_sequence(1.3, 30)
    assert report.gammas[0] == pytest.approx(0.3)
    assert report.gammas[1] == pytest.approx(1.7583333333333333)
    assert report.fixed_point == pytest.approx(2.4875)
    assert report.gammas[-1] == pytest.approx(2.4875, abs=1e-10)
    assert report.consistent
    assert report.increasing
    assert report.meets_target


def test_moser_sequence_below_target():
    report = moser_sequence(1.21, 10)
    assert report.limit_exponent == pytest.approx(1.0 + 0.3961 / 1.16)
    assert not report.meets_target


@pytest.mark.parametrize("alpha", [Fraction(6, 5), 1.2, 1.5, 1.1])
def test_moser_range(alpha):
    with pytest.raises(ParameterError, match="6/5 < alpha < 3/2"):
        moser_sequence(alpha, 5)


@pytest.mark.parametrize("alpha", [1.25, 1.3, 1.45])
def test_moser_step_closes(alpha):
    report = moser_sequence(alpha, 6)
    for gamma_m in report.gammas[:-1]:
        step = moser_step_exponents(alpha, gamma_m)
        assert step.closes
        assert 0.0 <= step.theta <= 1.0
        assert step.theta == pytest.approx(moser_interpolation_theta(alpha, step.gamma_next, gamma_m))


def test_alikakos_doubling():
    report = alikakos_sequence(2, 1.5, 3)
    assert report.gammas == pytest.approx([2.0, 3.5, 6.5, 12.5])
    assert report.consistent
    assert report.bounded
    with pytest.raises(ParameterError, match="gamma0 \\+ 1 must exceed alpha"):
        alikakos_sequence(0.4, 1.5, 3)
    with pytest.raises(ParameterError, match="gamma0 must be positive"):
        alikakos_sequence(0, 1.5, 3)


def test_recursions_match_closed_forms_on_random_draws():
    rng = np.random.default_rng(20240517)
    for _ in range(1000):
        alpha = float(rng.uniform(1.2001, 1.4999))
        report = moser_sequence(alpha, int(rng.integers(0, 41)))
        assert report.consistent
        assert report.max_deviation <= 1e-12

        a = float(rng.uniform(1.01, 3.0))
        gamma0 = a - 1.0 + float(rng.uniform(0.1, 5.0))
        doubling = alikakos_sequence(gamma0, a, int(rng.integers(0, 31)))
        assert doubling.consistent
        assert doubling.bounded


@pytest.mark.parametrize("eta", [0.1, 1.0, 7.0])
def test_holder_exponents(eta):
    exps = alikakos_holder_exponents(eta)
    assert exps.balanced
    assert exps.young_pair
    assert 0.0 < exps.theta < 1.0


def test_exponent_table():
    rows = exponent_rows([Fraction(5, 3), Fraction(13, 10)])
    assert rows[0]["theta"] == pytest.approx(7 / 12)
    assert rows[0]["moser_limit"] is None
    assert rows[1]["moser_limit"] == pytest.approx(3.4875)
    text = exponent_table([Fraction(5, 3), Fraction(13, 10)])
    assert "5/3" in text
    assert "13/10" in text
    assert text.startswith("╔")
