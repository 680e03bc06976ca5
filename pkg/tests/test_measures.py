import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from ergolab.errors import NotReduced
from ergolab.measures import (
    CAUCHY,
    EmpiricalMeasure,
    all_level_masses,
    concentration_score,
    cylinder_pushforward,
    density_mass,
    distance_to_point_masses,
    eta_cylinder,
    eta_discretization,
    free_group_uniform,
    mu_p_cylinder,
    one_letter_extensions,
    pushforward,
    reduced_prefixes,
    rn_derivative_odometer,
)
from ergolab.randomwalk import stationarity_defect
from ergolab.systems import AffineAction, AffineElement, FreeWord, OdometerPoint, bind, odometer_step


def test_eta_examples():
    assert eta_cylinder("a") == Fraction(1, 4)
    assert eta_cylinder("ab") == Fraction(1, 12)
    assert eta_cylinder("") == 1
    with pytest.raises(NotReduced):
        eta_cylinder("aA")


@pytest.mark.parametrize("n", range(1, 9))
def test_eta_level_sums(n):
    assert len(list(reduced_prefixes(n))) == 4 * 3 ** (n - 1)
    assert all_level_masses(n, "eta") == 1


def test_kolmogorov_consistency():
    for n in range(0, 7):
        for pre in reduced_prefixes(n):
            ext = one_letter_extensions(pre)
            assert len(ext) == (4 if n == 0 else 3)
            assert eta_cylinder(pre) == sum(eta_cylinder(e) for e in ext)


def test_mu_p_examples():
    assert mu_p_cylinder((0,), Fraction(1, 3)) == Fraction(1, 3)
    assert mu_p_cylinder((1, 1, 0), Fraction(1, 3)) == Fraction(4, 27)
    for n in range(1, 17):
        assert all_level_masses(n, Fraction(1, 3)) == 1


def test_rn_derivative_examples():
    p = Fraction(1, 3)
    assert rn_derivative_odometer(OdometerPoint((0, 1, 0)), Fraction(1, 2)) == 1
    assert rn_derivative_odometer(OdometerPoint((0, 0)), p) == (1 - p) / p
    assert rn_derivative_odometer(OdometerPoint((1, 1, 0)), p) == mu_p_cylinder((0, 0, 1), p) / mu_p_cylinder((1, 1, 0), p)


@pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)])
def test_rn_derivative_matches_cylinder_quotient(p):
    for n in range(1, 11):
        for bits in product((0, 1), repeat=n):
            if all(bits):
                continue
            w = OdometerPoint(bits)
            tw, _ = odometer_step(w)
            assert rn_derivative_odometer(w, p) == mu_p_cylinder(tw.bits, p) / mu_p_cylinder(bits, p)


def test_density_mass_examples():
    assert density_mass([]) == 0
    assert density_mass([(-math.inf, math.inf)]) == 1
    assert abs(density_mass([(-1, 1)]) - 0.5) < 1e-15
    quad, _ = integrate.quad(CAUCHY.density, -1, 1)
    assert abs(quad - 0.5) < 1e-12


@given(st.lists(st.tuples(st.floats(-30, 30), st.floats(0.01, 5)), min_size=1, max_size=6))
def test_density_mass_matches_quadrature(raw):
    ivs = [(a, a + w) for a, w in raw]
    # quadrature over the merged union
    xs = sorted(ivs)
    merged = []
    for a, b in xs:
        if merged and a < merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    q = sum(integrate.quad(CAUCHY.density, a, b)[0] for a, b in merged)
    assert abs(density_mass(ivs) - q) < 1e-10


def test_pushforward_examples():
    mu = EmpiricalMeasure("real", [Fraction(1), Fraction(3)], [Fraction(1, 2), Fraction(1, 2)])
    same = pushforward(mu, lambda x: x)
    assert same.points == mu.points and same.weights == mu.weights
    const = pushforward(mu, lambda x: Fraction(0))
    assert const.points == [0] and const.weights == [1]
    img = pushforward(mu, bind(AffineAction(), AffineElement(1, 2)))
    assert sorted(img.points) == [3, 7]


def test_concentration_examples():
    one = EmpiricalMeasure("real", [0.0], [1.0])
    assert concentration_score(one, 0.1) == 1
    two = EmpiricalMeasure("real", [0.0, 1.0], [0.5, 0.5])
    assert concentration_score(two, 0.1) == 0.5
    assert distance_to_point_masses(two, 0.1) == 0.5
    n = 100
    grid = EmpiricalMeasure("projective", np.arange(n) * math.pi / n, np.full(n, 1.0 / n), check=False)
    assert abs(concentration_score(grid, 0.1 * math.pi) - 0.1) <= 0.01 + 1e-12


def test_boundary_concentration_levels():
    from ergolab.systems import BoundaryPoint

    pts = [BoundaryPoint("aba"), BoundaryPoint("abb"), BoundaryPoint("bab")]
    mu = EmpiricalMeasure("boundary", pts, [Fraction(1, 3)] * 3)
    # eps = 1/3 is the ball of the first letter; eps = 1/9 of the first two
    assert concentration_score(mu, 1 / 3) == pytest.approx(2 / 3)
    assert concentration_score(mu, 1 / 9) == pytest.approx(2 / 3)
    assert concentration_score(mu, 1 / 27) == pytest.approx(1 / 3)


def test_eta_discretization_is_stationary_exactly():
    m = free_group_uniform()
    for level in (1, 2, 3, 4):
        assert stationarity_defect(m, eta_discretization(level)) == 0


def test_cylinder_pushforward_total_mass_and_non_stationary():
    mu = EmpiricalMeasure("cylinder", [(2, 2)], [Fraction(1)])
    img = cylinder_pushforward(mu, FreeWord("b"))
    assert sum(img.weights) == 1
    assert stationarity_defect(free_group_uniform(), mu) > 0


def test_stationary_under_point_mass():
    from ergolab.measures import StepDistribution

    g = AffineElement(0, 2)
    mu = EmpiricalMeasure("real", [Fraction(0)], [Fraction(1)])
    assert stationarity_defect(StepDistribution.point_mass(g), mu, AffineAction()) == 0


def test_measure_json_round_trip():
    mu = eta_discretization(2)
    back = EmpiricalMeasure.from_json(mu.to_json())
    assert back.points == mu.points and back.weights == mu.weights
