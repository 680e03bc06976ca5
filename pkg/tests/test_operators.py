import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ergolab.experiments import STATIONARY_DEFECT_BOUND
from ergolab.measures import EmpiricalMeasure, StepDistribution, eta_cylinder, eta_discretization, free_group_uniform
from ergolab.operators import (
    CylinderGrid,
    FiniteGrid,
    MarkovOperator,
    ProjectiveGrid,
    TestFunction,
    cesaro_apply,
    cylinder_family,
    markov_apply,
    stationary_iterate,
    table_apply,
    trig_family,
    unique_ergodicity_test,
)
from ergolab.randomwalk import cesaro_average, convolve_power
from ergolab.systems import FreeWord, MobiusMap, ProjectiveAction

M = free_group_uniform()


@pytest.fixture(scope="module")
def act(schottky):
    return ProjectiveAction(schottky.gens)


def rotation(phi):
    c, s = math.cos(phi), math.sin(phi)
    return MobiusMap(c, -s, s, c)


def test_constants_are_fixed(act):
    grid = ProjectiveGrid(90)
    f = TestFunction(grid, np.full(90, 0.37))
    assert np.array_equal(markov_apply(M, f, act).values, f.values)
    assert np.array_equal(cesaro_apply(M, f, act, 5).values, f.values)


def test_identity_step_leaves_f(act):
    grid = ProjectiveGrid(90)
    f = trig_family(grid, 1)[0]
    e = StepDistribution.point_mass(FreeWord())
    assert np.allclose(markov_apply(e, f, act).values, f.values, atol=1e-15)


def interp(values, theta, n):
    u = (theta % math.pi) / (math.pi / n)
    i = int(math.floor(u))
    t = u - i
    return (1 - t) * values[i % n] + t * values[(i + 1) % n]


def test_direct_summation_720(act):
    n = 720
    grid = ProjectiveGrid(n)
    f = trig_family(grid, 1)[0]  # cos 2 theta
    out = markov_apply(M, f, act).values
    images = {g: act.many(g, grid.points) for g in M.support}
    direct = np.array([sum(0.25 * interp(f.values, float(images[g][i]), n) for g in M.support) for i in range(n)])
    assert np.max(np.abs(out - direct)) < 1e-14
    analytic = np.array([sum(0.25 * math.cos(2 * float(images[g][i])) for g in M.support) for i in range(n)])
    # linear interpolation error of cos 2 theta is at most 4 h^2 / 8
    assert np.max(np.abs(out - analytic)) <= 4 * grid.spacing**2 / 8 + 1e-15


@pytest.mark.parametrize("j", range(1, 6))
def test_two_routes_on_rotation_grid(j):
    # rotations by one and two grid steps keep the 36-point grid invariant
    rot = ProjectiveAction((rotation(math.pi / 36), rotation(2 * math.pi / 36)))
    grid = ProjectiveGrid(36)
    for f in trig_family(grid, 3):
        iterated = cesaro_apply(M, f, rot, j).values
        tabled = table_apply(cesaro_average(M, j), f, rot).values
        assert np.max(np.abs(iterated - tabled)) <= 1e-10
        power = table_apply(convolve_power(M, j), f, rot).values
        h = f.values
        op = MarkovOperator(M, grid, rot)
        for _ in range(j):
            h = op(h)
        assert np.max(np.abs(power - h)) <= 1e-10


grid60 = ProjectiveGrid(60)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 60, elements=st.floats(-10, 10)))
def test_contraction_and_positivity(vals):
    op = MarkovOperator(M, grid60, ProjectiveAction(_gens()))
    out = op(vals)
    assert out.max() - out.min() <= vals.max() - vals.min() + 1e-12
    assert out.min() >= vals.min() - 1e-12 and out.max() <= vals.max() + 1e-12
    pos = np.abs(vals)
    assert op(pos).min() >= 0


def _gens():
    from ergolab.systems import schottky_pair

    return schottky_pair(3).gens


def test_unitality_exact(act):
    op = MarkovOperator(M, ProjectiveGrid(720), act)
    assert np.all(op(np.ones(720)) == 1.0)


def test_one_point_space():
    grid = FiniteGrid(["x"])
    f = TestFunction(grid, np.array([2.5]), name="c")
    rep = unique_ergodicity_test(M, lambda g, p: p, [f], 10, 0.01)
    assert all(v == 0 for v in rep.oscillations["c"])
    assert rep.passed


def test_identity_walk_never_averages(act):
    grid = ProjectiveGrid(180)
    e = StepDistribution.point_mass(FreeWord())
    rep = unique_ergodicity_test(e, act, trig_family(grid, 1)[:1], 20, 0.05, max_refinements=0)
    assert rep.oscillations["cos2"] == pytest.approx([2.0] * 20)
    assert not rep.passed
    assert "inconsistent" in rep.verdict


def test_schottky_decay_and_report(act):
    grid = ProjectiveGrid(180)
    rep = unique_ergodicity_test(M, act, trig_family(grid, 2), 60, 0.2)
    for fid in rep.function_ids:
        osc = rep.oscillations[fid]
        assert len(osc) == 60 and min(osc) >= 0
    assert rep.passed
    csv_lines = rep.to_csv().split("\r\n")
    assert csv_lines[0] == "n,function,oscillation" and len(csv_lines) == 1 + 4 * 60 + 1
    assert json.loads(rep.to_json())["passed"] is True


def test_refinement_when_plateau_is_grid_scale():
    grid = ProjectiveGrid(8)
    e = StepDistribution.point_mass(FreeWord())
    f = TestFunction.from_callable(grid, lambda t: 1e-3 * math.cos(2 * t), lipschitz=1.0, name="tiny")
    rep = unique_ergodicity_test(e, ProjectiveAction(_gens()), [f], 3, 1e-4, max_refinements=2)
    assert rep.refinements == 2 and rep.grid_size == 32
    assert [h["grid_size"] for h in rep.history] == [8, 16, 32]


def test_cylinder_grid_preserves_eta_mean():
    grid = CylinderGrid(4)
    eta = np.array([float(eta_cylinder(c)) for c in grid.points])
    op = MarkovOperator(M, grid)
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = rng.normal(size=len(grid))
        out = op(v)
        assert abs(eta @ out - eta @ v) < 1e-12
    fam = cylinder_family(grid, 2)
    assert len(fam) == 4 + 12
    for f in fam:
        out = op(f.values)
        assert out.min() >= 0 and out.max() <= 1


def test_stationary_iterate_exact_cylinders():
    st_ = stationary_iterate(M, None, eta_discretization(4), 3)
    assert st_.defect == 0
    assert sum(st_.measure.weights) == 1


def test_stationary_iterate_fixed_atom(schottky):
    act = ProjectiveAction(schottky.gens)
    a = StepDistribution.point_mass(FreeWord("a"))
    theta0 = EmpiricalMeasure("projective", np.array([0.0]), np.array([1.0]), check=False)
    st_ = stationary_iterate(a, act, theta0, 10)
    assert np.all(st_.measure.angles() == 0.0)
    assert st_.defect == 0


def test_stationary_iterate_uniform_start(act):
    k = 1000
    theta0 = EmpiricalMeasure("projective", np.arange(k) * (math.pi / k), np.full(k, 1.0 / k), check=False)
    st_ = stationary_iterate(M, act, theta0, 200, seed=20240611)
    assert st_.defect < STATIONARY_DEFECT_BOUND
    # a point mass is far from stationary
    delta = EmpiricalMeasure("projective", np.array([0.3]), np.array([1.0]), check=False)
    from ergolab.randomwalk import stationarity_defect

    assert stationarity_defect(M, delta, act, "w1") > 0.1
