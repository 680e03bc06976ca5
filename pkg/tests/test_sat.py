import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.errors import SearchExhausted
from ergolab.measures import CAUCHY, density_mass
from ergolab.mixing_lab import random_interval_union, sat_blowup_search
from ergolab.mixing_lab.sat import SAT_ITERATION_CAP, image_intervals
from ergolab.rng import make_rng


def cauchy_window(s):
    # Cauchy mass of (-s, s)
    return 2 * math.atan(s) / math.pi


def test_symmetric_interval():
    r = sat_blowup_search([(-1, 1)], 0.99)
    assert r.achieved >= 0.99
    # a pure dilation by s gives mass 2 arctan(s) / pi
    assert r.gamma.q == 0
    assert abs(r.achieved - cauchy_window(float(r.gamma.s))) < 1e-12
    assert cauchy_window(float(r.gamma.s) / 2) < 0.99


def test_identity_when_already_heavy():
    s = math.tan(math.pi / 2 * (1 - 1e-9))
    r = sat_blowup_search([(-s, s)], 0.99)
    assert r.iterations == 0 and r.gamma.q == 0 and r.gamma.s == 1


def test_small_mass_union_within_cap():
    rng = make_rng(5, "sat-small")
    A = random_interval_union(rng, 20, (0.1, 0.1 + 1e-12))
    assert abs(density_mass(A) - 0.1) < 1e-9
    r = sat_blowup_search(A, 0.99)
    assert r.achieved >= 0.99 and r.iterations <= SAT_ITERATION_CAP


def test_exhaustion_is_reported():
    with pytest.raises(SearchExhausted):
        sat_blowup_search([(0, 1e-3)], 0.99, max_iter=2)
    with pytest.raises(ValueError):
        sat_blowup_search([], 0.99)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 20))
def test_random_unions_blow_up(seed, k):
    A = random_interval_union(make_rng(seed, "sat"), k)
    m0 = density_mass(A)
    assert 0.05 <= m0 <= 0.95 + 1e-12
    r = sat_blowup_search(A, 0.99)
    assert r.achieved >= 0.99
    assert r.iterations <= SAT_ITERATION_CAP
    assert r.gamma.s > 0
    # the reported mass is the mass of the image under the returned element
    assert abs(density_mass(image_intervals(r.gamma, A), CAUCHY) - r.achieved) < 1e-12
