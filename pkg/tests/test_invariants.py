import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.errors import ArcCollision, Overflow
from ergolab.mixing_lab import (
    affine_order_invariant,
    chart_cross_ratio,
    cross_ratio_invariance,
    cross_ratio_invariance_batch,
    cyclic_order_invariant,
    cyclic_order_type,
    odometer_square_batch,
    odometer_square_invariant,
    random_affine_elements,
    random_words,
)
from ergolab.mixing_lab.invariants import mp_bits_for
from ergolab.rng import make_rng
from ergolab.systems import AffineElement, Arc, FreeWord, OdometerPoint, ProjectivePoint, cross_ratio


def slopes(*ts):
    return [ProjectivePoint.from_slope(Fraction(t)) for t in ts]


# ---------------------------------------------------------------------------
# affine order


def test_affine_order_examples():
    w = affine_order_invariant([(0, 1)], [AffineElement(5, 3)])
    assert w.preserved and w.initial == [1]
    w = affine_order_invariant([(1, 0)], [AffineElement(5, 3)])
    assert w.preserved and w.initial == [-1] and w.values == [-1]
    with pytest.raises(ValueError):
        affine_order_invariant([(2, 2)], [AffineElement(0, 1)])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.fractions(-100, 100, max_denominator=50), st.fractions(-100, 100, max_denominator=50)).filter(lambda p: p[0] != p[1]), min_size=1, max_size=10),
       st.integers(0, 2**32))
def test_affine_order_property(pairs, seed):
    elems = random_affine_elements(make_rng(seed, "aff"), 20)
    w = affine_order_invariant(pairs, elems)
    assert w.violations == 0 and w.max_deviation == 0 and w.exact


# ---------------------------------------------------------------------------
# odometer square


def test_odometer_square_examples():
    z = OdometerPoint((0,) * 32)
    one = OdometerPoint((1,) + (0,) * 31)
    w = odometer_square_invariant(z, z, 10_000)
    assert set(w.values) == {0} and w.preserved
    w = odometer_square_invariant(z, one, 100_000, record_every=1000)
    assert set(w.values) == {1} and w.max_deviation == 0


def test_odometer_square_overflow():
    top = OdometerPoint.from_int(252, 8)  # reaches the all-ones pattern after 3 steps
    with pytest.raises(Overflow):
        odometer_square_invariant(top, OdometerPoint((0,) * 8), 5)


def test_odometer_square_matches_integer_oracle():
    rng = make_rng(9, "odo")
    N, steps = 16, 2000
    xs = [int(rng.integers(0, 2**N - steps - 1)) for _ in range(30)]
    ys = [int(rng.integers(0, 2**N - steps - 1)) for _ in range(30)]
    rec, dev = odometer_square_batch([OdometerPoint.from_int(x, N) for x in xs], [OdometerPoint.from_int(y, N) for y in ys], steps, 500)
    for i, (x, y) in enumerate(zip(xs, ys)):
        expect = [((y + s) - (x + s)) % 2**N for s in range(0, steps + 1, 500)]
        assert [int(v) for v in rec[i]] == expect
    assert not np.any(dev)


def test_odometer_square_deep_fallback():
    N = 80
    a = [OdometerPoint.from_int(5, N)]
    b = [OdometerPoint.from_int(2**70, N)]
    rec, dev = odometer_square_batch(a, b, 100, 50)
    assert [int(v) for v in rec[0]] == [2**70 - 5] * 3 and int(dev[0]) == 0


# ---------------------------------------------------------------------------
# cross-ratio


def test_cross_ratio_identity_word(schottky):
    w = cross_ratio_invariance(slopes(0, 1, 2, 5), [FreeWord()], schottky.gens)
    assert w.max_deviation == 0 and w.values == [w.initial]


def test_exact_and_float_backends_agree(schottky):
    words = random_words(make_rng(1, "cr"), 50, 8)
    quad = slopes(0, 1, 2, 5)
    ex = cross_ratio_invariance(quad, words, schottky.gens, "exact")
    fl = cross_ratio_invariance(quad, words, schottky.gens, "float")
    assert ex.max_deviation == 0
    assert fl.max_deviation <= 1e-9
    assert abs(fl.initial - float(ex.initial)) < 1e-12
    assert ex.initial == cross_ratio(*quad) == chart_cross_ratio(*quad)


def test_float_precision_grows_with_word_length(schottky):
    short = mp_bits_for([FreeWord("ab")], schottky.gens)
    long = mp_bits_for([FreeWord("ab" * 10)], schottky.gens)
    assert long > short >= 53


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(-20, 20, max_denominator=9), min_size=4, max_size=4, unique=True), st.integers(0, 2**32))
def test_exact_invariance_property(ts, seed):
    from ergolab.systems import schottky_pair

    words = random_words(make_rng(seed, "w"), 20, 12)
    w = cross_ratio_invariance(slopes(*ts), words, schottky_pair(3).gens)
    assert w.violations == 0 and w.max_deviation == 0


def test_batch_matches_single(schottky):
    words = random_words(make_rng(2, "cr"), 30, 10)
    quads = [slopes(0, 1, 3, 7), slopes(-2, 1, 4, 9)]
    batch = cross_ratio_invariance_batch(quads, words, schottky.gens, "float")
    for q, b in zip(quads, batch):
        single = cross_ratio_invariance(q, words, schottky.gens, "float")
        assert single.values == b.values


# ---------------------------------------------------------------------------
# cyclic order


def test_cyclic_order_identity_and_single_maps(schottky):
    arcs = list(schottky.arcs.values())
    w = cyclic_order_invariant(arcs, [FreeWord(), FreeWord("a"), FreeWord("B")], schottky.gens)
    assert w.preserved and all(v == w.initial for v in w.values)


def test_cyclic_order_type_reversal_is_same_type():
    starts = (0.1, 0.6, 1.2, 2.0)
    ends = [(ProjectivePoint.from_angle(a), ProjectivePoint.from_angle(a + 0.1)) for a in starts]
    # mirror theta -> pi - theta reverses orientation; arcs then run from the image of end to that of start
    mirrored = [(ProjectivePoint.from_angle(math.pi - a - 0.1), ProjectivePoint.from_angle(math.pi - a)) for a in starts]
    assert cyclic_order_type(ends) == cyclic_order_type(mirrored) == (0, 1, 2, 3)
    shuffled = [ends[i] for i in (2, 0, 3, 1)]
    # around the circle the labels now read 1, 3, 0, 2
    assert cyclic_order_type(shuffled) == (0, 2, 1, 3)


def test_cyclic_order_collision():
    p = ProjectivePoint.from_angle(0.5)
    ends = [(p, ProjectivePoint.from_angle(0.7)), (p, ProjectivePoint.from_angle(1.0))]
    with pytest.raises(ArcCollision):
        cyclic_order_type(ends)


def test_cyclic_order_random_words(schottky):
    words = random_words(make_rng(3, "cyc"), 200, 12)
    w = cyclic_order_invariant(list(schottky.arcs.values()), words, schottky.gens)
    assert w.violations == 0


def test_overlapping_arcs_rejected(schottky):
    with pytest.raises(ValueError):
        cyclic_order_invariant([Arc(0.1, 0.5), Arc(0.3, 0.9)], [FreeWord()], schottky.gens)


def test_random_words_are_reduced_and_bounded():
    ws = random_words(make_rng(4, "rw"), 500, 20)
    assert all(len(w) <= 20 for w in ws)
    assert max(len(w) for w in ws) == 20
    assert min(len(w) for w in ws) == 0
    assert all(w[i] != -w[i + 1] for w in ws for i in range(len(w) - 1))
