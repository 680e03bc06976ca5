import numpy as np
import pytest

from ergolab.errors import HorizonExceeded
from ergolab.mixing_lab import FiniteChain, LatticeChain, induced_block_distribution, recurrence_profile
from ergolab.mixing_lab.walks import independence_test


def test_zero_horizon():
    r = recurrence_profile(2, 0, 5, 0.2, seed=1)
    assert r.returns.tolist() == [0] * 5


def test_holding_forever_counts_every_step():
    # the convention counts every t >= 1 at the origin, repeats while holding included
    r = recurrence_profile(1, 100, 3, 1.0, seed=1)
    assert r.returns.tolist() == [100] * 3
    assert "including repeats while holding" in r.convention


def test_profile_is_reproducible_and_monotone():
    a = recurrence_profile(2, 2000, 20, 0.2, seed=7, checkpoints=[10, 100, 1000])
    b = recurrence_profile(2, 2000, 20, 0.2, seed=7, checkpoints=[10, 100, 1000])
    assert np.array_equal(a.counts, b.counts)
    assert a.checkpoints == [10, 100, 1000, 2000]
    assert np.all(np.diff(a.counts, axis=1) >= 0)
    assert a.to_dict()["mean_returns"] == a.means()


def test_invalid_arguments():
    with pytest.raises(ValueError):
        recurrence_profile(2, 10, 0)
    with pytest.raises(ValueError):
        recurrence_profile(2, 10, 1, hold_prob=1.5)


def test_two_cycle_single_block():
    rep = induced_block_distribution(FiniteChain([[0, 1], [1, 0]]), 0, 100, seed=3)
    assert rep.top == [((0, 1), 100)]
    assert rep.lengths.tolist() == [2] * 100
    assert rep.censored == 0


def test_block_lengths_are_excursion_lengths():
    rng = np.random.default_rng(0)
    chain = LatticeChain(2, 0.2)
    from ergolab.rng import make_rng

    blocks, lengths, censored = chain.excursions(make_rng(4, "blocks"), 0, 300, 10_000)
    assert [len(b) for b in blocks] == lengths
    for b in blocks:
        codes = np.frombuffer(b, dtype=np.uint8)
        pos = np.zeros(2, dtype=int)
        first_return = None
        for t, c in enumerate(codes, start=1):
            if c < 4:
                pos[c >> 1] += -1 if c & 1 else 1
            if not pos.any():
                first_return = t
                break
        assert first_return == len(codes)


def test_finite_chain_blocks_start_at_base():
    P = [[0.2, 0.5, 0.3], [0.4, 0.0, 0.6], [0.5, 0.5, 0.0]]
    rep = induced_block_distribution(FiniteChain(P), 0, 2000, seed=5)
    assert all(b[0] == 0 and 0 not in b[1:] for b, _ in rep.top)
    assert rep.lengths.sum() >= 2000
    assert rep.independent


def test_reducible_chain_rejected():
    with pytest.raises(ValueError):
        induced_block_distribution(FiniteChain([[1, 0], [0, 1]]), 0, 10)


def test_horizon_exceeded():
    with pytest.raises(HorizonExceeded):
        induced_block_distribution(LatticeChain(4, 0.2), 0, 50, seed=1, cap=3, max_censored=0.1)


def test_dependent_blocks_detected():
    labels = ["x", "y"] * 500
    chi2, dof, p = independence_test(labels, 2)
    assert p < 1e-6 and dof == 1
