import os
import subprocess
import sys

import numpy as np
import pytest

from ergolab import kernels
from ergolab.mixing_lab.walks import lazy_codes
from ergolab.rng import make_rng

IMPLS = sorted(kernels.IMPLEMENTATIONS.items())


def walk_oracle(codes, d):
    pos = [0] * d
    hits = []
    for c in codes:
        if c < 2 * d:
            pos[c >> 1] += -1 if c & 1 else 1
        hits.append(not any(pos))
    return hits


def returns_oracle(codes, d, checkpoints):
    hits = walk_oracle(codes, d)
    return [sum(hits[:c]) for c in checkpoints]


def excursions_oracle(codes, d, cap):
    lengths, censored = [], []
    i = 0
    while i < len(codes):
        pos = [0] * d
        n = 0
        while i + n < len(codes) and n < cap:
            c = codes[i + n]
            if c < 2 * d:
                pos[c >> 1] += -1 if c & 1 else 1
            n += 1
            if not any(pos):
                break
        if not any(pos):
            lengths.append(n)
            censored.append(0)
        elif n == cap:
            lengths.append(n)
            censored.append(1)
        else:
            break
        i += n
    return lengths, censored, i


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("d", [1, 2, 4])
def test_return_counts(name, impl, d):
    rng = make_rng(1, "kernel", d)
    codes = lazy_codes(rng, d, 3000, 0.2)
    cps = np.array([0, 1, 10, 500, 3000])
    assert impl.lattice_return_counts(codes, d, cps).tolist() == returns_oracle(codes.tolist(), d, cps.tolist())


@pytest.mark.parametrize("name,impl", IMPLS)
def test_return_counts_edge_cases(name, impl):
    empty = np.zeros(0, dtype=np.uint8)
    assert impl.lattice_return_counts(empty, 2, np.array([0])).tolist() == [0]
    hold = np.full(50, 4, dtype=np.uint8)  # d = 2, code 2d holds
    assert impl.lattice_return_counts(hold, 2, np.array([50])).tolist() == [50]


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("cap", [3, 50, 10_000])
def test_excursions(name, impl, cap):
    rng = make_rng(2, "kernel-exc")
    codes = lazy_codes(rng, 2, 5000, 0.2)
    ls, cens, consumed = impl.lattice_excursions(codes, 2, cap)
    ol, oc, oi = excursions_oracle(codes.tolist(), 2, cap)
    assert ls.tolist() == ol and cens.tolist() == oc and consumed == oi
    assert int(ls.sum()) == consumed


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("depth", [8, 32, 64])
def test_odometer_square(name, impl, depth):
    rng = make_rng(3, "kernel-odo", depth)
    P = 20
    steps = 40 if depth == 8 else 300
    every = steps // 4
    top = 2**depth - 1
    xs = [int(rng.integers(0, min(top - steps, 2**62))) for _ in range(P)]
    ys = [int(rng.integers(0, min(top - steps, 2**62))) for _ in range(P)]
    xs[0] = top - 5  # overflows after 5 steps
    a = np.array([[(x >> i) & 1 for i in range(depth)] for x in xs], dtype=np.uint8)
    b = np.array([[(y >> i) & 1 for i in range(depth)] for y in ys], dtype=np.uint8)
    rec, maxdev, ovf = impl.odometer_square(a.copy(), b.copy(), steps, every)
    mod = 2**depth
    for p in range(P):
        d0 = (ys[p] - xs[p]) % mod
        assert int(rec[p, 0]) == d0
        if p == 0:
            assert int(ovf[p]) == 6
            continue
        assert int(ovf[p]) == -1
        assert int(maxdev[p]) == 0
        assert [int(v) for v in rec[p]] == [d0] * (steps // every + 1)


def test_implementations_agree_on_long_runs():
    if len(IMPLS) < 2:
        pytest.skip("compiled kernels not built")
    rng = make_rng(4, "kernel-agree")
    codes = lazy_codes(rng, 4, 200_000, 0.2)
    cps = np.array([1000, 10_000, 200_000])
    outs = [impl.lattice_return_counts(codes, 4, cps).tolist() for _, impl in IMPLS]
    assert all(o == outs[0] for o in outs)


def test_pure_python_switch():
    env = dict(os.environ, ERGOLAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from ergolab import kernels; print(kernels.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
