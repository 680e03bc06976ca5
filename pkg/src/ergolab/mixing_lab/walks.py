"""Lazy lattice walks: return counts (recurrence in Z^2 against transience in
Z^4) and the return-block structure of the walk induced on its base state."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2_contingency

from .. import kernels
from ..errors import HorizonExceeded
from ..rng import make_rng

DEFAULT_HOLD = 0.2
DEFAULT_CHECKPOINTS = (1_000, 10_000, 100_000)


def lazy_codes(rng, d, T, hold_prob):
    """Move codes: 2i / 2i+1 step +e_i / -e_i, code 2d holds."""
    u = rng.random(T)
    moves = rng.integers(0, 2 * d, size=T, dtype=np.uint8)
    return np.where(u < hold_prob, np.uint8(2 * d), moves).astype(np.uint8)


@dataclass
class RecurrenceProfile:
    """Per-trial counts of times t >= 1 spent at the origin."""

    d: int
    T: int
    trials: int
    hold_prob: float
    seed: int
    checkpoints: list
    counts: np.ndarray  # shape (trials, len(checkpoints))
    convention: str = "every t >= 1 with position 0 counts, including repeats while holding"

    @property
    def returns(self):
        """Return counts at the full horizon T."""
        return self.counts[:, -1]

    def means(self):
        return [float(x) for x in self.counts.mean(axis=0)]

    def to_dict(self):
        return {
            "d": self.d,
            "T": self.T,
            "trials": self.trials,
            "hold_prob": self.hold_prob,
            "seed": self.seed,
            "checkpoints": list(self.checkpoints),
            "mean_returns": self.means(),
            "convention": self.convention,
            "kernel": kernels.BACKEND,
        }


def recurrence_profile(d, T, trials, hold_prob=DEFAULT_HOLD, seed=0, checkpoints=None) -> RecurrenceProfile:
    """Simulate ``trials`` lazy symmetric walks of length T on Z^d.

    Each trial draws from its own stream (seed, "recurrence", d, trial);
    counts at all ``checkpoints`` come from the same walks.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= hold_prob <= 1:
        raise ValueError("hold_prob must lie in [0, 1]")
    cps = sorted({int(c) for c in (checkpoints or []) if 0 <= c <= T} | {int(T)})
    cp = np.array(cps, dtype=np.int64)
    counts = np.zeros((trials, len(cps)), dtype=np.int64)
    for k in range(trials):
        rng = make_rng(seed, "recurrence", d, k)
        codes = lazy_codes(rng, d, T, hold_prob)
        counts[k] = kernels.lattice_return_counts(codes, d, cp)
    return RecurrenceProfile(d, T, trials, hold_prob, seed, cps, counts)


# ---------------------------------------------------------------------------
# finite-state chains and induced blocks


class FiniteChain:
    """Markov chain on states 0..n-1 with transition matrix P."""

    def __init__(self, P, names=None):
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("P must be square")
        if np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0):
            raise ValueError("rows of P must be probability vectors")
        self.P = P
        self.names = list(names) if names is not None else list(range(len(P)))
        self._cum = np.cumsum(P, axis=1)
        self._cum[:, -1] = 1.0

    def is_irreducible(self):
        n = len(self.P)
        adj = self.P > 0
        for start in range(n):
            seen = {start}
            stack = [start]
            while stack:
                i = stack.pop()
                for j in np.flatnonzero(adj[i]):
                    if j not in seen:
                        seen.add(int(j))
                        stack.append(int(j))
            if len(seen) != n:
                return False
        return True

    def excursions(self, rng, a0, count, cap):
        """Blocks (a0, x_1, ..., x_{k-1}) until the chain is back at a0."""
        blocks, lengths, censored = [], [], 0
        for _ in range(count):
            path = [a0]
            x = a0
            while True:
                x = int(np.searchsorted(self._cum[x], rng.random(), side="right"))
                if x == a0:
                    blocks.append(tuple(path))
                    lengths.append(len(path))
                    break
                path.append(x)
                if len(path) >= cap:
                    censored += 1
                    break
        return blocks, lengths, censored


class LatticeChain:
    """The lazy symmetric walk on Z^d seen as a chain; blocks are move codes."""

    def __init__(self, d, hold_prob=DEFAULT_HOLD):
        self.d = d
        self.hold_prob = hold_prob

    def is_irreducible(self):
        # the moves +-e_i generate Z^d as soon as moving is possible
        return self.hold_prob < 1 and self.d >= 1

    def excursions(self, rng, a0, count, cap, chunk=1 << 18):
        if a0 not in (None, 0) and any(a0):
            raise ValueError("the base state of the lattice chain is the origin")
        blocks, lengths, censored = [], [], 0
        pending = np.zeros(0, dtype=np.uint8)
        while len(blocks) < count:
            codes = np.concatenate([pending, lazy_codes(rng, self.d, chunk, self.hold_prob)])
            ls, cens, consumed = kernels.lattice_excursions(codes, self.d, cap)
            start = 0
            for n, c in zip(ls.tolist(), cens.tolist()):
                if c:
                    censored += 1
                else:
                    blocks.append(codes[start : start + n].tobytes())
                    lengths.append(n)
                    if len(blocks) == count:
                        break
                start += n
            pending = codes[consumed:]
        return blocks, lengths, censored


@dataclass
class BlockReport:
    blocks: int
    top: list  # (block, count) pairs, most frequent first
    other: int
    lengths: np.ndarray
    censored: int
    chi2: float
    dof: int
    p_value: float
    alpha: float
    meta: dict = field(default_factory=dict)

    @property
    def censored_mass(self):
        return self.censored / max(1, self.blocks + self.censored)

    @property
    def independent(self):
        return self.p_value >= self.alpha

    def to_dict(self):
        return {
            "blocks": self.blocks,
            "top": [[_block_label(b), c] for b, c in self.top],
            "other": self.other,
            "mean_length": float(np.mean(self.lengths)) if len(self.lengths) else 0.0,
            "censored": self.censored,
            "censored_mass": self.censored_mass,
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "independent": self.independent,
            "meta": self.meta,
        }


def _block_label(b):
    if isinstance(b, bytes):
        return "".join(str(x) for x in b)
    return list(b)


def independence_test(labels, K):
    """Chi-square test of consecutive block categories (top K plus "other")."""
    freq = Counter(labels)
    top = [b for b, _ in sorted(freq.items(), key=lambda kv: (-kv[1], repr(kv[0])))[:K]]
    cat = {b: i for i, b in enumerate(top)}
    other = len(top)
    codes = np.array([cat.get(b, other) for b in labels], dtype=np.int64)
    ncat = other + 1 if any(c == other for c in codes) else other
    if ncat < 2 or len(codes) < 3:
        return 0.0, 0, 1.0
    table = np.zeros((ncat, ncat), dtype=np.int64)
    np.add.at(table, (codes[:-1], codes[1:]), 1)
    keep_r = table.sum(axis=1) > 0
    keep_c = table.sum(axis=0) > 0
    table = table[keep_r][:, keep_c]
    if min(table.shape) < 2:
        return 0.0, 0, 1.0
    chi2, p, dof, _ = chi2_contingency(table, correction=False)
    return float(chi2), int(dof), float(p)


def induced_block_distribution(
    chain, a0, samples, seed=0, cap=10_000, top_k=8, alpha=0.01, max_censored=0.5
) -> BlockReport:
    """Empirical law of return blocks to a0 and an independence check.

    Excursions longer than ``cap`` are censored (the walk restarts at a0);
    ``HorizonExceeded`` is raised when more than ``max_censored`` of them are.
    """
    if not chain.is_irreducible():
        raise ValueError("chain is not irreducible on its declared state space")
    rng = make_rng(seed, "blocks")
    blocks, lengths, censored = chain.excursions(rng, a0, samples, cap)
    total = len(blocks) + censored
    if total == 0 or censored / total > max_censored:
        raise HorizonExceeded(f"{censored} of {total} excursions exceeded the cap {cap}")
    freq = Counter(blocks)
    top = sorted(freq.items(), key=lambda kv: (-kv[1], repr(kv[0])))[:top_k]
    chi2, dof, p = independence_test(blocks, top_k)
    return BlockReport(
        blocks=len(blocks),
        top=top,
        other=len(blocks) - sum(c for _, c in top),
        lengths=np.array(lengths, dtype=np.int64),
        censored=censored,
        chi2=chi2,
        dof=dof,
        p_value=p,
        alpha=alpha,
        meta={"cap": cap, "top_k": top_k, "seed": seed},
    )
