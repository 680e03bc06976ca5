"""Monte Carlo reachability on product spaces: how often does the walk carry a
sampled pair (x, y) into a target set within n_max steps."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..measures import CAUCHY
from ..randomwalk import identity_of
from ..rng import make_rng
from ..systems import BoundaryAction, sample_boundary_point


@dataclass(frozen=True)
class CylinderPair:
    """C(p) x C(q) on the boundary square."""

    p: tuple
    q: tuple

    def __call__(self, u, v):
        return tuple(u[: len(self.p)]) == self.p and tuple(v[: len(self.q)]) == self.q

    @property
    def level(self):
        return max(len(self.p), len(self.q))

    def label(self):
        from ..systems import format_letters

        return f"C({format_letters(self.p)})xC({format_letters(self.q)})"


@dataclass(frozen=True)
class OrderTarget:
    """{x < y} (sign +1) or {x > y} (sign -1) on the real square."""

    sign: int

    def __call__(self, u, v):
        return (v > u) if self.sign > 0 else (u > v)

    def label(self):
        return "{x<y}" if self.sign > 0 else "{x>y}"


@dataclass
class ReachabilityReport:
    labels: list
    hits: list
    trials: int
    n_max: int
    seed: int
    first_hit: list = field(default_factory=list)

    @property
    def frequencies(self):
        return [Fraction(h, self.trials) for h in self.hits]

    def to_dict(self):
        return {
            "targets": self.labels,
            "hits": self.hits,
            "frequencies": [float(f) for f in self.frequencies],
            "trials": self.trials,
            "n_max": self.n_max,
            "seed": self.seed,
            "median_first_hit": [float(np.median(f)) if f else None for f in self.first_hit],
        }


def de_reachability(m, action, sample_source, targets, n_max, trials, seed) -> ReachabilityReport:
    """Fraction of sampled (pair, walk) reaching each target within n_max steps.

    ``sample_source(rng)`` draws (x, y); ``action(g, x)`` gives whatever the
    targets inspect (a boundary head, a real number, ...). Time n = 0 counts.
    """
    hits = [0] * len(targets)
    first = [[] for _ in targets]
    e = identity_of(m)
    for k in range(trials):
        rng = make_rng(seed, "reach", k)
        x, y = sample_source(rng)
        steps = m.sample(rng, n_max)
        g = e
        open_ = set(range(len(targets)))
        for n in range(n_max + 1):
            if n:
                g = g * steps[n - 1]
            u, v = action(g, x), action(g, y)
            for i in list(open_):
                if targets[i](u, v):
                    hits[i] += 1
                    first[i].append(n)
                    open_.discard(i)
            if not open_:
                break
    return ReachabilityReport([t.label() for t in targets], hits, trials, n_max, seed, first)


def boundary_square_source(p, q, depth):
    """Sampler of eta x eta conditioned on C(p) x C(q)."""

    def sample(rng):
        return sample_boundary_point(rng, depth, p), sample_boundary_point(rng, depth, q)

    return sample


def boundary_reachability(m, source, targets, n_max, trials, seed, margin=8):
    """de_reachability on Z x Z with cylinder targets, using heads of g x only."""
    level = max(t.level for t in targets)
    depth = n_max + level + margin
    act = BoundaryAction(head=level)
    return de_reachability(m, act, boundary_square_source(source.p, source.q, depth), targets, n_max, trials, seed)


def affine_order_source(measure=CAUCHY):
    """(x, y) with x < y drawn from the measure, as exact rationals."""

    def sample(rng):
        while True:
            a, b = (Fraction(float(v)) for v in measure.sample(rng, 2))
            if a != b:
                return (a, b) if a < b else (b, a)

    return sample
