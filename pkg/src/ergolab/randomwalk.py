"""The m-random walk eta_n = xi_1 ... xi_n, exact convolution powers, Cesaro
averages, and sample-level conditional measures."""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from operator import itemgetter

import numpy as np

from .measures import (
    EmpiricalMeasure,
    StepDistribution,
    circle_w1,
    cylinder_pushforward,
    discrete_tv,
    element_key,
    encode_point,
    pushforward,
    reduced_prefixes,
)
from .rng import make_rng
from .systems import FreeWord, bind

DEFAULT_SUPPORT_CAP = 100_000


def identity_of(m: StepDistribution):
    g = m.support[0]
    return g * g.inverse()


@dataclass
class WalkPath:
    """Steps xi_1..xi_n and partial products; ``products[k]`` is eta_k (eta_0 = e)."""

    steps: list
    products: list
    seed: int

    @property
    def n(self):
        return len(self.steps)

    @property
    def final(self):
        return self.products[-1]


def sample_walk(m: StepDistribution, n, seed, stream="walk") -> WalkPath:
    """Sample n i.i.d. steps from m and the right-multiplied products."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed, stream)
    steps = m.sample(rng, n)
    eta = identity_of(m)
    products = [eta]
    for xi in steps:
        eta = eta * xi
        products.append(eta)
    return WalkPath(steps, products, seed)


# ---------------------------------------------------------------------------
# convolution tables


class ConvolutionTable:
    """Exact law of a product of steps, possibly truncated to its heaviest atoms.

    Weights are stored as integer numerators over one common denominator;
    ``truncation_mass`` is the mass discarded by the support cap, so retained
    mass + truncation_mass == 1 exactly.
    """

    def __init__(self, distribution, order, numerators, denominator, truncation_numerator=0, kind="power"):
        self.distribution = distribution
        self.order = order
        self.kind = kind
        self.numerators = numerators
        self.denominator = denominator
        self.truncation_numerator = truncation_numerator

    def __len__(self):
        return len(self.numerators)

    def __contains__(self, g):
        return g in self.numerators

    def mass(self, g):
        return Fraction(self.numerators.get(g, 0), self.denominator)

    @property
    def truncation_mass(self):
        return Fraction(self.truncation_numerator, self.denominator)

    def retained_mass(self):
        return Fraction(sum(self.numerators.values()), self.denominator)

    def items(self):
        """(element, exact weight) pairs in canonical order."""
        for g in sorted(self.numerators, key=element_key):
            yield g, Fraction(self.numerators[g], self.denominator)

    def float_items(self):
        den = float(self.denominator) if self.denominator < 2**1000 else None
        for g, c in self.numerators.items():
            yield g, (c / den if den else float(Fraction(c, self.denominator)))

    def to_dict(self):
        return {
            "kind": self.kind,
            "order": self.order,
            "atoms": [[encode_point(g), str(w)] for g, w in self.items()],
            "truncation_mass": str(self.truncation_mass),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _common_denominator(m):
    den = 1
    for w in m.weights:
        den = math.lcm(den, w.denominator)
    return den


def _truncate(table, cap):
    """Keep the ``cap`` heaviest atoms; ties at the cut go by ``element_key``."""
    if len(table) <= cap:
        return table, 0
    ranked = sorted(table.items(), key=itemgetter(1), reverse=True)
    cut = ranked[cap - 1][1]
    kept = {g: c for g, c in ranked if c > cut}
    ties = sorted((g for g, c in ranked if c == cut), key=element_key)
    for g in ties[: cap - len(kept)]:
        kept[g] = cut
    return kept, sum(table.values()) - sum(kept.values())


def convolution_powers(m: StepDistribution, n, support_cap=DEFAULT_SUPPORT_CAP):
    """Yield the tables of m^(1), ..., m^(n); m^(j)(w) sums m^(j-1)(g) m(h) over gh = w."""
    den_m = _common_denominator(m)
    step = [(g, int(w * den_m)) for g, w in m.items()]
    table = {identity_of(m): 1}
    den = 1
    trunc = 0
    for j in range(1, n + 1):
        new = defaultdict(int)
        for g, c in table.items():
            for h, ch in step:
                new[g * h] += c * ch
        den *= den_m
        trunc *= den_m
        table, dropped = _truncate(new, support_cap)
        trunc += dropped
        yield ConvolutionTable(m, j, table, den, trunc)


def convolve_power(m: StepDistribution, j, support_cap=DEFAULT_SUPPORT_CAP) -> ConvolutionTable:
    if j < 1:
        raise ValueError("j must be >= 1")
    for table in convolution_powers(m, j, support_cap):
        pass
    return table


def cesaro_tables(m, n, support_cap=DEFAULT_SUPPORT_CAP):
    """Yield the Cesaro averages m_1, ..., m_n as exact tables."""
    acc = defaultdict(int)
    trunc = 0
    den = 1
    den_m = _common_denominator(m)
    for j, t in enumerate(convolution_powers(m, n, support_cap), start=1):
        # running sum S_j = sum_{i<=j} m^(i) kept over denominator den_m^j
        if j > 1:
            for g in acc:
                acc[g] *= den_m
            trunc *= den_m
        den = t.denominator
        for g, c in t.numerators.items():
            acc[g] += c
        trunc += t.truncation_numerator
        yield ConvolutionTable(m, j, dict(acc), den * j, trunc, kind="cesaro")


def cesaro_average(m: StepDistribution, n, support_cap=DEFAULT_SUPPORT_CAP) -> ConvolutionTable:
    """m_n = (m + m^(2) + ... + m^(n)) / n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for table in cesaro_tables(m, n, support_cap):
        pass
    return table


# ---------------------------------------------------------------------------
# measures along the walk


def conditional_measure_estimate(m, mu: EmpiricalMeasure, action, n, seed) -> EmpiricalMeasure:
    """eta_n mu for one sampled walk; tends to the conditional measure mu_omega."""
    if n == 0:
        return mu
    eta = sample_walk(m, n, seed).final
    return pushforward(mu, bind(action, eta))


def convolve_measure(m: StepDistribution, mu: EmpiricalMeasure, action=None) -> EmpiricalMeasure:
    """m * mu = sum_g m(g) g_* mu."""
    if mu.space == "cylinder":
        acc = defaultdict(Fraction)
        for g, w in m.items():
            for p, x in cylinder_pushforward(mu, g).atoms():
                acc[p] += w * x
        pts = sorted(acc, key=lambda p: (len(p), p))
        return EmpiricalMeasure("cylinder", pts, [acc[p] for p in pts], check=False)
    if isinstance(mu.points, np.ndarray) and hasattr(action, "many"):
        pts = np.concatenate([action.many(g, mu.points) for g in m.support])
        ws = np.concatenate([float(w) * mu.float_weights() for w in m.weights])
        return EmpiricalMeasure(mu.space, pts, ws, check=False)
    pts, ws = [], []
    for g, w in m.items():
        for p, x in mu.atoms():
            pts.append(action(g, p))
            ws.append(w * x if mu.exact else float(w) * float(x))
    out = EmpiricalMeasure(mu.space, pts, ws if mu.exact else np.array(ws), check=False)
    return out.merged()


def measure_distance(mu, nu, metric):
    if metric in ("tv", "cylinder-tv"):
        return discrete_tv(mu, nu)
    if metric == "w1":
        return circle_w1(mu.angles(), mu.float_weights(), nu.angles(), nu.float_weights())
    raise ValueError(f"unknown metric {metric!r}")


def stationarity_defect(m, mu: EmpiricalMeasure, action=None, metric="tv"):
    """Distance between mu and m * mu; zero iff mu is stationary at atom resolution."""
    return measure_distance(mu, convolve_measure(m, mu, action), metric)


def nondegenerate_up_to(m, length):
    """Whether products of at most ``length`` steps reach every element within
    word length ``length`` of F2 (non-degeneracy at desk scale)."""
    reached = m.generates(identity_of(m), max_length=length)
    for n in range(length + 1):
        for p in reduced_prefixes(n):
            if FreeWord(p) not in reached:
                return False
    return True
