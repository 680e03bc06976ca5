"""Blow-up of positive sets under the rational affine group: find gamma with
mu(gamma A) close to 1 by zooming into a density point of A."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import SearchExhausted
from ..measures import CAUCHY, density_mass, normalize_intervals
from ..systems import AffineElement

DENOMINATOR_CAP = 2**40
# doubling steps allowed per search; the pilot over 200 random unions of 20
# intervals (seed 20240611, stream "sat-pilot") needed at most 10
SAT_ITERATION_CAP = 64


@dataclass
class SatResult:
    gamma: AffineElement
    achieved: float
    iterations: int
    center: Fraction
    initial_mass: float

    def to_dict(self):
        return {
            "q": str(self.gamma.q),
            "s": str(self.gamma.s),
            "achieved": self.achieved,
            "iterations": self.iterations,
            "center": str(self.center),
            "initial_mass": self.initial_mass,
        }


def image_intervals(g: AffineElement, intervals):
    s, q = float(g.s), float(g.q)
    return [(s * a + q, s * b + q) for a, b in intervals]


def _zoom_center(intervals):
    """Midpoint of the longest component, or a point deep inside a half-line."""
    best = None
    for a, b in intervals:
        if math.isinf(a) and math.isinf(b):
            return None, math.inf
        if math.isinf(a):
            c, w = b - 1.0, math.inf
        elif math.isinf(b):
            c, w = a + 1.0, math.inf
        else:
            c, w = 0.5 * (a + b), 0.5 * (b - a)
        if best is None or w > best[1]:
            best = (c, w)
    return best


def sat_blowup_search(intervals, target=0.99, measure=CAUCHY, max_iter=SAT_ITERATION_CAP) -> SatResult:
    """gamma in Q x| Q+ with measure(gamma A) >= target.

    A is zoomed at the (rationalized) midpoint of its longest component: the
    map x -> s (x - c) + mode sends that component onto a symmetric window of
    half-width about s w around the mode, and s doubles until the target is
    met.
    """
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    A = normalize_intervals(intervals)
    m0 = density_mass(A, measure)
    if m0 <= 0:
        raise ValueError("A must have positive mass")
    if m0 >= target:
        return SatResult(AffineElement.identity(), m0, 0, Fraction(0), m0)
    c, _ = _zoom_center(A)
    c = Fraction(c).limit_denominator(DENOMINATOR_CAP)
    mode = Fraction(measure.mode).limit_denominator(DENOMINATOR_CAP)
    s = Fraction(1)
    for it in range(1, max_iter + 1):
        g = AffineElement(mode - s * c, s)
        achieved = density_mass(image_intervals(g, A), measure)
        if achieved >= target:
            return SatResult(g, achieved, it, c, m0)
        s *= 2
    raise SearchExhausted(f"no gamma reached {target} within {max_iter} doublings")


def random_interval_union(rng, k=20, mass_range=(0.05, 0.95), measure=CAUCHY):
    """k disjoint intervals whose total mass is uniform in ``mass_range``.

    Built in quantile coordinates from Dirichlet lengths and gaps, then mapped
    through the quantile function.
    """
    total = float(rng.uniform(*mass_range))
    lengths = rng.dirichlet(np.ones(k)) * total
    gaps = rng.dirichlet(np.ones(k + 1)) * (1.0 - total)
    out, u = [], 0.0
    for i in range(k):
        u += gaps[i]
        a, b = u, u + lengths[i]
        out.append((float(measure.quantile(a)), float(measure.quantile(min(b, 1.0)))))
        u = b
    return normalize_intervals(out)
