"""Measures: exact cylinder laws, densities on R, step distributions on groups,
and weighted atom clouds with pushforward and distances."""
from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotReduced, Overflow
from .systems import (
    LETTERS,
    AffineElement,
    BoundaryPoint,
    FreeWord,
    OdometerPoint,
    ProjectivePoint,
    angle_distance,
    format_letters,
    is_reduced,
    parse_letters,
    random_continuation,
    reduce_letters,
)

# ---------------------------------------------------------------------------
# the boundary measure eta


def eta_cylinder(prefix) -> Fraction:
    """eta(C(e_1..e_n)) = 1 / (4 * 3^(n-1)); the empty prefix is all of Z."""
    letters = parse_letters(prefix)
    if not is_reduced(letters):
        raise NotReduced(f"{format_letters(letters)} is not reduced")
    n = len(letters)
    if n == 0:
        return Fraction(1)
    return Fraction(1, 4 * 3 ** (n - 1))


def reduced_prefixes(n):
    """All 4 * 3^(n-1) reduced letter sequences of length ``n`` (lexicographic)."""
    if n == 0:
        yield ()
        return
    for head in reduced_prefixes(n - 1):
        for x in LETTERS:
            if not head or head[-1] != -x:
                yield head + (x,)


def one_letter_extensions(prefix):
    prefix = parse_letters(prefix)
    return [prefix + (x,) for x in LETTERS if not prefix or prefix[-1] != -x]


# ---------------------------------------------------------------------------
# Bernoulli product measure mu_p on {0,1}^N


@dataclass(frozen=True)
class ProductMeasure:
    """mu_p = {p, 1-p}^N, with p = P(bit = 0)."""

    p: Fraction

    def __post_init__(self):
        p = Fraction(self.p)
        if not 0 < p < 1:
            raise ValueError("p must lie in (0, 1)")
        object.__setattr__(self, "p", p)

    def cylinder(self, pattern):
        return mu_p_cylinder(pattern, self.p)


def mu_p_cylinder(pattern, p) -> Fraction:
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    zeros = sum(1 for b in pattern if int(b) == 0)
    return p**zeros * (1 - p) ** (len(pattern) - zeros)


def rn_derivative_odometer(w: OdometerPoint, p) -> Fraction:
    """d(mu_p o T)/d mu_p at ``w``.

    If w starts with k ones followed by a zero, T changes exactly those k+1
    coordinates, so the cylinder quotient is p^k (1-p) / ((1-p)^k p)
    = (p / (1-p))^(k-1).
    """
    p = Fraction(p)
    k = 0
    while k < w.depth and w.bits[k] == 1:
        k += 1
    if k == w.depth:
        raise Overflow("all-ones pattern at the stored depth")
    return (p / (1 - p)) ** (k - 1)


# ---------------------------------------------------------------------------
# absolutely continuous measures on R


def normalize_intervals(intervals):
    """Sort open intervals and merge overlapping ones; drops empty intervals."""
    ivs = sorted((float(a), float(b)) for a, b in intervals if float(a) < float(b))
    out = []
    for a, b in ivs:
        if out and a < out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


class CauchyMeasure:
    """Cauchy law with location ``loc`` and scale ``scale`` (standard by default)."""

    def __init__(self, loc=0.0, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.loc = float(loc)
        self.scale = float(scale)

    def density(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 1.0 / (math.pi * self.scale * (1.0 + z * z))

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 0.5 + np.arctan(z) / math.pi

    def quantile(self, u):
        return self.loc + self.scale * np.tan(math.pi * (np.asarray(u, dtype=float) - 0.5))

    def interval_mass(self, a, b):
        # arctan difference loses nothing near the tails, unlike cdf(b) - cdf(a)
        za = (a - self.loc) / self.scale
        zb = (b - self.loc) / self.scale
        return float((math.atan(zb) - math.atan(za)) / math.pi)

    @property
    def mode(self):
        return self.loc

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))


CAUCHY = CauchyMeasure()


def density_mass(intervals, measure=CAUCHY) -> float:
    """Mass of a finite union of open intervals (endpoints may be infinite)."""
    total = sum(measure.interval_mass(a, b) for a, b in normalize_intervals(intervals))
    return min(1.0, max(0.0, total))


# ---------------------------------------------------------------------------
# finitely supported measures on groups


def element_key(g):
    """Canonical sort key used for deterministic tie-breaks."""
    if hasattr(g, "key"):
        return g.key()
    return repr(g)


class StepDistribution:
    """Finitely supported probability m on a group, with exact rational weights."""

    def __init__(self, support, weights=None):
        support = list(support)
        if weights is None:
            weights = [Fraction(1, len(support))] * len(support)
        weights = [Fraction(w) for w in weights]
        if len(support) != len(weights) or not support:
            raise ValueError("support and weights must be non-empty and aligned")
        if len(set(support)) != len(support):
            raise ValueError("support elements must be distinct")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        if sum(weights) != 1:
            raise ValueError(f"weights sum to {sum(weights)}, not 1")
        self.support = support
        self.weights = weights
        self._float_weights = np.array([float(w) for w in weights])
        self._cum = np.cumsum(self._float_weights)
        self._cum[-1] = 1.0

    @classmethod
    def point_mass(cls, g):
        return cls([g], [1])

    def __len__(self):
        return len(self.support)

    def items(self):
        return zip(self.support, self.weights)

    def is_symmetric(self):
        w = dict(self.items())
        return all(g.inverse() in w and w[g.inverse()] == m for g, m in w.items())

    def generates(self, identity, max_length=6):
        """Elements reachable as products of at most ``max_length`` support elements."""
        seen = {identity}
        frontier = [identity]
        for _ in range(max_length):
            nxt = []
            for h in frontier:
                for g in self.support:
                    x = h * g
                    if x not in seen:
                        seen.add(x)
                        nxt.append(x)
            frontier = nxt
        return seen

    def sample_indices(self, rng, size):
        return np.searchsorted(self._cum, rng.random(size), side="right")

    def sample(self, rng, size):
        return [self.support[i] for i in self.sample_indices(rng, size)]

    def __repr__(self):
        body = ", ".join(f"{g}: {w}" for g, w in self.items())
        return f"StepDistribution({{{body}}})"


def free_group_uniform():
    """m = (delta_a + delta_b + delta_a^-1 + delta_b^-1) / 4."""
    return StepDistribution([FreeWord((x,)) for x in LETTERS])


# ---------------------------------------------------------------------------
# empirical measures


SPACES = ("boundary", "projective", "real", "cylinder", "odometer", "lattice", "discrete")


class EmpiricalMeasure:
    """Weighted atoms on a declared space.

    Weights are kept exact (``Fraction``) when given as rationals and as a
    float array otherwise. Projective atoms may be stored as plain angles.
    """

    def __init__(self, space, points, weights=None, check=True):
        if space not in SPACES:
            raise ValueError(f"unknown space {space!r}")
        self.space = space
        self.points = points if isinstance(points, np.ndarray) else list(points)
        n = len(self.points)
        if weights is None:
            weights = [Fraction(1, n)] * n
        if isinstance(weights, np.ndarray):
            self.weights = weights.astype(float)
        else:
            weights = list(weights)
            if all(isinstance(w, (int, Fraction)) for w in weights):
                self.weights = [Fraction(w) for w in weights]
            else:
                self.weights = np.array(weights, dtype=float)
        if len(self.weights) != n:
            raise ValueError("points and weights must be aligned")
        if check:
            self._check()

    def _check(self):
        if self.exact:
            if any(w <= 0 for w in self.weights) or sum(self.weights) != 1:
                raise ValueError("exact weights must be positive and sum to 1")
        else:
            if np.any(self.weights <= 0) or abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
                raise ValueError("weights must be positive and sum to 1")

    @property
    def exact(self):
        return isinstance(self.weights, list)

    def __len__(self):
        return len(self.points)

    def total_mass(self):
        return sum(self.weights) if self.exact else float(np.sum(self.weights))

    def float_weights(self):
        return np.array([float(w) for w in self.weights]) if self.exact else self.weights

    def atoms(self):
        return zip(self.points, self.weights)

    def angles(self):
        if isinstance(self.points, np.ndarray):
            return self.points.astype(float)
        return np.array([p.theta if isinstance(p, ProjectivePoint) else float(p) for p in self.points])

    def merged(self):
        """Combine atoms sitting on the same point."""
        if isinstance(self.points, np.ndarray):
            pts, inv = np.unique(self.points, return_inverse=True)
            w = np.zeros(len(pts))
            np.add.at(w, inv, self.float_weights())
            return EmpiricalMeasure(self.space, pts, w, check=False)
        acc = defaultdict(lambda: Fraction(0) if self.exact else 0.0)
        order = []
        for p, w in self.atoms():
            if p not in acc:
                order.append(p)
            acc[p] += w
        weights = [acc[p] for p in order]
        if not self.exact:
            weights = np.array(weights, dtype=float)
        return EmpiricalMeasure(self.space, order, weights, check=False)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self):
        return {
            "space": self.space,
            "atoms": [encode_point(p) for p in self.points],
            "weights": [str(w) for w in self.weights] if self.exact else [float(w) for w in self.weights],
            "exact": self.exact,
        }

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        space = data["space"]
        points = [decode_point(space, a) for a in data["atoms"]]
        if data.get("exact"):
            weights = [Fraction(w) for w in data["weights"]]
        else:
            weights = np.array(data["weights"], dtype=float)
        if space == "projective" and all(isinstance(p, float) for p in points):
            points = np.array(points)
        return cls(space, points, weights)


def encode_point(p):
    if isinstance(p, BoundaryPoint):
        return format_letters(p.prefix)
    if isinstance(p, FreeWord):
        return str(p)
    if isinstance(p, ProjectivePoint):
        if p.kind == "exact":
            q = p.normalized()
            return [str(q.x), str(q.y)]
        return float(p.theta)
    if isinstance(p, OdometerPoint):
        return "".join(map(str, p.bits))
    if isinstance(p, Fraction):
        return str(p)
    if isinstance(p, tuple):
        if all(isinstance(x, int) and x in LETTERS for x in p):
            return format_letters(p) if p else ""
        return list(p)
    if isinstance(p, (np.floating, float)):
        return float(p)
    if isinstance(p, (np.integer, int)):
        return int(p)
    if hasattr(p, "coords"):
        return list(p.coords)
    return str(p)


def decode_point(space, a):
    if space == "boundary":
        return BoundaryPoint(a)
    if space == "cylinder":
        return parse_letters(a) if a not in ("", "e") else ()
    if space == "projective":
        if isinstance(a, list):
            return ProjectivePoint(Fraction(a[0]), Fraction(a[1]))
        return float(a)
    if space == "odometer":
        return OdometerPoint(tuple(int(c) for c in a))
    if space == "real":
        return Fraction(a) if isinstance(a, str) else float(a)
    if space == "lattice":
        return tuple(a)
    return a


def pushforward(mu: EmpiricalMeasure, f, merge=True) -> EmpiricalMeasure:
    """Image measure: atoms mapped by ``f``, weights carried along."""
    many = getattr(f, "many", None)
    if isinstance(mu.points, np.ndarray) and many is not None:
        pts = many(mu.points)
    else:
        pts = [f(p) for p in mu.points]
    out = EmpiricalMeasure(mu.space, pts, mu.weights if mu.exact else mu.weights.copy(), check=False)
    return out.merged() if merge else out


# ---------------------------------------------------------------------------
# concentration and distances


def boundary_distance(z1, z2):
    """3^-(length of the common prefix); 0 for identical stored prefixes."""
    u = z1.prefix if isinstance(z1, BoundaryPoint) else tuple(z1)
    v = z2.prefix if isinstance(z2, BoundaryPoint) else tuple(z2)
    if u == v:
        return 0.0
    k = 0
    while k < min(len(u), len(v)) and u[k] == v[k]:
        k += 1
    return 3.0**-k


def _ball_level(eps):
    # smallest k with 3^-k <= eps
    if eps <= 0:
        return math.inf
    return max(0, math.ceil(math.log(1.0 / eps) / math.log(3.0) - 1e-12))


def _sliding_max(xs, ws, radius, period=None):
    """Largest weight in a closed window [x - r, x + r] centred at an atom."""
    order = np.argsort(xs, kind="stable")
    x = np.asarray(xs, dtype=float)[order]
    w = np.asarray(ws, dtype=float)[order]
    n = len(x)
    if period is not None:
        x = np.concatenate([x - period, x, x + period])
        w = np.concatenate([w, w, w])
    cw = np.concatenate([[0.0], np.cumsum(w)])
    centers = x[n : 2 * n] if period is not None else x
    lo = np.searchsorted(x, centers - radius - 1e-12, side="left")
    hi = np.searchsorted(x, centers + radius + 1e-12, side="right")
    return float(np.max(cw[hi] - cw[lo]))


def concentration_score(mu: EmpiricalMeasure, eps) -> float:
    """Largest mass of a closed eps-ball centred at an atom.

    Metrics: boundary words 3^-(common prefix); projective line the arc
    metric of T/{+-1} (``angle_distance``); real line |x - y|; all other
    spaces the discrete metric.
    """
    if len(mu) == 0:
        return 0.0
    if mu.space in ("boundary", "cylinder"):
        k = _ball_level(eps)
        acc = defaultdict(Fraction if mu.exact else float)
        for p, w in mu.atoms():
            pre = p.prefix if isinstance(p, BoundaryPoint) else tuple(p)
            acc[pre if k == math.inf else pre[:k]] += w
        return float(max(acc.values()))
    if mu.space == "projective":
        # radius eps on the doubled circle is eps / 2 in theta, period pi
        return min(1.0, _sliding_max(mu.angles(), mu.float_weights(), eps / 2.0, period=math.pi))
    if mu.space == "real":
        return min(1.0, _sliding_max([float(p) for p in mu.points], mu.float_weights(), eps))
    return float(max(mu.merged().weights)) if eps < 1 else 1.0


def distance_to_point_masses(mu: EmpiricalMeasure, eps) -> float:
    """inf over atoms c of the mass outside the closed eps-ball at c."""
    return max(0.0, 1.0 - concentration_score(mu, eps))


def circle_w1(angles1, w1, angles2, w2) -> float:
    """1-Wasserstein distance on P^1 with the ``angle_distance`` metric."""
    a1 = np.asarray(angles1, dtype=float) % math.pi
    a2 = np.asarray(angles2, dtype=float) % math.pi
    u = np.concatenate([a1, a2]) / math.pi
    s = np.concatenate([np.asarray(w1, dtype=float), -np.asarray(w2, dtype=float)])
    order = np.argsort(u, kind="stable")
    u, s = u[order], s[order]
    d = np.cumsum(s)
    seg = np.diff(np.concatenate([u, [u[0] + 1.0]]))
    # minimise sum seg |d - c| over c: weighted median of d
    o = np.argsort(d, kind="stable")
    cum = np.cumsum(seg[o])
    if cum[-1] <= 0:
        return 0.0
    c = d[o][np.searchsorted(cum, 0.5 * cum[-1])]
    return float(np.sum(seg * np.abs(d - c)) * 2.0 * math.pi)


def discrete_tv(mu: EmpiricalMeasure, nu: EmpiricalMeasure):
    """sum_x |mu(x) - nu(x)| over hashable atoms (exact when both are exact)."""
    zero = Fraction(0) if mu.exact and nu.exact else 0.0
    acc = defaultdict(lambda: zero)
    for p, w in mu.atoms():
        acc[p] += w
    for p, w in nu.atoms():
        acc[p] -= w
    return sum((abs(v) for v in acc.values()), zero)


# ---------------------------------------------------------------------------
# measures on the cylinder algebra of Z


def eta_discretization(level) -> EmpiricalMeasure:
    """eta restricted to the level-``level`` cylinders, as exact cylinder atoms."""
    prefixes = list(reduced_prefixes(level))
    return EmpiricalMeasure("cylinder", prefixes, [eta_cylinder(p) for p in prefixes])


def eta_discretization_points(level, depth, rng) -> EmpiricalMeasure:
    """One eta-conditional representative point per level cylinder, equal weights."""
    pts = []
    for pre in reduced_prefixes(level):
        pts.append(BoundaryPoint(pre + random_continuation(pre[-1], depth - level, rng)))
    return EmpiricalMeasure("boundary", pts, [eta_cylinder(p.prefix[:level]) for p in pts])


def cylinder_mass(mu: EmpiricalMeasure, prefix):
    """Mass of C(prefix) for a measure on level-k cylinders.

    Coarser cylinders sum their level-k pieces; finer ones split each piece
    uniformly among its 3 one-letter extensions (the eta-conditional rule).
    """
    prefix = tuple(prefix)
    level = len(mu.points[0])
    table = _cylinder_table(mu)
    if len(prefix) >= level:
        return table.get(prefix[:level], 0) / Fraction(3) ** (len(prefix) - level)
    return sum((w for p, w in table.items() if p[: len(prefix)] == prefix), Fraction(0))


def _cylinder_table(mu):
    t = getattr(mu, "_table", None)
    if t is None:
        t = defaultdict(Fraction)
        for p, w in mu.atoms():
            t[tuple(p)] += w
        mu._table = t
    return t


def cylinder_pushforward(mu: EmpiricalMeasure, g: FreeWord) -> EmpiricalMeasure:
    """g_* mu on the same cylinder level: (g_* mu)(C) = mu(g^-1 C), exactly.

    C is split into the cylinders D of level k + |g| inside it; each g^-1 D is
    again a single cylinder because the cancellation cannot consume D.
    """
    level = len(mu.points[0])
    ginv = g.inverse().letters
    pts, ws = [], []
    for c in reduced_prefixes(level):
        total = Fraction(0)
        for ext in _extensions(c, len(g)):
            d = reduce_letters(ginv + ext)
            total += cylinder_mass(mu, d)
        if total:
            pts.append(c)
            ws.append(total)
    return EmpiricalMeasure("cylinder", pts, ws, check=False)


def _extensions(prefix, n):
    if n == 0:
        return [prefix]
    out = []
    for e in one_letter_extensions(prefix):
        out.extend(_extensions(e, n - 1))
    return out


def cylinder_tv(mu: EmpiricalMeasure, nu: EmpiricalMeasure):
    return discrete_tv(mu, nu)


def affine_step_distribution():
    """Symmetric m on Q x| Q+: uniform on x+1, x-1, 2x, x/2."""
    elems = [AffineElement(1, 1), AffineElement(-1, 1), AffineElement(0, 2), AffineElement(0, Fraction(1, 2))]
    return StepDistribution(elems)


def all_level_masses(n, measure):
    """Sum of the cylinder masses over all patterns/prefixes of length ``n``."""
    if measure == "eta":
        return sum(eta_cylinder(p) for p in reduced_prefixes(n))
    return sum(mu_p_cylinder(bits, measure) for bits in itertools.product((0, 1), repeat=n))
