"""Statistics that stay constant along diagonal orbits: the order of a pair
under affine maps, the dyadic difference under the odometer square, and the
cross-ratio and cyclic order under Mobius words."""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np

from .. import kernels
from ..errors import ArcCollision, DegenerateTuple, Overflow
from ..systems import (
    AffineElement,
    FreeWord,
    OdometerPoint,
    ProjectivePoint,
    affine_apply,
    cross_ratio,
    mobius_apply,
    word_to_mobius,
)


@dataclass
class InvariantWitness:
    """Values of one statistic along an orbit and their largest deviation."""

    statistic: str
    initial: object
    values: list
    max_deviation: object
    violations: int = 0
    exact: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def preserved(self):
        return self.violations == 0

    def to_dict(self, max_values=1000):
        return {
            "statistic": self.statistic,
            "initial": _jsonable(self.initial),
            "values": [_jsonable(v) for v in self.values[:max_values]],
            "n_values": len(self.values),
            "max_deviation": _jsonable(self.max_deviation),
            "violations": self.violations,
            "exact": self.exact,
            "preserved": self.preserved,
            "meta": self.meta,
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, mpmath.mpf)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _sign(x):
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# affine order


def affine_order_invariant(pairs, elements) -> InvariantWitness:
    """sign(y - x) for every pair under every element applied to both coordinates."""
    values, initial, violations = [], [], 0
    for x, y in pairs:
        if x == y:
            raise ValueError("pairs must have distinct coordinates")
        s0 = _sign(y - x)
        initial.append(s0)
        for g in elements:
            s = _sign(affine_apply(g, y) - affine_apply(g, x))
            values.append(s)
            violations += s != s0
    return InvariantWitness(
        "sign(y - x)",
        initial,
        values,
        2 if violations else 0,
        violations,
        exact=all(isinstance(v, (int, Fraction)) for p in pairs for v in p),
        meta={"pairs": len(pairs), "elements": len(elements)},
    )


# ---------------------------------------------------------------------------
# odometer square


def _bits_array(points):
    return np.array([p.bits for p in points], dtype=np.uint8)


def odometer_square_batch(first, second, steps, record_every=0):
    """Diagonal T x T on many pairs at once; returns (records, max deviations).

    Raises ``Overflow`` if any coordinate reaches the all-ones pattern.
    """
    a, b = _bits_array(first), _bits_array(second)
    if a.shape != b.shape:
        raise ValueError("pairs must share one depth")
    depth = a.shape[1]
    if depth > 64:
        return _odometer_square_ints(first, second, steps, record_every)
    rec, maxdev, ovf = kernels.odometer_square(a, b, int(steps), int(record_every))
    bad = np.flatnonzero(ovf >= 0)
    if len(bad):
        raise Overflow(f"pair {int(bad[0])} overflows at step {int(ovf[bad[0]])} (depth {depth})")
    return rec, maxdev


def _odometer_square_ints(first, second, steps, record_every):
    depth = first[0].depth
    top = (1 << depth) - 1
    mod = 1 << depth
    nrec = steps // record_every + 1 if record_every > 0 else 1
    recs, devs = [], []
    for p, q in zip(first, second):
        x, y = p.to_int(), q.to_int()
        if max(x, y) + steps > top:
            raise Overflow(f"pair overflows within {steps} steps at depth {depth}")
        d0 = (y - x) % mod
        row = [d0] * nrec
        dev = 0
        for s in range(1, steps + 1):
            x += 1
            y += 1
            d = (y - x) % mod
            dev = max(dev, min((d - d0) % mod, (d0 - d) % mod))
            if record_every > 0 and s % record_every == 0:
                row[s // record_every] = d
        recs.append(row)
        devs.append(dev)
    return np.array(recs, dtype=object), np.array(devs, dtype=object)


def odometer_square_invariant(w: OdometerPoint, w2: OdometerPoint, steps, record_every=1000) -> InvariantWitness:
    """Dyadic difference (w2 - w) mod 2^N along the diagonal odometer orbit."""
    rec, maxdev = odometer_square_batch([w], [w2], steps, record_every)
    values = [int(v) for v in rec[0]]
    dev = int(maxdev[0])
    return InvariantWitness(
        "(w2 - w) mod 2^N",
        values[0],
        values,
        dev,
        int(dev != 0),
        meta={"depth": w.depth, "steps": steps, "record_every": record_every, "kernel": kernels.BACKEND},
    )


# ---------------------------------------------------------------------------
# cross-ratio


def chart_cross_ratio(p1, p2, p3, p4, chart="tan"):
    """Cross-ratio through an affine chart: t = y/x ("tan") or u = x/y ("cot").

    Used as an independent check of the homogeneous formula; a point at
    infinity of the chosen chart raises ``ValueError``.
    """
    ts = []
    for p in (p1, p2, p3, p4):
        num, den = (p.y, p.x) if chart == "tan" else (p.x, p.y)
        if den == 0:
            raise ValueError(f"point at infinity in the {chart} chart")
        ts.append(Fraction(num, den) if isinstance(num, int) and isinstance(den, int) else num / den)
    t1, t2, t3, t4 = ts
    den = (t4 - t3) * (t2 - t1)
    if den == 0:
        raise DegenerateTuple("coincident points")
    return ((t4 - t1) * (t2 - t3)) / den


def mp_bits_for(words, gens, margin=64):
    """Working precision that keeps cross-ratios of word images at 1e-9.

    Images of long words cluster at rate stretch^(-2 L), so the gaps between
    points need about 2 L log2(stretch) extra bits.
    """
    L = max((len(w) for w in words), default=0)
    stretch = max(g.convert("float").operator_stretch() for g in gens)
    return int(53 + 2 * L * math.log2(max(stretch, 1.0)) + margin)


def word_matrices(words, gens, kind="exact"):
    """Matrices of many words, sharing prefixes; exact maps come back as integer
    4-tuples (denominators cleared), mp maps as gmpy2 mpfr 4-tuples at the
    current gmpy2 precision."""
    from ..systems import A, B

    if kind == "exact":
        base = {}
        for x, g in ((A, gens[0]), (B, gens[1])):
            g = g.convert("exact")
            for y, h in ((x, g), (-x, g.inverse())):
                base[y] = _integer_entries(h.entries)
    else:
        base = {}
        for x, g in ((A, gens[0]), (B, gens[1])):
            g = g.convert("exact")
            base[x] = tuple(gmpy2.mpfr(v) for v in g.entries)
            base[-x] = tuple(gmpy2.mpfr(v) for v in g.inverse().entries)
    one, zero = (1, 0) if kind == "exact" else (gmpy2.mpfr(1), gmpy2.mpfr(0))
    cache = {(): (one, zero, zero, one)}
    out = []
    for w in words:
        t = tuple(w)
        k = len(t)
        while t[:k] not in cache:
            k -= 1
        m = cache[t[:k]]
        for i in range(k, len(t)):
            a, b, c, d = m
            e, f, g, h = base[t[i]]
            m = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            cache[t[: i + 1]] = m
        out.append(m)
    return out


def _integer_entries(vals):
    vals = [Fraction(v) for v in vals]
    den = math.lcm(*(v.denominator for v in vals))
    ints = [int(v * den) for v in vals]
    g = math.gcd(*ints)
    return tuple(v // g for v in ints)


def _integer_point(p):
    q = p.convert("exact").normalized()
    return (q.x, q.y)


def _brackets(pts):
    (x1, y1), (x2, y2), (x3, y3), (x4, y4) = pts
    return (
        x4 * y1 - y4 * x1,
        x2 * y3 - y2 * x3,
        x4 * y3 - y4 * x3,
        x2 * y1 - y2 * x1,
        x1 * y3 - y1 * x3,
        x2 * y4 - y2 * x4,
    )


def _cr_exact(pts):
    b41, b23, b43, b21, b13, b24 = _brackets(pts)
    if 0 in (b41, b23, b43, b21, b13, b24):
        raise DegenerateTuple("two points of the quadruple coincide")
    return b41 * b23, b43 * b21


def _cr_mp(pts, tol):
    br = _brackets(pts)
    n2 = [x * x + y * y for x, y in pts]
    pairs = ((3, 0), (1, 2), (3, 2), (1, 0), (0, 2), (1, 3))
    for v, (i, j) in zip(br, pairs):
        if v * v <= tol * tol * n2[i] * n2[j]:
            raise DegenerateTuple("two points of the quadruple coincide")
    b41, b23, b43, b21 = br[:4]
    return (b41 * b23) / (b43 * b21)


def _apply(m, pts):
    a, b, c, d = m
    return [(a * x + b * y, c * x + d * y) for x, y in pts]


def cross_ratio_invariance(quad, words, gens, backend="exact", matrices=None) -> InvariantWitness:
    """cross_ratio(w quad) - cross_ratio(quad) for every word w.

    ``exact`` works on rational inputs in integer homogeneous coordinates, so
    the deviation is 0 identically. ``float`` evaluates the float inputs with
    gmpy2 at ``mp_bits_for`` bits (53 bits lose the clustered images of
    long words) and reports the deviation as a float. ``matrices`` may carry
    precomputed ``word_matrices`` for the same words.
    """
    if backend == "exact":
        pts = [_integer_point(p) for p in quad]
        mats = matrices if matrices is not None else word_matrices(words, gens, "exact")
        n0, d0 = _cr_exact(pts)
        c0 = Fraction(n0, d0)
        values, dev, bad = [], Fraction(0), 0
        for m in mats:
            n, d = _cr_exact(_apply(m, pts))
            if n * d0 == n0 * d:
                values.append(c0)
            else:
                c = Fraction(n, d)
                values.append(c)
                dev = max(dev, abs(c - c0))
                bad += 1
        return InvariantWitness("cross_ratio", c0, values, dev, bad, exact=True, meta={"backend": "exact"})
    if backend != "float":
        raise ValueError(f"unknown backend {backend!r}")
    bits = mp_bits_for(words, gens)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        tol = gmpy2.mpfr(2) ** (-bits + 16)
        pts = [(gmpy2.mpfr(float(p.x)), gmpy2.mpfr(float(p.y))) for p in quad]
        mats = matrices if matrices is not None else word_matrices(words, gens, "mp")
        c0 = _cr_mp(pts, tol)
        values, dev = [], 0.0
        for m in mats:
            c = _cr_mp(_apply(m, pts), tol)
            values.append(float(c))
            dev = max(dev, float(abs(c - c0)))
        c0 = float(c0)
    return InvariantWitness(
        "cross_ratio",
        c0,
        values,
        dev,
        sum(abs(v - c0) > 1e-9 for v in values),
        exact=False,
        meta={"backend": "float", "mp_bits": bits},
    )


def cross_ratio_invariance_batch(quads, words, gens, backend="exact"):
    """One witness per quadruple, with the word matrices built once."""
    if backend == "exact":
        mats = word_matrices(words, gens, "exact")
        return [cross_ratio_invariance(q, words, gens, "exact", mats) for q in quads]
    with gmpy2.context(gmpy2.get_context(), precision=mp_bits_for(words, gens)):
        mats = word_matrices(words, gens, "mp")
        return [cross_ratio_invariance(q, words, gens, "float", mats) for q in quads]


# ---------------------------------------------------------------------------
# cyclic order


def _angle_key(p):
    """Exact sort key increasing with theta in [0, pi)."""
    x, y = p.x, p.y
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    if y == 0:
        return (0, 0)
    return (1, -Fraction(x) / Fraction(y)) if isinstance(x, (int, Fraction)) else (1, -x / y)


def _canonical_cycle(labels):
    n = len(labels)
    cands = []
    for seq in (labels, labels[::-1]):
        for r in range(n):
            cands.append(tuple(seq[r:] + seq[:r]))
    return min(cands)


def _arc_endpoints(arc, kind):
    out = []
    for t in (arc.start, arc.end):
        p = ProjectivePoint.from_angle(t)
        out.append(p.convert(kind) if kind != "float" else p)
    return out


def cyclic_order_type(endpoint_pairs):
    """Order type of disjoint arcs given by (start, end) points, up to orientation.

    Raises ``ArcCollision`` unless the 8 endpoints alternate start/end of the
    same arc around the circle.
    """
    tagged = []
    for i, (s, e) in enumerate(endpoint_pairs):
        tagged.append((_angle_key(s), i, 0))
        tagged.append((_angle_key(e), i, 1))
    tagged.sort(key=lambda t: t[0])
    keys = [t[0] for t in tagged]
    if len(set(keys)) != len(keys):
        raise ArcCollision("two arc endpoints coincide at working resolution")
    seq = [(i, side) for _, i, side in tagged]
    # rotate so the sequence starts at a start point whose end follows it
    n = len(seq)
    for r in range(n):
        rot = seq[r:] + seq[:r]
        if all(rot[2 * j][0] == rot[2 * j + 1][0] and rot[2 * j][1] != rot[2 * j + 1][1] for j in range(n // 2)):
            return _canonical_cycle([rot[2 * j][0] for j in range(n // 2)])
    raise ArcCollision("arc images overlap")


def cyclic_order_invariant(arcs, words, gens, backend="exact") -> InvariantWitness:
    """Cyclic order of the images of four disjoint arcs under each word."""
    arcs = list(arcs)
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            if not arcs[i].disjoint(arcs[j]):
                raise ValueError("arcs must be pairwise disjoint")
    kind = "exact" if backend == "exact" else "mp"
    bits = mp_bits_for(words, gens) if kind == "mp" else None
    ctx = mpmath.workprec(bits) if bits else contextlib.nullcontext()
    with ctx:
        ends = [_arc_endpoints(a, kind) for a in arcs]
        gens_k = tuple(g.convert(kind) for g in gens)
        t0 = cyclic_order_type(ends)
        values, violations = [], 0
        for w in words:
            m = word_to_mobius(w, gens_k)
            t = cyclic_order_type([(mobius_apply(m, s), mobius_apply(m, e)) for s, e in ends])
            values.append(list(t))
            violations += t != t0
    return InvariantWitness(
        "cyclic order type",
        list(t0),
        values,
        int(violations > 0),
        violations,
        exact=kind == "exact",
        meta={"backend": backend, "mp_bits": bits},
    )


def random_words(rng, count, max_length, min_length=0):
    """Reduced words with length uniform in [min_length, max_length]."""
    from ..systems import LETTERS

    out = []
    for _ in range(count):
        n = int(rng.integers(min_length, max_length + 1))
        letters = []
        for _ in range(n):
            choices = [x for x in LETTERS if not letters or x != -letters[-1]]
            letters.append(choices[int(rng.integers(len(choices)))])
        out.append(FreeWord(tuple(letters)))
    return out


def random_affine_elements(rng, count, max_num=20):
    out = []
    for _ in range(count):
        q = Fraction(int(rng.integers(-max_num, max_num + 1)), int(rng.integers(1, max_num + 1)))
        s = Fraction(int(rng.integers(1, max_num + 1)), int(rng.integers(1, max_num + 1)))
        out.append(AffineElement(q, s))
    return out


__all__ = [
    "InvariantWitness",
    "affine_order_invariant",
    "chart_cross_ratio",
    "cross_ratio_invariance",
    "cross_ratio_invariance_batch",
    "cyclic_order_invariant",
    "cyclic_order_type",
    "mp_bits_for",
    "odometer_square_batch",
    "odometer_square_invariant",
    "random_affine_elements",
    "random_words",
    "word_matrices",
]
