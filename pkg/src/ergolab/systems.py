"""Group elements and their actions on the concrete spaces.

* free group F2 = <a, b> acting on (truncated) right-infinite reduced words,
* 2x2 matrices acting on the projective line P^1 by Moebius maps,
* the rational affine group Q x| Q+ acting on the real line,
* the dyadic adding machine on finite bit strings,
* integer lattice points.

Letters of F2 are encoded as the integers 2 (a), -2 (a^-1), 3 (b), -3 (b^-1),
so that inversion is negation and no two letters share a hash value; in
strings the inverses are written with capitals: ``"aB"`` is a b^-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .errors import DegenerateTuple, DepthExhausted, NotReduced, Overflow, PingPongFailed

TAU_EQ = 1e-12
DEFAULT_DEPTH = 64

A, B = 2, 3
LETTERS = (A, -A, B, -B)
_LETTER_CHARS = {A: "a", -A: "A", B: "b", -B: "B"}
_CHAR_LETTERS = {v: k for k, v in _LETTER_CHARS.items()}


# ---------------------------------------------------------------------------
# free group


def reduce_letters(letters):
    """Freely reduce a letter sequence with a single stack pass."""
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(letters):
    return all(letters[i] != -letters[i + 1] for i in range(len(letters) - 1))


def parse_letters(s):
    if isinstance(s, str):
        try:
            return tuple(_CHAR_LETTERS[c] for c in s if not c.isspace())
        except KeyError as exc:
            raise ValueError(f"unknown letter {exc.args[0]!r} in {s!r}") from None
    return tuple(int(x) for x in s)


def format_letters(letters):
    return "".join(_LETTER_CHARS[x] for x in letters) or "e"


class FreeWord(tuple):
    """Reduced word in F2; a tuple of letters with group multiplication as ``*``."""

    __slots__ = ()

    def __new__(cls, letters=()):
        letters = parse_letters(letters)
        if any(x not in _LETTER_CHARS for x in letters):
            raise ValueError(f"letters must be in {LETTERS}")
        if not is_reduced(letters):
            raise NotReduced(f"{format_letters(letters)} is not reduced")
        return tuple.__new__(cls, letters)

    @classmethod
    def _raw(cls, letters):
        return tuple.__new__(cls, letters)

    @classmethod
    def reduce(cls, letters):
        return cls._raw(reduce_letters(parse_letters(letters)))

    @classmethod
    def identity(cls):
        return cls._raw(())

    @property
    def letters(self):
        return tuple(self)

    def __mul__(self, other):
        return word_mul(self, other)

    __rmul__ = None

    def inverse(self):
        return FreeWord._raw(tuple(-x for x in reversed(self)))

    def key(self):
        return (len(self), tuple(self))

    def __reduce__(self):
        return (FreeWord, (tuple(self),))

    def __str__(self):
        return format_letters(self)

    def __repr__(self):
        return f"FreeWord({str(self)!r})"


def word_mul(u: FreeWord, v: FreeWord) -> FreeWord:
    """Reduced concatenation ``u v``."""
    k = 0
    n = min(len(u), len(v))
    la = len(u)
    while k < n and u[la - 1 - k] == -v[k]:
        k += 1
    return FreeWord._raw(tuple(u[: la - k]) + tuple(v[k:]))


@dataclass(frozen=True)
class BoundaryPoint:
    """Point of the boundary space Z stored through a finite reduced prefix."""

    prefix: tuple

    def __post_init__(self):
        prefix = parse_letters(self.prefix)
        if not is_reduced(prefix):
            raise NotReduced(f"{format_letters(prefix)} is not reduced")
        object.__setattr__(self, "prefix", prefix)

    @property
    def depth(self):
        return len(self.prefix)

    def __str__(self):
        return format_letters(self.prefix) + "..."


def common_prefix_length(u, v):
    n = min(len(u), len(v))
    k = 0
    while k < n and u[k] == v[k]:
        k += 1
    return k


def random_continuation(last, n, rng):
    """``n`` letters of a uniform non-backtracking continuation after ``last``.

    With ``last=None`` the first letter is uniform over all four; this is the
    law of eta conditioned on a cylinder.
    """
    out = []
    prev = last
    for _ in range(n):
        if prev is None:
            x = LETTERS[int(rng.integers(4))]
        else:
            choices = [y for y in LETTERS if y != -prev]
            x = choices[int(rng.integers(3))]
        out.append(x)
        prev = x
    return tuple(out)


def sample_boundary_point(rng, depth=DEFAULT_DEPTH, prefix=()):
    """Draw a point of Z from eta (conditioned on the cylinder ``prefix``)."""
    prefix = parse_letters(prefix)
    last = prefix[-1] if prefix else None
    return BoundaryPoint(prefix + random_continuation(last, depth - len(prefix), rng))


def boundary_act(g: FreeWord, z: BoundaryPoint, rng=None, guard=0) -> BoundaryPoint:
    """Left concatenation and reduction ``g z`` on a truncated boundary point.

    Without ``rng`` the result keeps ``depth(z) - len(g)`` letters, which is
    the part of ``g z`` guaranteed to be known. With ``rng`` the result is
    padded back to ``depth(z)`` by an eta-conditional continuation.
    """
    gl, zl = tuple(g), z.prefix
    if len(zl) < len(gl) + guard + 1:
        raise DepthExhausted(f"depth {len(zl)} cannot absorb a word of length {len(gl)}")
    k = 0
    while k < len(gl) and gl[len(gl) - 1 - k] == -zl[k]:
        k += 1
    if k == len(zl):
        raise DepthExhausted("cancellation consumed the stored prefix")
    word = gl[: len(gl) - k] + zl[k:]
    if rng is None:
        return BoundaryPoint(word[: len(zl) - len(gl)])
    if len(word) >= len(zl):
        return BoundaryPoint(word[: len(zl)])
    return BoundaryPoint(word + random_continuation(word[-1], len(zl) - len(word), rng))


def boundary_head(g: FreeWord, z: BoundaryPoint, n):
    """First ``n`` letters of ``g z`` (raises if they are not determined)."""
    gl, zl = tuple(g), z.prefix
    k = 0
    m = min(len(gl), len(zl))
    while k < m and gl[len(gl) - 1 - k] == -zl[k]:
        k += 1
    if k == len(zl) or len(gl) - k + len(zl) - k < n:
        raise DepthExhausted("prefix too short for the requested head")
    keep = len(gl) - k
    if keep >= n:
        return gl[:n]
    return gl[:keep] + zl[k : k + n - keep]


# ---------------------------------------------------------------------------
# numbers


def to_number(v, kind="exact"):
    """Convert ``v`` to the arithmetic of ``kind``: exact, float or mp."""
    if kind == "exact":
        if isinstance(v, Fraction):
            return v
        if isinstance(v, (int, Rational)):
            return Fraction(v)
        if isinstance(v, (float, str)):
            return Fraction(v)
        if isinstance(v, mpmath.mpf):
            man, exp = v.man_exp
            return Fraction(int(man)) * Fraction(2) ** int(exp)
        raise TypeError(f"cannot convert {type(v).__name__} exactly")
    if kind == "float":
        return float(v)
    if kind == "mp":
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpf(v)
    raise ValueError(f"unknown arithmetic {kind!r}")


def number_kind(v):
    if isinstance(v, (int, Fraction)):
        return "exact"
    if isinstance(v, mpmath.mpf):
        return "mp"
    return "float"


def _eq_tol(kind):
    if kind == "exact":
        return 0
    if kind == "mp":
        return mpmath.mpf(2) ** (-mpmath.mp.prec + 16)
    return TAU_EQ


# ---------------------------------------------------------------------------
# projective line


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Line through the origin of R^2 given by homogeneous coordinates (x : y).

    The canonical chart is the angle ``theta`` in [0, pi) of the direction
    (cos theta, sin theta).
    """

    x: object
    y: object

    def __post_init__(self):
        if self.x == 0 and self.y == 0:
            raise ValueError("(0 : 0) is not a projective point")

    @classmethod
    def from_angle(cls, theta, kind="float"):
        if kind == "mp":
            return cls(mpmath.cos(theta), mpmath.sin(theta))
        return cls(math.cos(theta), math.sin(theta))

    @classmethod
    def from_slope(cls, t):
        """Point with tangent-chart coordinate ``t``; ``None`` or ``inf`` is vertical."""
        if t is None or (isinstance(t, float) and math.isinf(t)):
            return cls(0, 1)
        if isinstance(t, float):
            return cls(1.0, t)
        return cls(Fraction(1), Fraction(t))

    @property
    def kind(self):
        kx, ky = number_kind(self.x), number_kind(self.y)
        if "mp" in (kx, ky):
            return "mp"
        if "float" in (kx, ky):
            return "float"
        return "exact"

    @property
    def theta(self):
        if self.kind == "mp":
            th = mpmath.atan2(self.y, self.x)
            return float(th % mpmath.pi)
        th = math.atan2(float(self.y), float(self.x))
        th = th % math.pi
        return 0.0 if th >= math.pi else th

    def slope(self):
        """Tangent-chart coordinate y/x, ``None`` at the vertical line."""
        if self.x == 0:
            return None
        return self.y / self.x

    def convert(self, kind):
        return ProjectivePoint(to_number(self.x, kind), to_number(self.y, kind))

    def normalized(self):
        """Representative of moderate size (primitive integer vector when exact)."""
        if self.kind == "exact":
            x, y = Fraction(self.x), Fraction(self.y)
            den = math.lcm(x.denominator, y.denominator)
            xi, yi = int(x * den), int(y * den)
            g = math.gcd(xi, yi)
            return ProjectivePoint(xi // g, yi // g)
        if self.kind == "mp":
            r = mpmath.sqrt(self.x * self.x + self.y * self.y)
            return ProjectivePoint(self.x / r, self.y / r)
        r = math.hypot(self.x, self.y)
        return ProjectivePoint(self.x / r, self.y / r)

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return projective_equal(self, other)

    def __hash__(self):
        if self.kind == "exact":
            return hash(self.normalized()._key())
        return hash(round(self.theta, 9))

    def _key(self):
        x, y = self.x, self.y
        if y < 0 or (y == 0 and x < 0):
            x, y = -x, -y
        return (x, y)

    def __repr__(self):
        return f"ProjectivePoint(theta={self.theta:.15g})"


def bracket(p: ProjectivePoint, q: ProjectivePoint):
    """det[p q] = x_p y_q - y_p x_q."""
    return p.x * q.y - p.y * q.x


def projective_equal(p, q, tol=None):
    kind = p.kind if p.kind == q.kind else ("mp" if "mp" in (p.kind, q.kind) else "float")
    if tol is None:
        tol = _eq_tol(kind)
    if kind == "exact" and tol == 0:
        return bracket(p, q) == 0
    d = abs(bracket(p, q))
    if kind == "mp":
        n = mpmath.sqrt((p.x**2 + p.y**2) * (q.x**2 + q.y**2))
    else:
        n = math.sqrt((float(p.x) ** 2 + float(p.y) ** 2) * (float(q.x) ** 2 + float(q.y) ** 2))
    # |det| / (|p||q|) = |sin(angle between the lines)|
    return d <= tol * n


def angle_distance(t1, t2):
    """Distance on P^1 = T/{+-1} measured as arc length on T (angles doubled).

    Values lie in [0, pi]; works elementwise on numpy arrays.
    """
    d = np.abs(2.0 * (np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float))) % (2 * math.pi)
    d = np.minimum(d, 2 * math.pi - d)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class MobiusMap:
    """Projective class of an invertible 2x2 matrix ((a, b), (c, d))."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        if self.det() == 0:
            raise ValueError("degenerate matrix")

    @classmethod
    def from_matrix(cls, m, kind=None):
        (a, b), (c, d) = m
        if kind is not None:
            a, b, c, d = (to_number(v, kind) for v in (a, b, c, d))
        return cls(a, b, c, d)

    @classmethod
    def identity(cls, kind="exact"):
        one, zero = to_number(1, kind), to_number(0, kind)
        return cls(one, zero, zero, one)

    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __mul__ = __matmul__

    def inverse(self):
        """Adjugate, which is the inverse up to the scalar det."""
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def convert(self, kind):
        return MobiusMap(*(to_number(v, kind) for v in self.entries))

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def kind(self):
        kinds = {number_kind(v) for v in self.entries}
        return "mp" if "mp" in kinds else ("float" if "float" in kinds else "exact")

    def normalized(self):
        """Rescaled representative (floats only); exact maps are returned as is."""
        if self.kind == "exact":
            return self
        s = max(abs(v) for v in self.entries)
        return MobiusMap(*(v / s for v in self.entries))

    def as_array(self):
        vals = self.entries
        if self.kind == "exact":
            s = max(abs(v) for v in vals)
            vals = [Fraction(v) / s for v in vals]
        return np.array([[float(vals[0]), float(vals[1])], [float(vals[2]), float(vals[3])]])

    def operator_stretch(self):
        """Largest singular value divided by sqrt|det| (>= 1)."""
        m = self.as_array()
        sv = np.linalg.svd(m, compute_uv=False)
        return float(sv[0] / math.sqrt(abs(sv[0] * sv[1])))

    def same_map(self, other, tol=None):
        """Equality as projective transformations (matrices up to a scalar)."""
        kind = "exact" if self.kind == other.kind == "exact" else "float"
        p, q = self.entries, other.entries
        if tol is None:
            tol = _eq_tol(kind)
        # all 2x2 minors of the 2x4 matrix [p; q] vanish iff proportional
        scale = max(abs(v) for v in p) * max(abs(v) for v in q)
        for i in range(4):
            for j in range(i + 1, 4):
                if abs(p[i] * q[j] - p[j] * q[i]) > tol * scale:
                    return False
        return True


def mobius_apply(M: MobiusMap, p: ProjectivePoint) -> ProjectivePoint:
    q = ProjectivePoint(M.a * p.x + M.b * p.y, M.c * p.x + M.d * p.y)
    return q.normalized() if q.kind != "exact" else q


def mobius_apply_angles(M: MobiusMap, thetas):
    """Vectorized float action on an array of angles; returns angles in [0, pi)."""
    m = M.normalized().as_array()
    th = np.asarray(thetas, dtype=float)
    x, y = np.cos(th), np.sin(th)
    u = m[0, 0] * x + m[0, 1] * y
    v = m[1, 0] * x + m[1, 1] * y
    out = np.arctan2(v, u) % math.pi
    return np.where(out >= math.pi, 0.0, out)


def cross_ratio(p1, p2, p3, p4):
    """Cross-ratio normalized so that ``cross_ratio(0, 1, inf, lam) == lam``.

    In the tangent chart this is ((t4 - t1)(t2 - t3)) / ((t4 - t3)(t2 - t1));
    it is evaluated through 2x2 determinants of homogeneous coordinates, so
    the vertical line needs no special case.
    """
    pts = (p1, p2, p3, p4)
    for i in range(4):
        for j in range(i + 1, 4):
            if projective_equal(pts[i], pts[j]):
                raise DegenerateTuple(f"points {i + 1} and {j + 1} coincide")
    num = bracket(p4, p1) * bracket(p2, p3)
    den = bracket(p4, p3) * bracket(p2, p1)
    if isinstance(num, int) and isinstance(den, int):
        return Fraction(num, den)
    return num / den


def word_to_mobius(w: FreeWord, gens) -> MobiusMap:
    """Image of ``w`` under the homomorphism a -> gens[0], b -> gens[1]."""
    ta, tb = gens
    table = {A: ta, -A: ta.inverse(), B: tb, -B: tb.inverse()}
    kind = ta.kind
    m = MobiusMap.identity("exact" if kind == "exact" else kind)
    for x in w:
        m = m @ table[x]
        if kind != "exact":
            m = m.normalized()
    return m


# ---------------------------------------------------------------------------
# arcs and the Schottky pair


@dataclass(frozen=True)
class Arc:
    """Closed arc of P^1 running counterclockwise from ``start`` to ``end`` (angles mod pi)."""

    start: float
    end: float

    @property
    def length(self):
        return (self.end - self.start) % math.pi

    @property
    def center(self):
        return (self.start + self.length / 2) % math.pi

    def contains(self, theta, tol=0.0):
        rel = (np.asarray(theta, dtype=float) - self.start) % math.pi
        inside = (rel <= self.length + tol) | (rel >= math.pi - tol)
        return bool(inside) if np.ndim(inside) == 0 else inside

    def disjoint(self, other):
        return not (self.contains(other.start) or self.contains(other.end) or other.contains(self.start))

    def grid(self, n):
        return (self.start + np.linspace(0.0, self.length, n)) % math.pi

    def complement(self):
        return Arc(self.end, self.start)


@dataclass
class SchottkyPair:
    ta: MobiusMap
    tb: MobiusMap
    arcs: dict
    separation: object
    certificate: dict = field(default_factory=dict)

    @property
    def gens(self):
        return (self.ta, self.tb)


# infimum of the certified separations for the diagonal / rotated-diagonal
# family; found by bisection with the certificate itself (see tests)
SCHOTTKY_S0 = 2.4142136


def _half_width(s):
    # T_a maps the complement of I(A) into I(a) iff s >= cot(w); arcs of
    # half-width w are disjoint iff w < pi/8
    lo = math.atan(1.0 / s)
    return 0.5 * (lo + math.pi / 8)


def schottky_pair(separation=3, grid=2001) -> SchottkyPair:
    """T_a = diag(s, 1/s), T_b = R(pi/4) T_a R(-pi/4), with a ping-pong certificate.

    The certificate is checked numerically: every point of a ``grid``-point
    sampling of the closed complement of I(x^-1) must land in I(x), for each
    of the four letters x. Raises ``PingPongFailed`` otherwise.
    """
    s = to_number(separation, "exact")
    if s <= 0:
        raise PingPongFailed("separation must be positive")
    inv = 1 / s
    half = Fraction(1, 2)
    ta = MobiusMap(s, Fraction(0), Fraction(0), inv)
    tb = MobiusMap(half * (s + inv), half * (s - inv), half * (s - inv), half * (s + inv))
    if s <= 1:
        raise PingPongFailed(f"separation {float(s)} gives no contraction")
    w = _half_width(float(s))
    centers = {A: 0.0, -A: math.pi / 2, B: math.pi / 4, -B: 3 * math.pi / 4}
    arcs = {x: Arc((c - w) % math.pi, (c + w) % math.pi) for x, c in centers.items()}
    cert = certify_ping_pong((ta, tb), arcs, grid)
    if not cert["ok"]:
        raise PingPongFailed(f"ping-pong inclusions fail at separation {float(s)}: {cert['failures']}")
    return SchottkyPair(ta, tb, arcs, s, cert)


def certify_ping_pong(gens, arcs, grid=2001):
    """Grid check of the ping-pong inclusions and of pairwise disjointness."""
    ta, tb = gens
    maps = {A: ta, -A: ta.inverse(), B: tb, -B: tb.inverse()}
    failures = []
    margin = math.inf
    keys = list(arcs)
    for i, x in enumerate(keys):
        for y in keys[i + 1 :]:
            if not arcs[x].disjoint(arcs[y]):
                failures.append(f"I({format_letters((x,))}) meets I({format_letters((y,))})")
    for x, m in maps.items():
        source = arcs[-x].complement()
        pts = source.grid(grid)
        img = mobius_apply_angles(m, pts)
        target = arcs[x]
        rel = (img - target.start) % math.pi
        dist_out = np.where(rel <= target.length, 0.0, np.minimum(rel - target.length, math.pi - rel))
        if np.any(dist_out > 0):
            failures.append(f"T_{format_letters((x,))} escapes I({format_letters((x,))})")
        inner = np.minimum(rel, target.length - rel)
        margin = min(margin, float(np.min(np.where(dist_out > 0, -dist_out, inner))))
    return {"ok": not failures, "grid": grid, "failures": failures, "min_margin": margin}


# ---------------------------------------------------------------------------
# affine group


@dataclass(frozen=True)
class AffineElement:
    """x -> s x + q with q rational and s a positive rational."""

    q: Fraction
    s: Fraction

    def __post_init__(self):
        q, s = to_number(self.q), to_number(self.s)
        if s <= 0:
            raise ValueError("dilation must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "s", s)

    @classmethod
    def identity(cls):
        return cls(0, 1)

    def __mul__(self, other):
        return AffineElement(self.s * other.q + self.q, self.s * other.s)

    def inverse(self):
        return AffineElement(-self.q / self.s, 1 / self.s)

    def key(self):
        return (self.q, self.s)

    def __str__(self):
        return f"({self.q},{self.s})"


def affine_apply(g: AffineElement, x):
    if isinstance(x, float):
        return float(g.s) * x + float(g.q)
    return g.s * x + g.q


# ---------------------------------------------------------------------------
# odometer


@dataclass(frozen=True)
class OdometerPoint:
    """Bits (w_1, ..., w_N); w_1 is the least significant digit."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def depth(self):
        return len(self.bits)

    @classmethod
    def from_int(cls, value, depth=DEFAULT_DEPTH):
        if not 0 <= value < 2**depth:
            raise ValueError("value out of range")
        return cls(tuple((value >> i) & 1 for i in range(depth)))

    def to_int(self):
        return sum(b << i for i, b in enumerate(self.bits))


def odometer_step(w: OdometerPoint):
    """Add 1 with carry. Returns ``(T w, k)`` with ``k`` the number of leading ones."""
    bits = list(w.bits)
    k = 0
    while k < len(bits) and bits[k] == 1:
        k += 1
    if k == len(bits):
        raise Overflow("all-ones pattern at the stored depth")
    for i in range(k):
        bits[i] = 0
    bits[k] = 1
    return OdometerPoint(tuple(bits)), k


# ---------------------------------------------------------------------------
# lattice


@dataclass(frozen=True)
class LatticePoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def dim(self):
        return len(self.coords)

    def __add__(self, other):
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return LatticePoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def is_origin(self):
        return not any(self.coords)


def lattice_steps(d):
    """The 2d unit moves of Z^d, ordered +e1, -e1, +e2, -e2, ..."""
    out = []
    for i in range(d):
        for sgn in (1, -1):
            c = [0] * d
            c[i] = sgn
            out.append(LatticePoint(tuple(c)))
    return out




# ---------------------------------------------------------------------------
# actions as callables ``action(g, x)``


class ProjectiveAction:
    """F2 (or raw matrices) acting on P^1 through ``word_to_mobius``.

    Points may be ``ProjectivePoint`` objects or plain float angles; ``many``
    maps a whole array of angles at once.
    """

    def __init__(self, gens, max_cache=200_000):
        self.gens = tuple(gens)
        self._cache = {}
        self._max_cache = max_cache

    def matrix(self, g):
        if isinstance(g, MobiusMap):
            return g
        m = self._cache.get(g)
        if m is None:
            if len(g) > 1:
                # the prefix is usually cached already when walking words
                m = self.matrix(FreeWord._raw(g[:-1])) @ self.matrix(FreeWord._raw(g[-1:]))
                if m.kind != "exact":
                    m = m.normalized()
            else:
                m = word_to_mobius(g, self.gens)
            if len(self._cache) < self._max_cache:
                self._cache[g] = m
        return m

    def __call__(self, g, p):
        m = self.matrix(g)
        if isinstance(p, ProjectivePoint):
            return mobius_apply(m, p)
        return float(mobius_apply_angles(m, p))

    def many(self, g, thetas):
        return mobius_apply_angles(self.matrix(g), thetas)


class BoundaryAction:
    """F2 acting on truncated boundary points by left concatenation.

    With ``head`` set, only the first ``head`` letters of g z are returned
    (as a letter tuple), which is all a cylinder test needs.
    """

    def __init__(self, head=None, guard=0):
        self.head = head
        self.guard = guard

    def __call__(self, g, z):
        if self.head is not None:
            return boundary_head(g, z, self.head)
        return boundary_act(g, z, guard=self.guard)


class AffineAction:
    """The affine group acting on R; exact on rationals."""

    def __call__(self, g, x):
        return affine_apply(g, x)


def bind(action, g):
    """``x -> action(g, x)``, keeping a vectorized ``many`` when available."""

    def f(x):
        return action(g, x)

    if hasattr(action, "many"):
        f.many = lambda xs: action.many(g, xs)
    return f
