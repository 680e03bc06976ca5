"""Markov operators (A f)(x) = sum_g m(g) f(g x) on finite grids, their Cesaro
averages, decay tests for unique ergodicity, and a stationary-measure iterator."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ContractionViolated
from .measures import EmpiricalMeasure, reduced_prefixes
from .randomwalk import convolve_measure, stationarity_defect
from .rng import make_rng
from .systems import reduce_letters

CONTRACTION_TOL = 1e-12


# ---------------------------------------------------------------------------
# grids


class ProjectiveGrid:
    """n equally spaced angles i pi / n on P^1 with periodic linear interpolation."""

    space = "projective"

    def __init__(self, n):
        if n < 1:
            raise ValueError("grid needs at least one point")
        self.n = n
        self.points = np.arange(n) * (math.pi / n)

    @property
    def spacing(self):
        return math.pi / self.n

    def __len__(self):
        return self.n

    def transfer(self, g, action):
        """Interpolation stencil of f -> f o g: (indices, weights), rows summing to 1."""
        u = np.asarray(action.many(g, self.points), dtype=float) / self.spacing
        base = np.floor(u)
        t = u - base
        i0 = base.astype(np.int64) % self.n
        i1 = (i0 + 1) % self.n
        return np.stack([i0, i1], axis=1), np.stack([1.0 - t, t], axis=1)

    def refined(self):
        return ProjectiveGrid(2 * self.n)


class CylinderGrid:
    """Level-k cylinders of the boundary of F2; functions are constant on them.

    When g cancels into a cylinder the image is a coarser cylinder and f o g
    is replaced by its eta-conditional average over the level-k pieces.
    """

    space = "cylinder"

    def __init__(self, level):
        if level < 1:
            raise ValueError("level must be >= 1")
        self.level = level
        self.points = list(reduced_prefixes(level))
        self._index = {p: i for i, p in enumerate(self.points)}

    @property
    def spacing(self):
        return 3.0**-self.level

    def __len__(self):
        return len(self.points)

    def transfer(self, g, action=None):
        k = self.level
        if len(g) >= k:
            raise ValueError(f"word {g} too long for cylinder level {k}")
        rows = []
        for c in self.points:
            img = reduce_letters(tuple(g) + c)
            if len(img) >= k:
                rows.append([self._index[img[:k]]])
            else:
                rows.append([self._index[p] for p in self.points if p[: len(img)] == img])
        width = max(len(r) for r in rows)
        J = np.array([r + [r[0]] * (width - len(r)) for r in rows], dtype=np.int64)
        W = np.array([[1.0 / len(r)] * len(r) + [0.0] * (width - len(r)) for r in rows])
        return J, W

    def refined(self):
        return CylinderGrid(self.level + 1)


class FiniteGrid:
    """A finite invariant set; ``action(g, p)`` must return one of the points."""

    space = "discrete"
    spacing = 0.0

    def __init__(self, points):
        self.points = list(points)
        self._index = {p: i for i, p in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    def transfer(self, g, action):
        J = np.array([[self._index[action(g, p)]] for p in self.points], dtype=np.int64)
        return J, np.ones_like(J, dtype=float)

    def refined(self):
        return self


# ---------------------------------------------------------------------------
# test functions


@dataclass
class TestFunction:
    """Values of f on a grid, with a Lipschitz constant used for error bounds."""

    __test__ = False  # not a pytest class

    grid: object
    values: np.ndarray
    lipschitz: float = 0.0
    name: str = "f"
    fn: object = None

    @classmethod
    def from_callable(cls, grid, fn, lipschitz=0.0, name="f"):
        vals = np.array([fn(p) for p in grid.points], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("test function values must be finite")
        return cls(grid, vals, float(lipschitz), name, fn)

    def on(self, grid):
        if self.fn is None:
            raise ValueError("function has no callable form to regrid")
        return TestFunction.from_callable(grid, self.fn, self.lipschitz, self.name)

    def oscillation(self):
        return float(self.values.max() - self.values.min())

    def interpolation_bound(self):
        return self.lipschitz * self.grid.spacing / 2.0

    def with_values(self, values, name=None):
        return TestFunction(self.grid, values, self.lipschitz, name or self.name, None)


def trig_family(grid, degree):
    """cos 2k theta and sin 2k theta for k = 1..degree (pi-periodic)."""
    out = []
    for k in range(1, degree + 1):
        out.append(TestFunction.from_callable(grid, _Trig(math.cos, k), 2 * k, f"cos{2 * k}"))
        out.append(TestFunction.from_callable(grid, _Trig(math.sin, k), 2 * k, f"sin{2 * k}"))
    return out


@dataclass(frozen=True)
class _Trig:
    f: object
    k: int

    def __call__(self, theta):
        return self.f(2 * self.k * theta)


@dataclass(frozen=True)
class _Indicator:
    prefix: tuple

    def __call__(self, c):
        return 1.0 if c[: len(self.prefix)] == self.prefix else 0.0


def cylinder_family(grid, max_level):
    """Indicators of all cylinders of level 1..max_level."""
    from .systems import format_letters

    out = []
    for k in range(1, max_level + 1):
        for p in reduced_prefixes(k):
            out.append(TestFunction.from_callable(grid, _Indicator(p), 0.0, "1_" + format_letters(p)))
    return out


# ---------------------------------------------------------------------------
# the operator


class MarkovOperator:
    """(A f)(x_i) = sum_g m(g) f(g x_i) with f interpolated off the grid."""

    def __init__(self, m, grid, action=None):
        self.m = m
        self.grid = grid
        self.weights = np.array([float(w) for w in m.weights])
        self.stencils = [grid.transfer(g, action) for g in m.support]

    def __call__(self, values, check=True):
        values = np.asarray(values, dtype=float)
        parts = []
        for J, W in self.stencils:
            f = values[J]
            h = np.sum(W * f, axis=1)
            # rounding guard: an interpolated value stays between its nodes
            parts.append(np.clip(h, f.min(axis=1), f.max(axis=1)))
        H = np.stack(parts)
        out = np.clip(self.weights @ H, H.min(axis=0), H.max(axis=0))
        if check:
            osc_in = float(values.max() - values.min())
            osc_out = float(out.max() - out.min())
            if osc_out > osc_in + CONTRACTION_TOL * max(1.0, float(np.abs(values).max())):
                raise ContractionViolated(f"osc grew from {osc_in!r} to {osc_out!r}")
        return out


def markov_apply(m, f: TestFunction, action=None) -> TestFunction:
    """One application of the Markov operator of m."""
    return f.with_values(MarkovOperator(m, f.grid, action)(f.values))


def cesaro_apply(m, f: TestFunction, action, n) -> TestFunction:
    """(1/n) sum_{j=1..n} A^j f by iterating the operator."""
    if n < 1:
        raise ValueError("n must be >= 1")
    op = MarkovOperator(m, f.grid, action)
    h = f.values
    acc = np.zeros_like(h)
    for _ in range(n):
        h = op(h)
        acc += h
    return f.with_values(acc / n)


def table_apply(table, f: TestFunction, action=None) -> TestFunction:
    """sum_w table(w) f(w x) straight from a convolution table (no iteration)."""
    acc = np.zeros(len(f.grid))
    for g, w in table.float_items():
        J, W = f.grid.transfer(g, action)
        acc += w * np.sum(W * f.values[J], axis=1)
    return f.with_values(acc)


# ---------------------------------------------------------------------------
# decay reports


@dataclass
class DecayReport:
    """osc(A_n f) for n = 1..n_max per test function, and the resulting verdict."""

    function_ids: list
    oscillations: dict
    truncation: list
    tol: float
    n_max: int
    grid_size: int
    interpolation_bounds: dict
    refinements: int = 0
    passed: bool = False
    history: list = field(default_factory=list)

    @property
    def verdict(self):
        if self.passed:
            return "consistent with unique ergodicity"
        return "inconsistent with unique ergodicity at this resolution"

    def final(self):
        return {k: v[-1] for k, v in self.oscillations.items()}

    def to_dict(self):
        return {
            "functions": self.function_ids,
            "final_oscillation": self.final(),
            "max_final_oscillation": max(self.final().values()) if self.function_ids else 0.0,
            "tol": self.tol,
            "n_max": self.n_max,
            "grid_size": self.grid_size,
            "interpolation_bounds": self.interpolation_bounds,
            "refinements": self.refinements,
            "truncation_max": max(self.truncation) if self.truncation else 0.0,
            "passed": self.passed,
            "verdict": self.verdict,
            "history": self.history,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "function", "oscillation"])
        for fid in self.function_ids:
            for n, v in enumerate(self.oscillations[fid], start=1):
                w.writerow([n, fid, repr(float(v))])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _decay_curves(m, action, fns, n_max):
    grid = fns[0].grid
    op = MarkovOperator(m, grid, action)
    curves = {}
    for f in fns:
        h = f.values
        acc = np.zeros_like(h)
        osc = []
        for n in range(1, n_max + 1):
            h = op(h)
            acc += h
            a = acc / n
            osc.append(float(a.max() - a.min()))
        curves[f.name] = osc
    return curves


def unique_ergodicity_test(m, action, test_functions, n_max, tol, max_refinements=2) -> DecayReport:
    """Oscillation of the Cesaro averages A_n f for each test function.

    The verdict is positive iff every oscillation at n_max is below ``tol``.
    If a failing plateau sits within twice the interpolation error bound the
    grid is doubled (at most ``max_refinements`` times) to separate grid
    artefacts from genuine non-decay.
    """
    fns = list(test_functions)
    if not fns:
        raise ValueError("need at least one test function")
    history = []
    refinements = 0
    while True:
        curves = _decay_curves(m, action, fns, n_max)
        bounds = {f.name: f.interpolation_bound() for f in fns}
        finals = {k: v[-1] for k, v in curves.items()}
        passed = all(v < tol for v in finals.values())
        history.append({"grid_size": len(fns[0].grid), "max_final": max(finals.values())})
        if passed or refinements >= max_refinements:
            break
        near_grid = [k for k, v in finals.items() if v >= tol and v <= 2 * bounds[k] and bounds[k] > 0]
        if not near_grid or any(f.fn is None for f in fns):
            break
        grid = fns[0].grid.refined()
        fns = [f.on(grid) for f in fns]
        refinements += 1
    return DecayReport(
        function_ids=[f.name for f in fns],
        oscillations=curves,
        truncation=[0.0] * n_max,
        tol=tol,
        n_max=n_max,
        grid_size=len(fns[0].grid),
        interpolation_bounds=bounds,
        refinements=refinements,
        passed=passed,
        history=history,
    )


# ---------------------------------------------------------------------------
# stationary measures


@dataclass
class StationaryEstimate:
    measure: EmpiricalMeasure
    defect: object
    metric: str
    iters: int


def stationary_iterate(m, action, theta0: EmpiricalMeasure, iters, seed=0, metric=None) -> StationaryEstimate:
    """(1/iters) sum_{j=1..iters} m^(j) * theta0 with its stationarity defect.

    Cylinder measures are iterated exactly. Angle clouds follow one forward
    chain x_j = xi_j x_{j-1} per atom, so each time j contributes a sample of
    m^(j) * theta0. Other spaces use the same chain pointwise.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if theta0.space == "cylinder":
        mu = theta0
        acc = {}
        for _ in range(iters):
            mu = convolve_measure(m, mu)
            for p, w in mu.atoms():
                acc[p] = acc.get(p, Fraction(0)) + w
        pts = sorted(acc, key=lambda p: (len(p), p))
        out = EmpiricalMeasure("cylinder", pts, [acc[p] / iters for p in pts], check=False)
        metric = metric or "tv"
    elif isinstance(theta0.points, np.ndarray) and hasattr(action, "many"):
        rng = make_rng(seed, "stationary")
        x = np.asarray(theta0.points, dtype=float).copy()
        w0 = theta0.float_weights() / iters
        clouds = []
        for _ in range(iters):
            idx = m.sample_indices(rng, len(x))
            for k, g in enumerate(m.support):
                sel = idx == k
                if sel.any():
                    x[sel] = action.many(g, x[sel])
            clouds.append(x.copy())
        out = EmpiricalMeasure(theta0.space, np.concatenate(clouds), np.tile(w0, iters), check=False)
        metric = metric or "w1"
    else:
        rng = make_rng(seed, "stationary")
        pts, ws = [], []
        cur = list(theta0.points)
        for _ in range(iters):
            steps = m.sample(rng, len(cur))
            cur = [action(g, p) for g, p in zip(steps, cur)]
            pts.extend(cur)
            ws.extend(w / iters for _, w in theta0.atoms())
        out = EmpiricalMeasure(theta0.space, pts, ws if theta0.exact else np.array(ws), check=False).merged()
        metric = metric or "tv"
    defect = stationarity_defect(m, out, action, metric)
    return StationaryEstimate(out, defect, metric, iters)


__all__ = [
    "CylinderGrid",
    "DecayReport",
    "FiniteGrid",
    "MarkovOperator",
    "ProjectiveGrid",
    "StationaryEstimate",
    "TestFunction",
    "cesaro_apply",
    "cylinder_family",
    "markov_apply",
    "stationary_iterate",
    "table_apply",
    "trig_family",
    "unique_ergodicity_test",
]
