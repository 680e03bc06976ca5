"""The experiment catalogue: each entry reproduces one scenario end to end and
returns named checks against pinned thresholds plus data and CSV tables."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ContractionViolated, PingPongFailed
from .measures import (
    EmpiricalMeasure,
    all_level_masses,
    density_mass,
    eta_cylinder,
    eta_discretization,
    eta_discretization_points,
    free_group_uniform,
    affine_step_distribution,
    mu_p_cylinder,
    one_letter_extensions,
    reduced_prefixes,
    rn_derivative_odometer,
)
from .mixing_lab import (
    CylinderPair,
    FiniteChain,
    LatticeChain,
    OrderTarget,
    affine_order_invariant,
    affine_order_source,
    boundary_reachability,
    concentration_survey,
    cross_ratio_invariance_batch,
    cyclic_order_invariant,
    de_reachability,
    induced_block_distribution,
    odometer_square_batch,
    proximality_test,
    random_affine_elements,
    random_interval_union,
    random_words,
    recurrence_profile,
    sat_blowup_search,
)
from .operators import ProjectiveGrid, stationary_iterate, trig_family, unique_ergodicity_test
from .randomwalk import stationarity_defect
from .rng import make_rng
from .systems import (
    SCHOTTKY_S0,
    A,
    B,
    AffineAction,
    BoundaryAction,
    OdometerPoint,
    ProjectiveAction,
    ProjectivePoint,
    odometer_step,
    schottky_pair,
)

# thresholds pinned by pilot runs at the default seed 20240611
UE_TOL = 0.05  # pilot: max osc 0.0226 at n = 200
STATIONARY_DEFECT_BOUND = 0.01  # pilot: W1 defect 0.0017 to 0.0029 over seeds 0..4
Z4_BOUND = 0.05  # pilot: Z^4 means 0.541 at T = 1e3, 1e4 and 1e5
PROXIMALITY_LEVEL = 0.1  # pilot: Cesaro exceedance 0.057 (tables) and 0.056 (walks) at n = 50
CONCENTRATION_LEVEL = 0.9
CONCENTRATION_FRACTION = 0.95  # pilot: 200 of 200 seeds above 0.9 at n = 50


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    threshold: object = None

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "value": _plain(self.value), "threshold": _plain(self.threshold)}


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    truncation: dict = field(default_factory=dict)

    def check(self, name, passed, value=None, threshold=None):
        self.checks.append(Check(name, bool(passed), value, threshold))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else _plain(x) for x in r])
    return buf.getvalue()


@dataclass(frozen=True)
class Experiment:
    id: str
    anchor: str
    description: str
    defaults: dict
    run: object


REGISTRY = {}


def experiment(id, anchor, description, **defaults):
    def deco(fn):
        REGISTRY[id] = Experiment(id, anchor, description, defaults, fn)
        return fn

    return deco


def catalog():
    """Experiments in stable (registration) order."""
    return list(REGISTRY.values())


# ---------------------------------------------------------------------------


@experiment(
    "eta-cylinders",
    "boundary measure eta(C(e1..en)) = 1/(4 3^(n-1)); m-stationarity of eta",
    "Exact cylinder masses, level sums, Kolmogorov consistency and exact stationarity",
    max_level=8,
    consistency_level=6,
    stationarity_level=4,
)
def run_eta_cylinders(cfg):
    p = cfg.params
    out = Outcome()
    out.check("eta(a) = 1/4", eta_cylinder("a") == Fraction(1, 4), eta_cylinder("a"), "1/4")
    out.check("eta(ab) = 1/12", eta_cylinder("ab") == Fraction(1, 12), eta_cylinder("ab"), "1/12")
    rows = []
    for n in range(1, p["max_level"] + 1):
        s = all_level_masses(n, "eta")
        rows.append([n, 4 * 3 ** (n - 1), str(s)])
        out.check(f"level {n} sums to 1", s == 1, s, 1)
    bad = 0
    for n in range(0, p["consistency_level"] + 1):
        for pre in reduced_prefixes(n):
            if eta_cylinder(pre) != sum(eta_cylinder(e) for e in one_letter_extensions(pre)):
                bad += 1
    out.check(f"Kolmogorov consistency up to level {p['consistency_level']}", bad == 0, bad, 0)
    defect = stationarity_defect(free_group_uniform(), eta_discretization(p["stationarity_level"]))
    out.check(f"stationarity defect of the level-{p['stationarity_level']} discretization", defect == 0, defect, 0)
    out.tables["level_sums.csv"] = (["level", "cylinders", "sum"], rows)
    out.data["stationarity_defect"] = str(defect)
    return out


@experiment(
    "schottky-certify",
    "T_a, T_b as 'appropriately chosen' Moebius maps of the projective line",
    "Ping-pong certificate for the diagonal / rotated-diagonal Schottky pair",
    separation=3,
    grid=2001,
)
def run_schottky(cfg):
    p = cfg.params
    out = Outcome()
    sp = schottky_pair(p["separation"], p["grid"])
    cert = sp.certificate
    out.check("ping-pong inclusions", cert["ok"], cert["failures"], [])
    arcs = list(sp.arcs.values())
    disjoint = all(arcs[i].disjoint(arcs[j]) for i in range(4) for j in range(i + 1, 4))
    out.check("arcs pairwise disjoint", disjoint, disjoint, True)
    try:
        schottky_pair(1, p["grid"])
        out.check("identity pair rejected", False)
    except PingPongFailed:
        out.check("identity pair rejected", True)
    out.check("separation above the certified threshold", float(sp.separation) >= SCHOTTKY_S0, float(sp.separation), SCHOTTKY_S0)
    out.data["certificate"] = cert
    out.data["arcs"] = {("a", "A", "b", "B")[i]: [a.start, a.end] for i, a in enumerate(arcs)}
    out.data["s0"] = SCHOTTKY_S0
    return out


def _schottky_gens(separation=3):
    return schottky_pair(separation).gens


def _random_quads(rng, count, backend):
    quads = []
    while len(quads) < count:
        if backend == "exact":
            ts = set()
            while len(ts) < 4:
                ts.add(Fraction(int(rng.integers(-60, 61)), int(rng.integers(1, 16))))
            quads.append([ProjectivePoint.from_slope(t) for t in sorted(ts)])
        else:
            th = np.sort(rng.random(4)) * math.pi
            if np.min(np.diff(th)) > 1e-3:
                quads.append([ProjectivePoint.from_angle(float(t)) for t in th])
    return quads


@experiment(
    "cross-ratio",
    "the cross-ratio relation is preserved by the diagonal action on X^4",
    "Cross-ratio of 100 quadruples under 1000 random Schottky words of length <= 20",
    words=1000,
    max_length=20,
    quads=100,
    separation=3,
    tolerance=1e-9,
)
def run_cross_ratio(cfg):
    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "cross-ratio")
    words = random_words(rng, p["words"], p["max_length"])
    quads = _random_quads(rng, p["quads"], cfg.backend)
    ws = cross_ratio_invariance_batch(quads, words, _schottky_gens(p["separation"]), cfg.backend)
    devs = [w.max_deviation for w in ws]
    worst = max(devs)
    if cfg.backend == "exact":
        out.check("deviation exactly 0 (rational arithmetic)", worst == 0, worst, 0)
    else:
        out.check("max deviation within tolerance", float(worst) <= p["tolerance"], float(worst), p["tolerance"])
    out.data["max_deviation"] = _plain(worst)
    out.data["meta"] = ws[0].meta
    out.tables["deviations.csv"] = (
        ["quad", "cross_ratio", "max_deviation"],
        [[i, str(w.initial) if cfg.backend == "exact" else float(w.initial), _plain(w.max_deviation)] for i, w in enumerate(ws)],
    )
    return out


@experiment(
    "cyclic-order",
    "the arcs TA, TB, TC, TD are ordered either clockwise or counterclockwise",
    "Cyclic order of the four ping-pong arcs under 1000 random words",
    words=1000,
    max_length=20,
    separation=3,
)
def run_cyclic_order(cfg):
    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "cyclic-order")
    words = random_words(rng, p["words"], p["max_length"])
    sp = schottky_pair(p["separation"])
    w = cyclic_order_invariant(list(sp.arcs.values()), words, sp.gens, cfg.backend)
    out.check("order type constant up to orientation", w.violations == 0, w.violations, 0)
    out.data["order_type"] = w.initial
    out.data["meta"] = w.meta
    return out


@experiment(
    "sat-blowup",
    "SAT: a sequence g_n with mu(g_n A) -> 1, via density points",
    "Blow-up of random interval unions under the rational affine group",
    unions=20,
    intervals=20,
    target=0.99,
    mass_low=0.05,
    mass_high=0.95,
)
def run_sat(cfg):
    from .mixing_lab.sat import SAT_ITERATION_CAP

    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "sat-blowup")
    rows, ok, worst = [], 0, 0
    for i in range(p["unions"]):
        A = random_interval_union(rng, p["intervals"], (p["mass_low"], p["mass_high"]))
        m0 = density_mass(A)
        r = sat_blowup_search(A, p["target"])
        ok += r.achieved >= p["target"] and p["mass_low"] < m0 < p["mass_high"]
        worst = max(worst, r.iterations)
        rows.append([i, m0, str(r.gamma.q), str(r.gamma.s), r.achieved, r.iterations])
    out.check("all unions reach the target", ok == p["unions"], ok, p["unions"])
    out.check("iterations within the cap", worst <= SAT_ITERATION_CAP, worst, SAT_ITERATION_CAP)
    r = sat_blowup_search([(-1, 1)], p["target"])
    out.check("(-1, 1) blows up", r.achieved >= p["target"], r.to_dict(), p["target"])
    out.tables["searches.csv"] = (["union", "initial_mass", "q", "s", "achieved", "iterations"], rows)
    return out


@experiment(
    "odometer-square",
    "T x T preserves the graphs {(w, w + eta)} of the dyadic adding machine",
    "Dyadic difference along diagonal odometer orbits, odometer cyclicity, RN derivative",
    pairs=100,
    steps=100_000,
    depth=32,
    cyclic_depth=12,
    rn_depth=10,
)
def run_odometer(cfg):
    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "odometer-square")
    N, steps = p["depth"], p["steps"]
    hi = 2**N - steps - 1
    first = [OdometerPoint.from_int(int(rng.integers(0, hi)), N) for _ in range(p["pairs"])]
    second = [OdometerPoint.from_int(int(rng.integers(0, hi)), N) for _ in range(p["pairs"])]
    rec, maxdev = odometer_square_batch(first, second, steps, record_every=max(1, steps // 10))
    bad = int(np.count_nonzero(maxdev))
    out.check(f"difference preserved over {steps} steps", bad == 0, bad, 0)
    cyc_bad = []
    for n in range(1, p["cyclic_depth"] + 1):
        w = OdometerPoint((0,) * n)
        seen = {w.to_int()}
        for _ in range(2**n - 1):
            w, _k = odometer_step(w)
            seen.add(w.to_int())
        if len(seen) != 2**n:
            cyc_bad.append(n)
    out.check(f"orbit of 0 visits all patterns for N <= {p['cyclic_depth']}", not cyc_bad, cyc_bad, [])
    rn_bad = 0
    for q in (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
        for n in range(1, p["rn_depth"] + 1):
            for bits in itertools.product((0, 1), repeat=n):
                if all(bits):
                    continue
                w = OdometerPoint(bits)
                tw, _ = odometer_step(w)
                if rn_derivative_odometer(w, q) != mu_p_cylinder(tw.bits, q) / mu_p_cylinder(bits, q):
                    rn_bad += 1
    out.check("RN derivative matches cylinder quotients", rn_bad == 0, rn_bad, 0)
    out.data["kernel"] = kernels.BACKEND
    out.tables["differences.csv"] = (
        ["pair", "checkpoint", "difference"],
        [[i, j, int(v)] for i in range(min(10, len(rec))) for j, v in enumerate(rec[i])],
    )
    return out


@experiment(
    "affine-order",
    "the ax+b group has ergodic components {x < y} and {x > y} on R^2",
    "sign(y - x) under random rational affine maps",
    pairs=100,
    elements=100,
)
def run_affine_order(cfg):
    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "affine-order")
    pairs = []
    while len(pairs) < p["pairs"]:
        x = Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))
        y = Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))
        if x != y:
            pairs.append((x, y))
    elems = random_affine_elements(rng, p["elements"])
    w = affine_order_invariant(pairs, elems)
    out.check("sign(y - x) preserved", w.violations == 0, w.violations, 0)
    out.data["combinations"] = len(w.values)
    out.data["max_deviation"] = w.max_deviation
    return out


@experiment(
    "unique-ergodicity",
    "A_n f converges uniformly to a constant for f in a spanning family",
    "Oscillation of Cesaro averages of the Schottky Markov operator on P^1",
    grid=720,
    degree=3,
    n_max=200,
    tol=UE_TOL,
    separation=3,
    stationary_atoms=1000,
    stationary_iters=200,
    stationary_bound=STATIONARY_DEFECT_BOUND,
)
def run_unique_ergodicity(cfg):
    p = cfg.params
    out = Outcome()
    sp = schottky_pair(p["separation"])
    act = ProjectiveAction(sp.gens)
    m = free_group_uniform()
    grid = ProjectiveGrid(p["grid"])
    try:
        rep = unique_ergodicity_test(m, act, trig_family(grid, p["degree"]), p["n_max"], p["tol"])
    except ContractionViolated as exc:
        out.check("osc(A f) <= osc(f) at every step", False, str(exc), None)
        return out
    out.check("osc(A f) <= osc(f) at every step", True, "checked on every application", None)
    worst = max(rep.final().values())
    out.check(f"osc(A_n f) at n = {p['n_max']} below tol", rep.passed, worst, p["tol"])
    k = p["stationary_atoms"]
    theta0 = EmpiricalMeasure("projective", np.arange(k) * (math.pi / k), np.full(k, 1.0 / k), check=False)
    st = stationary_iterate(m, act, theta0, p["stationary_iters"], seed=cfg.seed)
    out.check("stationarity defect of the iterate", st.defect < p["stationary_bound"], float(st.defect), p["stationary_bound"])
    out.data["report"] = rep.to_dict()
    out.data["verdict"] = rep.verdict
    out.tables["decay.csv"] = (
        ["n", "function", "oscillation"],
        [[n, fid, v] for fid in rep.function_ids for n, v in enumerate(rep.oscillations[fid], start=1)],
    )
    return out


@experiment(
    "proximality",
    "m_n{g : d(g theta, delta_X) > eps} -> 0 (mean proximality of P^1)",
    "Cesaro exceedance of a two-atom measure under the Schottky walk",
    atoms=[0.3, 2.0],
    eps_pi=0.05,
    n_max=50,
    support_cap=2000,
    mc_trials=2000,
    level=PROXIMALITY_LEVEL,
    separation=3,
)
def run_proximality(cfg):
    p = cfg.params
    out = Outcome()
    sp = schottky_pair(p["separation"])
    act = ProjectiveAction(tuple(g.convert("float") for g in sp.gens))
    atoms = np.array(p["atoms"], dtype=float)
    theta = EmpiricalMeasure("projective", atoms, np.full(len(atoms), 1.0 / len(atoms)), check=False)
    eps = p["eps_pi"] * math.pi
    rep = proximality_test(
        free_group_uniform(), act, theta, eps, p["n_max"], support_cap=p["support_cap"], mc_trials=p["mc_trials"], seed=cfg.seed
    )
    n = p["n_max"]
    out.check(f"table exceedance at n = {n}", rep.table[-1] < p["level"], rep.table[-1], p["level"])
    if rep.mc:
        out.check(f"walk-sampled exceedance at n = {n}", rep.mc[-1] < p["level"], rep.mc[-1], p["level"])
    out.truncation = {"cesaro_truncation_at_n_max": rep.table_upper[-1] - rep.table[-1]}
    out.data["report"] = rep.to_dict()
    out.tables["exceedance.csv"] = (
        ["n", "table", "table_upper", "mc"],
        [[j + 1, rep.table[j], rep.table_upper[j], rep.mc[j] if rep.mc else ""] for j in range(n)],
    )
    return out


@experiment(
    "conditional-measures",
    "eta_n mu converges to the conditional measure mu_omega, a point mass on the boundary",
    "Concentration of eta_n mu on the F2 boundary over pinned seeds",
    seeds=200,
    ns=[10, 25, 50],
    eps=1 / 3,
    level=3,
    depth=64,
    score_level=CONCENTRATION_LEVEL,
    fraction=CONCENTRATION_FRACTION,
)
def run_conditional(cfg):
    p = cfg.params
    out = Outcome()
    rng = make_rng(cfg.seed, "conditional-measures", "points")
    mu = eta_discretization_points(p["level"], p["depth"], rng)
    seeds = [int(cfg.seed) * 1000 + i for i in range(p["seeds"])]
    seeds = [s % 2**64 for s in seeds]
    sv = concentration_survey(free_group_uniform(), mu, BoundaryAction(), p["ns"], seeds, p["eps"])
    n = max(p["ns"])
    frac = sv.fraction_above(p["score_level"], n)
    out.check(f"score > {p['score_level']} at n = {n}", frac >= p["fraction"], frac, p["fraction"])
    means = sv.means()
    mono = all(a <= b for a, b in zip(means, means[1:]))
    out.check("mean score nondecreasing in n", mono, means, "nondecreasing")
    out.data["survey"] = sv.to_dict()
    out.tables["scores.csv"] = (["seed"] + [f"n={k}" for k in sv.ns], [[s] + list(r) for s, r in zip(seeds, sv.scores.tolist())])
    return out


@experiment(
    "recurrence",
    "the lazy planar walk is recurrent; its square on Z^4 is not",
    "Mean return counts of lazy walks on Z^2 and Z^4 across three decades",
    T=100_000,
    trials=1000,
    hold_prob=0.2,
    checkpoints=[1_000, 10_000, 100_000],
    z4_bound=Z4_BOUND,
)
def run_recurrence(cfg):
    p = cfg.params
    out = Outcome()
    rows = []
    profiles = {}
    for d in (2, 4):
        r = recurrence_profile(d, p["T"], p["trials"], p["hold_prob"], cfg.seed, p["checkpoints"])
        profiles[d] = r
        for c, m in zip(r.checkpoints, r.means()):
            rows.append([d, c, m])
    m2 = profiles[2].means()
    out.check("Z^2 means strictly increasing", all(a < b for a, b in zip(m2, m2[1:])), m2, "increasing")
    m4 = profiles[4].means()
    diff = abs(m4[-1] - m4[-2]) if len(m4) > 1 else 0.0
    out.check("Z^4 means stabilise", diff < p["z4_bound"], diff, p["z4_bound"])
    out.data["profiles"] = {str(d): r.to_dict() for d, r in profiles.items()}
    out.tables["returns.csv"] = (["d", "T", "mean_returns"], rows)
    return out


@experiment(
    "induced-blocks",
    "the walk induced on [a0] is a Bernoulli shift over return blocks",
    "Return blocks of the lazy Z^2 walk and their independence",
    samples=10_000,
    cap=10_000,
    top_k=8,
    alpha=0.01,
    hold_prob=0.2,
)
def run_blocks(cfg):
    p = cfg.params
    out = Outcome()
    det = induced_block_distribution(FiniteChain([[0, 1], [1, 0]]), 0, 100, seed=cfg.seed)
    out.check("deterministic 2-cycle gives one block", det.top == [((0, 1), 100)], _plain(det.to_dict()["top"]), [[[0, 1], 100]])
    rep = induced_block_distribution(
        LatticeChain(2, p["hold_prob"]), 0, p["samples"], cfg.seed, p["cap"], p["top_k"], p["alpha"]
    )
    out.check("consecutive blocks independent", rep.independent, rep.p_value, p["alpha"])
    out.truncation = {"censored_mass": rep.censored_mass}
    out.data["report"] = rep.to_dict()
    out.tables["blocks.csv"] = (["block", "count"], [[b, c] for b, c in rep.to_dict()["top"]])
    return out


@experiment(
    "de-reachability",
    "the boundary square is doubly ergodic; the affine square is not",
    "Monte Carlo reachability of cylinder-pair targets and of the cross-order set",
    targets=10,
    level=1,
    n_max=200,
    trials=500,
    affine_trials=500,
)
def run_de(cfg):
    p = cfg.params
    out = Outcome()
    m = free_group_uniform()
    rng = make_rng(cfg.seed, "de-targets")
    allp = [(a, b) for a in reduced_prefixes(p["level"]) for b in reduced_prefixes(p["level"])]
    pick = rng.choice(len(allp), p["targets"], replace=False)
    targets = [CylinderPair(*allp[i]) for i in sorted(pick)]
    rep = boundary_reachability(m, CylinderPair((A,), (B,)), targets, p["n_max"], p["trials"], cfg.seed)
    freqs = rep.frequencies
    out.check("all boundary targets hit", all(f > 0 for f in freqs), [float(f) for f in freqs], "> 0")
    aff = de_reachability(
        affine_step_distribution(), AffineAction(), affine_order_source(), [OrderTarget(-1)], p["n_max"], p["affine_trials"], cfg.seed
    )
    out.check("affine cross-order frequency exactly 0", aff.hits[0] == 0, str(aff.frequencies[0]), "0")
    out.data["boundary"] = rep.to_dict()
    out.data["affine"] = aff.to_dict()
    out.tables["frequencies.csv"] = (["target", "hits", "frequency"], [[l, h, float(f)] for l, h, f in zip(rep.labels, rep.hits, freqs)])
    return out
