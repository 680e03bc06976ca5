"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed at the end of the session.
"""
import json
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ergolab.cli import main
from ergolab.config import resolve
from ergolab.experiments import (
    CONCENTRATION_FRACTION,
    CONCENTRATION_LEVEL,
    REGISTRY,
    UE_TOL,
    Z4_BOUND,
)
from ergolab.measures import (
    all_level_masses,
    eta_cylinder,
    eta_discretization,
    free_group_uniform,
    one_letter_extensions,
    reduced_prefixes,
)
from ergolab.mixing_lab.sat import SAT_ITERATION_CAP
from ergolab.operators import MarkovOperator, ProjectiveGrid, trig_family
from ergolab.randomwalk import stationarity_defect
from ergolab.systems import ProjectiveAction


def record(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {n:2d} {title}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


def run(eid, backend=None, **params):
    exp = REGISTRY[eid]
    cfg = resolve(eid, exp.defaults, {}, None, backend, None, [])
    cfg.params.update(params)
    t0 = time.perf_counter()
    out = exp.run(cfg)
    return out, time.perf_counter() - t0


def checks(out):
    return {c.name: c for c in out.checks}


def test_01_boundary_measure():
    t0 = time.perf_counter()
    ok = eta_cylinder("a") == Fraction(1, 4) and eta_cylinder("ab") == Fraction(1, 12)
    sums = [all_level_masses(n, "eta") for n in range(1, 9)]
    bad = sum(
        eta_cylinder(p) != sum(eta_cylinder(e) for e in one_letter_extensions(p))
        for n in range(0, 7)
        for p in reduced_prefixes(n)
    )
    dt = time.perf_counter() - t0
    ok = ok and all(s == 1 for s in sums) and bad == 0 and dt < 1.0
    assert record(1, "boundary measure", ok, f"sums={set(map(str, sums))}, inconsistent={bad}, {dt:.2f}s < 1s")


def test_02_cross_ratio():
    fl, tf = run("cross-ratio", "float")
    ex, te = run("cross-ratio", "exact")
    dev_f = checks(fl)["max deviation within tolerance"].value
    dev_e = ex.data["max_deviation"]
    ok = dev_f <= 1e-9 and dev_e in (0, "0") and tf < 10 and te < 10
    assert record(2, "cross-ratio invariance", ok, f"float max dev {dev_f:.2e} ({tf:.1f}s), exact {dev_e} ({te:.1f}s)")


def test_03_cyclic_order():
    out, dt = run("cyclic-order")
    v = checks(out)["order type constant up to orientation"].value
    assert record(3, "cyclic order", out.passed and v == 0, f"violations={v} over 1000 words")


def test_04_odometer_square():
    out, dt = run("odometer-square", rn_depth=1)
    c = checks(out)
    dev = c["difference preserved over 100000 steps"].value
    cyc = c["orbit of 0 visits all patterns for N <= 12"].value
    assert record(4, "odometer square", dev == 0 and cyc == [], f"deviating pairs={dev}/100, cyclicity failures={cyc}")


def test_05_affine_order():
    out, dt = run("affine-order")
    v = checks(out)["sign(y - x) preserved"].value
    n = out.data["combinations"]
    assert record(5, "affine order", v == 0 and n == 10_000, f"violations={v} over {n} combinations")


def test_06_sat_blowup():
    out, dt = run("sat-blowup")
    c = checks(out)
    ok = out.passed and dt < 30
    detail = f"{c['all unions reach the target'].value}/20 reach 0.99, max iterations {c['iterations within the cap'].value} <= {SAT_ITERATION_CAP}, {dt:.1f}s < 30s"
    assert record(6, "SAT blow-up", ok, detail)


def test_07_unique_ergodicity(schottky):
    out, dt = run("unique-ergodicity")
    worst = checks(out)["osc(A_n f) at n = 200 below tol"].value
    # contraction along the whole orbit A^k f, k <= 200, for every test function
    grid = ProjectiveGrid(720)
    op = MarkovOperator(free_group_uniform(), grid, ProjectiveAction(schottky.gens))
    grew = 0
    for f in trig_family(grid, 3):
        h = f.values
        for _ in range(200):
            nxt = op(h, check=False)
            grew += np.ptp(nxt) > np.ptp(h) + 1e-15
            h = nxt
    ok = out.passed and worst < UE_TOL and grew == 0
    assert record(7, "unique ergodicity", ok, f"max osc at n=200 {worst:.4f} < {UE_TOL}, contraction failures={grew}")


def test_08_concentration():
    out, dt = run("conditional-measures")
    c = checks(out)
    frac = c["score > 0.9 at n = 50"].value
    means = c["mean score nondecreasing in n"].value
    ok = frac >= CONCENTRATION_FRACTION and all(a <= b for a, b in zip(means, means[1:]))
    detail = f"fraction above {CONCENTRATION_LEVEL} = {frac:.3f} >= {CONCENTRATION_FRACTION}, means {[round(m, 4) for m in means]}"
    assert record(8, "conditional-measure concentration", ok, detail)


def test_09_recurrence():
    out, dt = run("recurrence")
    c = checks(out)
    m2 = c["Z^2 means strictly increasing"].value
    diff = c["Z^4 means stabilise"].value
    ok = all(a < b for a, b in zip(m2, m2[1:])) and diff < Z4_BOUND and dt < 120
    detail = f"Z^2 means {[round(m, 2) for m in m2]}, Z^4 diff {diff:.4f} < {Z4_BOUND}, {dt:.1f}s < 120s"
    assert record(9, "recurrence dichotomy", ok, detail)


def test_10_de_reachability():
    out, dt = run("de-reachability")
    b, a = out.data["boundary"], out.data["affine"]
    hits = b["hits"]
    ok = len(hits) == 10 and all(h > 0 for h in hits) and a["hits"][0] == 0
    assert record(10, "DE reachability", ok, f"boundary hits {hits}, affine cross-order hits {a['hits'][0]}/500")


def test_11_stationarity_exact():
    d = stationarity_defect(free_group_uniform(), eta_discretization(4))
    assert record(11, "exact stationarity", d == 0 and isinstance(d, (int, Fraction)), f"level-4 defect = {d}")


def _strip(path):
    d = json.loads(path.read_text(encoding="utf-8"))
    d.pop("timestamp")
    return json.dumps(d, sort_keys=True)


def test_12_determinism(tmp_path, capsys):
    differ = []
    for eid in REGISTRY:
        a, b = tmp_path / eid / "a", tmp_path / eid / "b"
        codes = (main(["run", eid, "--out", str(a)]), main(["run", eid, "--out", str(b)]))
        same = codes[0] == codes[1] == 0 and _strip(a / "report.json") == _strip(b / "report.json")
        same = same and all((a / f.name).read_bytes() == f.read_bytes() for f in b.glob("*.csv"))
        if not same:
            differ.append(eid)
    capsys.readouterr()
    ok = not differ
    assert record(12, "determinism", ok, f"{len(REGISTRY) - len(differ)}/{len(REGISTRY)} experiments reproduce byte-identical reports")
