"""Concentration of gθ along the random walk: Cesaro exceedance masses from
convolution tables with a Monte Carlo companion, and conditional-measure
concentration on the boundary of F2."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..measures import EmpiricalMeasure, concentration_score, distance_to_point_masses, pushforward
from ..randomwalk import conditional_measure_estimate, convolution_powers, identity_of
from ..rng import make_rng
from ..systems import ProjectiveAction, angle_distance, bind

PROXIMALITY_CAP = 2_000


@dataclass
class ProximalityReport:
    """Per-n Cesaro exceedance m_n{g : d(g theta, delta_X) > threshold}.

    ``table`` is computed on the retained support of the power tables and
    ``table_upper`` adds the truncated mass, so the exact value lies in
    [table, table_upper]. ``mc`` is the walk-sampling estimate.
    """

    eps: float
    threshold: float
    n_max: int
    table: list
    table_upper: list
    per_power: list
    mc: list = field(default_factory=list)
    mc_trials: int = 0
    seed: int = 0

    def at(self, n):
        return self.table[n - 1]

    def to_dict(self):
        return {
            "eps": self.eps,
            "threshold": self.threshold,
            "n_max": self.n_max,
            "exceedance_table": self.table,
            "exceedance_upper": self.table_upper,
            "exceedance_mc": self.mc,
            "mc_trials": self.mc_trials,
            "seed": self.seed,
        }


def _exceeds(mu, eps, threshold):
    return distance_to_point_masses(mu, eps) > threshold


def _angles_exceed(angles, weights, eps, threshold):
    """Rows of ``angles`` (one measure per row) whose distance to point masses exceeds ``threshold``."""
    d = angle_distance(angles[:, :, None], angles[:, None, :])
    inside = (d <= eps + 1e-12) * weights[None, None, :]
    best = inside.sum(axis=2).max(axis=1)
    return (1.0 - best) > threshold


def proximality_test(
    m, action, theta: EmpiricalMeasure, eps, n_max, threshold=None, support_cap=PROXIMALITY_CAP, mc_trials=0, seed=0
) -> ProximalityReport:
    """Cesaro exceedance masses for n = 1..n_max.

    d(nu, delta_X) is the smallest mass outside a closed eps-ball centred at
    an atom of nu; g exceeds when it is above ``threshold`` (default eps).
    """
    threshold = eps if threshold is None else threshold
    vector = theta.space == "projective" and hasattr(action, "many")
    if vector:
        ang0 = np.asarray(theta.angles(), dtype=float)
        w0 = theta.float_weights()
    per_power, trunc = [], []
    for t in convolution_powers(m, n_max, support_cap):
        words, ws = [], []
        for g, w in t.float_items():
            words.append(g)
            ws.append(w)
        ws = np.array(ws)
        if vector:
            imgs = np.stack([action.many(g, ang0) for g in words]) if words else np.zeros((0, len(ang0)))
            hit = _angles_exceed(imgs, w0, eps, threshold) if len(words) else np.zeros(0, bool)
        else:
            hit = np.array([_exceeds(pushforward(theta, bind(action, g)), eps, threshold) for g in words])
        per_power.append(float(ws[hit].sum()) if len(ws) else 0.0)
        trunc.append(float(t.truncation_mass))
    cs = np.cumsum(per_power) / np.arange(1, n_max + 1)
    ct = np.cumsum(trunc) / np.arange(1, n_max + 1)
    report = ProximalityReport(eps, threshold, n_max, cs.tolist(), (cs + ct).tolist(), per_power, seed=seed)
    if mc_trials:
        report.mc = proximality_mc(m, action, theta, eps, n_max, threshold, mc_trials, seed)
        report.mc_trials = mc_trials
    return report


def proximality_mc(m, action, theta, eps, n_max, threshold, trials, seed):
    """Walk-sampling estimate of the same Cesaro exceedance curve."""
    rng = make_rng(seed, "proximality")
    idx = m.sample_indices(rng, (trials, n_max))
    hits = np.zeros((trials, n_max))
    if theta.space == "projective" and isinstance(action, ProjectiveAction):
        mats = np.stack([action.matrix(g).normalized().as_array() for g in m.support])
        M = np.broadcast_to(np.eye(2), (trials, 2, 2)).copy()
        ang0 = np.asarray(theta.angles(), dtype=float)
        w0 = theta.float_weights()
        xy = np.stack([np.cos(ang0), np.sin(ang0)])
        for j in range(n_max):
            M = M @ mats[idx[:, j]]
            M /= np.abs(M).max(axis=(1, 2), keepdims=True)
            img = M @ xy
            ang = np.arctan2(img[:, 1, :], img[:, 0, :]) % math.pi
            hits[:, j] = _angles_exceed(ang, w0, eps, threshold)
    else:
        e = identity_of(m)
        for k in range(trials):
            g = e
            for j in range(n_max):
                g = g * m.support[idx[k, j]]
                hits[k, j] = _exceeds(pushforward(theta, bind(action, g)), eps, threshold)
    per = hits.mean(axis=0)
    return (np.cumsum(per) / np.arange(1, n_max + 1)).tolist()


# ---------------------------------------------------------------------------
# conditional measures on the boundary


@dataclass
class ConcentrationSurvey:
    ns: list
    seeds: list
    scores: np.ndarray  # (len(seeds), len(ns))
    eps: float

    def means(self):
        return [float(x) for x in self.scores.mean(axis=0)]

    def fraction_above(self, level, n):
        col = self.ns.index(n)
        return float(np.mean(self.scores[:, col] > level))

    def to_dict(self):
        return {
            "ns": self.ns,
            "seeds": [self.seeds[0], self.seeds[-1]] if self.seeds else [],
            "n_seeds": len(self.seeds),
            "eps": self.eps,
            "mean_scores": self.means(),
        }


def concentration_survey(m, mu, action, ns, seeds, eps) -> ConcentrationSurvey:
    """concentration_score(eta_n mu, eps) for each seed and each n.

    The same walk is used for every n of one seed (its first n steps).
    """
    ns = sorted(ns)
    scores = np.zeros((len(seeds), len(ns)))
    for i, s in enumerate(seeds):
        for j, n in enumerate(ns):
            est = conditional_measure_estimate(m, mu, action, n, s)
            scores[i, j] = concentration_score(est, eps)
    return ConcentrationSurvey(ns, list(seeds), scores, eps)
