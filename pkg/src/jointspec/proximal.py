"""Quantified proximality, the Tits ping-pong criterion, Schottky families and
domination rates.

Contraction constants are estimated on finite samples of projective space
and are never claimed exact: an angle grid for d = 2 and scrambled Sobol
points on the sphere for d >= 3.  Every report carries the sample size.
"""
from dataclasses import dataclass, field
from itertools import product as iproduct
import math

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .errors import (BudgetExceeded, InvalidParams, NotProximalMember,
                     PreconditionFailed)
from .matgroup import (GroupFrame, ProjectiveHyperplane, ProjectivePoint,
                       check_square, jordan, proj_distance)
from .spectrum import CARTAN, FULL, Generators, enumerate_level, full_cost

SEPARATION_SLACK = 1e-9
PROXIMAL_RATIO = 1 - 1e-9
GRID_2D = 720
GRID_ND = 4096
# rates below this are rounding noise (a scalar letter has gap exactly 0)
DOMINATION_FLOOR = 1e-9


def _grid_size(d, grid_size):
    if grid_size:
        return int(grid_size)
    return GRID_2D if d == 2 else GRID_ND


class _Sample:
    """Points of P(R^d) with neighbor pairs, reused across epsilons."""

    _cache = {}

    def __init__(self, d, size):
        if d == 2:
            th = np.pi * np.arange(size) / size
            self.pts = np.column_stack([np.cos(th), np.sin(th)])
            i = np.arange(size)
            self.pairs = np.column_stack([i, (i + 1) % size])
        else:
            u = qmc.Sobol(d, scramble=True, seed=12345).random(size)
            x = _normal.ppf(np.clip(u, 1e-12, 1 - 1e-12))
            x /= np.linalg.norm(x, axis=1, keepdims=True)
            self.pts = x
            # neighbors on projective space: search against +x and -x
            tree = cKDTree(np.vstack([x, -x]))
            k = min(2 * d + 2, size)
            _, nb = tree.query(x, k=k + 1)
            nb = nb[:, 1:] % size
            i = np.repeat(np.arange(size), k)
            p = np.column_stack([i, nb.ravel()])
            p = p[p[:, 0] != p[:, 1]]
            p.sort(axis=1)
            self.pairs = np.unique(p, axis=0)

    @classmethod
    def get(cls, d, size):
        key = (d, size)
        if key not in cls._cache:
            cls._cache[key] = cls(d, size)
        return cls._cache[key]


def _pdist_rows(X, Y):
    """Row-wise projective distance between unit vectors."""
    dot = np.abs((X * Y).sum(axis=1))
    return np.sqrt(np.clip(1.0 - dot * dot, 0.0, 1.0))


class _ActionProfile:
    """Projective action of g sampled once: distances to H, pair shrink
    ratios and image distances to v+."""

    def __init__(self, g, normal, target, size):
        g = np.asarray(g, dtype=float)
        S = _Sample.get(g.shape[0], size)
        X = S.pts
        Y = X @ g.T
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        self.dist_H = np.abs(X @ normal)
        a, b = S.pairs[:, 0], S.pairs[:, 1]
        d0 = _pdist_rows(X[a], X[b])
        d1 = _pdist_rows(Y[a], Y[b])
        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratio = np.where(d0 > 0, d1 / d0, 0.0)
        self.pair_min = np.minimum(self.dist_H[a], self.dist_H[b])
        self.image = _pdist_rows(Y, np.broadcast_to(target, Y.shape))

    def contraction(self, eps):
        sel = self.pair_min >= eps
        return float(self.ratio[sel].max()) if sel.any() else 0.0

    def image_radius(self, eps):
        sel = self.dist_H >= eps
        return float(self.image[sel].max()) if sel.any() else 0.0

    def ok(self, eps):
        return self.contraction(eps) <= eps and self.image_radius(eps) <= eps


@dataclass
class ProximalityReport:
    is_proximal: bool
    v_plus: ProjectivePoint = None
    H_less: ProjectiveHyperplane = None
    gap: float = math.nan
    eigen_ratio: float = math.nan
    contraction: float = math.nan
    epsilon_used: float = math.nan
    grid_size: int = 0
    image_radius: float = math.nan
    matrix: np.ndarray = field(default=None, repr=False)
    _profile: object = field(default=None, repr=False)

    def measure(self, eps):
        """(contraction, image radius) on B_H^eps."""
        return self._profile.contraction(eps), self._profile.image_radius(eps)

    def is_r_eps_proximal(self, r, eps):
        if not self.is_proximal:
            return False
        return self.gap >= 2 * r - SEPARATION_SLACK and self._profile.ok(eps)

    def to_dict(self):
        return {"is_proximal": self.is_proximal, "gap": self.gap,
                "eigen_ratio": self.eigen_ratio, "contraction": self.contraction,
                "epsilon_used": self.epsilon_used, "grid_size": self.grid_size}


def _eigendata(g):
    w, V = np.linalg.eig(g)
    order = np.argsort(-np.abs(w), kind="stable")
    w, V = w[order], V[:, order]
    ratio = abs(w[1]) / abs(w[0])
    if ratio >= PROXIMAL_RATIO or abs(w[0].imag) > 1e-12 * abs(w[0]):
        return None, None, ratio
    v = np.real(V[:, 0])
    # left eigenvector for the top eigenvalue: normal of the complementary
    # invariant hyperplane
    wl, U = np.linalg.eig(g.T)
    j = int(np.argmin(np.abs(wl - w[0])))
    ell = np.real(U[:, j])
    return v, ell, ratio


def _self_consistent_eps(prof, lo=1e-12, hi=1.0, iters=60):
    if not prof.ok(hi):
        return None
    if prof.ok(lo):
        return lo
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if prof.ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def analyze_proximal(g, grid_size=None, epsilon=None):
    """Eigendata and sampled contraction of the projective action of g.

    Without ``epsilon``, the smallest eps (on a geometric bisection) with
    contraction <= eps and g(B_H^eps) within eps of v+ is used.
    """
    g = check_square(np.asarray(g, dtype=float))
    size = _grid_size(g.shape[0], grid_size)
    v, ell, ratio = _eigendata(g)
    if v is None:
        return ProximalityReport(False, eigen_ratio=float(min(ratio, 1.0)), grid_size=size,
                                 matrix=g)
    vp, H = ProjectivePoint(v), ProjectiveHyperplane(ell)
    prof = _ActionProfile(g, H.normal, vp.vector, size)
    eps = epsilon if epsilon is not None else _self_consistent_eps(prof)
    if eps is None:
        eps = 1.0
    return ProximalityReport(True, vp, H, proj_distance(vp, H), float(ratio),
                             prof.contraction(eps), float(eps), size,
                             prof.image_radius(eps), g, prof)


def tits_check(g, x, H, r, eta, grid_size=None):
    """Sampled check of the ping-pong hypotheses: d(x, H) >= 6r,
    g(B_H^eta) inside the eta-ball around x, and g eta-Lipschitz on B_H^eta."""
    if not (r > 0 and eta > 0):
        raise InvalidParams("r and eta must be positive")
    if eta > r:
        raise InvalidParams("eta must not exceed r")
    g = check_square(np.asarray(g, dtype=float))
    x = x if isinstance(x, ProjectivePoint) else ProjectivePoint(x)
    if proj_distance(x, H) < 6 * r - SEPARATION_SLACK:
        return False
    prof = _ActionProfile(g, H.normal, x.vector, _grid_size(g.shape[0], grid_size))
    return prof.ok(eta)


@dataclass
class SchottkyReport:
    elements: list
    per_element: list
    cross_gaps: np.ndarray
    min_cross_gap: float

    def verdict_for(self, r, eps):
        if self.min_cross_gap < 6 * r - SEPARATION_SLACK:
            return False
        return all(rep.is_r_eps_proximal(r, eps) for rep in self.per_element)

    def measured(self):
        """Largest r allowed by the separation and the smallest common eps
        at which every element is (r, eps)-proximal."""
        r = self.min_cross_gap / 6.0
        eps = max(rep.epsilon_used for rep in self.per_element)
        return r, eps

    def to_dict(self):
        r, eps = self.measured()
        return {"n_elements": len(self.elements), "min_cross_gap": self.min_cross_gap,
                "r": r, "eps": eps, "verdict": self.verdict_for(r, eps)}


def schottky_check(E, grid_size=None):
    reports = [analyze_proximal(g, grid_size) for g in E]
    bad = [i for i, rep in enumerate(reports) if not rep.is_proximal]
    if bad:
        raise NotProximalMember(bad)
    n = len(E)
    gaps = np.empty((n, n))
    for i, ri in enumerate(reports):
        for j, rj in enumerate(reports):
            gaps[i, j] = proj_distance(ri.v_plus, rj.H_less)
    return SchottkyReport(list(E), reports, gaps, float(gaps.min()))


@dataclass
class DominationReport:
    k: int
    per_level_min_gap: dict
    level_mode: dict
    fitted_rate: float
    verdict: bool
    samples: int = 0

    def to_dict(self):
        return {"k": self.k, "fitted_rate": self.fitted_rate, "verdict": self.verdict,
                "per_level_min_gap": {str(n): v for n, v in self.per_level_min_gap.items()},
                "level_mode": {str(n): v for n, v in self.level_mode.items()}}


def domination_rate(S, k=1, n_max=10, budget=10 ** 8, samples=20000, seed=0):
    """min over S^n of (1/n) log(a_k / a_{k+1}) for n = 1..n_max.

    a_k are singular values, so the ratio equals the top singular-value gap
    of the k-th exterior power.  Levels beyond the budget are estimated from
    ``samples`` uniformly random words (fixed seed) and marked SAMPLED.
    """
    d = np.asarray(S[0]).shape[0]
    if not 1 <= k < d:
        raise InvalidParams("need 1 <= k < d")
    G = Generators(S, GroupFrame.GL(d))
    m = G.m
    if full_cost(m, 2) > budget:
        raise BudgetExceeded("level 2 does not fit in the budget")
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    gaps, modes = {}, {}
    for n in range(1, n_max + 1):
        if full_cost(m, n) <= budget:
            C = enumerate_level(G, n, CARTAN, FULL, keep_words=False, budget=budget).points
            modes[n] = "EXACT"
        else:
            W = rng.integers(0, m, size=(samples, n))
            C = G.words(W, False) / n
            modes[n] = "SAMPLED"
        gaps[n] = float((C[:, k - 1] - C[:, k]).min())
    levels = sorted(gaps)
    top = levels[len(levels) // 2:] if len(levels) >= 2 else levels
    if len(top) >= 2:
        ns = np.array(top, float)
        ys = np.array([n * gaps[n] for n in top])
        rate = float(np.polyfit(ns, ys, 1)[0])
    else:
        rate = gaps[levels[0]]
    deep = [gaps[n] for n in levels[-2:]]
    verdict = bool(rate > DOMINATION_FLOOR and min(deep) >= 0.5 * rate)
    return DominationReport(k, gaps, modes, rate, verdict, samples)


def schottky_product_check(report, patterns, r=None, eps=None):
    """Empirical C_r: max over patterns of
    ||lambda(g_l^{n_l} ... g_1^{n_1}) - sum n_i lambda(g_i)||_inf / l."""
    if r is None or eps is None:
        r, eps = report.measured()
    if not report.verdict_for(r, eps):
        raise PreconditionFailed(f"family is not ({r:.3g}, {eps:.3g})-Schottky")
    mats = [np.asarray(g, dtype=float) for g in report.elements]
    d = mats[0].shape[0]
    # in dimension 2 the log|det| part is additive and cancels, so only the
    # top coordinate is compared (det of long products is lost to rounding)
    cols = slice(0, 1) if d == 2 else slice(None)
    with np.errstate(divide="ignore"):
        G = Generators(mats, GroupFrame.GL(d))
        lam = G.words(np.arange(len(mats))[:, None], True)
    pats = [[(int(i), int(n)) for i, n in pat] for pat in patterns]
    # the word g_l^{n_l} ... g_1^{n_1}, padded with -1 (identity)
    seqs = [sum(([i] * n for i, n in reversed(pat)), []) for pat in pats]
    W = np.full((len(seqs), max(len(q) for q in seqs)), -1, np.int64)
    for row, q in zip(W, seqs):
        row[:len(q)] = q
    with np.errstate(divide="ignore"):
        got = G.words(W, True)
    worst = 0.0
    for pat, lam_w in zip(pats, got):
        if lam_w[0] - lam_w[1] <= -math.log(PROXIMAL_RATIO):
            raise PreconditionFailed(f"product {pat} is not proximal")
        expect = sum(n * lam[i] for i, n in pat)
        worst = max(worst, float(np.abs(lam_w[cols] - expect[cols]).max()) / len(pat))
    return worst


def power_set(S, n):
    """All products g_1 ... g_n with letters in S (lexicographic order)."""
    out = []
    for w in iproduct(range(len(S)), repeat=n):
        M = np.eye(np.asarray(S[0]).shape[0])
        for i in w:
            M = M @ S[i]
        out.append(M)
    return out
