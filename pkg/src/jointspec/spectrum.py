"""Enumeration of word products, normalized Cartan/Jordan clouds, planar
hulls, convergence diagnostics and joint-spectral-radius style bounds."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iproduct
import math

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, DegeneratePolygon, InvalidMode, OriginInterior
from .geometry import Hull2D, hausdorff, hull2
from .matgroup import (CARTAN, JORDAN, GroupFrame, check_element,
                       dominant_directions, pack_blocks, project, wedge_power,
                       values_to_chamber, weyl_orbit)

FULL = "FULL"
NECKLACE = "NECKLACE"
DEFAULT_BUDGET = 10 ** 8
DEDUPE_TOL = 1e-10
CHUNK_ROWS = 1 << 18


def full_cost(m, n):
    """Multiplications for a depth-first enumeration of all m**n words."""
    return sum(m ** k for k in range(1, n + 1))


def necklace_cost(m, n):
    return K.necklace_count(m, n) * n


class Generators:
    """Kernel-ready packing of a generating set for a given frame."""

    def __init__(self, S, frame=None):
        if len(S) == 0:
            raise ValueError("empty generating set")
        self.frame = frame or GroupFrame.GL(np.asarray(S[0]).shape[0])
        # only exact singularity is rejected here: words of ill-conditioned
        # unimodular generators are routine inputs
        S = [check_element(np.asarray(g, dtype=float), self.frame, strict=False) for g in S]
        self.matrices = S
        self.m = len(S)
        self.block2 = self.frame.is_block2
        if self.block2:
            self.gens, self.ldet, self.sdet = pack_blocks(S, self.frame)
        else:
            self.gens = np.ascontiguousarray(np.array(S))
            # k-th exterior powers: the top singular value (spectral radius)
            # of a product is accurate even when the lower ones are lost to
            # rounding, so coordinate k comes from a difference of tops
            d = self.gens.shape[1]
            self.wedges = [np.ascontiguousarray(np.array([wedge_power(g, k) for g in S]))
                           for k in range(1, d)]
            self.ldet = np.array([math.log(abs(np.linalg.det(g))) for g in S])

    def _from_tops(self, tops, ldet):
        cum = np.column_stack(tops + [ldet])
        vals = np.diff(cum, axis=1, prepend=0.0)
        return -np.sort(-vals, axis=1)

    def enum(self, prefix, r, jordan):
        if self.block2:
            vals = K.enum_blocks2(self.gens, self.ldet, self.sdet, prefix, r, jordan)
        else:
            tops = [K.enum_general(W, prefix, r, jordan)[:, 0] for W in self.wedges]
            ld = self.ldet[np.asarray(prefix, np.int64)].sum() + np.zeros(1)
            for _ in range(r):
                ld = np.add.outer(ld, self.ldet).ravel()
            vals = self._from_tops(tops, ld)
        return values_to_chamber(vals, self.frame)

    def words(self, words, jordan):
        if self.block2:
            vals = K.words_blocks2(self.gens, self.ldet, self.sdet, words, jordan)
        else:
            words = np.asarray(words, np.int64)
            tops = [K.words_general(W, words, jordan)[:, 0] for W in self.wedges]
            ld = np.where(words >= 0, self.ldet[np.maximum(words, 0)], 0.0).sum(axis=1)
            vals = self._from_tops(tops, ld)
        return values_to_chamber(vals, self.frame)


def _as_generators(S, frame):
    if isinstance(S, Generators):
        return S
    return Generators(S, frame)


def dedupe(points, tol=DEDUPE_TOL):
    """Indices of one representative per tol-grid cell (first occurrence),
    ordered lexicographically by cell."""
    if len(points) == 0:
        return np.zeros(0, np.int64)
    keys = np.round(points / tol).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return idx


def decode_ranks(ranks, m, n):
    """Lexicographic word ranks -> (N, n) letter arrays."""
    ranks = np.asarray(ranks, np.int64)
    out = np.empty((len(ranks), n), np.uint8)
    r = ranks.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = r % m
        r //= m
    return out


@dataclass
class SpectrumCloud:
    level: int
    kind: str
    mode: str
    frame: GroupFrame
    points: np.ndarray
    words: np.ndarray = None
    dedupe_tol: float = DEDUPE_TOL
    projection: object = "native"
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def xy(self):
        return project(self.points, self.frame, self.projection)

    def hull(self):
        return hull2(self.xy)

    def word(self, i):
        return None if self.words is None else tuple(int(c) for c in self.words[i])

    def vertex_words(self, hull=None):
        """Provenance word of every hull vertex."""
        hull = hull or self.hull()
        xy = self.xy
        out = []
        for v in hull.vertices:
            i = int(np.argmin(np.abs(xy - v).max(axis=1)))
            out.append(self.word(i))
        return out


def enumerate_level(S, n, kind=JORDAN, mode=FULL, projection="native", frame=None,
                    budget=DEFAULT_BUDGET, dedupe_tol=DEDUPE_TOL, keep_words=True,
                    threads=1):
    """Normalized cloud (1/n) kappa(S^n) or (1/n) lambda(S^n)."""
    G = _as_generators(S, frame)
    frame = G.frame
    m = G.m
    jordan = kind == JORDAN
    if kind not in (CARTAN, JORDAN):
        raise InvalidMode(kind)
    if mode == NECKLACE and not jordan:
        raise InvalidMode("NECKLACE enumeration is only valid for Jordan clouds")
    if mode not in (FULL, NECKLACE):
        raise InvalidMode(mode)
    if n < 1:
        raise ValueError("level must be >= 1")
    cost = necklace_cost(m, n) if mode == NECKLACE else full_cost(m, n)
    if cost > budget:
        raise BudgetExceeded(f"level {n} needs {cost} multiplications, budget {budget}")

    if mode == NECKLACE:
        W = K.necklaces(m, n)
        vals = np.concatenate([G.words(W[i:i + CHUNK_ROWS], jordan)
                               for i in range(0, len(W), CHUNK_ROWS)]) / n
        idx = dedupe(vals, dedupe_tol)
        words = W[idx].astype(np.uint8) if keep_words else None
        pts = vals[idx]
    else:
        r, p = n, 0
        while r > 1 and m ** r > CHUNK_ROWS:
            r, p = r - 1, p + 1
        prefixes = list(iproduct(range(m), repeat=p))

        def work(j):
            v = G.enum(np.array(prefixes[j], np.int64), r, jordan) / n
            loc = dedupe(v, dedupe_tol)
            return v[loc], loc + j * m ** r

        if threads > 1 and len(prefixes) > 1:
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(work, range(len(prefixes))))
        else:
            parts = [work(j) for j in range(len(prefixes))]
        vals = np.concatenate([q[0] for q in parts])
        ranks = np.concatenate([q[1] for q in parts])
        idx = dedupe(vals, dedupe_tol)
        pts = vals[idx]
        words = decode_ranks(ranks[idx], m, n) if keep_words else None
    return SpectrumCloud(n, kind, mode, frame, pts, words, dedupe_tol, projection,
                         {"generators": m, "cost": cost, "backend": K.backend()})


def default_projection(frame):
    if frame.kind == "PRODUCT" and frame.nblocks == 2:
        return "native"
    if frame.dim == 2 and frame.kind == "GL":
        return "det_chart"
    if frame.dim == 2:
        return "native"
    return (0, 1)


@dataclass
class ConvergenceDiagnostics:
    levels: list
    jordan_hulls: dict
    cartan_hulls: dict
    hausdorff_jordan: dict
    hausdorff_cartan: dict
    directions: np.ndarray
    jordan_support: dict
    cartan_support: dict
    sandwich_violation: float
    support_monotone_violation: float
    midpoint_slack: dict

    def summary(self):
        return {
            "levels": list(self.levels),
            "hausdorff_jordan": {f"{a},{b}": v for (a, b), v in self.hausdorff_jordan.items()},
            "hausdorff_cartan": {f"{a},{b}": v for (a, b), v in self.hausdorff_cartan.items()},
            "sandwich_violation": self.sandwich_violation,
            "support_monotone_violation": self.support_monotone_violation,
            "midpoint_slack": {str(k): v for k, v in self.midpoint_slack.items()},
        }


@dataclass
class JointSpectrumEstimate:
    inner: Hull2D
    cloud_hull: Hull2D
    diagnostics: ConvergenceDiagnostics
    jordan_clouds: dict
    cartan_clouds: dict

    def __iter__(self):
        return iter((self.inner, self.cloud_hull, self.diagnostics))


def _midpoint_slack(H, H2):
    v = H.vertices
    if len(v) < 2:
        return 0.0
    i, j = np.triu_indices(len(v), 1)
    mids = 0.5 * (v[i] + v[j])
    return float(H2.distance(mids).max())


def estimate_joint_spectrum(S, frame=None, n_levels=8, budget=DEFAULT_BUDGET,
                            projection=None, cartan=True, threads=1):
    """Hulls of the Jordan (inner) and Cartan clouds over a range of levels.

    ``n_levels`` is either the deepest level (levels 1..n are attempted) or
    an explicit list.  Levels whose enumeration exceeds ``budget`` are
    skipped; at least one level must fit.
    """
    G = _as_generators(S, frame)
    frame = G.frame
    projection = projection or default_projection(frame)
    levels = list(range(1, n_levels + 1)) if isinstance(n_levels, int) else sorted(n_levels)
    jc, cc = {}, {}
    for n in levels:
        if necklace_cost(G.m, n) <= budget:
            jc[n] = enumerate_level(G, n, JORDAN, NECKLACE, projection, budget=budget,
                                    threads=threads)
        if cartan and full_cost(G.m, n) <= budget:
            cc[n] = enumerate_level(G, n, CARTAN, FULL, projection, budget=budget,
                                    threads=threads)
    if not jc:
        raise BudgetExceeded("no level fits in the budget")
    jh = {n: c.hull() for n, c in jc.items()}
    ch = {n: c.hull() for n, c in cc.items()}

    def pairwise(hulls):
        ks = sorted(hulls)
        return {(a, b): hausdorff(hulls[a], hulls[b]) for i, a in enumerate(ks) for b in ks[i + 1:]}

    dirs = dominant_directions(frame, projection)
    js = {n: h.support(dirs) for n, h in jh.items()} if len(dirs) else {}
    cs = {n: h.support(dirs) for n, h in ch.items()} if len(dirs) else {}
    sandwich = 0.0
    monotone = 0.0
    if js and cs:
        top = np.max(np.array(list(js.values())), axis=0)
        low = np.min(np.array(list(cs.values())), axis=0)
        sandwich = float(max(0.0, (top - low).max()))
        for n in cs:
            if 2 * n in cs:
                monotone = max(monotone, float((cs[2 * n] - cs[n]).max()))
    mids = {n: _midpoint_slack(jh[n], jh[2 * n]) for n in jh if 2 * n in jh}
    diag = ConvergenceDiagnostics(sorted(jc), jh, ch, pairwise(jh), pairwise(ch), dirs,
                                  js, cs, sandwich, max(0.0, monotone), mids)
    deepest_j = max(jc)
    inner = jh[deepest_j]
    cloud_hull = ch[max(ch)] if ch else inner
    return JointSpectrumEstimate(inner, cloud_hull, diag, jc, cc)


@dataclass
class JSRBounds:
    lower: float
    upper: float
    sub_lower: float
    sub_upper: float
    sub_lower_heuristic: float
    levels: list
    jordan_max: dict
    jordan_min: dict
    norm_max: dict
    norm_min: dict
    conorm_min: dict

    def __iter__(self):
        return iter((self.lower, self.upper, self.sub_lower, self.sub_upper))

    @property
    def gap(self):
        return self.upper - self.lower


def _level_extremes(G, n, budget, use_necklace=True):
    mode = NECKLACE if use_necklace else FULL
    J = enumerate_level(G, n, JORDAN, mode, budget=budget, keep_words=False).points
    C = enumerate_level(G, n, CARTAN, FULL, budget=budget, keep_words=False).points
    return J[:, 0], C[:, 0], C[:, -1]


def jsr(S, n_max, budget=DEFAULT_BUDGET):
    """Bounds on the joint spectral radius and subradius (natural logs).

    lower = max_n max_{S^n} (1/n) log lambda_1, upper = min_n max_{S^n}
    (1/n) log ||g||.  sub_upper = min_n min_{S^n} (1/n) log lambda_1 and
    sub_lower = max_n min_{S^n} (1/n) log sigma_d (both rigorous);
    ``sub_lower_heuristic`` is min_{S^n} (1/n) log ||g|| at the deepest level,
    which converges to the subradius but is not a certified lower bound.
    """
    G = _as_generators(S, GroupFrame.GL(np.asarray(S[0]).shape[0]))
    jmax, jmin, nmax, nmin, cmin = {}, {}, {}, {}, {}
    levels = []
    for n in range(1, n_max + 1):
        if full_cost(G.m, n) + necklace_cost(G.m, n) > budget:
            break
        jt, ct, cb = _level_extremes(G, n, budget)
        jmax[n], jmin[n] = float(jt.max()), float(jt.min())
        nmax[n], nmin[n], cmin[n] = float(ct.max()), float(ct.min()), float(cb.min())
        levels.append(n)
    if not levels:
        raise BudgetExceeded("level 1 does not fit in the budget")
    return JSRBounds(max(jmax.values()), min(nmax.values()), max(cmin.values()),
                     min(jmin.values()), nmin[levels[-1]], levels, jmax, jmin, nmax,
                     nmin, cmin)


def _norm(points, norm):
    if norm in ("euclid", "euclidean", 2):
        return np.sqrt((points * points).sum(axis=1))
    if norm in ("sup", "inf", np.inf):
        return np.abs(points).max(axis=1)
    if norm == "top":
        return points[:, 0]
    raise ValueError(f"unknown norm {norm!r}")


def asymptotic_displacement(S, norm="euclid", n_max=8, budget=DEFAULT_BUDGET, frame=None):
    """(lower, upper) for max{||x|| : x in J(S)} with a Weyl-invariant norm."""
    G = _as_generators(S, frame)
    lo, hi = -math.inf, math.inf
    for n in range(1, n_max + 1):
        if full_cost(G.m, n) + necklace_cost(G.m, n) > budget:
            break
        J = enumerate_level(G, n, JORDAN, NECKLACE, budget=budget, keep_words=False).points
        C = enumerate_level(G, n, CARTAN, FULL, budget=budget, keep_words=False).points
        lo = max(lo, float(_norm(J, norm).max()))
        hi = min(hi, float(_norm(C, norm).max()))
    if lo == -math.inf:
        raise BudgetExceeded("level 1 does not fit in the budget")
    return lo, hi


def outer_envelope(h, frame, projection="native"):
    """Hull of the Weyl orbit of a planar hull."""
    return hull2(weyl_orbit(h.vertices, frame, projection))


@dataclass
class BenoistCone:
    rays: np.ndarray

    @property
    def angles(self):
        return np.arctan2(self.rays[:, 1], self.rays[:, 0])

    def contains(self, p, tol=1e-12):
        a, b = self.rays
        p = np.asarray(p, dtype=float)
        ca = a[0] * p[1] - a[1] * p[0]
        cb = p[0] * b[1] - p[1] * b[0]
        return bool(ca >= -tol and cb >= -tol)


def benoist_cone(h):
    """Extreme rays (counter-clockwise pair) of the cone over a hull."""
    v = h.vertices
    if len(v) >= 3 and h.contains(np.zeros(2), 0.0)[0] and h.depth(np.zeros(2))[0] > 1e-12:
        raise OriginInterior("hull contains the origin in its interior")
    nz = v[np.hypot(v[:, 0], v[:, 1]) > 1e-12]
    if len(nz) == 0:
        raise OriginInterior("hull is the origin")
    u = nz / np.hypot(nz[:, 0], nz[:, 1])[:, None]
    ref = u.mean(axis=0)
    if np.hypot(*ref) < 1e-12:
        ref = np.array([-u[0, 1], u[0, 0]])
    ref = ref / np.hypot(*ref)
    ang = np.arctan2(u[:, 1] * ref[0] - u[:, 0] * ref[1], u @ ref)
    return BenoistCone(np.array([u[np.argmin(ang)], u[np.argmax(ang)]]))


def spectrum_in_rep(h, weight):
    """max over the hull of <weight, x>."""
    w = np.asarray(weight, dtype=float)
    return float((h.vertices @ w).max())


def prescribed_spectrum_set(K_vertices, eta, seed=0, n_perturb=4):
    """Generators whose joint spectrum approximates the polygon K (GL(2)
    chamber coordinates): exp of the vertices plus exp(w0) times matrices
    within operator distance eta of the identity, w0 the vertex centroid."""
    V = np.atleast_2d(np.asarray(K_vertices, dtype=float))
    if V.shape[1] != 2:
        raise DegeneratePolygon("K must be given in GL(2) chamber coordinates")
    h = hull2(V)
    if len(h) < 3 or h.area <= 1e-12:
        raise DegeneratePolygon("K has empty interior")
    if np.any(V[:, 0] < V[:, 1] - 1e-12):
        raise DegeneratePolygon("K leaves the closed chamber")
    w0 = h.centroid
    if not w0[0] > w0[1] + 1e-12:
        raise DegeneratePolygon("centroid of K is not in the open chamber")
    rng = np.random.default_rng(seed)
    out = [np.diag(np.exp(v)) for v in h.vertices]
    a0 = np.diag(np.exp(w0))
    for _ in range(n_perturb):
        E = rng.standard_normal((2, 2))
        E /= np.linalg.norm(E, 2)
        out.append(a0 @ (np.eye(2) + eta * E))
    return out
