"""Scenario catalog: each entry builds a generating set, runs the relevant
analyses and writes CSV/SVG files plus a dictionary of key numbers."""
from dataclasses import dataclass, replace
import math
import os
import time

import numpy as np

from . import cache as C
from .errors import UsageError
from .geometry import hausdorff, hull2, polygon
from .hyp2 import axes_geometry, classify, nonpoly_boundary, nonpoly_set, paper_pair
from .io import InputDocument, PlotLayer, cloud_rows, write_csv, write_svg
from .matgroup import GroupFrame, block_diag
from .proximal import domination_rate
from .randprod import IIDSpec, iid_curve_two_gen, interior_test, lyapunov_iid, realize_lyapunov
from .spectrum import (CARTAN, FULL, JORDAN, NECKLACE, default_projection,
                       enumerate_level, full_cost, jsr, necklace_cost,
                       prescribed_spectrum_set)


@dataclass
class Flags:
    level: int = None
    budget: int = 10 ** 8
    seed: int = 0
    out: str = "out"
    format: str = "both"
    tol: float = None
    strict: bool = False
    threads: int = 1
    cache: str = None
    verify_cache: bool = False


@dataclass
class ScenarioResult:
    scenario: str
    files: list
    key_numbers: dict
    verdict: bool
    runtime: float
    seed: int

    def to_dict(self):
        return {"scenario": self.scenario, "files": self.files, "verdict": self.verdict,
                "key_numbers": self.key_numbers, "runtime": self.runtime, "seed": self.seed}


class _Run:
    """Per-run state: output files, cache bookkeeping."""

    def __init__(self, name, flags):
        self.name = name
        self.flags = flags
        self.files = []
        self.rows = []
        self.layers = []
        self.cached = []

    def doc(self, mats, labels, frame):
        return InputDocument(mats[0].shape[0], list(mats), list(labels), frame)

    def cloud(self, doc, n, kind, mode, projection):
        def compute():
            return enumerate_level(doc.generators, n, kind, mode, projection, doc.frame,
                                   self.flags.budget, threads=self.flags.threads)
        h = doc.content_hash()
        cl, hit = C.cached_cloud(self.flags.cache, h, compute, n, kind, mode, projection)
        if self.flags.cache:
            self.cached.append((doc, h, n, kind, mode, projection))
        return cl

    def add_cloud(self, cloud, labels, name, color):
        self.rows.extend(cloud_rows(cloud, labels))
        self.layers.append(PlotLayer(name, points=cloud.xy, color=color))

    def add_polygon(self, name, verts, color, closed=True):
        self.layers.append(PlotLayer(name, polygon=np.asarray(verts), color=color,
                                     closed=closed))

    def write(self):
        os.makedirs(self.flags.out, exist_ok=True)
        base = os.path.join(self.flags.out, self.name)
        if self.flags.format in ("csv", "both"):
            write_csv(base + ".csv", self.name, self.rows)
            self.files.append(base + ".csv")
        if self.flags.format in ("svg", "both"):
            write_svg(base + ".svg", self.layers, self.name)
            self.files.append(base + ".svg")

    def verify_cache(self):
        if not self.cached:
            return None
        rng = np.random.Generator(np.random.Philox(key=[self.flags.seed, 1]))
        doc, h, n, kind, mode, proj = self.cached[int(rng.integers(len(self.cached)))]
        stored = C.cache_get(self.flags.cache, h, n, kind, mode, proj)
        fresh = enumerate_level(doc.generators, n, kind, mode, proj, doc.frame,
                                self.flags.budget)
        return C.encode(stored, h) == C.encode(fresh, h)


def _level(flags, default):
    return flags.level if flags.level else default


def _tol(flags, default):
    return flags.tol if flags.tol is not None else default


def triangular_set():
    return [np.diag([2.0, 1.0]), np.diag([0.5, 1.0]), np.array([[2.0, 1.0], [0.0, 1.0]])]


def equal_length_pair():
    """a and (r a r)^-1 with r the quarter turn: equal translation lengths,
    disjoint axes, same direction."""
    a, _ = paper_pair(10)
    r = np.array([[0.0, -1.0], [1.0, 0.0]])
    return a, np.linalg.inv(r @ a @ r)


def triangle_T1(s=10.0):
    a, b = paper_pair(s)
    return [block_diag(a, a), block_diag(b, b), block_diag(b, a)]


def _fig3(run, flags):
    n = _level(flags, 12)
    S = triangular_set()
    labels = ["a", "ainv", "b"]
    doc = run.doc(S, labels, GroupFrame.GL(2))
    J = run.cloud(doc, n, JORDAN, NECKLACE, "det_chart")
    K = run.cloud(doc, n, CARTAN, FULL, "det_chart")
    xy = J.xy
    seg_err = float(np.abs(np.abs(xy[:, 1]) - 2 * xy[:, 0]).max())
    h = math.log(2)
    tri = polygon([[0, 0], [h / 2, h], [h / 2, -h]])
    kh = K.hull()
    run.add_cloud(K, labels, "cartan", "#999999")
    run.add_cloud(J, labels, "jordan", "#d62728")
    run.add_polygon("cartan_hull", kh.vertices, "#1f77b4")
    run.add_polygon("triangle", tri.vertices, "#2ca02c")
    haus = hausdorff(kh, tri)
    outside = float(tri.distance(K.xy).max())
    keys = {"level": n, "jordan_segment_error": seg_err, "cartan_hausdorff_triangle": haus,
            "cartan_outside_triangle": outside, "jordan_points": len(J), "cartan_points": len(K)}
    ok = seg_err <= 1e-9 and haus <= _tol(flags, 0.12)
    return keys, ok


def _product_polygon(run, flags, name, S, labels, target, tol_factor):
    n = _level(flags, 8)
    doc = run.doc(S, labels, GroupFrame.product(2))
    J = run.cloud(doc, n, JORDAN, NECKLACE, "native")
    H = J.hull()
    run.add_cloud(J, labels, "jordan", "#d62728")
    run.add_polygon("jordan_hull", H.vertices, "#1f77b4")
    run.add_polygon(name, target.vertices, "#2ca02c")
    haus = hausdorff(H, target)
    outside = float(target.distance(J.xy).max())
    return n, H, haus, outside


def _fig5(run, flags):
    a, b = paper_pair(10)
    ta, tb = classify(a).tau, classify(b).tau
    tri = polygon([[ta / 2, ta / 2], [tb / 2, ta / 2], [tb / 2, tb / 2]])
    n, H, haus, outside = _product_polygon(run, flags, "triangle", triangle_T1(),
                                           ["aa", "bb", "ba"], tri, 0.15)
    keys = {"level": n, "tau_a": ta, "tau_b": tb, "hausdorff_triangle": haus,
            "outside_triangle": outside, "hull_vertices": H.vertices.tolist()}
    return keys, outside <= 1e-9 and haus <= _tol(flags, 0.15 * tb)


def _fig6(run, flags):
    a, b = equal_length_pair()
    ax = axes_geometry(a, b)
    ta = classify(a).tau
    tab = classify(a @ b).tau
    sq = polygon([[ta / 2, ta / 2], [tab / 4, ta / 2], [tab / 4, tab / 4], [ta / 2, tab / 4]])
    S = [block_diag(a, a), block_diag(a, b), block_diag(b, a)]
    n, H, haus, outside = _product_polygon(run, flags, "square", S, ["aa", "ab", "ba"], sq, 0.15)
    keys = {"level": n, "tau_a": ta, "tau_b": classify(b).tau, "tau_ab": tab,
            "axis_distance": ax.axis_distance, "same_direction": ax.same_direction,
            "hausdorff_square": haus}
    ok = ax.disjoint and ax.same_direction and haus <= _tol(flags, 0.15 * tab / 4)
    return keys, ok


def _fig4(run, flags):
    """Discontinuity probe: S_0 = {alpha I, a, b} against S_k = {alpha r_k, a, b}."""
    n = _level(flags, 10)
    a, b = equal_length_pair()
    alpha = 1.1
    labels = ["s", "a", "b"]
    S0 = [alpha * np.eye(2), a, b]
    J0 = run.cloud(run.doc(S0, labels, GroupFrame.GL(2)), n, JORDAN, NECKLACE, "det_chart")
    H0 = J0.hull()
    run.add_cloud(J0, labels, "S0", "#d62728")
    run.add_polygon("S0_hull", H0.vertices, "#d62728")
    keys = {"level": n, "alpha": alpha}
    dists = {}
    colors = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b"]
    for k, col in zip((1, 2, 4, 8), colors):
        t = math.pi / (2 * k)
        rk = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        Jk = run.cloud(run.doc([alpha * rk, a, b], labels, GroupFrame.GL(2)), n, JORDAN,
                       NECKLACE, "det_chart")
        Hk = Jk.hull()
        run.add_polygon(f"S{k}_hull", Hk.vertices, col)
        dists[str(k)] = hausdorff(H0, Hk)
    keys["hausdorff_S0_Sk"] = dists
    dom = domination_rate(S0, 1, min(n, 8), flags.budget)
    keys["S0_dominated"] = dom.verdict
    keys["origin_distance_S0"] = float(H0.distance(np.zeros(2))[0])
    return keys, not dom.verdict


def _fig7(run, flags):
    n = _level(flags, 12)
    res = nonpoly_boundary(n, 10.0, flags.budget)
    run.rows.extend(cloud_rows(res.cloud, ["1a", "aa", "bb", "ba"]))
    run.layers.append(PlotLayer("jordan", points=res.cloud.xy, color="#999999", radius=1.0))
    run.add_polygon("hull", res.hull.vertices, "#1f77b4")
    _, b = paper_pair(10)
    lb = classify(b).log_lambda
    run.add_polygon("I_n", np.column_stack([res.alphas * lb, res.I]), "#d62728", closed=False)
    keys = {"level": n, "max_abs_f_minus_I": res.max_abs_diff,
            "rect_violation": res.rect_violation, "I": res.I.tolist()}
    tol = _tol(flags, 1e-9)
    return keys, res.max_abs_diff <= tol and res.rect_violation <= tol


def _prop1_11(run, flags):
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    b = a.T
    n_steps = _level(flags, 2000)
    trials = 200
    curve = iid_curve_two_gen(a, b, np.arange(1, 10) / 10, n_steps, trials, flags.seed)
    R = 0.5 * math.log((3 + math.sqrt(5)) / 2)
    bounds = jsr([a, b], 16, flags.budget)
    sym = max(abs(curve.phi[i] - curve.phi[-1 - i]) - 2 * (curve.ci[i] + curve.ci[-1 - i])
              for i in range(len(curve.p)))
    top = float((curve.phi + 3 * curve.ci).max())
    run.rows.extend((n_steps, "LYAPUNOV", "IID", p, f, "") for p, f in zip(curve.p, curve.phi))
    run.add_polygon("phi", np.column_stack([curve.p, curve.phi]), "#1f77b4", closed=False)
    run.add_polygon("jsr", [[0.1, R], [0.9, R]], "#d62728", closed=False)
    keys = {"n_steps": n_steps, "trials": trials, "phi": curve.phi.tolist(),
            "ci": curve.ci.tolist(), "log_R": R, "jsr_lower": bounds.lower,
            "jsr_upper": bounds.upper, "symmetry_excess": sym, "sup_plus_3ci": top}
    ok = sym <= 0 and top < R and bool(np.all(curve.phi > 3 * curve.ci))
    return keys, ok


def _realize(run, flags):
    a, b = paper_pair(10)
    ta, tb = classify(a).tau, classify(b).tau
    tri = np.array([[ta / 2, ta / 2], [tb / 2, ta / 2], [tb / 2, tb / 2]])
    target = tri.mean(axis=0)
    res = realize_lyapunov(triangle_T1(), target, 8, 0.05 * tb, flags.seed,
                           GroupFrame.product(2), level=_level(flags, 8))
    center, ci = res.achieved.planar()
    run.rows.append((res.achieved.n_steps, "LYAPUNOV", "PROCESS", center[0], center[1], ""))
    run.add_polygon("triangle", tri, "#2ca02c")
    run.layers.append(PlotLayer("target", points=target[None], color="#d62728", radius=5))
    run.layers.append(PlotLayer("achieved", points=center[None], color="#1f77b4", radius=4))
    keys = {"target": target.tolist(), "achieved": center.tolist(), "ci": ci.tolist(),
            "deviation": res.deviation, "predicted": res.predicted.tolist(),
            "weights": res.process.bernoulli_weights.tolist(),
            "code_lengths": res.process.lengths.tolist(),
            "schottky": [list(c) for c in res.certificates]}
    return keys, res.deviation <= _tol(flags, 0.05 * tb)


def _prescribe(run, flags):
    K = np.array([[1.0, 0.0], [2.0, 0.5], [1.5, -0.5]])
    S = prescribed_spectrum_set(K, 1e-3, flags.seed)
    n = _level(flags, 6)
    labels = [f"g{i}" for i in range(len(S))]
    J = run.cloud(run.doc(S, labels, GroupFrame.GL(2)), n, JORDAN, NECKLACE, "native")
    H = J.hull()
    Kh = hull2(K)
    run.add_cloud(J, labels, "jordan", "#999999")
    run.add_polygon("K", Kh.vertices, "#2ca02c")
    run.add_polygon("hull", H.vertices, "#1f77b4")
    haus = hausdorff(H, Kh)
    return {"level": n, "hausdorff_K": haus}, haus <= _tol(flags, 0.05)


def _from_input(run, flags, doc):
    proj = default_projection(doc.frame)
    m = len(doc.generators)
    if flags.level:
        n = flags.level
    else:
        n = 1
        while n < 20 and full_cost(m, n + 1) <= flags.budget:
            n += 1
    J = run.cloud(doc, n, JORDAN, NECKLACE, proj)
    keys = {"level": n, "jordan_points": len(J)}
    run.add_cloud(J, doc.labels, "jordan", "#d62728")
    if full_cost(m, n) <= flags.budget:
        K = run.cloud(doc, n, CARTAN, FULL, proj)
        run.add_cloud(K, doc.labels, "cartan", "#999999")
        run.add_polygon("cartan_hull", K.hull().vertices, "#1f77b4")
        keys["hausdorff_jordan_cartan"] = hausdorff(J.hull(), K.hull())
    run.add_polygon("jordan_hull", J.hull().vertices, "#d62728")
    if doc.weights is not None:
        est = lyapunov_iid(IIDSpec(doc.generators, doc.weights, doc.frame), 400, 100, flags.seed)
        keys["lyapunov"] = est.vector.coords.tolist()
        keys["lyapunov_interior"] = interior_test(est, J.hull(), 0.0, proj)
    return keys, True


CATALOG = {
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "prop1_11": _prop1_11,
    "realize": _realize,
    "prescribe": _prescribe,
}


def run_scenario(name, flags=None, doc=None, **overrides):
    """Run one catalog entry (or an input document).  Keyword overrides
    replace fields of ``flags``; ``n`` is an alias for ``level``."""
    flags = flags or Flags()
    if "n" in overrides:
        overrides["level"] = overrides.pop("n")
    if overrides:
        flags = replace(flags, **overrides)
    if doc is None and name not in CATALOG:
        raise UsageError(f"unknown scenario {name!r}; known: {', '.join(sorted(CATALOG))}")
    t0 = time.perf_counter()
    run = _Run(name, flags)
    if doc is not None and name not in CATALOG:
        keys, ok = _from_input(run, flags, doc)
    else:
        keys, ok = CATALOG[name](run, flags)
    run.write()
    if flags.verify_cache:
        v = run.verify_cache()
        keys["cache_verified"] = v
        ok = ok and v is not False
    return ScenarioResult(name, run.files, keys, bool(ok), time.perf_counter() - t0, flags.seed)
