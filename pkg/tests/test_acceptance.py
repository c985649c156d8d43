"""Acceptance criteria 1-16.  Each test records one summary line (printed at
the end of the session by conftest) and asserts the same condition."""
import math
import os
import time

import numpy as np
import pytest

from jointspec import cache as C
from jointspec.geometry import hausdorff, polygon
from jointspec.hyp2 import (axes_geometry, classify, hyperbolic_from_axis, nonpoly_boundary,
                            paper_pair, ratio_I, ratio_curve)
from jointspec.matgroup import CARTAN, JORDAN, GroupFrame, block_diag, cartan, fold, kronecker
from jointspec.proximal import domination_rate, power_set, schottky_check
from jointspec.randprod import (IIDSpec, clt_covariance, interior_test, iid_curve_two_gen,
                                lyapunov_iid, realize_lyapunov)
from jointspec.scenarios import Flags, equal_length_pair, triangular_set, run_scenario, triangle_T1
from jointspec.spectrum import FULL, NECKLACE, enumerate_level, jsr

LOG2 = math.log(2)
LOG_R = 0.5 * math.log((3 + math.sqrt(5)) / 2)
UNIPOTENT = [np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[1.0, 0.0], [1.0, 1.0]])]

# frozen after a one-time brute-force run at n = 24 (kink gap 1.0495 there)
KINK_MARGIN = 0.9
# frozen after calibration: level-14 Cartan hull sits 0.029 from the triangle
C2_HAUSDORFF = 0.12


@pytest.fixture(scope="module")
def pair():
    return paper_pair(10)


@pytest.fixture(scope="module")
def c2_cloud():
    t0 = time.perf_counter()
    cl = enumerate_level(triangular_set(), 14, CARTAN, FULL, "det_chart", GroupFrame.GL(2),
                         keep_words=False)
    return cl, time.perf_counter() - t0


def c2_triangle():
    return polygon([[0, 0], [LOG2 / 2, LOG2], [LOG2 / 2, -LOG2]])


def test_c01_triangular_set_jordan_segments(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 15):
        xy = enumerate_level(triangular_set(), n, JORDAN, NECKLACE, "det_chart", GroupFrame.GL(2),
                             keep_words=False).xy
        x, y = xy[:, 0], xy[:, 1]
        # on |y| = 2x with 0 <= x <= log2 / 2
        off = np.maximum.reduce([np.abs(np.abs(y) - 2 * x), -x, x - LOG2 / 2])
        worst = max(worst, float(off.max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 60
    acceptance(1, "triangular set: Jordan segments n<=14", ok, f"max off-segment {worst:.2e}, {dt:.1f}s")
    assert ok


def test_c02_triangular_set_cartan_hausdorff(acceptance, c2_cloud):
    cl, dt = c2_cloud
    d = hausdorff(cl.hull(), c2_triangle())
    ok = d <= C2_HAUSDORFF and dt < 300
    acceptance(2, "triangular set: Cartan triangle n=14", ok, f"Hausdorff {d:.4f}, {dt:.1f}s")
    assert ok


def test_c02_triangular_set_cartan_containment(acceptance, c2_cloud):
    cl, _ = c2_cloud
    out = float(c2_triangle().distance(cl.hull().vertices).max())
    ok = out <= 1e-9
    acceptance(2, "triangular set: Cartan triangle n=14", ok,
               f"hull exits triangle by {out:.4f} (max x {cl.xy[:, 0].max():.5f} vs log2/2 {LOG2 / 2:.5f})")
    assert ok


def test_c03_T1_triangle(acceptance, pair):
    t0 = time.perf_counter()
    a, b = pair
    ta, tb = classify(a).tau, classify(b).tau
    tri = polygon([[ta / 2, ta / 2], [tb / 2, ta / 2], [tb / 2, tb / 2]])
    T1 = triangle_T1()
    worst = 0.0
    for n in range(1, 11):
        cl = enumerate_level(T1, n, JORDAN, NECKLACE, "native", GroupFrame.product(2),
                             keep_words=False)
        worst = max(worst, float(tri.distance(cl.xy).max()))
    d = hausdorff(cl.hull(), tri)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and d <= 0.15 * tb and dt < 120
    acceptance(3, "triangle T1", ok,
               f"outside {worst:.1e}, Hausdorff {d:.2e} <= {0.15 * tb:.3f}, {dt:.1f}s")
    assert ok


def test_c04_equal_length_square(acceptance):
    t0 = time.perf_counter()
    a, b = equal_length_pair()
    ax = axes_geometry(a, b)
    ta, tb, tab = classify(a).tau, classify(b).tau, classify(a @ b).tau
    sq = polygon([[ta / 2, ta / 2], [tab / 4, ta / 2], [tab / 4, tab / 4], [ta / 2, tab / 4]])
    S = [block_diag(a, a), block_diag(a, b), block_diag(b, a)]
    cl = enumerate_level(S, 10, JORDAN, NECKLACE, "native", GroupFrame.product(2))
    d = hausdorff(cl.hull(), sq)
    dt = time.perf_counter() - t0
    ok = (ax.disjoint and ax.same_direction and abs(ta - tb) <= 1e-9
          and d <= 0.15 * tab / 4 and dt < 120)
    acceptance(4, "equal-length square", ok,
               f"axis distance {ax.axis_distance:.4f}, Hausdorff {d:.2e} <= {0.15 * tab / 4:.3f}, {dt:.1f}s")
    assert ok


def test_c05_product_length_identity(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240605)
    worst, same = 0.0, True
    for _ in range(1000):
        x = np.sort(rng.uniform(-5, 5, 4))
        ta, tb = rng.uniform(0.3, 5, 2)
        A = hyperbolic_from_axis(x[1], x[0], ta)
        B = hyperbolic_from_axis(x[2], x[3], tb)
        ax = axes_geometry(A, B)
        same = same and ax.same_direction and ax.disjoint
        tab = classify(A @ B).tau
        d = ax.axis_distance
        rhs = math.cosh(d) * math.sinh(ta / 2) * math.sinh(tb / 2) + math.cosh(ta / 2) * math.cosh(tb / 2)
        lhs = math.cosh(tab / 2)
        worst = max(worst, abs(lhs - rhs) / lhs)
    dt = time.perf_counter() - t0
    ok = same and worst <= 1e-9 and dt < 10
    acceptance(5, "product length identity", ok, f"max rel error {worst:.1e}, {dt:.1f}s")
    assert ok


def test_c06_finiteness_length_one(acceptance, pair):
    t0 = time.perf_counter()
    a, b = pair
    la, lb = classify(a).log_lambda, classify(b).log_lambda
    B = jsr([a, b], 12)
    err_max = max(abs(B.jordan_max[n] - lb) for n in range(1, 13))
    err_min = max(abs(B.jordan_min[n] - la) for n in range(1, 13))
    dt = time.perf_counter() - t0
    ok = B.levels == list(range(1, 13)) and err_max <= 1e-9 and err_min <= 1e-9 and dt < 60
    acceptance(6, "finiteness length 1", ok, f"max err {err_max:.1e}, min err {err_min:.1e}, {dt:.1f}s")
    assert ok


def test_c07_unipotent_jsr(acceptance):
    t0 = time.perf_counter()
    B = jsr(UNIPOTENT, 20)
    dt = time.perf_counter() - t0
    ok = (B.levels[-1] == 20 and B.lower - 1e-12 <= LOG_R <= B.upper + 1e-12
          and B.gap <= 0.02 and dt < 120)
    acceptance(7, "unipotent pair JSR", ok,
               f"[{B.lower:.6f}, {B.upper:.6f}] vs {LOG_R:.6f}, {dt:.1f}s")
    assert ok


def test_c08_unipotent_curve(acceptance):
    t0 = time.perf_counter()
    cur = iid_curve_two_gen(*UNIPOTENT, np.arange(1, 10) / 10, 2000, 200, seed=0)
    k = len(cur.p)
    sym = all(abs(cur.phi[i] - cur.phi[k - 1 - i]) <= 2 * (cur.ci[i] + cur.ci[k - 1 - i])
              for i in range(k))
    pos = bool(np.all(cur.phi > 3 * cur.ci))
    top = float((cur.phi + 3 * cur.ci).max())
    dt = time.perf_counter() - t0
    ok = sym and pos and top < LOG_R and dt < 180
    acceptance(8, "unipotent Lyapunov curve", ok,
               f"symmetric {sym}, positive {pos}, max phi+3CI {top:.4f} < {LOG_R:.4f}, {dt:.1f}s")
    assert ok


def test_c09_lyapunov_interior(acceptance, pair):
    t0 = time.perf_counter()
    S = list(pair)
    hull = enumerate_level(S, 12, JORDAN, NECKLACE, "det_chart", GroupFrame.GL(2)).hull()
    est = lyapunov_iid(IIDSpec(S), 1000, 100, seed=0)
    center, ci = est.planar("det_chart")
    inside = interior_test(est, hull, 0.0, "det_chart")
    dt = time.perf_counter() - t0
    ok = inside and dt < 60
    acceptance(9, "Lyapunov interior", ok,
               f"estimate {center[0]:.4f} +- {ci[0]:.1e} in [{hull.vertices[:, 0].min():.3f}, "
               f"{hull.vertices[:, 0].max():.3f}], {dt:.1f}s")
    assert ok


def test_c10_realization(acceptance, pair):
    t0 = time.perf_counter()
    a, b = pair
    ta, tb = classify(a).tau, classify(b).tau
    target = np.array([[ta / 2, ta / 2], [tb / 2, ta / 2], [tb / 2, tb / 2]]).mean(axis=0)
    res = realize_lyapunov(triangle_T1(), target, 8, 0.05 * tb, 0, GroupFrame.product(2))
    center, _ = res.achieved.planar()
    dev = float(np.abs(center - target).max())
    dt = time.perf_counter() - t0
    ok = dev <= 0.05 * tb and dt < 180
    acceptance(10, "realization at the centroid", ok,
               f"l-inf deviation {dev:.3f} <= {0.05 * tb:.3f}, {dt:.1f}s")
    assert ok


def test_c11_domination_schottky(acceptance, pair):
    t0 = time.perf_counter()
    a, b = pair
    dom = domination_rate([a, b], 1, 10)
    found = None
    for n0 in range(1, 5):
        try:
            rep = schottky_check(power_set([a, b], n0))
        except Exception:
            continue
        r, eps = rep.measured()
        if eps < r and rep.verdict_for(r, eps):
            found = (n0, r, eps)
            break
    bad = domination_rate([1.1 * np.eye(2), a, b], 1, 10)
    dt = time.perf_counter() - t0
    ok = dom.verdict and found is not None and not bad.verdict and dt < 60
    acceptance(11, "domination and Schottky", ok,
               f"rate {dom.fitted_rate:.4f}, Schottky at {found}, scalar set dominated {bad.verdict}, {dt:.1f}s")
    assert ok


def test_c12_fold_consistency(acceptance):
    t0 = time.perf_counter()
    T1 = triangle_T1()
    cl = enumerate_level(T1, 8, JORDAN, NECKLACE, "native", GroupFrame.product(2))
    top = float(cl.hull().vertices.sum(axis=1).max())
    kr = [kronecker(M[:2, :2], M[2:, 2:]) for M in T1]
    low = jsr(kr, 8).lower
    gap = abs(top - low)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        g, h = rng.standard_normal((2, 2, 2))
        g /= math.sqrt(abs(np.linalg.det(g)))
        h /= math.sqrt(abs(np.linalg.det(h)))
        u, v = cartan(g).coords[0], cartan(h).coords[0]
        worst = max(worst, float(np.abs(fold([u, v]).coords - cartan(np.kron(g, h)).coords).max()))
    dt = time.perf_counter() - t0
    ok = gap <= 0.05 and worst <= 1e-9 and dt < 120
    acceptance(12, "folding and tensor consistency", ok,
               f"|max(x+y) - jsr| {gap:.1e}, fold error {worst:.1e}, {dt:.1f}s")
    assert ok


def test_c13_sturmian_curve(acceptance, pair):
    t0 = time.perf_counter()
    a, b = pair
    la, lb = classify(a).log_lambda, classify(b).log_lambda
    cur = ratio_curve(a, b, np.arange(13) / 12, 12, rationals_to_probe=[0.5], h=1 / 12)
    e0, e1 = abs(cur.values[0] - la), abs(cur.values[-1] - lb)
    kink = cur.kink_slope_gaps[0.5]
    dt = time.perf_counter() - t0
    ok = e0 <= 1e-12 and e1 <= 1e-12 and cur.monotone_gap_min >= 0.95 and kink > KINK_MARGIN and dt < 300
    acceptance(13, "Sturmian ratio curve", ok,
               f"endpoint errors {e0:.1e}/{e1:.1e}, monotone gap {cur.monotone_gap_min:.3f}, "
               f"kink {kink:.4f} > {KINK_MARGIN}, {dt:.1f}s")
    assert ok


def test_c14_nonpolygonal_boundary(acceptance):
    t0 = time.perf_counter()
    res = nonpoly_boundary(12, 10.0)
    dt = time.perf_counter() - t0
    ok = res.max_abs_diff <= 1e-9 and res.rect_violation <= 1e-9 and dt < 300
    acceptance(14, "non-polygonal boundary", ok,
               f"max |f - I| {res.max_abs_diff:.1e}, rectangle violation {res.rect_violation:.1e}, {dt:.1f}s")
    assert ok


def test_c15_clt_nondegenerate(acceptance, pair):
    t0 = time.perf_counter()
    res = clt_covariance(IIDSpec(list(pair)), 400, 2000, seed=0)
    var, se = res.variance_with_se(0)
    dt = time.perf_counter() - t0
    ok = var > 5 * se and dt < 120
    acceptance(15, "CLT non-degeneracy", ok, f"variance {var:.3f}, SE {se:.3f}, {dt:.1f}s")
    assert ok


def _same_files(d1, d2):
    names = sorted(os.listdir(d1))
    if names != sorted(os.listdir(d2)):
        return False
    for n in names:
        with open(os.path.join(d1, n), "rb") as f1, open(os.path.join(d2, n), "rb") as f2:
            if f1.read() != f2.read():
                return False
    return True


def test_c16_infrastructure(acceptance, tmp_path, pair):
    # determinism: identical runs write identical bytes
    r1 = run_scenario("fig5", Flags(out=str(tmp_path / "r1"), seed=3))
    r2 = run_scenario("fig5", Flags(out=str(tmp_path / "r2"), seed=3))
    p1 = run_scenario("prop1_11", Flags(out=str(tmp_path / "p1"), level=200, seed=3))
    p2 = run_scenario("prop1_11", Flags(out=str(tmp_path / "p2"), level=200, seed=3))
    det = (_same_files(tmp_path / "r1", tmp_path / "r2") and _same_files(tmp_path / "p1", tmp_path / "p2")
           and p1.key_numbers["phi"] == p2.key_numbers["phi"])

    # cache round trip: miss then hit, both byte-identical to a fresh computation
    cdir = str(tmp_path / "cache")
    S = triangular_set()
    fresh = enumerate_level(S, 7, JORDAN, NECKLACE, "det_chart", GroupFrame.GL(2))
    h = "ab" * 32
    compute = lambda: enumerate_level(S, 7, JORDAN, NECKLACE, "det_chart", GroupFrame.GL(2))
    c1, hit1 = C.cached_cloud(cdir, h, compute, 7, JORDAN, NECKLACE, "det_chart")
    c2, hit2 = C.cached_cloud(cdir, h, compute, 7, JORDAN, NECKLACE, "det_chart")
    rt = (not hit1 and hit2 and C.encode(c2, h) == C.encode(fresh, h)
          and np.array_equal(c2.points, fresh.points) and np.array_equal(c2.words, fresh.words))

    # NECKLACE and FULL agree on Jordan clouds
    a, b = pair
    sets = [(triangular_set(), GroupFrame.GL(2)), ([a, b], GroupFrame.GL(2)),
            (triangle_T1(), GroupFrame.product(2)), (UNIPOTENT, GroupFrame.GL(2))]
    neck = True
    for S, fr in sets:
        for n in range(1, 9):
            f = enumerate_level(S, n, JORDAN, FULL, frame=fr, keep_words=False).points
            k = enumerate_level(S, n, JORDAN, NECKLACE, frame=fr, keep_words=False).points
            neck = neck and f.shape == k.shape and bool(np.allclose(f, k, rtol=0, atol=1e-10))
    ok = det and rt and neck
    acceptance(16, "infrastructure", ok, f"determinism {det}, cache round trip {rt}, necklace = full {neck}")
    assert ok
