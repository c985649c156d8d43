import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointspec.errors import DimensionMismatch, NotDominated, NotInterior
from jointspec.geometry import hull2, polygon
from jointspec.hyp2 import classify, paper_pair
from jointspec.matgroup import GroupFrame
from jointspec.randprod import (ConcatenationProcess, IIDSpec, clt_covariance, continuity_probe,
                                interior_test, lyapunov_iid, lyapunov_process, perturb,
                                realize_lyapunov, sample_letters, simplex_weights)
from jointspec.scenarios import triangle_T1

E = math.e
DIAG_PAIR = [np.diag([E, 1 / E]), np.diag([1 / E, E])]


def test_letters_deterministic_and_distributed():
    w = np.array([0.2, 0.5, 0.3])
    a = sample_letters(w, 20000, 5, 0)
    assert np.array_equal(a, sample_letters(w, 20000, 5, 0))
    assert not np.array_equal(a, sample_letters(w, 20000, 5, 1))
    freq = np.bincount(a, minlength=3) / len(a)
    assert np.allclose(freq, w, atol=0.02)


def test_abelian_lyapunov_is_mean():
    S = [np.diag([3.0, 1.0]), np.diag([1.0, 2.0])]
    est = lyapunov_iid(IIDSpec(S, [0.25, 0.75]), 2000, 40, seed=1)
    # top exponent of commuting diagonals: E max(sum log d1, sum log d2) / n
    m = 0.25 * np.log([3.0, 1.0]) + 0.75 * np.log([1.0, 2.0])
    assert np.allclose(np.sort(est.vector.coords)[::-1], np.sort(m)[::-1], atol=4 * est.ci_halfwidth.max() + 1e-3)


def test_clt_two_diagonals():
    res = clt_covariance(IIDSpec(DIAG_PAIR), 400, 2000, seed=0)
    var, se = res.variance_with_se(0)
    # kappa_1 is |random walk|: the variance tends to 1 - 2/pi
    assert abs(var - (1 - 2 / math.pi)) < 5 * se + 0.02
    assert res.rank_ok


def test_clt_paper_pair_nondegenerate():
    res = clt_covariance(IIDSpec(list(paper_pair(10))), 200, 500, seed=2)
    var, se = res.variance_with_se(0)
    assert var > 5 * se


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 1), min_size=3, max_size=3))
def test_simplex_weights_recovers_combination(u):
    P = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    u = np.array(u) / sum(u)
    w, resid = simplex_weights(P, u @ P)
    assert resid <= 1e-9
    assert np.allclose(w, u, atol=1e-6)


def test_process_prediction_abelian():
    # sorted Jordan vectors add only when the code words share a dominant
    # direction, which holds for these diagonals
    S = [np.diag([2.0, 1.0]), np.diag([4.0, 0.5])]
    proc = ConcatenationProcess([[0], [1, 1]], [0.5, 0.5], GroupFrame.GL(2), S)
    pred = proc.predicted()
    est = lyapunov_process(proc, 2000, 20, seed=0)
    assert np.allclose(est.vector.coords, pred, atol=0.02)


def test_realization_centroid_and_boundary():
    a, b = paper_pair(10)
    ta, tb = classify(a).tau, classify(b).tau
    tri = np.array([[ta / 2, ta / 2], [tb / 2, ta / 2], [tb / 2, tb / 2]])
    res = realize_lyapunov(triangle_T1(), tri.mean(axis=0), 8, 0.05 * tb, 0,
                           GroupFrame.product(2))
    assert res.deviation <= 0.05 * tb
    assert all(eps < r for r, eps in res.certificates)
    with pytest.raises(NotInterior):
        realize_lyapunov(triangle_T1(), tri[0], 8, 0.05 * tb, 0, GroupFrame.product(2))


def test_interior_test_margins():
    h = polygon([[0, 0], [1, 0], [0, 1]])
    assert interior_test((np.array([0.2, 0.2]), np.array([0.01, 0.01])), h)
    assert not interior_test((np.array([0.2, 0.2]), np.array([0.1, 0.1])), h)
    with pytest.raises(DimensionMismatch):
        interior_test((np.array([0.2, 0.2]), np.array([0.01, 0.01])), np.zeros(2))


def test_perturb_scales():
    g = [np.array([[2.0, 0.0], [3.0, 1e4]])]
    p = perturb(g, 1e-3, seed=0, scale="relative")[0]
    assert p[0, 1] == 0.0
    assert np.allclose(np.abs(p - g[0]), 1e-3 * np.abs(g[0]))
    q = perturb(g, 1e-3, seed=0, pattern="diagonal")[0]
    assert q[0, 1] == 0.0 and q[1, 0] == 3.0


def test_continuity():
    S = list(paper_pair(10))
    rel = continuity_probe(S, 1e-3, 400, 50, seed=0, scale="relative")
    assert rel.shift.max() <= 0.05
    absolute = continuity_probe(S, 1e-3, 400, 50, seed=0)
    # absolute offsets of 1e-3 on entries of size e^10 move the determinant,
    # which only the lower coordinate feels
    assert absolute.shift[0] <= 0.05
    with pytest.raises(NotDominated):
        continuity_probe([1.1 * np.eye(2)] + S, 1e-3, 100, 10)
