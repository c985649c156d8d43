import math

import numpy as np
from hypothesis import example, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from jointspec.geometry import Hull2D, hausdorff, hull2, polygon

pts = arrays(np.float64, st.tuples(st.integers(3, 40), st.just(2)),
             elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False))


def test_square_hull():
    P = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.5, 0]], float)
    h = hull2(P)
    assert len(h) == 4
    assert math.isclose(h.area, 1.0)
    assert np.allclose(h.centroid, [0.5, 0.5])


def test_degenerate_hulls():
    assert len(hull2([[1, 1], [1, 1]])) == 1
    seg = hull2([[0, 0], [1, 1], [2, 2]])
    assert len(seg) == 2
    assert seg.area == 0.0
    # relative interior of a segment
    assert seg.depth([[1, 1]])[0] > 0
    assert seg.depth([[1, 1.5]])[0] < 0


def test_hausdorff_of_translates():
    a = polygon([[0, 0], [1, 0], [0, 1]])
    b = polygon([[0.3, 0], [1.3, 0], [0.3, 1]])
    assert math.isclose(hausdorff(a, b), 0.3)


def test_hausdorff_point_sets_use_hull_regions():
    A = np.array([[0, 0], [2, 0], [0, 2], [0.5, 0.5]], float)
    B = np.array([[0, 0], [2, 0], [0, 2]], float)
    assert hausdorff(A, B) == 0.0


@settings(max_examples=300, deadline=None)
@given(pts)
@example(np.array([[0.0, 1.0], [9.07516074e-151, 0.0], [0.0, 0.0]]))
def test_hull_contains_all_points(P):
    h = hull2(P)
    scale = max(1.0, float(np.abs(P).max()))
    assert float(h.distance(P).max()) <= 1e-9 * scale
    assert h.area >= 0


@settings(max_examples=60, deadline=None)
@given(pts, pts)
def test_hausdorff_is_a_metric(P, Q):
    a, b = hull2(P), hull2(Q)
    assert hausdorff(a, a) == 0.0
    assert math.isclose(hausdorff(a, b), hausdorff(b, a))


@settings(max_examples=40, deadline=None)
@given(pts, st.floats(0, 2 * math.pi))
def test_support_attained_at_vertex(P, t):
    h = hull2(P)
    th = np.array([math.cos(t), math.sin(t)])
    assert h.support(th)[0] >= float((P @ th).max()) - 1e-9
