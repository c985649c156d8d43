"""Planar convex hulls and Hausdorff distances between convex regions."""
from dataclasses import dataclass
import math

import numpy as np

HULL_TOL = 1e-12
# off-line slack for points on a segment hull (relative interior)
SEGMENT_TOL = 1e-9


@dataclass
class Hull2D:
    """Convex polygon with counter-clockwise vertices.

    One vertex is a point and two vertices are a segment; both are valid
    (degenerate) hulls.
    """
    vertices: np.ndarray
    collinearity_tol: float = HULL_TOL

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self):
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def centroid(self):
        v = self.vertices
        A = self.area
        if len(v) < 3 or A <= 0:
            return v.mean(axis=0)
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cr = x * yn - xn * y
        return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * A)

    def edges(self):
        v = self.vertices
        if len(v) == 1:
            return v, v
        if len(v) == 2:
            return v[:1], v[1:]
        return v, np.roll(v, -1, axis=0)

    def support(self, theta):
        """h(theta) = max over the hull of <theta, x>; ``theta`` may be (k, 2)."""
        th = np.atleast_2d(theta)
        return (self.vertices @ th.T).max(axis=0)

    def distance(self, p):
        """Euclidean distance from points ``p`` to the region (0 inside)."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        d = _dist_to_edges(p, *self.edges())
        if len(self.vertices) >= 3:
            d[self.contains(p, 0.0)] = 0.0
        return d

    def contains(self, p, tol=HULL_TOL):
        p = np.atleast_2d(np.asarray(p, dtype=float))
        v = self.vertices
        if len(v) < 3:
            return _dist_to_edges(p, *self.edges()) <= tol
        a, b = v, np.roll(v, -1, axis=0)
        e = b - a
        ln = np.hypot(e[:, 0], e[:, 1])
        # signed distance to each edge line, positive on the inner side
        cr = (e[None, :, 0] * (p[:, None, 1] - a[None, :, 1])
              - e[None, :, 1] * (p[:, None, 0] - a[None, :, 0])) / ln[None]
        return cr.min(axis=1) >= -tol

    def depth(self, p):
        """Distance from points to the boundary, positive inside.

        Segments use their relative interior: a point on the segment gets
        its distance to the nearer endpoint, anything off it a negative
        value.  A single point has depth ``-distance``.
        """
        p = np.atleast_2d(np.asarray(p, dtype=float))
        v = self.vertices
        if len(v) == 1:
            return -np.hypot(*(p - v[0]).T)
        if len(v) == 2:
            off = _dist_to_edges(p, v[:1], v[1:])
            end = np.minimum(np.hypot(*(p - v[0]).T), np.hypot(*(p - v[1]).T))
            return np.where(off <= SEGMENT_TOL, end, -off)
        a, b = v, np.roll(v, -1, axis=0)
        e = b - a
        ln = np.hypot(e[:, 0], e[:, 1])
        cr = (e[None, :, 0] * (p[:, None, 1] - a[None, :, 1])
              - e[None, :, 1] * (p[:, None, 0] - a[None, :, 0])) / ln[None]
        inner = cr.min(axis=1)
        return np.where(inner >= 0, inner, -self.distance(p))

    def to_dict(self):
        return {"vertices": self.vertices.tolist()}


def _dist_to_edges(p, a, b):
    """Min over segments [a_i, b_i] of the distance from each point of p."""
    e = b - a
    ee = (e * e).sum(axis=1)
    rel = p[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(ee > 0, (rel * e[None]).sum(axis=2) / ee, 0.0)
    t = np.clip(t, 0.0, 1.0)
    diff = rel - t[:, :, None] * e[None]
    return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)


def hull2(points, tol=HULL_TOL):
    """Andrew's monotone chain; CCW vertices, collinear points dropped."""
    P = np.unique(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)
    if len(P) <= 2:
        if len(P) == 2 and np.abs(P[0] - P[1]).max() <= tol:
            P = P[:1]
        return Hull2D(P, tol)
    scale = max(1.0, float(np.abs(P).max()))

    def chain(pts):
        out = []
        for q in pts:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (q[1] - o[1]) - (a[1] - o[1]) * (q[0] - o[0]) > 0:
                    break
                out.pop()
            out.append(q)
        return out

    # exact hull first; near-collinear vertices are pruned afterwards so that
    # the tolerance can only shrink the region by tol * scale
    verts = chain(P)[:-1] + chain(P[::-1])[:-1]
    if len(verts) < 2:
        verts = [P[0], P[-1]]
    verts = _prune(verts, tol * scale)
    if len(verts) == 2 and math.hypot(*(verts[0] - verts[1])) <= tol:
        verts = verts[:1]
    return Hull2D(np.array(verts), tol)


def _prune(verts, eps):
    """Drop vertices within eps of the chord joining their neighbours (and
    projecting inside it) until none is left."""
    verts = list(verts)
    changed = True
    while changed and len(verts) >= 3:
        changed = False
        i = 0
        while i < len(verts) and len(verts) >= 3:
            o, a, q = verts[i - 1], verts[i], verts[(i + 1) % len(verts)]
            e = q - o
            ln = math.hypot(*e)
            if ln > 0:
                t = float(np.dot(a - o, e / ln)) / ln
                dist = abs(e[0] * (a[1] - o[1]) - e[1] * (a[0] - o[0])) / ln
                if 0 <= t <= 1 and dist <= eps:
                    del verts[i]
                    changed = True
                    i = max(i - 1, 0)
                    continue
            i += 1
    return verts


def as_hull(A):
    return A if isinstance(A, Hull2D) else hull2(A)


def directed(A, B):
    """sup over a in A of dist(a, B) for convex regions A, B."""
    A, B = as_hull(A), as_hull(B)
    # distance to a convex set is convex, so the sup sits at a vertex
    return float(B.distance(A.vertices).max())


def hausdorff(A, B):
    """Hausdorff distance between the convex regions spanned by A and B
    (each a :class:`Hull2D` or an ``(N, 2)`` point array)."""
    return max(directed(A, B), directed(B, A))


def polygon(vertices):
    """Hull of explicit polygon vertices (any order)."""
    return hull2(np.asarray(vertices, dtype=float))
