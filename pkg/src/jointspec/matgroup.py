"""Small-matrix linear algebra: Cartan and Jordan projections, projective
distance, compound and tensor representations, chamber coordinates.

Matrices are plain ``numpy`` arrays.  A :class:`GroupFrame` says how to read
chamber coordinates off a matrix: ``GL``/``SL`` frames use sorted
log-singular-values (Cartan) or log-eigenvalue-moduli (Jordan); ``PRODUCT``
frames treat a block-diagonal matrix as an element of SL2 x ... x SL2 and
keep one coordinate per block (half the translation length).
"""
from dataclasses import dataclass, field
from itertools import combinations
import math

import numpy as np

from .errors import (DimensionMismatch, NumericalFailure, SingularMatrix,
                     UnsupportedRep, ValidationError)

CARTAN = "CARTAN"
JORDAN = "JORDAN"
WALL_TOL = 1e-12


@dataclass(frozen=True)
class GroupFrame:
    kind: str
    dim: int
    nblocks: int = 0
    det_coordinates: bool = False

    @classmethod
    def GL(cls, d, det_coordinates=False):
        return cls("GL", d, 0, det_coordinates)

    @classmethod
    def SL(cls, d):
        return cls("SL", d)

    @classmethod
    def product(cls, nblocks=2):
        return cls("PRODUCT", 2 * nblocks, nblocks)

    @property
    def chamber_dim(self):
        return self.nblocks if self.kind == "PRODUCT" else self.dim

    @property
    def is_block2(self):
        """True when every element splits into 2x2 diagonal blocks."""
        return self.kind == "PRODUCT" or self.dim == 2

    def blocks(self, g):
        g = np.asarray(g)
        if self.kind == "PRODUCT":
            return [g[2 * i:2 * i + 2, 2 * i:2 * i + 2] for i in range(self.nblocks)]
        return [g]

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "nblocks": self.nblocks,
                "det_coordinates": self.det_coordinates}


@dataclass
class ChamberVector:
    coords: np.ndarray
    frame: GroupFrame
    kind: str

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)

    def on_wall(self, tol=WALL_TOL):
        c = self.coords
        if self.frame.kind == "PRODUCT":
            return bool(np.any(np.abs(c) <= tol))
        return bool(np.any(np.abs(np.diff(c)) <= tol))


@dataclass
class ProjectivePoint:
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        self.vector = v / np.linalg.norm(v)

    @property
    def dim(self):
        return self.vector.shape[0]


@dataclass
class ProjectiveHyperplane:
    """Hyperplane of P(R^d) stored through its unit normal."""
    normal: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.normal, dtype=float)
        self.normal = v / np.linalg.norm(v)

    @property
    def dim(self):
        return self.normal.shape[0]

    @classmethod
    def spanned_by(cls, line):
        """The hyperplane of P(R^2) equal to the line through ``line``."""
        v = np.asarray(line, dtype=float)
        if v.shape != (2,):
            raise DimensionMismatch("spanned_by is only defined in dimension 2")
        return cls(np.array([-v[1], v[0]]))


def default_frame(g):
    return GroupFrame.GL(np.asarray(g).shape[0])


def check_matrix(g, strict=True):
    """Validate a square finite matrix; ``strict`` also applies the
    singularity threshold |det| > eps * scale**d.

    Products of long words have |det| far below that threshold relative to
    their entries even when the determinant is exactly 1, so analyses of
    powers pass ``strict=False``.
    """
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("matrix has non-finite entries")
    if not strict:
        if np.linalg.det(g) == 0:
            raise SingularMatrix("determinant is zero")
        return g
    d = g.shape[0]
    scale = max(np.abs(g).max(), 1e-300)
    det = np.linalg.det(g)
    if not abs(det) > np.finfo(float).eps * scale ** d:
        raise SingularMatrix(f"|det| = {abs(det):.3g} below threshold")
    return g


def check_square(g):
    """Shape and finiteness only (for renormalized products)."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("matrix has non-finite entries")
    return g


def check_element(g, frame, strict=True):
    """check_matrix applied blockwise for PRODUCT frames."""
    g = check_matrix(g, strict=strict and frame.kind != "PRODUCT")
    if frame.kind == "PRODUCT":
        if g.shape[0] != frame.dim:
            raise DimensionMismatch(f"expected {frame.dim}x{frame.dim}")
        for blk in frame.blocks(g):
            check_matrix(blk, strict)
    return g


def _sorted_desc(v):
    return -np.sort(-np.asarray(v, dtype=float))


def _log_sv(g):
    try:
        s = np.linalg.svd(g, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return np.log(s)


def _log_eig2(g):
    # closed form from trace and determinant
    t = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if np.iscomplexobj(g):
        disc = np.sqrt(t * t - 4 * det)
        l1, l2 = (t + disc) / 2, (t - disc) / 2
        return _sorted_desc([math.log(abs(l1)), math.log(abs(l2))])
    disc = (g[0, 0] - g[1, 1]) ** 2 + 4.0 * g[0, 1] * g[1, 0]
    ld = math.log(abs(det))
    if disc < 0:
        return np.array([0.5 * ld, 0.5 * ld])
    top = math.log(0.5 * (abs(t) + math.sqrt(disc)))
    return np.array([top, ld - top])


def _log_eig(g):
    if g.shape[0] == 2:
        return _log_eig2(g)
    try:
        ev = np.linalg.eigvals(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return _sorted_desc(np.log(np.abs(ev)))


def _project_frame(vals_by_block, frame):
    if frame.kind == "PRODUCT":
        return np.array([v[0] for v in vals_by_block])
    v = vals_by_block[0]
    if frame.kind == "SL":
        v = v - v.mean()
    return v


def cartan(g, frame=None):
    """Cartan projection: sorted log singular values (per-block top value
    for PRODUCT frames)."""
    frame = frame or default_frame(g)
    g = check_element(g, frame)
    vals = [_log_sv(b) for b in frame.blocks(g)]
    return ChamberVector(_project_frame(vals, frame), frame, CARTAN)


def jordan(g, frame=None):
    """Jordan projection: sorted log moduli of eigenvalues."""
    frame = frame or default_frame(g)
    g = check_element(g, frame)
    vals = [_log_eig(b) for b in frame.blocks(g)]
    return ChamberVector(_project_frame(vals, frame), frame, JORDAN)


def spectral_radius_log(g):
    return float(_log_eig(np.asarray(g))[0])


def _as_vec(x):
    if isinstance(x, ProjectivePoint):
        return x.vector
    v = np.asarray(x, dtype=float)
    return v / np.linalg.norm(v)


def proj_distance(x, y):
    """Standard distance on P(V): ``|x ^ y| / (|x||y|)``; if ``y`` is a
    :class:`ProjectiveHyperplane`, the distance from ``x`` to it."""
    u = _as_vec(x)
    if isinstance(y, ProjectiveHyperplane):
        return float(min(1.0, abs(u @ y.normal)))
    v = _as_vec(y)
    if u.shape != v.shape:
        raise DimensionMismatch("points live in different dimensions")
    w = np.outer(u, v)
    w = w - w.T
    # ||u ^ v||^2 = sum_{i<j} (u_i v_j - u_j v_i)^2
    return float(min(1.0, math.sqrt(0.5 * (w * w).sum())))


def wedge_power(g, k):
    """k-th compound matrix (k x k minors), rows/columns indexed by
    lexicographically ordered k-subsets."""
    g = np.asarray(g)
    d = g.shape[0]
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    subsets = list(combinations(range(d), k))
    out = np.empty((len(subsets), len(subsets)), dtype=g.dtype)
    for i, rows in enumerate(subsets):
        sub = g[list(rows)]
        for j, cols in enumerate(subsets):
            out[i, j] = np.linalg.det(sub[:, list(cols)])
    return out


def kronecker(g, h):
    return np.kron(np.asarray(g), np.asarray(h))


def fold(x, rep="leftright"):
    """Chamber coordinates of the tensor product of two SL2 factors.

    ``x = (u, v)`` are per-factor half translation lengths; the
    left-right multiplication representation of SL2 x SL2 on M_2(R) has
    weights ``±u ± v``.
    """
    if rep != "leftright":
        raise UnsupportedRep(rep)
    c = x.coords if isinstance(x, ChamberVector) else np.asarray(x, dtype=float)
    if c.shape != (2,) or np.any(c < -WALL_TOL):
        raise UnsupportedRep("fold expects a PRODUCT(2) chamber vector")
    u, v = c
    s, t = u + v, abs(u - v)
    return ChamberVector(np.array([s, t, -t, -s]), GroupFrame.GL(4), getattr(x, "kind", CARTAN))


def det_chart(x):
    """(log lambda_1(g/sqrt|det g|), log|det g|) from GL2 chamber coordinates."""
    c = x.coords if isinstance(x, ChamberVector) else np.asarray(x, dtype=float)
    if c.shape[-1] != 2:
        raise DimensionMismatch("det_chart needs GL(2) coordinates")
    return (c[..., 0] - c[..., 1]) / 2.0, c[..., 0] + c[..., 1]


def block_diag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def scaled_word_product(mats, word):
    """Product of ``mats[w_1] @ ... @ mats[w_n]`` renormalized by powers of
    two; returns ``(M, log_scale)``."""
    d = np.asarray(mats[0]).shape[0]
    M = np.eye(d)
    L = 0
    for i in word:
        M = M @ mats[int(i)]
        e = int(np.frexp(np.abs(M).max())[1])
        M = np.ldexp(M, -e)
        L += e
    return M, L * math.log(2.0)


def realify(g):
    """2d x 2d real embedding of a complex d x d matrix."""
    g = np.asarray(g, dtype=complex)
    return np.block([[g.real, -g.imag], [g.imag, g.real]])


# ---------------------------------------------------------------------------
# projections of chamber coordinates to the plane
# ---------------------------------------------------------------------------

def project(coords, frame, projection="native"):
    """Map an ``(N, chamber_dim)`` array to planar ``(N, 2)`` coordinates."""
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    if projection == "det_chart":
        if not (frame.kind in ("GL", "SL") and frame.dim == 2):
            raise UnsupportedRep("det_chart needs a GL(2) frame")
        x, y = det_chart(c)
        return np.column_stack([x, y])
    if projection == "native":
        if c.shape[1] != 2:
            raise UnsupportedRep("native projection needs 2 chamber coordinates")
        return c.copy()
    i, j = projection
    return c[:, [i, j]]


def weyl_orbit(points, frame, projection="native"):
    """All images of planar points under the Weyl action (as it acts in the
    chosen planar coordinates)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if frame.kind == "PRODUCT" and projection == "native":
        signs = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
        return np.vstack([p * np.array(s) for s in signs])
    if frame.dim == 2 and projection == "det_chart":
        return np.vstack([p, p * np.array([-1.0, 1.0])])
    if frame.dim == 2 and projection == "native":
        return np.vstack([p, p[:, ::-1]])
    raise UnsupportedRep(f"no planar Weyl action for {frame.kind}({frame.dim}) / {projection}")


def dominant_directions(frame, projection="native", count=16):
    """Unit directions theta along which <theta, kappa> is subadditive."""
    if frame.kind == "PRODUCT" and projection == "native":
        angles = np.linspace(0.0, np.pi / 2, count)
    elif frame.dim == 2 and projection == "det_chart":
        angles = np.linspace(-np.pi / 2, np.pi / 2, count)
    elif frame.dim == 2 and projection == "native":
        # theta_1 >= theta_2
        angles = np.linspace(-3 * np.pi / 4, np.pi / 4, count)
    else:
        return np.empty((0, 2))
    return np.column_stack([np.cos(angles), np.sin(angles)])


def pack_blocks(S, frame):
    """Kernel input for 2x2-block frames: ``(gens, log|det|, sign det)``."""
    S = [check_element(g, frame, strict=False) for g in S]
    blocks = np.array([[np.asarray(b, dtype=float) for b in frame.blocks(g)] for g in S])
    det = blocks[..., 0, 0] * blocks[..., 1, 1] - blocks[..., 0, 1] * blocks[..., 1, 0]
    return np.ascontiguousarray(blocks), np.log(np.abs(det)), np.sign(det)


def values_to_chamber(vals, frame):
    """Kernel block output ``(N, B, 2)`` -> chamber coordinates ``(N, c)``."""
    if frame.kind == "PRODUCT":
        return vals[:, :, 0].copy()
    v = vals[:, 0, :].copy() if vals.ndim == 3 else vals.copy()
    if frame.kind == "SL":
        v -= v.mean(axis=1, keepdims=True)
    return v
