"""SL2(R) as isometries of the hyperbolic plane, and the balanced-word
machinery for ratio-constrained spectral radii.

Boundary points live on the unit circle of the Poincare disk and are stored
as angles.  A vector ``(x, y)`` of R^2 is the boundary point ``x/y`` of the
upper half plane, which the Cayley map sends to angle ``-2 atan2(y, x)``.
Words over ``{a, b}`` are bit arrays with 0 for ``a`` and 1 for ``b``; the
word ``w_1 ... w_n`` denotes the product ``g_{w_1} @ ... @ g_{w_n}``.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math
import warnings

import numpy as np

from . import _kernels as K
from .errors import (BudgetExceeded, NotBalancedRatio, NotHyperbolic,
                     NotSameDirection, NotUnimodular)
from .matgroup import GroupFrame
from .spectrum import (JORDAN, NECKLACE, Generators, SpectrumCloud,
                       enumerate_level)

HYPERBOLIC = "HYPERBOLIC"
PARABOLIC = "PARABOLIC"
ELLIPTIC = "ELLIPTIC"
EXACT_ENUM = "EXACT_ENUM"
STURMIAN = "STURMIAN"
TRACE_TOL = 1e-10


def _det_tol(g):
    # rounding in a product of SL2 factors and in its determinant both scale
    # with the size of the two diagonal terms of the determinant
    mag = abs(g[0, 0] * g[1, 1]) + abs(g[0, 1] * g[1, 0])
    return max(1e-9, 64 * np.finfo(float).eps * float(mag))


@dataclass
class Isometry2:
    matrix: np.ndarray
    cls: str
    tau: float
    fixed_points: tuple = ()

    @property
    def log_lambda(self):
        return self.tau / 2


def _boundary_angle(v):
    return float((-2.0 * math.atan2(v[1], v[0])) % (2 * math.pi))


def _eigvec(g, lam):
    p, q, r, s = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    u = np.array([q, lam - p])
    w = np.array([lam - s, r])
    return u if np.abs(u).max() >= np.abs(w).max() else w


def classify(g):
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2):
        raise NotUnimodular("expected a 2x2 matrix")
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if abs(det - 1.0) > _det_tol(g):
        raise NotUnimodular(f"det = {det!r}")
    t = g[0, 0] + g[1, 1]
    at = abs(t)
    if at > 2 + TRACE_TOL:
        lam = 0.5 * (at + math.sqrt((at - 2) * (at + 2)))
        tau = 2 * math.log(lam)
        sign = 1.0 if t > 0 else -1.0
        plus = _eigvec(g, sign * lam)
        minus = _eigvec(g, sign / lam)
        return Isometry2(g, HYPERBOLIC, tau, (_boundary_angle(plus), _boundary_angle(minus)))
    if at >= 2 - TRACE_TOL:
        return Isometry2(g, PARABOLIC, 0.0)
    return Isometry2(g, ELLIPTIC, 0.0)


@dataclass
class AxisPair:
    a: Isometry2
    b: Isometry2
    axis_distance: float
    disjoint: bool
    same_direction: bool


def _as_iso(g):
    return g if isinstance(g, Isometry2) else classify(g)


def _cyclic_labels(points):
    order = sorted(points, key=lambda kv: kv[1])
    labels = [k for k, _ in order]
    i = labels.index("a-")
    return labels[i:] + labels[:i]


def axes_geometry(a, b):
    a, b = _as_iso(a), _as_iso(b)
    if a.cls != HYPERBOLIC or b.cls != HYPERBOLIC:
        raise NotHyperbolic("both isometries must be hyperbolic")
    ap, am = a.fixed_points
    bp, bm = b.fixed_points
    z = {k: complex(math.cos(t), math.sin(t)) for k, t in
         (("a+", ap), ("a-", am), ("b+", bp), ("b-", bm))}

    def close(u, v):
        return abs(z[u] - z[v]) < 1e-12

    if (close("a+", "b+") and close("a-", "b-")) or (close("a+", "b-") and close("a-", "b+")):
        return AxisPair(a, b, 0.0, False, False)
    X = ((z["a+"] - z["b+"]) * (z["a-"] - z["b-"])
         / ((z["a+"] - z["b-"]) * (z["a-"] - z["b+"]))).real
    if X > 1:
        X = 1 / X
    if X <= 0:
        return AxisPair(a, b, 0.0, False, False)
    # cosh d = (1 + X)/(1 - X), i.e. X = tanh^2(d/2)
    d = 2 * math.atanh(math.sqrt(X))
    lab = _cyclic_labels([("a-", am), ("a+", ap), ("b+", bp), ("b-", bm)])
    same = lab in (["a-", "a+", "b+", "b-"], ["a-", "b-", "b+", "a+"])
    return AxisPair(a, b, d, True, same)


def product_length_formula(tau_a, tau_b, d):
    """tau_ab from cosh(tau_ab/2) = cosh d sinh(tau_a/2) sinh(tau_b/2)
    + cosh(tau_a/2) cosh(tau_b/2), evaluated in log space."""
    ha, hb = tau_a / 2, tau_b / 2

    def lcosh(x):
        return x + math.log1p(math.exp(-2 * x)) - math.log(2)

    def lsinh(x):
        return x + math.log1p(-math.exp(-2 * x)) - math.log(2)

    ly = np.logaddexp(lcosh(d) + lsinh(ha) + lsinh(hb), lcosh(ha) + lcosh(hb))
    return 2 * float(ly + math.log1p(math.sqrt(max(0.0, 1 - math.exp(-2 * ly)))))


def paper_pair(s=10.0):
    """The pair a = [[2, 1], [3, 2]], b = [[2e^-s, 3e^s], [e^-s, 2e^s]]."""
    if s < 10:
        warnings.warn("the separation argument needs s >= 10", stacklevel=2)
    a = np.array([[2.0, 1.0], [3.0, 2.0]])
    es, em = math.exp(s), math.exp(-s)
    b = np.array([[2 * em, 3 * es], [em, 2 * es]])
    return a, b


def hyperbolic_from_axis(x_plus, x_minus, tau):
    """SL2 element translating by tau from boundary point x_minus to x_plus
    (points of R, upper half plane model)."""
    P = np.array([[x_plus, x_minus], [1.0, 1.0]])
    lam = math.exp(tau / 2)
    return P @ np.diag([lam, 1 / lam]) @ np.linalg.inv(P)


# ---------------------------------------------------------------------------
# balanced words
# ---------------------------------------------------------------------------

def _frac(alpha):
    if isinstance(alpha, Fraction):
        return alpha
    return Fraction(alpha).limit_denominator(10 ** 9)


@dataclass
class SturmianWord:
    alpha: Fraction
    phase: Fraction
    n: int
    bits: np.ndarray

    def balanced(self):
        c = np.concatenate([[0], np.cumsum(self.bits)])
        return all(abs(int(c[k]) - k * self.alpha) < 1 for k in range(self.n + 1))

    def __str__(self):
        return "".join("ab"[int(x)] for x in self.bits)


def mechanical_word(alpha, phase=0, n=1):
    """bit_k = floor((k+1) alpha + phase) - floor(k alpha + phase), exact."""
    al, ph = _frac(alpha), _frac(phase)
    if not 0 <= al <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    fl = [math.floor(k * al + ph) for k in range(n + 1)]
    bits = np.array([fl[k + 1] - fl[k] for k in range(n)], np.uint8)
    return SturmianWord(al, ph, n, bits)


def check_pair(a, b):
    """Raise unless a, b are hyperbolic with disjoint same-direction axes."""
    ax = axes_geometry(a, b)
    if not (ax.disjoint and ax.same_direction):
        raise NotSameDirection("axes must be disjoint and in the same direction")
    return ax


def _word_log_radius(G, words):
    return G.words(np.asarray(words, np.int64), True)[:, 0]


def ratio_I(a, b, alpha, n, method=EXACT_ENUM, budget=10 ** 8, _G=None, _checked=False):
    """(1/n) max log lambda_1 over words of length n with n*alpha letters b
    (EXACT_ENUM), or the value on the phase-0 mechanical word (STURMIAN)."""
    if not _checked:
        check_pair(a, b)
    G = _G or Generators([a, b])
    if method == STURMIAN:
        w = mechanical_word(alpha, 0, n).bits
        return float(_word_log_radius(G, w[None])[0]) / n
    if method != EXACT_ENUM:
        raise ValueError(method)
    k = round(n * float(alpha))
    if abs(n * float(alpha) - k) > 1e-9:
        raise NotBalancedRatio(f"n * alpha = {n * float(alpha)} is not an integer")
    if math.comb(n, k) // max(n, 1) * n > budget:
        raise BudgetExceeded(f"C({n},{k}) words exceed the budget")
    W = K.fixed_density_necklaces(n, k)
    return float(_word_log_radius(G, W).max()) / n


@dataclass
class RatioCurve:
    alpha_grid: np.ndarray
    values: np.ndarray
    n: int
    methods: list
    monotone_gap_min: float
    concavity_violation_max: float
    kink_slope_gaps: dict = field(default_factory=dict)

    def to_dict(self):
        return {"n": self.n, "alpha": self.alpha_grid.tolist(), "I": self.values.tolist(),
                "methods": self.methods, "monotone_gap_min": self.monotone_gap_min,
                "concavity_violation_max": self.concavity_violation_max,
                "kink_slope_gaps": {str(k): v for k, v in self.kink_slope_gaps.items()}}


def _exact(n, alpha):
    return abs(n * alpha - round(n * alpha)) <= 1e-9


def ratio_curve(a, b, alpha_grid, n, rationals_to_probe=(), h=None, budget=10 ** 8):
    """Sampled I_n with monotonicity, concavity and kink diagnostics; the
    kink probe uses offset ``h`` (default 1/n)."""
    check_pair(a, b)
    G = Generators([a, b])
    grid = np.asarray(sorted(float(x) for x in alpha_grid))
    methods = [EXACT_ENUM if _exact(n, x) else STURMIAN for x in grid]
    vals = np.array([ratio_I(a, b, x, n, m, budget, G, True) for x, m in zip(grid, methods)])
    dq = np.diff(vals) / np.diff(grid)
    mono = float(dq.min()) if len(dq) else math.nan
    conc = 0.0
    for i in range(1, len(grid) - 1):
        t = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1])
        chord = (1 - t) * vals[i - 1] + t * vals[i + 1]
        conc = max(conc, float(chord - vals[i]))
    h = h or 1.0 / n
    kinks = {}
    for q in rationals_to_probe:
        q = float(q)
        pts = [q - h, q, q + h]
        I = [ratio_I(a, b, x, n, EXACT_ENUM if _exact(n, x) else STURMIAN, budget, G, True)
             for x in pts]
        kinks[q] = (I[1] - I[0]) / h - (I[2] - I[1]) / h
    return RatioCurve(grid, vals, n, methods, mono, conc, kinks)


@dataclass
class NonpolyBoundary:
    n: int
    s: float
    alphas: np.ndarray
    f: np.ndarray
    I: np.ndarray
    max_abs_diff: float
    rect_violation: float
    cloud: SpectrumCloud
    hull: object

    def to_dict(self):
        return {"n": self.n, "s": self.s, "alpha": self.alphas.tolist(), "f": self.f.tolist(),
                "I": self.I.tolist(), "max_abs_diff": self.max_abs_diff,
                "rect_violation": self.rect_violation}


def nonpoly_set(s=10.0):
    """T = {(1, a), (a, a), (b, b), (b, a)} as block-diagonal 4x4 matrices."""
    a, b = paper_pair(s)
    I2 = np.eye(2)
    out = []
    for g, h in ((I2, a), (a, a), (b, b), (b, a)):
        M = np.zeros((4, 4))
        M[:2, :2], M[2:, 2:] = g, h
        out.append(M)
    return out


def nonpoly_boundary(n=12, s=10.0, budget=10 ** 8):
    """Upper boundary of the level-n Jordan hull of T along the columns
    x = (k/n) log lambda_1(b), next to the standalone I_n(k/n)."""
    a, b = paper_pair(s)
    check_pair(a, b)
    T = nonpoly_set(s)
    cloud = enumerate_level(T, n, JORDAN, NECKLACE, "native", frame=GroupFrame.product(2),
                            budget=budget)
    xy = cloud.xy
    la, lb = classify(a).log_lambda, classify(b).log_lambda
    G = Generators([a, b])
    alphas = np.arange(n + 1) / n
    f = np.empty(n + 1)
    I = np.empty(n + 1)
    for k, al in enumerate(alphas):
        col = np.abs(xy[:, 0] - al * lb) <= 1e-9
        f[k] = xy[col, 1].max() if col.any() else -math.inf
        I[k] = ratio_I(a, b, Fraction(k, n), n, EXACT_ENUM, budget, G, True)
    viol = max(0.0, float(-xy[:, 0].min()), float((xy[:, 0] - lb).max()),
               float((la - xy[:, 1]).max()))
    return NonpolyBoundary(n, s, alphas, f, I, float(np.abs(f - I).max()), viol, cloud,
                           cloud.hull())
