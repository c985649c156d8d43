"""Random matrix products: Lyapunov vectors, CLT covariance, concatenation
processes and realization of interior points of the joint spectrum.

Randomness comes from the Philox-4x64 counter-based generator.  Trajectory
``t`` of a run seeded with ``seed`` draws from ``Philox(key=[seed, t])``, so
any single trajectory can be regenerated in isolation and the stream does
not depend on how trajectories are scheduled.  A letter is drawn from one
uniform double ``u`` as ``searchsorted(cumsum(weights), u, side="right")``.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import nnls

from . import _kernels as K
from .errors import (DimensionMismatch, NoSchottkyWitnesses, NotDominated,
                     NotInterior, Unachieved)
from .geometry import Hull2D
from .matgroup import (ChamberVector, GroupFrame, CARTAN, project,
                       scaled_word_product)
from .proximal import domination_rate, schottky_check
from .spectrum import Generators, estimate_joint_spectrum

Z95 = 1.96
PILOT_FACTOR = 4
PILOT_TRIALS = 10


@dataclass
class IIDSpec:
    generators: list
    weights: np.ndarray = None
    frame: GroupFrame = None

    def __post_init__(self):
        m = len(self.generators)
        w = np.full(m, 1.0 / m) if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (m,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be a probability vector")
        self.weights = w
        if self.frame is None:
            self.frame = GroupFrame.GL(np.asarray(self.generators[0]).shape[0])


@dataclass
class ConcatenationProcess:
    code_words: list
    bernoulli_weights: np.ndarray
    frame: GroupFrame
    generators: list = field(default=None, repr=False)

    def __post_init__(self):
        self.code_words = [np.asarray(c, np.int64) for c in self.code_words]
        if any(len(c) == 0 for c in self.code_words):
            raise ValueError("code words must be non-empty")
        s = np.asarray(self.bernoulli_weights, float)
        if np.any(s < 0) or abs(s.sum() - 1) > 1e-12:
            raise ValueError("block weights must lie on the simplex")
        self.bernoulli_weights = s

    @property
    def lengths(self):
        return np.array([len(c) for c in self.code_words])

    def predicted(self, generators=None):
        """sum s_i lambda(C_i) / sum s_i n_i from the Jordan vectors of the
        code words."""
        G = Generators(generators or self.generators, self.frame)
        lam = _jordan_of_words(G, self.code_words)
        s = self.bernoulli_weights
        return (s @ lam) / float(s @ self.lengths)


@dataclass
class LyapunovEstimate:
    vector: ChamberVector
    ci_halfwidth: np.ndarray
    n_steps: int
    n_trajectories: int
    seed: int
    samples: np.ndarray = field(default=None, repr=False)

    def planar(self, projection="native"):
        """(center, ci halfwidth) in planar coordinates."""
        P = project(self.samples, self.vector.frame, projection)
        return P.mean(axis=0), _ci(P)


def _ci(X):
    if len(X) < 2:
        return np.zeros(X.shape[1])
    return Z95 * X.std(axis=0, ddof=1) / math.sqrt(len(X))


def _stream(seed, t):
    return np.random.Generator(np.random.Philox(key=[int(seed), int(t)]))


def sample_letters(weights, n, seed, t):
    cdf = np.cumsum(weights)
    u = _stream(seed, t).random(n)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(weights) - 1)


def _cartan_of_words(G, W):
    """Unnormalized Cartan chamber coordinates of each (padded) word."""
    if G.block2:
        return G.words(W, False)
    vals = K.qr_lyapunov(G.gens, W, 8)
    if G.frame.kind == "SL":
        vals = vals - vals.mean(axis=1, keepdims=True)
    return vals


def _jordan_of_words(G, words):
    L = max(len(w) for w in words)
    W = np.full((len(words), L), -1, np.int64)
    for row, w in zip(W, words):
        row[:len(w)] = w
    return G.words(W, True)


def _estimate(samples, frame, n_steps, seed):
    mean = samples.mean(axis=0)
    return LyapunovEstimate(ChamberVector(mean, frame, CARTAN), _ci(samples), n_steps,
                            len(samples), seed, samples)


def _iid_samples(spec, n_steps, trials, seed, offset=0):
    G = Generators(spec.generators, spec.frame)
    W = np.empty((trials, n_steps), np.int64)
    for t in range(trials):
        W[t] = sample_letters(spec.weights, n_steps, seed, offset + t)
    return _cartan_of_words(G, W) / n_steps


def lyapunov_iid(spec, n_steps, trials, seed=0):
    """Mean over trajectories of kappa(g_1 ... g_n)/n with 95% normal CIs."""
    if n_steps < 1 or trials < 2:
        raise ValueError("need n_steps >= 1 and trials >= 2")
    return _estimate(_iid_samples(spec, n_steps, trials, seed), spec.frame, n_steps, seed)


@dataclass
class CLTResult:
    covariance: np.ndarray
    min_eigenvalue: float
    rank_ok: bool
    lambda_hat: np.ndarray
    samples: np.ndarray = field(repr=False)

    def variance_with_se(self, i=0):
        """Sample variance of coordinate i and its standard error."""
        z = self.samples[:, i]
        c = (z - z.mean()) ** 2
        return float(c.sum() / (len(z) - 1)), float(c.std(ddof=1) / math.sqrt(len(z)))


def _trace_zero_basis(frame):
    c = frame.chamber_dim
    if frame.kind == "PRODUCT":
        return np.eye(c)
    # orthonormal basis of {x : sum x = 0}
    Q, _ = np.linalg.qr(np.eye(c) - 1.0 / c)
    return Q[:, :c - 1]


def clt_covariance(spec, n_steps, trials, seed=0, threshold=1e-3):
    """Covariance of (kappa(Y_n) - n lambda_hat)/sqrt(n).

    lambda_hat comes from a pilot run with 4x the steps and a tenth of the
    trials, drawn from trajectory streams after the main ones.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    pilot = _iid_samples(spec, PILOT_FACTOR * n_steps, max(2, trials // PILOT_TRIALS),
                         seed, offset=trials)
    lam = pilot.mean(axis=0)
    X = _iid_samples(spec, n_steps, trials, seed)
    Z = (X - lam) * math.sqrt(n_steps)
    C = np.atleast_2d(np.cov(Z.T))
    B = _trace_zero_basis(spec.frame)
    ev = np.linalg.eigvalsh(B.T @ C @ B) if B.shape[1] else np.zeros(0)
    mn = float(ev.min()) if len(ev) else 0.0
    return CLTResult(C, mn, mn > threshold, lam, Z)


def lyapunov_process(proc, n_blocks, trials, seed=0, generators=None):
    """Lyapunov estimate for i.i.d. concatenations of code words."""
    G = Generators(generators or proc.generators, proc.frame)
    lengths = proc.lengths
    blocks = [sample_letters(proc.bernoulli_weights, n_blocks, seed, t) for t in range(trials)]
    total = np.array([lengths[b].sum() for b in blocks])
    W = np.full((trials, int(total.max())), -1, np.int64)
    for row, b in zip(W, blocks):
        row[:lengths[b].sum()] = np.concatenate([proc.code_words[i] for i in b])
    X = _cartan_of_words(G, W) / total[:, None]
    est = _estimate(X, proc.frame, int(total.mean()), seed)
    return est


def simplex_weights(points, target, penalty=1e6):
    """Convex weights u >= 0, sum 1, minimizing ||sum u_i p_i - target||."""
    P = np.asarray(points, float)
    A = np.vstack([P.T, penalty * np.ones(len(P))])
    y = np.concatenate([np.asarray(target, float), [penalty]])
    u, _ = nnls(A, y)
    u /= u.sum()
    return u, float(np.abs(u @ P - target).max())


def _certify(G, frame, code_words, grid_size=None):
    """Per-block Schottky certificate for the code-word products."""
    mats = G.matrices
    prods = [scaled_word_product(mats, w)[0] for w in code_words]
    out = []
    for j in range(max(frame.nblocks, 1)):
        E = [frame.blocks(M)[j] for M in prods] if frame.kind == "PRODUCT" else prods
        try:
            rep = schottky_check(E, grid_size)
        except Exception:
            return None
        r, eps = rep.measured()
        if not (eps < r and rep.verdict_for(r, eps)):
            return None
        out.append((r, eps))
    return out


@dataclass
class Realization:
    process: ConcatenationProcess
    achieved: LyapunovEstimate
    target: np.ndarray
    predicted: np.ndarray
    weight_residual: float
    certificates: list
    deviation: float


def realize_lyapunov(S, target, block_length_min=8, tol=0.05, seed=0, frame=None,
                     level=8, projection="native", n_blocks=400, trials=20, budget=10 ** 8):
    """Concatenation process whose Lyapunov vector approximates ``target``.

    Code words are powers of the provenance words at the vertices of the
    level-``level`` Jordan hull, long enough to be a Schottky family in each
    factor (up to 4 doublings); the block weights solve a simplex-constrained
    least-squares problem and the result is checked by simulation.
    """
    G = Generators(S, frame)
    frame = G.frame
    target = np.asarray(target, float)
    est = estimate_joint_spectrum(G, frame, [level], budget, projection, cartan=False)
    hull = est.inner
    cloud = est.jordan_clouds[level]
    if hull.depth(target)[0] < tol:
        raise NotInterior("target is not inside the inner hull with the requested margin")
    words = [np.asarray(w, np.int64) for w in cloud.vertex_words(hull)]
    reps = max(1, math.ceil(block_length_min / level))
    cert = None
    for _ in range(5):
        code = [np.tile(w, reps) for w in words]
        cert = _certify(G, frame, code)
        if cert is not None:
            break
        reps *= 2
    if cert is None:
        raise NoSchottkyWitnesses("vertex words did not certify after 4 doublings")
    lam = _jordan_of_words(G, code)
    n_i = np.array([len(c) for c in code], float)
    pts = project(lam / n_i[:, None], frame, projection)
    u, resid = simplex_weights(pts, target)
    s = u / n_i
    s /= s.sum()
    proc = ConcatenationProcess(code, s, frame, G.matrices)
    achieved = lyapunov_process(proc, n_blocks, trials, seed)
    center, ci = achieved.planar(projection)
    dev = float(np.abs(center - target).max())
    if dev > tol + 3 * float(ci.max()):
        raise Unachieved(f"achieved vector is {dev:.3g} from the target")
    pred = project(proc.predicted()[None], frame, projection)[0]
    return Realization(proc, achieved, target, pred, resid, cert, dev)


@dataclass
class LyapunovCurve:
    p: np.ndarray
    phi: np.ndarray
    ci: np.ndarray

    def to_dict(self):
        return {"p": self.p.tolist(), "phi": self.phi.tolist(), "ci": self.ci.tolist()}


def iid_curve_two_gen(a, b, p_grid, n_steps, trials, seed=0):
    """Top Lyapunov exponent of p delta_a + (1 - p) delta_b along p_grid."""
    ps = np.asarray(p_grid, float)
    if np.any((ps <= 0) | (ps >= 1)):
        raise ValueError("p must lie in (0, 1)")
    phi, ci = [], []
    for p in ps:
        e = lyapunov_iid(IIDSpec([a, b], [p, 1 - p]), n_steps, trials, seed)
        phi.append(e.vector.coords[0])
        ci.append(e.ci_halfwidth[0])
    return LyapunovCurve(ps, np.array(phi), np.array(ci))


def interior_test(est, inner_hull, margin=0.0, projection="native"):
    """Whether the estimate sits inside the hull, away from its (relative)
    boundary by at least max(margin, 3 * CI)."""
    if not isinstance(inner_hull, Hull2D):
        raise DimensionMismatch("inner_hull must be a planar hull")
    if isinstance(est, LyapunovEstimate):
        center, ci = est.planar(projection)
    else:
        center, ci = np.asarray(est[0], float), np.asarray(est[1], float)
    if center.shape != (2,):
        raise DimensionMismatch("estimate is not planar")
    need = max(margin, 3 * float(np.max(ci)))
    return bool(inner_hull.depth(center)[0] >= need)


@dataclass
class ContinuityResult:
    shift: np.ndarray
    ci: np.ndarray
    ci_perturbed: np.ndarray
    perturbed: list = field(repr=False)


def perturb(S, delta, seed=0, pattern="full", scale="absolute"):
    """Entrywise offsets of magnitude delta with random signs.

    With ``scale="relative"`` each offset is multiplied by the size of the
    entry it perturbs, so zero entries stay zero.
    """
    if scale not in ("absolute", "relative"):
        raise ValueError(scale)
    rng = np.random.Generator(np.random.Philox(key=[int(seed), 0]))
    out = []
    for g in S:
        g = np.asarray(g, float)
        E = rng.choice([-1.0, 1.0], size=g.shape)
        if pattern == "diagonal":
            E = np.diag(np.diag(E))
        elif pattern != "full":
            raise ValueError(pattern)
        if scale == "relative":
            E = E * np.abs(g)
        out.append(g + delta * E)
    return out


def continuity_probe(S, delta, n_steps, trials, seed=0, weights=None, pattern="full",
                     n_max=6, scale="absolute"):
    """|lambda(S) - lambda(S')| per coordinate for a delta-perturbation S' of S,
    with common random numbers on both sides."""
    if not domination_rate(S, 1, n_max).verdict:
        raise NotDominated("the generating set is not 1-dominated")
    Sp = perturb(S, delta, seed, pattern, scale)
    e0 = lyapunov_iid(IIDSpec(list(S), weights), n_steps, trials, seed)
    e1 = lyapunov_iid(IIDSpec(Sp, weights), n_steps, trials, seed)
    shift = np.abs(e0.vector.coords - e1.vector.coords)
    return ContinuityResult(shift, e0.ci_halfwidth, e1.ci_halfwidth, Sp)
