"""Inner loops: word-product enumeration, explicit word products, QR Lyapunov
accumulation and necklace generation.

Each kernel has two implementations with the same contract:

* a numba ``@njit`` loop version (default), and
* a vectorized pure-numpy version.

``JOINTSPEC_NUMBA=0`` in the environment selects the numpy path at import
time; :func:`set_backend` switches at runtime.  If numba is not importable
the numpy path is used silently.

Conventions
-----------
2x2 block kernels take ``gens`` of shape ``(m, B, 2, 2)`` (``m`` letters, ``B``
diagonal 2x2 blocks), plus ``ldet``/``sdet`` of shape ``(m, B)`` holding
``log|det|`` and the sign of the determinant.  The determinant is carried in
log form along the product so that long, nearly rank-one products keep an
exact ``sigma_2 = |det| / sigma_1``.  Partial products are renormalized by
powers of two (exact in binary floating point).

Output values are *unnormalized* sorted logarithms: ``(log s1, log s2)`` per
block for Cartan, ``(log|l1|, log|l2|)`` for Jordan.  Word index order is
lexicographic with the first letter most significant, and the word
``(i1, ..., in)`` maps to the product ``g_i1 @ g_i2 @ ... @ g_in``.
"""
import math
import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_LN2 = math.log(2.0)

_backend = "numba" if HAVE_NUMBA and os.environ.get("JOINTSPEC_NUMBA", "1") != "0" else "numpy"


def backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def _jit(fn):
    if HAVE_NUMBA:
        return njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# 2x2 block helpers (numba)
# ---------------------------------------------------------------------------

def _push2(st, ex, ld, sg, gens, ldet, sdet, k, letter):
    B = st.shape[1]
    for j in range(B):
        a00 = st[k, j, 0, 0]
        a01 = st[k, j, 0, 1]
        a10 = st[k, j, 1, 0]
        a11 = st[k, j, 1, 1]
        g = gens[letter, j]
        c00 = a00 * g[0, 0] + a01 * g[1, 0]
        c01 = a00 * g[0, 1] + a01 * g[1, 1]
        c10 = a10 * g[0, 0] + a11 * g[1, 0]
        c11 = a10 * g[0, 1] + a11 * g[1, 1]
        s = max(abs(c00), abs(c01), abs(c10), abs(c11))
        e = math.frexp(s)[1]
        f = math.ldexp(1.0, -e)
        st[k + 1, j, 0, 0] = c00 * f
        st[k + 1, j, 0, 1] = c01 * f
        st[k + 1, j, 1, 0] = c10 * f
        st[k + 1, j, 1, 1] = c11 * f
        ex[k + 1, j] = ex[k, j] + e
        ld[k + 1, j] = ld[k, j] + ldet[letter, j]
        sg[k + 1, j] = sg[k, j] * sdet[letter, j]


def _feat2(m00, m01, m10, m11, e, ld, sg, jordan, out):
    L = e * _LN2
    dprime = sg * math.exp(ld - 2.0 * L)
    if jordan:
        t = m00 + m11
        # (m00 - m11)^2 + 4 m01 m10 equals t^2 - 4 det without the
        # cancellation near repeated eigenvalues (exact for triangular words)
        disc = (m00 - m11) * (m00 - m11) + 4.0 * m01 * m10
        if disc >= 0.0:
            l1 = 0.5 * (abs(t) + math.sqrt(disc))
            top = math.log(l1) + L
            out[0] = top
            out[1] = ld - top
        else:
            out[0] = 0.5 * ld
            out[1] = 0.5 * ld
    else:
        f2 = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
        D = abs(dprime)
        # f2 - 2|det| as a sum of squares
        if sg >= 0.0:
            lo = (m00 - m11) * (m00 - m11) + (m01 + m10) * (m01 + m10)
        else:
            lo = (m00 + m11) * (m00 + m11) + (m01 - m10) * (m01 - m10)
        s1 = 0.5 * (math.sqrt(f2 + 2.0 * D) + math.sqrt(lo))
        top = math.log(s1) + L
        out[0] = top
        out[1] = ld - top


_push2 = _jit(_push2)
_feat2 = _jit(_feat2)


def _enum2_nb(gens, ldet, sdet, prefix, r, jordan):
    m = gens.shape[0]
    B = gens.shape[1]
    P = prefix.shape[0]
    n = P + r
    total = m ** r
    out = np.empty((total, B, 2))
    st = np.zeros((n + 1, B, 2, 2))
    ex = np.zeros((n + 1, B), np.int64)
    ld = np.zeros((n + 1, B))
    sg = np.ones((n + 1, B))
    for j in range(B):
        st[0, j, 0, 0] = 1.0
        st[0, j, 1, 1] = 1.0
    digits = np.zeros(n, np.int64)
    for k in range(P):
        digits[k] = prefix[k]
    for k in range(n):
        _push2(st, ex, ld, sg, gens, ldet, sdet, k, digits[k])
    for leaf in range(total):
        for j in range(B):
            _feat2(st[n, j, 0, 0], st[n, j, 0, 1], st[n, j, 1, 0], st[n, j, 1, 1],
                   ex[n, j], ld[n, j], sg[n, j], jordan, out[leaf, j])
        k = n - 1
        while k >= P and digits[k] == m - 1:
            digits[k] = 0
            k -= 1
        if k < P:
            break
        digits[k] += 1
        for q in range(k, n):
            _push2(st, ex, ld, sg, gens, ldet, sdet, q, digits[q])
    return out


def _words2_nb(gens, ldet, sdet, words, jordan):
    N, Lw = words.shape
    B = gens.shape[1]
    out = np.empty((N, B, 2))
    st = np.zeros((2, B, 2, 2))
    ex = np.zeros((2, B), np.int64)
    ld = np.zeros((2, B))
    sg = np.ones((2, B))
    for i in range(N):
        for j in range(B):
            st[0, j, 0, 0] = 1.0
            st[0, j, 0, 1] = 0.0
            st[0, j, 1, 0] = 0.0
            st[0, j, 1, 1] = 1.0
            ex[0, j] = 0
            ld[0, j] = 0.0
            sg[0, j] = 1.0
        for k in range(Lw):
            letter = words[i, k]
            if letter < 0:
                continue
            _push2(st, ex, ld, sg, gens, ldet, sdet, 0, letter)
            st[0] = st[1]
            ex[0] = ex[1]
            ld[0] = ld[1]
            sg[0] = sg[1]
        for j in range(B):
            _feat2(st[0, j, 0, 0], st[0, j, 0, 1], st[0, j, 1, 0], st[0, j, 1, 1],
                   ex[0, j], ld[0, j], sg[0, j], jordan, out[i, j])
    return out


_enum2_nb = _jit(_enum2_nb)
_words2_nb = _jit(_words2_nb)


# ---------------------------------------------------------------------------
# 2x2 block kernels (numpy)
# ---------------------------------------------------------------------------

def _rescale_np(M, ex):
    s = np.abs(M).max(axis=(-2, -1))
    e = np.frexp(s)[1]
    M = np.ldexp(M, -e[..., None, None])
    return M, ex + e


def _feat2_np(M, ex, ld, sg, jordan):
    L = ex * _LN2
    dprime = sg * np.exp(ld - 2.0 * L)
    out = np.empty(M.shape[:-2] + (2,))
    if jordan:
        t = M[..., 0, 0] + M[..., 1, 1]
        disc = (M[..., 0, 0] - M[..., 1, 1]) ** 2 + 4.0 * M[..., 0, 1] * M[..., 1, 0]
        real = disc >= 0.0
        l1 = 0.5 * (np.abs(t) + np.sqrt(np.where(real, disc, 0.0)))
        with np.errstate(divide="ignore"):
            top = np.where(real, np.log(np.where(real, l1, 1.0)) + L, 0.5 * ld)
        out[..., 0] = top
        out[..., 1] = np.where(real, ld - top, 0.5 * ld)
    else:
        f2 = (M * M).sum(axis=(-2, -1))
        D = np.abs(dprime)
        lo = np.where(sg >= 0.0,
                      (M[..., 0, 0] - M[..., 1, 1]) ** 2 + (M[..., 0, 1] + M[..., 1, 0]) ** 2,
                      (M[..., 0, 0] + M[..., 1, 1]) ** 2 + (M[..., 0, 1] - M[..., 1, 0]) ** 2)
        s1 = 0.5 * (np.sqrt(f2 + 2.0 * D) + np.sqrt(lo))
        top = np.log(s1) + L
        out[..., 0] = top
        out[..., 1] = ld - top
    return out


def _enum2_np(gens, ldet, sdet, prefix, r, jordan):
    m, B = gens.shape[:2]
    M = np.broadcast_to(np.eye(2), (1, B, 2, 2)).copy()
    ex = np.zeros((1, B), np.int64)
    ld = np.zeros((1, B))
    sg = np.ones((1, B))
    for k in prefix:
        M = M @ gens[k][None]
        M, ex = _rescale_np(M, ex)
        ld = ld + ldet[k]
        sg = sg * sdet[k]
    for _ in range(r):
        N = M.shape[0]
        M = (M[:, None] @ gens[None]).reshape(N * m, B, 2, 2)
        ex = np.repeat(ex, m, axis=0)
        M, ex = _rescale_np(M, ex)
        ld = (ld[:, None] + ldet[None]).reshape(N * m, B)
        sg = (sg[:, None] * sdet[None]).reshape(N * m, B)
    return _feat2_np(M, ex, ld, sg, jordan)


def _words2_np(gens, ldet, sdet, words, jordan):
    m, B = gens.shape[:2]
    N, Lw = words.shape
    g = np.concatenate([gens, np.broadcast_to(np.eye(2), (1, B, 2, 2))], axis=0)
    lg = np.concatenate([ldet, np.zeros((1, B))], axis=0)
    sgn = np.concatenate([sdet, np.ones((1, B))], axis=0)
    idx = np.where(words < 0, m, words)
    M = np.broadcast_to(np.eye(2), (N, B, 2, 2)).copy()
    ex = np.zeros((N, B), np.int64)
    ld = np.zeros((N, B))
    sg = np.ones((N, B))
    for k in range(Lw):
        w = idx[:, k]
        M = M @ g[w]
        M, ex = _rescale_np(M, ex)
        ld = ld + lg[w]
        sg = sg * sgn[w]
    return _feat2_np(M, ex, ld, sg, jordan)


# ---------------------------------------------------------------------------
# general d x d kernels
# ---------------------------------------------------------------------------

def _leaf_gen(M, e, jordan, out):
    d = M.shape[0]
    L = e * _LN2
    if jordan:
        ev = np.linalg.eigvals(M.astype(np.complex128))
        vals = np.empty(d)
        for i in range(d):
            vals[i] = math.log(abs(ev[i])) + L
    else:
        s = np.linalg.svd(M)[1]
        vals = np.empty(d)
        for i in range(d):
            vals[i] = math.log(s[i]) + L
    vals = np.sort(vals)[::-1]
    for i in range(d):
        out[i] = vals[i]


_leaf_gen = _jit(_leaf_gen)


def _scale_gen(C):
    s = np.abs(C).max()
    e = math.frexp(s)[1]
    return C * math.ldexp(1.0, -e), e


_scale_gen = _jit(_scale_gen)


def _enumg_nb(gens, prefix, r, jordan):
    m = gens.shape[0]
    d = gens.shape[1]
    P = prefix.shape[0]
    n = P + r
    total = m ** r
    out = np.empty((total, d))
    st = np.zeros((n + 1, d, d))
    ex = np.zeros(n + 1, np.int64)
    for i in range(d):
        st[0, i, i] = 1.0
    digits = np.zeros(n, np.int64)
    for k in range(P):
        digits[k] = prefix[k]
    for k in range(n):
        C, e = _scale_gen(st[k] @ gens[digits[k]])
        st[k + 1] = C
        ex[k + 1] = ex[k] + e
    for leaf in range(total):
        _leaf_gen(st[n].copy(), ex[n], jordan, out[leaf])
        k = n - 1
        while k >= P and digits[k] == m - 1:
            digits[k] = 0
            k -= 1
        if k < P:
            break
        digits[k] += 1
        for q in range(k, n):
            C, e = _scale_gen(st[q] @ gens[digits[q]])
            st[q + 1] = C
            ex[q + 1] = ex[q] + e
    return out


def _wordsg_nb(gens, words, jordan):
    N, Lw = words.shape
    d = gens.shape[1]
    out = np.empty((N, d))
    for i in range(N):
        M = np.eye(d)
        e = 0
        for k in range(Lw):
            letter = words[i, k]
            if letter < 0:
                continue
            M, de = _scale_gen(M @ gens[letter])
            e += de
        _leaf_gen(M, e, jordan, out[i])
    return out


def _qr_lyap_nb(gens, words, every):
    # rows of the output: sum of log|diag R| (unsorted order of the QR flag)
    N, Lw = words.shape
    d = gens.shape[1]
    out = np.empty((N, d))
    gt = np.empty_like(gens)
    for a in range(gens.shape[0]):
        gt[a] = gens[a].T.copy()
    for i in range(N):
        Q = np.eye(d)
        acc = np.zeros(d)
        cnt = 0
        Y = Q.copy()
        for k in range(Lw):
            letter = words[i, k]
            if letter < 0:
                continue
            Y = gt[letter] @ Y
            cnt += 1
            if cnt % every == 0:
                Q, R = np.linalg.qr(Y)
                for j in range(d):
                    acc[j] += math.log(abs(R[j, j]))
                Y = Q.copy()
        Q, R = np.linalg.qr(Y)
        for j in range(d):
            acc[j] += math.log(abs(R[j, j]))
        out[i] = np.sort(acc)[::-1]
    return out


_enumg_nb = _jit(_enumg_nb)
_wordsg_nb = _jit(_wordsg_nb)
_qr_lyap_nb = _jit(_qr_lyap_nb)


def _leaf_gen_np(M, ex, jordan):
    L = ex * _LN2
    if jordan:
        vals = np.log(np.abs(np.linalg.eigvals(M)))
    else:
        vals = np.log(np.linalg.svd(M, compute_uv=False))
    vals = vals + L[:, None]
    return -np.sort(-vals, axis=1)


def _rescale_gen_np(M, ex):
    s = np.abs(M).max(axis=(-2, -1))
    e = np.frexp(s)[1]
    return np.ldexp(M, -e[:, None, None]), ex + e


def _enumg_np(gens, prefix, r, jordan):
    m, d = gens.shape[:2]
    M = np.eye(d)[None].copy()
    ex = np.zeros(1, np.int64)
    for k in prefix:
        M, ex = _rescale_gen_np(M @ gens[k][None], ex)
    for _ in range(r):
        N = M.shape[0]
        M = (M[:, None] @ gens[None]).reshape(N * m, d, d)
        M, ex = _rescale_gen_np(M, np.repeat(ex, m))
    return _leaf_gen_np(M, ex, jordan)


def _wordsg_np(gens, words, jordan):
    m, d = gens.shape[:2]
    N, Lw = words.shape
    g = np.concatenate([gens, np.eye(d)[None]], axis=0)
    idx = np.where(words < 0, m, words)
    M = np.broadcast_to(np.eye(d), (N, d, d)).copy()
    ex = np.zeros(N, np.int64)
    for k in range(Lw):
        M, ex = _rescale_gen_np(M @ g[idx[:, k]], ex)
    return _leaf_gen_np(M, ex, jordan)


def _qr_lyap_np(gens, words, every):
    m, d = gens.shape[:2]
    N, Lw = words.shape
    gt = np.concatenate([np.transpose(gens, (0, 2, 1)), np.eye(d)[None]], axis=0)
    idx = np.where(words < 0, m, words)
    Y = np.broadcast_to(np.eye(d), (N, d, d)).copy()
    acc = np.zeros((N, d))
    cnt = np.zeros(N, np.int64)
    for k in range(Lw):
        Y = gt[idx[:, k]] @ Y
        cnt += idx[:, k] < m
        # all rows QR together whenever any row hits the cadence; QR at an
        # extra point is harmless (it only renormalizes)
        due = (cnt % every == 0) & (idx[:, k] < m)
        if due.any():
            Q, R = np.linalg.qr(Y[due])
            acc[due] += np.log(np.abs(np.diagonal(R, axis1=1, axis2=2)))
            Y[due] = Q
    Q, R = np.linalg.qr(Y)
    acc += np.log(np.abs(np.diagonal(R, axis1=1, axis2=2)))
    return -np.sort(-acc, axis=1)


# ---------------------------------------------------------------------------
# necklaces
# ---------------------------------------------------------------------------

def necklace_count(m, n):
    """Number of m-ary necklaces of length n (cyclic classes of words)."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _phi(d) * m ** (n // d)
    return total // n


def _phi(k):
    result, p, x = k, 2, k
    while p * p <= x:
        if x % p == 0:
            while x % p == 0:
                x //= p
            result -= result // p
        p += 1
    if x > 1:
        result -= result // x
    return result


def _necklaces_nb(m, n, count):
    out = np.empty((count, n), np.int64)
    a = np.zeros(n + 1, np.int64)
    row = 0
    for j in range(n):
        out[row, j] = 0
    row += 1
    while True:
        i = n
        while i > 0 and a[i] == m - 1:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        for j in range(i + 1, n + 1):
            a[j] = a[j - i]
        if n % i == 0:
            for j in range(n):
                out[row, j] = a[j + 1]
            row += 1
    return out


_necklaces_nb = _jit(_necklaces_nb)


def _necklaces_py(m, n, count):
    # same iterative Fredricksen-Kessler-Maiorana walk, plain Python
    out = np.empty((count, n), np.int64)
    a = [0] * (n + 1)
    out[0] = 0
    row = 1
    while True:
        i = n
        while i > 0 and a[i] == m - 1:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        for j in range(i + 1, n + 1):
            a[j] = a[j - i]
        if n % i == 0:
            out[row] = a[1:]
            row += 1
    return out


def _min_rotation_ok(mask, n, full):
    for r in range(1, n):
        rot = ((mask << r) | (mask >> (n - r))) & full
        if rot < mask:
            return False
    return True


_min_rotation_ok = _jit(_min_rotation_ok)


def _fixed_density_nb(n, k):
    # Gosper's hack over n-bit masks with k ones; keep lexicographically
    # minimal rotations.  Bit (n-1-j) of the mask is letter j of the word.
    full = (np.int64(1) << n) - 1
    cap = 1024
    buf = np.empty(cap, np.int64)
    cnt = 0
    if k == 0 or k == n:
        buf[0] = 0 if k == 0 else full
        cnt = 1
    else:
        mask = (np.int64(1) << k) - 1
        while mask <= full:
            if _min_rotation_ok(mask, n, full):
                if cnt == cap:
                    nb = np.empty(cap * 2, np.int64)
                    nb[:cap] = buf
                    buf = nb
                    cap *= 2
                buf[cnt] = mask
                cnt += 1
            c = mask & -mask
            rr = mask + c
            mask = (((rr ^ mask) >> 2) // c) | rr
    out = np.empty((cnt, n), np.int64)
    for i in range(cnt):
        for j in range(n):
            out[i, j] = (buf[i] >> (n - 1 - j)) & 1
    return out


_fixed_density_nb = _jit(_fixed_density_nb)


def _fixed_density_np(n, k):
    from itertools import combinations

    if k == 0 or k == n:
        return np.full((1, n), 0 if k == 0 else 1, np.int64)
    pos = np.array(list(combinations(range(n), k)), np.int64)
    weights = np.int64(1) << (n - 1 - pos)
    masks = weights.sum(axis=1)
    full = (1 << n) - 1
    keep = np.ones(masks.shape[0], bool)
    for r in range(1, n):
        rot = ((masks << r) | (masks >> (n - r))) & full
        keep &= rot >= masks
    masks = np.sort(masks[keep])
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return (masks[:, None] >> shifts[None, :]) & 1


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

def enum_blocks2(gens, ldet, sdet, prefix, r, jordan):
    prefix = np.ascontiguousarray(prefix, np.int64)
    if _backend == "numba":
        return _enum2_nb(gens, ldet, sdet, prefix, int(r), bool(jordan))
    return _enum2_np(gens, ldet, sdet, prefix, int(r), bool(jordan))


def words_blocks2(gens, ldet, sdet, words, jordan):
    words = np.ascontiguousarray(words, np.int64)
    if _backend == "numba":
        return _words2_nb(gens, ldet, sdet, words, bool(jordan))
    return _words2_np(gens, ldet, sdet, words, bool(jordan))


def enum_general(gens, prefix, r, jordan):
    prefix = np.ascontiguousarray(prefix, np.int64)
    if _backend == "numba":
        return _enumg_nb(gens, prefix, int(r), bool(jordan))
    return _enumg_np(gens, prefix, int(r), bool(jordan))


def words_general(gens, words, jordan):
    words = np.ascontiguousarray(words, np.int64)
    if _backend == "numba":
        return _wordsg_nb(gens, words, bool(jordan))
    return _wordsg_np(gens, words, bool(jordan))


def qr_lyapunov(gens, words, every=8):
    words = np.ascontiguousarray(words, np.int64)
    if _backend == "numba":
        return _qr_lyap_nb(np.ascontiguousarray(gens), words, int(every))
    return _qr_lyap_np(gens, words, int(every))


def necklaces(m, n):
    """All m-ary necklace representatives of length n, in FKM order."""
    count = necklace_count(m, n)
    if _backend == "numba":
        return _necklaces_nb(int(m), int(n), count)
    return _necklaces_py(int(m), int(n), count)


def fixed_density_necklaces(n, k):
    """Binary necklaces of length n with exactly k ones (minimal rotations)."""
    if n > 62:
        raise ValueError("n must be at most 62")
    if _backend == "numba":
        return _fixed_density_nb(int(n), int(k))
    return _fixed_density_np(int(n), int(k))
