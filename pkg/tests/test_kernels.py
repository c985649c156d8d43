"""Backend parity: the numba and numpy kernels agree."""
import numpy as np
import pytest

from jointspec import _kernels as K
from jointspec.matgroup import CARTAN, JORDAN, GroupFrame
from jointspec.scenarios import triangular_set, triangle_T1
from jointspec.spectrum import FULL, NECKLACE, Generators, enumerate_level

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def both():
    prev = K.backend()
    yield
    K.set_backend(prev)


def _run(backend, fn):
    K.set_backend(backend)
    return fn()


@pytest.mark.parametrize("kind,mode", [(CARTAN, FULL), (JORDAN, FULL), (JORDAN, NECKLACE)])
@pytest.mark.parametrize("which", ["ex33", "T1", "gl3"])
def test_enumeration_parity(both, kind, mode, which):
    if which == "ex33":
        S, fr = triangular_set(), GroupFrame.GL(2)
    elif which == "T1":
        S, fr = triangle_T1(), GroupFrame.product(2)
    else:
        S, fr = list(np.random.default_rng(4).standard_normal((3, 3, 3))), GroupFrame.GL(3)
    f = lambda: enumerate_level(S, 6, kind, mode, frame=fr)
    a, b = _run("numba", f), _run("numpy", f)
    assert a.points.shape == b.points.shape
    assert np.allclose(a.points, b.points, atol=1e-10, rtol=0)
    assert np.array_equal(a.words, b.words)


def test_necklaces_parity(both):
    for m, n in [(2, 9), (3, 6), (4, 5)]:
        a = _run("numba", lambda: K.necklaces(m, n))
        b = _run("numpy", lambda: K.necklaces(m, n))
        assert np.array_equal(a, b)
        assert len(a) == K.necklace_count(m, n)
    a = _run("numba", lambda: K.fixed_density_necklaces(12, 5))
    b = _run("numpy", lambda: K.fixed_density_necklaces(12, 5))
    assert np.array_equal(a, b)


def test_qr_lyapunov_parity(both):
    rng = np.random.default_rng(2)
    gens = rng.standard_normal((2, 3, 3))
    W = rng.integers(0, 2, size=(5, 50))
    a = _run("numba", lambda: K.qr_lyapunov(gens, W))
    b = _run("numpy", lambda: K.qr_lyapunov(gens, W))
    assert np.allclose(a, b, atol=1e-9)


def test_necklace_counts():
    # binary necklaces of length 1..8
    assert [K.necklace_count(2, n) for n in range(1, 9)] == [2, 3, 4, 6, 8, 14, 20, 36]


def test_words_padding_is_identity():
    G = Generators(triangular_set())
    W = np.array([[0, 2, -1, -1], [0, 2, 2, -1]])
    v = G.words(W, False)
    ref = G.words(np.array([[0, 2]]), False)
    assert np.allclose(v[0], ref[0])


def test_env_flag_selects_numpy():
    import os
    import subprocess
    import sys
    env = dict(os.environ, JOINTSPEC_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from jointspec import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
