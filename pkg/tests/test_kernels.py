import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nspolar import _accel, kernels

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def g_matrix(n):
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, F)
    return G


@pytest.mark.parametrize("n", range(0, 7))
def test_transform_matches_kronecker_product(n):
    rng = np.random.default_rng(n)
    u = rng.integers(0, 2, (20, 1 << n), dtype=np.uint8)
    expected = (u.astype(np.int64) @ g_matrix(n)) % 2
    np.testing.assert_array_equal(kernels.polar_transform_numpy(u), expected)


@needs_numba
@given(st.integers(0, 10), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_transform_backends_agree(n, seed):
    u = np.random.default_rng(seed).integers(0, 2, (3, 1 << n), dtype=np.uint8)
    np.testing.assert_array_equal(kernels.polar_transform_numpy(u), kernels.polar_transform_numba(u))


def test_transform_leaves_input_alone():
    u = np.array([[1, 1, 0, 0]], dtype=np.uint8)
    kernels.polar_transform_numpy(u)
    assert u.tolist() == [[1, 1, 0, 0]]


def test_f_functions():
    a = np.array([2.0, -3.0, 0.0, 500.0, -500.0])
    b = np.array([1.0, 4.0, 5.0, 700.0, 300.0])
    exact = kernels.f_exact_numpy(a, b)
    ref = 2 * np.arctanh(np.tanh(a[:3] / 2) * np.tanh(b[:3] / 2))
    np.testing.assert_allclose(exact[:3], ref, rtol=1e-12)
    assert np.all(np.isfinite(exact))
    assert exact[3] == pytest.approx(500.0, rel=1e-9)
    assert exact[4] == pytest.approx(-300.0, rel=1e-9)
    np.testing.assert_array_equal(kernels.f_minsum_numpy(a, b), np.sign(a) * np.sign(b) * np.minimum(abs(a), abs(b)))


def decision_llrs(llr, frozen, fword, fn):
    # numpy SC that also records the LLR at every decision
    out = []

    def rec(L, fr, fw):
        B, s = L.shape
        if s == 1:
            out.append(L[:, 0].copy())
            u = np.where(fr[0], fw[0], L[:, 0] < 0.0).astype(np.uint8)[:, None]
            return u, u.copy()
        h = s // 2
        a, c = L[:, :h], L[:, h:]
        ul, xl = rec(fn(a, c), fr[:h], fw[:h])
        ur, xr = rec(c + np.where(xl == 1, -a, a), fr[h:], fw[h:])
        return np.concatenate([ul, ur], 1), np.concatenate([xl ^ xr, xr], 1)

    with np.errstate(over="ignore"):
        u, _ = rec(np.asarray(llr, float), frozen, fword)
    return u, np.stack(out, axis=1)


@needs_numba
@pytest.mark.parametrize("minsum", [False, True])
def test_sc_backends_agree(minsum):
    rng = np.random.default_rng(1)
    fn = kernels.f_minsum_numpy if minsum else kernels.f_exact_numpy
    for n in (0, 1, 3, 6, 9):
        N = 1 << n
        frozen = rng.random(N) < 0.5
        fword = (rng.integers(0, 2, N) * frozen).astype(np.uint8)
        llr = rng.normal(0, 3, (25, N))
        llr[:, : N // 4] = 0.0
        u1, x1 = kernels.sc_decode_numpy(llr, frozen, fword, minsum)
        u2, x2 = kernels.sc_decode_numba(llr, frozen, fword, minsum)
        if minsum:
            # min-sum only adds and compares, so it is bit-exact
            np.testing.assert_array_equal(u1, u2)
            np.testing.assert_array_equal(x1, x2)
            continue
        # exact f differs by rounding between backends; a divergence may only
        # start at a decision whose LLR is a rounding-level tie
        u3, L = decision_llrs(llr, frozen, fword, fn)
        np.testing.assert_array_equal(u1, u3)
        for f in np.flatnonzero((u1 != u2).any(axis=1)):
            i = np.flatnonzero(u1[f] != u2[f])[0]
            assert abs(L[f, i]) < 1e-9
        assert np.mean((u1 != u2).any(axis=1)) < 0.5


@pytest.mark.parametrize("numba", [False, pytest.param(True, marks=needs_numba)])
def test_sc_output_is_reencoded_decision(numba):
    rng = np.random.default_rng(2)
    frozen = rng.random(64) < 0.5
    llr = rng.normal(0, 2, (10, 64))
    u, x = kernels.sc_decode(llr, frozen, np.zeros(64, np.uint8), numba=numba)
    np.testing.assert_array_equal(x, kernels.polar_transform_numpy(u))
    assert np.all(u[:, frozen] == 0)


@pytest.mark.parametrize("numba", [False, pytest.param(True, marks=needs_numba)])
def test_zero_llr_ties_to_zero(numba):
    u, x = kernels.sc_decode(np.zeros((1, 8)), np.zeros(8, bool), np.zeros(8, np.uint8), numba=numba)
    assert u.sum() == 0 and x.sum() == 0


def test_env_flag_disables_numba():
    code = "from nspolar import _accel, kernels; print(_accel.HAVE_NUMBA, _accel.use_numba(True))"
    env = dict(os.environ, NSPOLAR_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "False"]
