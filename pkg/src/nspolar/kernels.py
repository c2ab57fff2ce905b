"""Hot loops: the GF(2) polar transform and successive-cancellation decoding.

Each kernel has a numba implementation (per frame, explicit loops) and a
numpy implementation (vectorized across frames).  ``nspolar._accel``
decides which one the public wrappers use; both can be called directly.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, use_numba

# -- polar transform --------------------------------------------------------


def polar_transform_numpy(u):
    x = np.array(u, dtype=np.uint8, copy=True)
    B, N = x.shape
    h = 1
    while h < N:
        v = x.reshape(B, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x


@njit(cache=True)
def _polar_transform_nb(x):
    B, N = x.shape
    for f in range(B):
        h = 1
        while h < N:
            for start in range(0, N, 2 * h):
                for j in range(start, start + h):
                    x[f, j] ^= x[f, j + h]
            h *= 2
    return x


def polar_transform_numba(u):
    x = np.array(u, dtype=np.uint8, copy=True)
    return _polar_transform_nb(x)


def polar_transform(u, numba=None):
    """x = u F^{(x)n} over GF(2) for each row of a (B, N) array."""
    if use_numba(numba):
        return polar_transform_numba(u)
    return polar_transform_numpy(u)


# -- check-node functions ---------------------------------------------------


def f_exact_numpy(a, b):
    # 2 atanh(tanh(a/2) tanh(b/2)) in a form that stays finite for large |a|, |b|
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def f_minsum_numpy(a, b):
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


@njit(cache=True)
def _f_exact(a, b):
    s = 1.0
    if (a < 0.0) != (b < 0.0):
        s = -1.0
    m = min(abs(a), abs(b))
    if a == 0.0 or b == 0.0:
        return 0.0
    return s * m + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@njit(cache=True)
def _f_minsum(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    m = min(abs(a), abs(b))
    if (a < 0.0) != (b < 0.0):
        return -m
    return m


# -- successive cancellation ------------------------------------------------


@njit(cache=True)
def _sc_frame(llr, frozen, fword, minsum, n, L, XL, tmp, u_out, x_out):
    N = llr.size
    for j in range(N):
        L[0, j] = llr[j]
    for i in range(N):
        if i == 0:
            d0 = 1
        else:
            tz = 0
            while (i >> tz) & 1 == 0:
                tz += 1
            d = n - tz
            s = N >> d
            for j in range(s):
                if XL[d, j]:
                    L[d, j] = L[d - 1, s + j] - L[d - 1, j]
                else:
                    L[d, j] = L[d - 1, s + j] + L[d - 1, j]
            d0 = d + 1
        for d in range(d0, n + 1):
            s = N >> d
            for j in range(s):
                if minsum:
                    L[d, j] = _f_minsum(L[d - 1, j], L[d - 1, s + j])
                else:
                    L[d, j] = _f_exact(L[d - 1, j], L[d - 1, s + j])
        if frozen[i]:
            bit = fword[i]
        elif L[n, 0] < 0.0:
            bit = 1
        else:
            bit = 0
        u_out[i] = bit
        # fold the decision back up the tree
        d = n
        idx = i
        size = 1
        tmp[n, 0] = bit
        while True:
            if d == 0:
                for j in range(N):
                    x_out[j] = tmp[0, j]
                break
            if idx & 1 == 0:
                for j in range(size):
                    XL[d, j] = tmp[d, j]
                break
            for j in range(size):
                tmp[d - 1, j] = XL[d, j] ^ tmp[d, j]
                tmp[d - 1, size + j] = tmp[d, j]
            size *= 2
            d -= 1
            idx >>= 1


@njit(cache=True)
def _sc_batch_nb(llr, frozen, fword, minsum):
    B, N = llr.shape
    n = 0
    while (1 << n) < N:
        n += 1
    L = np.zeros((n + 1, N))
    XL = np.zeros((n + 1, N), dtype=np.uint8)
    tmp = np.zeros((n + 1, N), dtype=np.uint8)
    u = np.zeros((B, N), dtype=np.uint8)
    x = np.zeros((B, N), dtype=np.uint8)
    for f in range(B):
        _sc_frame(llr[f], frozen, fword, minsum, n, L, XL, tmp, u[f], x[f])
    return u, x


def sc_decode_numba(llr, frozen, fword, minsum=False):
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    frozen = np.ascontiguousarray(frozen, dtype=np.bool_)
    fword = np.ascontiguousarray(fword, dtype=np.uint8)
    return _sc_batch_nb(llr, frozen, fword, bool(minsum))


def _sc_numpy_rec(L, frozen, fword, fn):
    B, s = L.shape
    if frozen.all():
        u = np.broadcast_to(fword, (B, s)).copy()
        return u, polar_transform_numpy(u)
    if s == 1:
        u = (L < 0.0).astype(np.uint8)
        return u, u.copy()
    h = s // 2
    a = L[:, :h]
    c = L[:, h:]
    u_l, x_l = _sc_numpy_rec(fn(a, c), frozen[:h], fword[:h], fn)
    u_r, x_r = _sc_numpy_rec(c + np.where(x_l == 1, -a, a), frozen[h:], fword[h:], fn)
    return np.concatenate([u_l, u_r], axis=1), np.concatenate([x_l ^ x_r, x_r], axis=1)


def sc_decode_numpy(llr, frozen, fword, minsum=False):
    llr = np.asarray(llr, dtype=np.float64)
    frozen = np.asarray(frozen, dtype=np.bool_)
    fword = np.asarray(fword, dtype=np.uint8)
    fn = f_minsum_numpy if minsum else f_exact_numpy
    with np.errstate(over="ignore"):
        return _sc_numpy_rec(llr, frozen, fword, fn)


def sc_decode(llr, frozen, fword, minsum=False, numba=None):
    """Decode a (B, N) batch of codeword-order LLRs.

    Returns ``(u_hat, x_hat)`` as uint8 arrays of shape (B, N).  Decisions on
    an LLR of exactly zero go to 0.
    """
    if use_numba(numba):
        return sc_decode_numba(llr, frozen, fword, minsum)
    return sc_decode_numpy(llr, frozen, fword, minsum)
