"""Encoding, decoding and the channel-boundary permutation.

The generator is G = F^{(x)n} with F = [[1, 0], [1, 1]] and no bit-reversal
inside G; any bit-reversal is carried by the code's storage permutation.
All functions accept a single word of shape (N,) or a batch (B, N).
"""

from __future__ import annotations

import json

import numpy as np

from . import kernels
from .channels import ERASED, PUNCTURED, llr_table
from .construction import CodeSpec, bit_reversal


def _as_batch(a, dtype):
    a = np.asarray(a, dtype=dtype)
    return (a[None, :], True) if a.ndim == 1 else (a, False)


def _check_length(N):
    if N < 1 or N & (N - 1):
        raise ValueError(f"length {N} is not a power of two")


def encode(u, numba=None):
    """x = uG."""
    u, single = _as_batch(u, np.uint8)
    _check_length(u.shape[1])
    x = kernels.polar_transform(u, numba)
    return x[0] if single else x


def _solve_systematic(target, info, fvals):
    # Find u with (uG)[info] = target[info] and u[~info] = fvals, batched.
    # Uses x = [(u_a ^ u_b) G', u_b G']: solve the right half, then the left
    # half in the variable w = u_a ^ u_b whose frozen part is known.
    B, s = target.shape
    if s == 1:
        return np.where(info[0], target, fvals).astype(np.uint8)
    h = s // 2
    u_b = _solve_systematic(target[:, h:], info[h:], fvals[:, h:])
    w = _solve_systematic(target[:, :h], info[:h], fvals[:, :h] ^ u_b)
    return np.concatenate([w ^ u_b, u_b], axis=1)


def systematic_encode(spec: CodeSpec, d, numba=None):
    """Encode data so that it appears verbatim at the information positions.

    Returns ``(x, u)`` with ``x[info] == d`` and ``u[frozen] == frozen values``.
    """
    d, single = _as_batch(d, np.uint8)
    info = spec.info_set
    if d.shape[1] != info.size:
        raise ValueError(f"expected {info.size} data bits, got {d.shape[1]}")
    B = d.shape[0]
    target = np.zeros((B, spec.N), dtype=np.uint8)
    target[:, info] = d
    mask = np.zeros(spec.N, dtype=np.bool_)
    mask[info] = True
    fvals = np.broadcast_to(spec.frozen_word, (B, spec.N)).copy()
    u = _solve_systematic(target, mask, fvals)
    x = kernels.polar_transform(u, numba)
    if not np.array_equal(x[:, info], d):
        raise AssertionError("systematic encoding failed its postcondition")
    return (x[0], u[0]) if single else (x, u)


def nonsystematic_encode(spec: CodeSpec, d, numba=None):
    """Place data at the information positions of u and return (x, u)."""
    d, single = _as_batch(d, np.uint8)
    u = np.broadcast_to(spec.frozen_word, (d.shape[0], spec.N)).copy()
    u[:, spec.info_set] = d
    x = kernels.polar_transform(u, numba)
    return (x[0], u[0]) if single else (x, u)


def sc_decode(spec: CodeSpec, llrs, minsum=False, numba=None):
    """Successive-cancellation decoding.

    ``llrs`` are in codeword order with zeros at punctured positions.  Returns
    ``(u_hat, d_hat, x_hat)`` where ``d_hat = u_hat[info]``; systematic users
    read their data from ``x_hat[info]``.

    Bits are decided in bit-reversed index order.  With x = uG and no
    bit-reversal inside G, that is the order in which the synthesized channel
    of u[i] is exactly the i-th output of the in-place Bhattacharyya
    recursion used by the construction.
    """
    llrs, single = _as_batch(llrs, np.float64)
    if llrs.shape[1] != spec.N:
        raise ValueError(f"expected {spec.N} LLRs, got {llrs.shape[1]}")
    rev = bit_reversal(spec.n)
    # with v = u[rev] and c = x[rev], c = vG and v is decided in natural order
    v_hat, c_hat = kernels.sc_decode(
        llrs[:, rev], spec.frozen_mask[rev], spec.frozen_word[rev], minsum, numba
    )
    u_hat = v_hat[:, rev]
    x_hat = c_hat[:, rev]
    d_hat = u_hat[:, spec.info_set]
    if single:
        return u_hat[0], d_hat[0], x_hat[0]
    return u_hat, d_hat, x_hat


def map_to_physical(spec: CodeSpec, x, punctured_value=1):
    """Storage-order word z with z[perm[i]] = x[i].

    Cells holding punctured symbols receive ``punctured_value`` instead.
    """
    x, single = _as_batch(x, np.uint8)
    if x.shape[1] != spec.N:
        raise ValueError("length mismatch")
    z = np.empty_like(x)
    z[:, spec.permutation] = x
    z[:, spec.permutation[spec.puncture.w == 0]] = punctured_value
    return z[0] if single else z


def map_from_physical(spec: CodeSpec, y, table=None):
    """Codeword-order LLRs from physical observations.

    ``table`` is the (N, 2) LLR table of the physical channels; it is
    recomputed from ``spec.channels`` when omitted.
    """
    y, single = _as_batch(y, np.int64)
    if y.shape[1] != spec.N:
        raise ValueError("length mismatch")
    if table is None:
        table = llr_table(spec.channels)
    special = (y == ERASED) | (y == PUNCTURED)
    if np.any(y == ERASED):
        kinds = np.array([w.kind for w in spec.channels])
        bad = (y == ERASED) & (kinds != "BEC")[None, :]
        if bad.any():
            raise ValueError("erasure observed on a non-erasure channel")
    if np.any((y < 0) | (y > PUNCTURED)):
        raise ValueError("invalid observation symbol")
    phys = np.where(special, 0.0, np.where(y == 0, table[None, :, 0], table[None, :, 1]))
    out = phys[:, spec.permutation]
    out[:, spec.puncture.w == 0] = 0.0
    return out[0] if single else out


# -- golden vectors ---------------------------------------------------------


def _bits(a):
    return "".join(str(int(v)) for v in np.asarray(a).ravel())


def _unbits(s):
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")


def write_golden(path, code_path, records):
    """Write decoding regression vectors as JSON lines.

    Each record is a mapping with keys u, x, z, llrs and u_hat; bit vectors
    are stored as 0/1 strings and LLRs as floats.
    """
    with open(path, "w") as fh:
        fh.write(json.dumps({"format": "nspolar-golden/1", "code": str(code_path)}) + "\n")
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "u": _bits(r["u"]),
                        "x": _bits(r["x"]),
                        "z": _bits(r["z"]),
                        "llrs": [float(v) for v in r["llrs"]],
                        "u_hat": _bits(r["u_hat"]),
                    }
                )
                + "\n"
            )


def read_golden(path):
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "nspolar-golden/1":
            raise ValueError(f"{path}: not a golden-vector file")
        records = []
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            records.append(
                {
                    "u": _unbits(r["u"]),
                    "x": _unbits(r["x"]),
                    "z": _unbits(r["z"]),
                    "llrs": np.array(r["llrs"]),
                    "u_hat": _unbits(r["u_hat"]),
                }
            )
    return header["code"], records
