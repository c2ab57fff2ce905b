"""Exact synthesized channels for small block lengths.

Everything here works on explicit transition tables and is meant as ground
truth for the Bhattacharyya-bound construction, not as a construction
method in its own right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channels import ChannelModel, bhattacharyya_of_matrix, capacity_of_matrix

DEFAULT_ALPHABET_CAP = 1 << 20


@dataclass
class DiscreteChannel:
    """Binary-input channel given by a 2 x M table of W(y|x)."""

    probs: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.probs, dtype=float)
        if P.ndim != 2 or P.shape[0] != 2:
            raise ValueError("transition table must have shape (2, M)")
        if np.any(P < 0.0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("rows must be probability vectors")
        self.probs = P

    @classmethod
    def from_model(cls, w: ChannelModel):
        return cls(w.transition_matrix())

    @classmethod
    def bec(cls, eps):
        return cls(ChannelModel.bec(eps).transition_matrix())

    @property
    def size(self):
        return self.probs.shape[1]

    def capacity(self):
        return capacity_of_matrix(self.probs)

    def bhattacharyya(self):
        return bhattacharyya_of_matrix(self.probs)

    def erasure_probability(self, tol=1e-15):
        """Return eps if the table is (up to relabeling) a BEC, else None."""
        P = self.probs
        both = (P[0] > tol) & (P[1] > tol)
        if np.any(np.abs(P[0, both] - P[1, both]) > 1e-12):
            return None
        e0 = P[0, both].sum()
        e1 = P[1, both].sum()
        if abs(e0 - e1) > 1e-12:
            return None
        return float(e0)


def _drop_empty(P):
    keep = (P[0] > 0.0) | (P[1] > 0.0)
    return P[:, keep]


def single_step(w0: DiscreteChannel, w1: DiscreteChannel, cap=DEFAULT_ALPHABET_CAP):
    """One polarization step, returning (W', W'') as exact tables.

    W' has outputs (y0, y1); W'' has outputs (y0, y1, u0).  Outputs that
    carry no probability under either input are dropped.
    """
    M0, M1 = w0.size, w1.size
    if 2 * M0 * M1 > cap:
        raise ValueError(f"output alphabet {2 * M0 * M1} exceeds cap {cap}")
    A, B = w0.probs, w1.probs
    # joint[u0, u1, y0, y1] = W0(y0 | u0^u1) W1(y1 | u1)
    joint = np.empty((2, 2, M0, M1))
    for u0 in (0, 1):
        for u1 in (0, 1):
            joint[u0, u1] = np.outer(A[u0 ^ u1], B[u1])
    minus = 0.5 * (joint[:, 0] + joint[:, 1]).reshape(2, M0 * M1)
    # plus[u1, (y0, y1, u0)]
    plus = 0.5 * np.transpose(joint, (1, 2, 3, 0)).reshape(2, M0 * M1 * 2)
    return DiscreteChannel(_drop_empty(minus)), DiscreteChannel(_drop_empty(plus))


def bec_polarize(eps) -> np.ndarray:
    """Exact erasure probabilities of all synthesized channels.

    ``eps`` has shape (..., N); the last axis is polarized, leading axes are
    independent problems.
    """
    e = np.array(eps, dtype=float)
    N = e.shape[-1]
    n = N.bit_length() - 1
    if (1 << n) != N:
        raise ValueError("length must be a power of two")
    lead = e.shape[:-1]
    for level in range(1, n + 1):
        half = 1 << (level - 1)
        blocks = e.reshape(*lead, N >> level, 2, half)
        a = blocks[..., 0, :].copy()
        b = blocks[..., 1, :].copy()
        blocks[..., 0, :] = a + b - a * b
        blocks[..., 1, :] = a * b
        e = blocks.reshape(*lead, N)
    return e


def polarize_exact(channels, cap=DEFAULT_ALPHABET_CAP):
    """All N synthesized channels, in synthesized-index order."""
    chans = [c if isinstance(c, DiscreteChannel) else DiscreteChannel.from_model(c) for c in channels]
    N = len(chans)
    n = N.bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError("number of channels must be a power of two")
    eps = [c.erasure_probability() for c in chans]
    if all(e is not None for e in eps):
        return [DiscreteChannel.bec(e) for e in bec_polarize(eps)]
    for level in range(1, n + 1):
        half = 1 << (level - 1)
        nxt = list(chans)
        for m in range(N >> level):
            base = m << level
            for j in range(half):
                i0, i1 = base + j, base + half + j
                nxt[i0], nxt[i1] = single_step(chans[i0], chans[i1], cap)
        chans = nxt
    return chans


def synthesized_capacities(channels, cap=DEFAULT_ALPHABET_CAP) -> np.ndarray:
    return np.array([c.capacity() for c in polarize_exact(channels, cap)])


def synthesized_bhattacharyya(channels, cap=DEFAULT_ALPHABET_CAP) -> np.ndarray:
    return np.array([c.bhattacharyya() for c in polarize_exact(channels, cap)])


def _all_permutations(N):
    return np.array(list(itertools.permutations(range(N))), dtype=np.int64)


def _capacity_vectors(channels, perms, cap):
    chans = [c if isinstance(c, DiscreteChannel) else DiscreteChannel.from_model(c) for c in channels]
    eps = [c.erasure_probability() for c in chans]
    if all(e is not None for e in eps):
        return 1.0 - bec_polarize(np.asarray(eps)[perms])
    return np.array([synthesized_capacities([chans[j] for j in p], cap) for p in perms])


def _group(vectors, tol):
    reps = []
    labels = np.empty(len(vectors), dtype=np.int64)
    rep_arr = np.empty((0, vectors.shape[1]))
    for i, v in enumerate(vectors):
        if rep_arr.shape[0]:
            hit = np.flatnonzero(np.max(np.abs(rep_arr - v), axis=1) <= tol)
            if hit.size:
                labels[i] = hit[0]
                continue
        labels[i] = len(reps)
        reps.append(v)
        rep_arr = np.vstack([rep_arr, v])
    return reps, labels


def permutation_classes(channels, tol=1e-10, cap=DEFAULT_ALPHABET_CAP):
    """Group all N! orderings by their synthesized-capacity vector.

    Returns a list of ``(capacity_vector, permutations)`` pairs, classes in
    order of first appearance in lexicographic permutation order.
    """
    N = len(channels)
    if N > 8:
        raise ValueError("exhaustive enumeration is limited to N <= 8")
    perms = _all_permutations(N)
    caps = _capacity_vectors(channels, perms, cap)
    reps, labels = _group(caps, tol)
    return [(reps[c], perms[labels == c]) for c in range(len(reps))]


def best_permutation(channels, k: int, tol=1e-12, cap=DEFAULT_ALPHABET_CAP) -> np.ndarray:
    """Lexicographically smallest ordering maximizing the sum of the k best capacities."""
    N = len(channels)
    if N > 8:
        raise ValueError("exhaustive enumeration is limited to N <= 8")
    if not 0 <= k <= N:
        raise ValueError("need 0 <= k <= N")
    perms = _all_permutations(N)
    caps = _capacity_vectors(channels, perms, cap)
    score = np.sort(caps, axis=1)[:, N - k :].sum(axis=1)
    best = np.flatnonzero(score >= score.max() - tol)[0]
    return perms[best]


def n4_bec_closed_forms(e1, e2, e3, e4):
    """Closed-form synthesized erasure probabilities for four BECs.

    Keys are the three class representatives [0,1,2,3], [0,2,1,3] and
    [0,3,1,2]; the i-th channel of the permutation carries erasure
    probability e_{perm[i]+1}.
    """
    a12 = e1 + e2 - e1 * e2
    a34 = e3 + e4 - e3 * e4
    prod = e1 * e2 * e3 * e4
    z0 = e1 + e2 + e3 + e4 - e1 * e2 - e3 * e4 - a12 * a34
    return {
        (0, 1, 2, 3): np.array([z0, e1 * e2 + e3 * e4 - prod, a12 * a34, prod]),
        (0, 2, 1, 3): np.array(
            [z0, e1 * e3 + e2 * e4 - prod, (e1 + e3 - e1 * e3) * (e2 + e4 - e2 * e4), prod]
        ),
        (0, 3, 1, 2): np.array(
            [z0, e1 * e4 + e2 * e3 - prod, (e1 + e4 - e1 * e4) * (e2 + e3 - e2 * e3), prod]
        ),
    }
