"""Binary-input memoryless channel models.

Capacities are in bits (base-2 logs); likelihood ratios are natural-log
``ln W(y|0)/W(y|1)`` so that a positive value favours the bit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ERASED = 2
PUNCTURED = 3

DEFAULT_SATURATION = 40.0


def binary_entropy(p):
    """h(p) in bits; accepts scalars or arrays, h(0) = h(1) = 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    h = np.where((p <= 0.0) | (p >= 1.0), 0.0, h)
    return float(h) if h.ndim == 0 else h


@dataclass(frozen=True)
class ChannelModel:
    """A BEC, BSC or BAC.

    ``a`` is the erasure probability (BEC), the crossover probability (BSC)
    or P(read 1 | stored 0) (BAC); ``b`` is P(read 0 | stored 1) for BAC and
    unused otherwise. ``flipped`` records that a BSC estimate above 1/2 was
    relabeled; observations are then inverted before use.
    """

    kind: str
    a: float
    b: float = 0.0
    flipped: bool = False

    def __post_init__(self):
        if self.kind not in ("BEC", "BSC", "BAC"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        for v in (self.a, self.b):
            if not 0.0 <= v <= 1.0 or math.isnan(v):
                raise ValueError(f"probability out of range: {v}")
        if self.kind == "BSC" and self.a > 0.5:
            raise ValueError("BSC crossover must be <= 1/2; use ChannelModel.bsc() to relabel")
        if self.kind == "BAC" and (self.a >= 1.0 or self.b >= 1.0):
            raise ValueError("BAC transition probabilities must lie in [0, 1)")

    @classmethod
    def bec(cls, eps):
        return cls("BEC", float(eps))

    @classmethod
    def bsc(cls, p):
        p = float(p)
        if p > 0.5:
            return cls("BSC", 1.0 - p, flipped=True)
        return cls("BSC", p)

    @classmethod
    def bac(cls, p01, p10):
        return cls("BAC", float(p01), float(p10))

    @property
    def p01(self):
        return self.a if self.kind != "BEC" else 0.0

    @property
    def p10(self):
        if self.kind == "BAC":
            return self.b
        return self.a if self.kind == "BSC" else 0.0

    def transition_matrix(self):
        """2 x M matrix of W(y|x); BEC outputs are ordered (0, 1, erased)."""
        if self.kind == "BEC":
            e = self.a
            return np.array([[1.0 - e, 0.0, e], [0.0, 1.0 - e, e]])
        if self.kind == "BSC":
            p = self.a
            return np.array([[1.0 - p, p], [p, 1.0 - p]])
        return np.array([[1.0 - self.a, self.a], [self.b, 1.0 - self.b]])

    def capacity(self):
        return symmetric_capacity(self)

    def bhattacharyya(self):
        return bhattacharyya(self)

    def llr(self, y, saturation=DEFAULT_SATURATION):
        return llr(self, y, saturation)


def capacity_of_matrix(P):
    """Symmetric capacity of a 2 x M transition matrix by direct summation."""
    P = np.asarray(P, dtype=float)
    py = 0.5 * (P[0] + P[1])
    total = 0.0
    for x in (0, 1):
        row = P[x]
        mask = row > 0.0
        total += 0.5 * float(np.sum(row[mask] * np.log2(row[mask] / py[mask])))
    return min(max(total, 0.0), 1.0)


def bhattacharyya_of_matrix(P):
    P = np.asarray(P, dtype=float)
    return float(np.sum(np.sqrt(P[0] * P[1])))


def symmetric_capacity(w: ChannelModel) -> float:
    if w.kind == "BEC":
        return 1.0 - w.a
    return capacity_of_matrix(w.transition_matrix())


def bhattacharyya(w: ChannelModel) -> float:
    if w.kind == "BEC":
        return w.a
    if w.kind == "BSC":
        return 2.0 * math.sqrt(w.a * (1.0 - w.a))
    return math.sqrt((1.0 - w.a) * w.b) + math.sqrt(w.a * (1.0 - w.b))


def _safe_log_ratio(num, den, saturation):
    if num == 0.0 and den == 0.0:
        return 0.0
    if den == 0.0:
        return saturation
    if num == 0.0:
        return -saturation
    return max(-saturation, min(saturation, math.log(num) - math.log(den)))


def llr(w: ChannelModel, y, saturation=DEFAULT_SATURATION) -> float:
    """ln W(y|0)/W(y|1) for a hard observation ``y``.

    Infinite ratios are replaced by +-``saturation``.
    """
    if y == PUNCTURED:
        return 0.0
    if y == ERASED:
        if w.kind != "BEC":
            raise ValueError("erasure observed on a non-erasure channel")
        return 0.0
    if y not in (0, 1):
        raise ValueError(f"invalid observation {y!r}")
    if w.kind == "BEC":
        return saturation if y == 0 else -saturation
    if w.flipped:
        y = 1 - y
    P = w.transition_matrix()
    return _safe_log_ratio(P[0, y], P[1, y], saturation)


def llr_table(channels, saturation=DEFAULT_SATURATION):
    """(N, 2) array whose row i holds the LLRs of reading 0 and 1 on channel i."""
    out = np.empty((len(channels), 2))
    for i, w in enumerate(channels):
        out[i, 0] = llr(w, 0, saturation)
        out[i, 1] = llr(w, 1, saturation)
    return out
