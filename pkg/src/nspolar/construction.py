"""Non-stationary polar code construction.

Permutations are integer arrays ``perm`` with the convention that codeword
symbol ``x[i]`` is stored on (travels through) physical channel ``perm[i]``.

Information-set selection freezes the ``N - k`` synthesized channels with
the *largest* Bhattacharyya bound.  Some write-ups of this recursion say
"lowest"; that reading would put data on the least reliable channels, so it
is treated as an erratum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelModel, bhattacharyya, symmetric_capacity

PERM_KINDS = ("identity", "bitreversal", "ordered", "ordered_bitreversal", "explicit", "random")


def _log2_exact(N):
    n = int(N).bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


# -- permutations -----------------------------------------------------------


def bit_reversal(n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    N = 1 << n
    idx = np.arange(N)
    out = np.zeros(N, dtype=np.int64)
    for b in range(n):
        out |= ((idx >> b) & 1) << (n - 1 - b)
    return out


def is_permutation(perm) -> bool:
    perm = np.asarray(perm)
    return perm.ndim == 1 and np.array_equal(np.sort(perm), np.arange(perm.size))


def check_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    if not is_permutation(perm):
        raise ValueError("not a permutation of 0..N-1")
    return perm


def inverse(perm) -> np.ndarray:
    perm = check_permutation(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def compose(a, b) -> np.ndarray:
    """(a o b)(i) = a(b(i))."""
    a = check_permutation(a)
    b = check_permutation(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a[b]


def ordering_permutation(channels, key="capacity") -> np.ndarray:
    """Sort physical channels from least to most reliable (stable on ties).

    ``key="capacity"`` orders by symmetric capacity; ``key="bhattacharyya"``
    orders by decreasing Bhattacharyya parameter.  The two can disagree for
    asymmetric channels.
    """
    if key == "capacity":
        score = np.array([symmetric_capacity(w) for w in channels])
    elif key == "bhattacharyya":
        score = -np.array([bhattacharyya(w) for w in channels])
    else:
        raise ValueError(f"unknown ordering key {key!r}")
    return np.argsort(score, kind="stable").astype(np.int64)


def random_permutation(N, seed) -> np.ndarray:
    return np.random.default_rng(seed).permutation(N).astype(np.int64)


# -- Bhattacharyya recursion ------------------------------------------------


@dataclass
class ReliabilityTable:
    """Per-index upper bounds on Z(W^(i)), stored as natural logs."""

    log_z: np.ndarray

    @property
    def z(self):
        return np.exp(self.log_z)

    def __len__(self):
        return self.log_z.size


def _log_bound_minus(la, lb):
    # log(a + b - ab) from log a, log b without leaving the log domain
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        m = np.logaddexp(la, lb)
        out = m + np.log1p(-np.exp(la + lb - m))
    return np.where(np.isneginf(m), -np.inf, out)


def zn_recursion_log(log_z0) -> ReliabilityTable:
    lz = np.array(log_z0, dtype=float)
    N = lz.size
    n = _log2_exact(N)
    if np.any(lz > 1e-12):
        raise ValueError("Bhattacharyya parameters must lie in [0, 1]")
    lz = np.minimum(lz, 0.0)
    for level in range(1, n + 1):
        half = 1 << (level - 1)
        blocks = lz.reshape(N >> level, 2, half)
        la = blocks[:, 0, :].copy()
        lb = blocks[:, 1, :].copy()
        blocks[:, 0, :] = np.minimum(_log_bound_minus(la, lb), 0.0)
        blocks[:, 1, :] = la + lb
        lz = blocks.reshape(N)
    return ReliabilityTable(lz)


def zn_recursion(z0) -> ReliabilityTable:
    z0 = np.asarray(z0, dtype=float)
    if np.any((z0 < 0.0) | (z0 > 1.0)):
        raise ValueError("Bhattacharyya parameters must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        return zn_recursion_log(np.log(z0))


def select_information_set(table, k: int, n_punctured: int = 0) -> np.ndarray:
    """Return the sorted frozen set: the N-k indices with the largest Z bound.

    Ties freeze the lower index first.
    """
    log_z = table.log_z if isinstance(table, ReliabilityTable) else np.asarray(table, dtype=float)
    N = log_z.size
    if k < 0 or k > N - n_punctured:
        raise ValueError(f"k={k} must lie in [0, N - Np] = [0, {N - n_punctured}]")
    order = np.lexsort((np.arange(N), -log_z))
    return np.sort(order[: N - k]).astype(np.int64)


# -- puncturing -------------------------------------------------------------


@dataclass
class PuncturePattern:
    """``w[i] = 0`` marks codeword position i as punctured."""

    w: np.ndarray

    @property
    def n_punctured(self):
        return int(self.w.size - np.count_nonzero(self.w))

    @property
    def positions(self):
        return np.flatnonzero(self.w == 0)

    @classmethod
    def none(cls, N):
        return cls(np.ones(N, dtype=np.uint8))


def qup_pattern(N: int, n_punctured: int) -> PuncturePattern:
    """Quasi-uniform puncturing: zero the first Np entries, then bit-reverse."""
    n = _log2_exact(N)
    if not 0 <= n_punctured < N:
        raise ValueError(f"Np={n_punctured} must satisfy 0 <= Np < N={N}")
    w_init = np.ones(N, dtype=np.uint8)
    w_init[:n_punctured] = 0
    w = np.empty_like(w_init)
    w[bit_reversal(n)] = w_init
    return PuncturePattern(w)


def ones_frequency(N: int, n_punctured: int) -> float:
    """Expected fraction of stored 1s when punctured cells hold 1."""
    if not 0 <= n_punctured <= N:
        raise ValueError("need 0 <= Np <= N")
    return 0.5 + n_punctured / (2.0 * N)


# -- code specification -----------------------------------------------------


@dataclass
class CodeSpec:
    n: int
    k: int
    frozen_set: np.ndarray
    permutation: np.ndarray
    puncture: PuncturePattern
    channels: list = field(default_factory=list)
    frozen_values: np.ndarray | None = None
    log_z: np.ndarray | None = None

    def __post_init__(self):
        N = 1 << self.n
        self.frozen_set = np.asarray(self.frozen_set, dtype=np.int64)
        self.permutation = check_permutation(self.permutation)
        if self.frozen_values is None:
            self.frozen_values = np.zeros(self.frozen_set.size, dtype=np.uint8)
        self.frozen_values = np.asarray(self.frozen_values, dtype=np.uint8)
        if self.permutation.size != N or self.puncture.w.size != N:
            raise ValueError("permutation / puncture length must equal N")
        if self.frozen_set.size != N - self.k or self.frozen_values.size != self.frozen_set.size:
            raise ValueError("frozen set must have N - k entries with matching values")
        if self.channels and len(self.channels) != N:
            raise ValueError("need one channel per physical position")

    @property
    def N(self):
        return 1 << self.n

    @property
    def frozen_mask(self):
        m = np.zeros(self.N, dtype=np.bool_)
        m[self.frozen_set] = True
        return m

    @property
    def info_set(self):
        return np.flatnonzero(~self.frozen_mask)

    @property
    def frozen_word(self):
        """Length-N vector holding frozen values at frozen indices, 0 elsewhere."""
        u = np.zeros(self.N, dtype=np.uint8)
        u[self.frozen_set] = self.frozen_values
        return u

    def to_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "permutation": self.permutation.tolist(),
            "frozen_set": self.frozen_set.tolist(),
            "frozen_values": self.frozen_values.tolist(),
            "puncture": self.puncture.w.astype(int).tolist(),
            "channels": [[w.kind, w.a, w.b, w.flipped] for w in self.channels],
            "log_z": None if self.log_z is None else [float(v) for v in self.log_z],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n=int(d["n"]),
            k=int(d["k"]),
            frozen_set=np.array(d["frozen_set"], dtype=np.int64),
            permutation=np.array(d["permutation"], dtype=np.int64),
            puncture=PuncturePattern(np.array(d["puncture"], dtype=np.uint8)),
            channels=[ChannelModel(kind, a, b, bool(fl)) for kind, a, b, fl in d.get("channels", [])],
            frozen_values=np.array(d["frozen_values"], dtype=np.uint8),
            log_z=None if d.get("log_z") is None else np.array(d["log_z"], dtype=float),
        )


def save_code(spec: CodeSpec, path):
    with open(path, "w") as fh:
        json.dump({"format": "nspolar-code/1", **spec.to_dict()}, fh, indent=1)


def load_code(path) -> CodeSpec:
    with open(path) as fh:
        d = json.load(fh)
    if d.get("format") != "nspolar-code/1":
        raise ValueError(f"{path}: not an nspolar code file")
    return CodeSpec.from_dict(d)


def make_permutation(channels, perm_kind="identity", perm=None, seed=None, order_key="capacity"):
    N = len(channels)
    n = _log2_exact(N)
    if perm_kind == "identity":
        return np.arange(N, dtype=np.int64)
    if perm_kind == "bitreversal":
        return bit_reversal(n)
    if perm_kind == "ordered":
        return ordering_permutation(channels, order_key)
    if perm_kind == "ordered_bitreversal":
        return compose(ordering_permutation(channels, order_key), bit_reversal(n))
    if perm_kind == "explicit":
        if perm is None:
            raise ValueError("explicit permutation requires perm=")
        perm = check_permutation(perm)
        if perm.size != N:
            raise ValueError("explicit permutation has the wrong length")
        return perm
    if perm_kind == "random":
        if seed is None:
            raise ValueError("random permutation requires seed=")
        return random_permutation(N, seed)
    raise ValueError(f"unknown permutation kind {perm_kind!r}")


def build_code(
    channels,
    k: int,
    perm_kind="identity",
    n_punctured: int = 0,
    *,
    perm=None,
    seed=None,
    order_key="capacity",
) -> CodeSpec:
    """Construct a (possibly punctured) non-stationary polar code.

    ``channels[j]`` is the channel at physical position j.  Punctured codeword
    positions follow the quasi-uniform pattern and enter the recursion with
    Z = 1.
    """
    channels = list(channels)
    N = len(channels)
    n = _log2_exact(N)
    permutation = make_permutation(channels, perm_kind, perm, seed, order_key)
    puncture = qup_pattern(N, n_punctured) if n_punctured else PuncturePattern.none(N)
    z_phys = np.array([bhattacharyya(w) for w in channels])
    z0 = z_phys[permutation]
    z0[puncture.w == 0] = 1.0
    table = zn_recursion(z0)
    frozen = select_information_set(table, k, n_punctured)
    return CodeSpec(n, k, frozen, permutation, puncture, channels, log_z=table.log_z)
