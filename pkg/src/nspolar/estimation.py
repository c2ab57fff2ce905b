"""Characterizing crossbar cells as binary channels.

Two steps: one detection threshold per wordline fitted on training reads,
then per-cell crossover probabilities counted under those thresholds.  A
cell reads as 1 (HRS) when its sensed current is below its row's threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import crossbar
from .channels import ChannelModel, binary_entropy
from .crossbar import CrossbarConfig

DEFAULT_TRIALS = 2000
DEFAULT_HOLDOUT = 500
NEWTON_MAX_STEPS = 100
NEWTON_GRAD_TOL = 1e-10


@dataclass
class TrainingSet:
    cfg: CrossbarConfig
    currents: np.ndarray  # (T, N1, N2)
    bits: np.ndarray  # (T, N1, N2)

    @property
    def T(self):
        return self.bits.shape[0]


def random_arrays(cfg, T, seed, forced_ones=None, stream=0):
    """T uniform random bit matrices; cells in ``forced_ones`` are set to 1.

    Array t is drawn from its own stream so that any subset can be
    regenerated independently of the others.
    """
    out = np.empty((T, cfg.N1, cfg.N2), dtype=np.uint8)
    for t in range(T):
        out[t] = np.random.default_rng([seed, stream, t]).integers(0, 2, (cfg.N1, cfg.N2))
    if forced_ones is not None:
        out[:, np.asarray(forced_ones, dtype=bool)] = 1
    return out


def generate_training(cfg, T=DEFAULT_TRIALS, seed=0, forced_ones=None, stream=0) -> TrainingSet:
    """Read T random arrays.

    ``forced_ones`` is an (N1, N2) boolean mask of cells that always store 1,
    used to train under the same statistics as a punctured deployment.
    """
    bits = random_arrays(cfg, T, seed, forced_ones, stream)
    return TrainingSet(cfg, crossbar.read_arrays(cfg, bits), bits)


def detect(currents, thresholds):
    """Hard decisions: 1 where the current is below the row threshold."""
    thr = np.asarray(thresholds)[:, None]
    return (np.asarray(currents) < thr).astype(np.uint8)


def uncoded_ber(train: TrainingSet, thresholds) -> float:
    return float(np.mean(detect(train.currents, thresholds) != train.bits))


# -- thresholds -------------------------------------------------------------


def _ideal_midpoint(cfg):
    return 0.5 * (cfg.Vread / cfg.R_LRS + cfg.Vread / cfg.R_HRS)


def logistic_boundary(x, y, max_steps=NEWTON_MAX_STEPS, grad_tol=NEWTON_GRAD_TOL):
    """Decision boundary of a 1-D logistic regression P(y=1|x).

    Fitted by Newton steps with backtracking on the mean negative
    log-likelihood, on a standardized feature.  Returns (boundary, converged).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu, sd = x.mean(), x.std()
    if sd == 0.0:
        return float(mu), False
    t = (x - mu) / sd
    X = np.stack([np.ones_like(t), t], axis=1)

    def loss(w):
        z = X @ w
        return float(np.mean(np.logaddexp(0.0, z) - y * z))

    w = np.zeros(2)
    f = loss(w)
    converged = False
    for _ in range(max_steps):
        p = 0.5 * (1.0 + np.tanh(0.5 * (X @ w)))
        grad = X.T @ (p - y) / y.size
        if np.linalg.norm(grad) <= grad_tol:
            converged = True
            break
        s = p * (1.0 - p)
        H = (X * s[:, None]).T @ X / y.size + 1e-12 * np.eye(2)
        step = np.linalg.solve(H, grad)
        lam = 1.0
        while lam > 1e-12:
            w_new = w - lam * step
            f_new = loss(w_new)
            if f_new <= f - 1e-4 * lam * float(grad @ step):
                break
            lam *= 0.5
        else:
            break
        w, f = w_new, f_new
    if w[1] == 0.0:
        return float(mu), converged
    return float(mu - sd * w[0] / w[1]), converged


def exhaustive_threshold(x, y):
    """Threshold minimizing the count of (x < t) != y, and that count.

    Candidates are midpoints between consecutive distinct currents plus the
    two outer limits; ties take the smallest candidate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    # cutting before sorted position m predicts 1 for xs[:m]
    zeros_below = np.concatenate([[0], np.cumsum(ys == 0)])
    ones_below = np.concatenate([[0], np.cumsum(ys == 1)])
    errors = zeros_below + (ones_below[-1] - ones_below)
    valid = np.ones(xs.size + 1, dtype=bool)
    valid[1:-1] = xs[1:] > xs[:-1]
    errors = np.where(valid, errors, np.iinfo(np.int64).max)
    m = int(np.argmin(errors))
    if m == 0:
        t = xs[0] - 1.0
    elif m == xs.size:
        t = xs[-1] + 1.0
    else:
        t = 0.5 * (xs[m - 1] + xs[m])
    return float(t), int(errors[m])


def fit_thresholds(train: TrainingSet, method="logistic"):
    """Per-row thresholds and a per-row flag marking degenerate rows."""
    if train.T < 100:
        raise ValueError("need at least 100 training arrays")
    N1 = train.cfg.N1
    thr = np.empty(N1)
    flags = np.zeros(N1, dtype=bool)
    for i in range(N1):
        x = train.currents[:, i, :].ravel()
        y = train.bits[:, i, :].ravel()
        if np.all(y == y[0]):
            thr[i] = _ideal_midpoint(train.cfg)
            flags[i] = True
        elif method == "logistic":
            thr[i] = logistic_boundary(x, y)[0]
        elif method == "exhaustive":
            thr[i] = exhaustive_threshold(x, y)[0]
        else:
            raise ValueError(f"unknown threshold method {method!r}")
    return thr, flags


# -- per-cell channels -------------------------------------------------------


@dataclass
class CellCharacterization:
    """Per-cell channel estimates in physical (row-major) order.

    ``p`` is set in BSC mode; ``p01``/``p10`` in BAC mode.  ``flags`` marks
    cells whose estimate rests on the smoothing clamp alone.
    """

    thresholds: np.ndarray
    mode: str
    T: int
    p: np.ndarray | None = None
    p01: np.ndarray | None = None
    p10: np.ndarray | None = None
    flags: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("BSC", "BAC"):
            raise ValueError(f"unknown mode {self.mode!r}")
        arrays = [self.p] if self.mode == "BSC" else [self.p01, self.p10]
        for a in arrays:
            if a is None or np.any((a < 0.0) | (a >= 1.0)):
                raise ValueError("probabilities must lie in [0, 1)")

    @property
    def shape(self):
        return (self.p if self.mode == "BSC" else self.p01).shape

    def channels(self):
        """ChannelModel list indexed by i*N2 + j."""
        if self.mode == "BSC":
            return [ChannelModel.bsc(v) for v in self.p.ravel()]
        return [ChannelModel.bac(a, b) for a, b in zip(self.p01.ravel(), self.p10.ravel())]

    def to_dict(self):
        d = {"mode": self.mode, "T": self.T, "thresholds": self.thresholds.tolist(), "meta": self.meta}
        for name in ("p", "p01", "p10", "flags"):
            v = getattr(self, name)
            d[name] = None if v is None else v.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        def arr(name, dtype=float):
            return None if d.get(name) is None else np.array(d[name], dtype=dtype)

        return cls(
            thresholds=np.array(d["thresholds"], dtype=float),
            mode=d["mode"],
            T=int(d["T"]),
            p=arr("p"),
            p01=arr("p01"),
            p10=arr("p10"),
            flags=arr("flags", bool),
            meta=d.get("meta", {}),
        )


def save_characterization(char: CellCharacterization, path):
    with open(path, "w") as fh:
        json.dump({"format": "nspolar-char/1", **char.to_dict()}, fh, indent=1)


def load_characterization(path) -> CellCharacterization:
    with open(path) as fh:
        d = json.load(fh)
    if d.get("format") != "nspolar-char/1":
        raise ValueError(f"{path}: not a cell characterization file")
    return CellCharacterization.from_dict(d)


def error_counts(train: TrainingSet, thresholds):
    """Per-cell (errors given 0, count of 0, errors given 1, count of 1)."""
    wrong = detect(train.currents, thresholds) != train.bits
    is0 = train.bits == 0
    e01 = np.sum(wrong & is0, axis=0)
    e10 = np.sum(wrong & ~is0, axis=0)
    n0 = np.sum(is0, axis=0)
    return e01, n0, e10, train.T - n0


def clamp_rate(errors, count):
    """errors/count, with 0 replaced by 1/(2 count) and count replaced by count - 1/2.

    A cell with no observations gets 1/2.  Returns (rate, clamped_mask).
    """
    errors = np.asarray(errors, dtype=float)
    count = np.asarray(count, dtype=float)
    safe = np.maximum(count, 1.0)
    rate = errors / safe
    low = errors == 0
    high = (errors == count) & (count > 0)
    rate = np.where(low, 0.5 / safe, rate)
    rate = np.where(high, 1.0 - 0.5 / safe, rate)
    rate = np.where(count == 0, 0.5, rate)
    return rate, low | high | (count == 0)


def estimate_bsc(train: TrainingSet, thresholds) -> CellCharacterization:
    e01, n0, e10, n1 = error_counts(train, thresholds)
    p, flags = clamp_rate(e01 + e10, np.full(e01.shape, train.T))
    return CellCharacterization(np.asarray(thresholds, float), "BSC", train.T, p=p, flags=flags)


def estimate_bac(train: TrainingSet, thresholds) -> CellCharacterization:
    e01, n0, e10, n1 = error_counts(train, thresholds)
    p01, f0 = clamp_rate(e01, n0)
    p10, f1 = clamp_rate(e10, n1)
    return CellCharacterization(
        np.asarray(thresholds, float), "BAC", train.T, p01=p01, p10=p10, flags=f0 | f1
    )


def characterize(cfg, T=DEFAULT_TRIALS, seed=0, mode="BSC", forced_ones=None, method="logistic"):
    """Train thresholds and estimate per-cell channels in one call."""
    train = generate_training(cfg, T, seed, forced_ones)
    thr, _ = fit_thresholds(train, method)
    est = estimate_bsc if mode == "BSC" else estimate_bac
    char = est(train, thr)
    char.meta.update({"Rw": cfg.Rw, "N1": cfg.N1, "N2": cfg.N2, "seed": seed})
    return char


# -- design point for the regular-polar baseline -----------------------------


def inverse_binary_entropy(h, tol=1e-12):
    """The p in [0, 1/2] with h(p) = h, by bisection."""
    if not 0.0 <= h <= 1.0:
        raise ValueError("entropy must lie in [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def average_design_channel(p) -> float:
    """Crossover p_avg whose capacity equals the mean capacity of BSC(p_i)."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0.0) | (p > 0.5)):
        raise ValueError("crossover probabilities must lie in [0, 1/2]")
    return inverse_binary_entropy(float(np.mean(binary_entropy(p))))
