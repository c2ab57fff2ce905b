"""Experiment runners: synthetic BSC channels, crossbar arrays, permutation classes.

Every runner takes an ``ExperimentConfig`` and returns ``(rows, checks)``:
``rows`` are ``ResultRow`` records and ``checks`` is a list of ``Check``
outcomes for the orderings and identities the experiment is expected to
show.  Randomness comes from counter-keyed streams
``default_rng([seed, stream, block])`` so that every block of frames can be
regenerated on its own and doubling a trial count only appends blocks.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, codec, crossbar, estimation, oracle
from .channels import ChannelModel, llr_table
from .construction import CodeSpec, bit_reversal, build_code
from .crossbar import CrossbarConfig

EXPERIMENTS = ("construct", "synthetic-bsc", "crossbar-ber", "bsc-vs-bac", "puncture-sweep", "permclass", "characterize")
PERM_LABELS = {
    "identity": "identity",
    "bitreversal": "psi",
    "ordered": "ord",
    "ordered_bitreversal": "ord_psi",
}

# stream ids; scenarios of one experiment share data and noise streams
_DATA_STREAM = 0
_TRAIN_STREAM = 1
_RANDOM_PERM_STREAM = 2
_PERMCLASS_STREAM = 3


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    out: str = "results/run"
    # code
    n: int = 10
    rate: float = 0.5
    perm_kind: str = "ordered_bitreversal"
    n_punctured: int = 0
    order_key: str = "capacity"
    minsum: bool = False
    # synthetic BSC
    p_centers: tuple = (0.05, 0.065, 0.08, 0.095, 0.11)
    max_dev: float = 0.045
    n_random_perms: int = 200
    frames_per_random_perm: int = 50
    # trial counts
    frames: int = 10000
    max_frames: int = 10000
    target_errors: int = 100
    block: int = 500
    # crossbar
    N1: int = 32
    N2: int = 32
    Rw: tuple = (25.0, 35.0)
    R_LRS: float = 1e3
    R_HRS: float = 1e6
    Vread: float = 1.0
    solver_rel_tol: float = 1e-10
    train_trials: int = 2000
    threshold_method: str = "logistic"
    mode: str = "BSC"
    perm_kinds: tuple = ("identity", "bitreversal", "ordered", "ordered_bitreversal")
    np_grid: tuple = tuple(range(0, 121, 8))
    # permutation classes
    permclass_trials: int = 1000
    # construct / characterize
    char_file: str = ""

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.kind!r}")
        if self.seed is None:
            raise ValueError("seed is mandatory")
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")
        if self.frames < 1 or self.block < 1 or self.max_frames < self.frames:
            raise ValueError("need 1 <= frames <= max_frames and block >= 1")
        if self.mode not in ("BSC", "BAC", "both"):
            raise ValueError("mode must be BSC, BAC or both")
        for name in ("p_centers", "Rw", "perm_kinds", "np_grid"):
            v = getattr(self, name)
            setattr(self, name, tuple(v) if isinstance(v, (list, tuple)) else (v,))

    def crossbar(self, Rw) -> CrossbarConfig:
        return CrossbarConfig(self.N1, self.N2, float(Rw), self.R_LRS, self.R_HRS, self.Vread, self.solver_rel_tol)

    def to_dict(self):
        return dataclasses.asdict(self)

    def canonical(self):
        d = self.to_dict()
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def code_dimension(N, rate):
    """k = floor(rate * N), guarding against float round-off."""
    return int(math.floor(rate * N + 1e-9))


@dataclass
class ResultRow:
    experiment: str
    scenario: str
    mode: str
    sweep_name: str
    sweep_value: float
    ber: float
    fer: float
    frames: int
    bits: int
    bit_errors: int
    frame_errors: int
    uncoded_ber: float = float("nan")
    config_hash: str = ""

    def binomial_sd(self):
        p = self.ber
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.bits) if self.bits else float("nan")


CSV_COLUMNS = [f.name for f in dataclasses.fields(ResultRow)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Tally:
    frames: int = 0
    bits: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    error_vector: list = field(default_factory=list)

    def add(self, errors):
        """``errors`` is a (B, k) boolean error matrix."""
        per_frame = errors.any(axis=1)
        self.frames += errors.shape[0]
        self.bits += errors.size
        self.bit_errors += int(errors.sum())
        self.frame_errors += int(per_frame.sum())
        self.error_vector.append(per_frame)

    def merge(self, other):
        self.frames += other.frames
        self.bits += other.bits
        self.bit_errors += other.bit_errors
        self.frame_errors += other.frame_errors
        self.error_vector.extend(other.error_vector)

    @property
    def ber(self):
        return self.bit_errors / self.bits if self.bits else float("nan")

    @property
    def fer(self):
        return self.frame_errors / self.frames if self.frames else float("nan")

    def frame_indicator(self):
        if not self.error_vector:
            return np.zeros(0, dtype=bool)
        return np.concatenate(self.error_vector)

    def row(self, cfg, scenario, mode, sweep_name, sweep_value, uncoded=float("nan")):
        return ResultRow(
            cfg.kind, scenario, mode, sweep_name, float(sweep_value), self.ber, self.fer,
            self.frames, self.bits, self.bit_errors, self.frame_errors, float(uncoded), cfg.hash(),
        )


def _keep_going(cfg, done, errors):
    return done < cfg.frames or (errors < cfg.target_errors and done < cfg.max_frames)


# -- synthetic BSC ----------------------------------------------------------


def linear_bsc_profile(center, max_dev, N):
    """Crossover probabilities from center+dev down to center-dev (descending Z)."""
    p = np.linspace(center + max_dev, center - max_dev, N)
    return np.clip(p, 0.0, 0.5)


def simulate_frames(spec: CodeSpec, p_true, table, rng, B, minsum=False):
    """One block of B shared-noise frames over independent BSCs.

    Returns (systematic errors, non-systematic errors), each (B, k) boolean.
    """
    d = rng.integers(0, 2, (B, spec.k), dtype=np.uint8)
    x, u = codec.systematic_encode(spec, d)
    z = codec.map_to_physical(spec, x)
    y = z ^ (rng.random(z.shape) < p_true[None, :]).astype(np.uint8)
    llrs = codec.map_from_physical(spec, y, table)
    u_hat, d_hat, x_hat = codec.sc_decode(spec, llrs, minsum=minsum)
    info = spec.info_set
    return x_hat[:, info] != d, d_hat != u[:, info]


def evaluate_bsc(cfg, spec, p_true, table, stream, blocks=None):
    """Systematic and non-systematic tallies over the configured frames."""
    sys_t, non_t = Tally(), Tally()
    b = 0
    while True:
        if blocks is not None:
            if b >= len(blocks):
                break
            B = blocks[b]
        elif _keep_going(cfg, sys_t.frames, sys_t.bit_errors):
            B = cfg.block
        else:
            break
        rng = np.random.default_rng([cfg.seed, stream, b])
        es, en = simulate_frames(spec, p_true, table, rng, B, cfg.minsum)
        sys_t.add(es)
        non_t.add(en)
        b += 1
    return sys_t, non_t


def _counting_checks(rows, N):
    checks = []
    for r in rows:
        if r.frames == 0:
            continue
        k = r.bits // r.frames
        ok = r.fer >= r.ber - 1e-15 and r.ber >= r.fer / max(k, 1) - 1e-15
        if not ok:
            checks.append(Check(f"counting identity {r.scenario} {r.sweep_value}", False, f"FER={r.fer} BER={r.ber}"))
    if not checks:
        checks.append(Check("FER >= BER >= FER/k on every row", True))
    return checks


def run_synthetic_bsc(cfg: ExperimentConfig):
    N = 1 << cfg.n
    k = code_dimension(N, cfg.rate)
    rows, checks = [], []
    for center in cfg.p_centers:
        p = linear_bsc_profile(center, cfg.max_dev, N)
        chans = [ChannelModel.bsc(v) for v in p]
        table = llr_table(chans)
        results = {}

        # regular polar code: designed and decoded for the average channel
        p_avg = estimation.average_design_channel(p)
        avg = [ChannelModel.bsc(p_avg)] * N
        reg = build_code(avg, k, "identity")
        results["regular"] = evaluate_bsc(cfg, reg, p, llr_table(avg), _DATA_STREAM)

        for kind in ("identity", "bitreversal"):
            spec = build_code(chans, k, kind)
            results[PERM_LABELS[kind]] = evaluate_bsc(cfg, spec, p, table, _DATA_STREAM)

        rs, rn = Tally(), Tally()
        per_perm = []
        for r in range(cfg.n_random_perms):
            spec = build_code(chans, k, "random", seed=[cfg.seed, _RANDOM_PERM_STREAM, r])
            ts, tn = evaluate_bsc(
                cfg, spec, p, table, _RANDOM_PERM_STREAM * 1000 + r, blocks=[cfg.frames_per_random_perm]
            )
            per_perm.append(ts.ber)
            rs.merge(ts)
            rn.merge(tn)
        if cfg.n_random_perms:
            results["random_avg"] = (rs, rn)

        for name, (ts, tn) in results.items():
            rows.append(ts.row(cfg, name, "systematic", "p_center", center))
            rows.append(tn.row(cfg, name, "nonsystematic", "p_center", center))
            same = np.array_equal(ts.frame_indicator(), tn.frame_indicator())
            checks.append(Check(f"p={center} {name}: systematic FER == non-systematic FER", same))
        sys_ber = {name: ts.ber for name, (ts, _) in results.items()}
        checks.append(
            Check(
                f"p={center}: BER(psi) < BER(regular)",
                sys_ber["psi"] < sys_ber["regular"],
                f"{sys_ber['psi']:.3e} vs {sys_ber['regular']:.3e}",
            )
        )
        if "random_avg" in sys_ber:
            checks.append(
                Check(
                    f"p={center}: BER(psi) < random-permutation average",
                    sys_ber["psi"] < sys_ber["random_avg"],
                    f"{sys_ber['psi']:.3e} vs {sys_ber['random_avg']:.3e}"
                    f" (best single random {min(per_perm):.3e})",
                )
            )
    checks += _counting_checks(rows, N)
    return rows, checks


# -- crossbar pipeline ------------------------------------------------------


def forced_ones_mask(spec: CodeSpec, N1, N2):
    """(N1, N2) mask of cells that store punctured symbols."""
    m = np.zeros(N1 * N2, dtype=bool)
    m[spec.permutation[spec.puncture.w == 0]] = True
    return m.reshape(N1, N2)


@dataclass
class CrossbarTally:
    coded: Tally = field(default_factory=Tally)
    raw_bits: int = 0
    raw_errors: int = 0

    @property
    def uncoded_ber(self):
        return self.raw_errors / self.raw_bits if self.raw_bits else float("nan")


def simulate_arrays(xcfg, spec, char, rng, B, minsum=False):
    """Store, read, detect and decode B random arrays.

    Returns (systematic error matrix, raw detection errors, raw cell count);
    raw counts exclude punctured cells.
    """
    d = rng.integers(0, 2, (B, spec.k), dtype=np.uint8)
    x, _ = codec.systematic_encode(spec, d)
    z = codec.map_to_physical(spec, x)
    stored = z.reshape(B, xcfg.N1, xcfg.N2)
    currents = crossbar.read_arrays(xcfg, stored)
    y = estimation.detect(currents, char.thresholds).reshape(B, -1)
    live = np.ones(spec.N, dtype=bool)
    live[spec.permutation[spec.puncture.w == 0]] = False
    raw_err = int(np.sum((y != z)[:, live]))
    table = llr_table(char.channels())
    llrs = codec.map_from_physical(spec, y, table)
    _, _, x_hat = codec.sc_decode(spec, llrs, minsum=minsum)
    return x_hat[:, spec.info_set] != d, raw_err, int(B * live.sum())


def evaluate_crossbar(cfg, xcfg, spec, char, stream=_DATA_STREAM):
    t = CrossbarTally()
    b = 0
    while _keep_going(cfg, t.coded.frames, t.coded.bit_errors):
        rng = np.random.default_rng([cfg.seed, stream, b])
        err, raw_err, raw_n = simulate_arrays(xcfg, spec, char, rng, cfg.block, cfg.minsum)
        t.coded.add(err)
        t.raw_errors += raw_err
        t.raw_bits += raw_n
        b += 1
    return t


def train(cfg, xcfg, forced=None):
    """Training reads and thresholds shared by both channel modes."""
    tr = estimation.generate_training(xcfg, cfg.train_trials, cfg.seed, forced, stream=_TRAIN_STREAM)
    thr, _ = estimation.fit_thresholds(tr, cfg.threshold_method)
    return tr, thr


def _char(tr, thr, mode):
    return estimation.estimate_bsc(tr, thr) if mode == "BSC" else estimation.estimate_bac(tr, thr)


def _modes(cfg):
    return ("BSC", "BAC") if cfg.mode == "both" else (cfg.mode,)


def _ordered(a, b, sd, slack=2.0):
    """a <= b within ``slack`` combined binomial standard deviations."""
    return a <= b + slack * sd


def run_crossbar_ber(cfg: ExperimentConfig):
    N = cfg.N1 * cfg.N2
    k = code_dimension(N, cfg.rate)
    rows, checks = [], []
    for Rw in cfg.Rw:
        xcfg = cfg.crossbar(Rw)
        tr, thr = train(cfg, xcfg)
        for mode in _modes(cfg):
            char = _char(tr, thr, mode)
            chans = char.channels()
            res = {}
            for kind in cfg.perm_kinds:
                spec = build_code(chans, k, kind, order_key=cfg.order_key, seed=[cfg.seed, _RANDOM_PERM_STREAM])
                t = evaluate_crossbar(cfg, xcfg, spec, char)
                res[kind] = t
                rows.append(t.coded.row(cfg, PERM_LABELS.get(kind, kind), mode, "Rw", Rw, t.uncoded_ber))
            chain = [c for c in ("ordered_bitreversal", "ordered", "identity") if c in res]
            for lo, hi in zip(chain, chain[1:]):
                a, b = res[lo].coded, res[hi].coded
                sd = math.sqrt(_var(a) + _var(b))
                checks.append(
                    Check(
                        f"Rw={Rw} {mode}: BER({PERM_LABELS[lo]}) <= BER({PERM_LABELS[hi]}) within 2 sd",
                        _ordered(a.ber, b.ber, sd),
                        f"{a.ber:.3e} vs {b.ber:.3e} (sd {sd:.1e})",
                    )
                )
    checks += _counting_checks(rows, N)
    return rows, checks


def _var(t: Tally):
    p = t.ber
    return p * (1.0 - p) / t.bits if t.bits else 0.0


def run_bsc_vs_bac(cfg: ExperimentConfig):
    N = cfg.N1 * cfg.N2
    k = code_dimension(N, cfg.rate)
    rows, checks = [], []
    gains = []
    for Rw in cfg.Rw:
        xcfg = cfg.crossbar(Rw)
        tr, thr = train(cfg, xcfg)
        res = {}
        for mode in ("BSC", "BAC"):
            char = _char(tr, thr, mode)
            spec = build_code(char.channels(), k, cfg.perm_kind, order_key=cfg.order_key, seed=[cfg.seed, _RANDOM_PERM_STREAM])
            t = evaluate_crossbar(cfg, xcfg, spec, char)
            res[mode] = t.coded
            rows.append(t.coded.row(cfg, PERM_LABELS.get(cfg.perm_kind, cfg.perm_kind), mode, "Rw", Rw, t.uncoded_ber))
        a, b = res["BAC"], res["BSC"]
        sd = math.sqrt(_var(a) + _var(b))
        checks.append(
            Check(f"Rw={Rw}: BER(BAC) <= BER(BSC) within 2 sd", _ordered(a.ber, b.ber, sd), f"{a.ber:.3e} vs {b.ber:.3e}")
        )
        gains.append(b.ber / a.ber if a.ber > 0 else float("inf"))
    finite = [g for g in gains if math.isfinite(g)]
    checks.append(
        Check(
            "BSC/BAC gain non-increasing in Rw",
            all(x >= y for x, y in zip(finite, finite[1:])),
            ", ".join(f"{g:.3g}" for g in gains),
        )
    )
    checks += _counting_checks(rows, N)
    return rows, checks


def run_puncture_sweep(cfg: ExperimentConfig):
    """BER against the number of punctured bits at fixed k.

    The permutation is fixed from an unbiased characterization; each grid
    point then retrains with the punctured cells forced to 1 and rebuilds the
    code on the biased estimates with that same permutation.
    """
    N = cfg.N1 * cfg.N2
    k = code_dimension(N, cfg.rate)
    rows, checks = [], []
    for Rw in cfg.Rw:
        xcfg = cfg.crossbar(Rw)
        tr0, thr0 = train(cfg, xcfg)
        for mode in _modes(cfg):
            base = build_code(_char(tr0, thr0, mode).channels(), k, cfg.perm_kind, order_key=cfg.order_key, seed=[cfg.seed, _RANDOM_PERM_STREAM])
            bers = []
            for Np in cfg.np_grid:
                if Np:
                    probe = build_code(base.channels, k, "explicit", Np, perm=base.permutation)
                    tr, thr = train(cfg, xcfg, forced_ones_mask(probe, cfg.N1, cfg.N2))
                else:
                    tr, thr = tr0, thr0
                char = _char(tr, thr, mode)
                spec = build_code(char.channels(), k, "explicit", Np, perm=base.permutation)
                t = evaluate_crossbar(cfg, xcfg, spec, char)
                bers.append(t.coded.ber)
                rows.append(t.coded.row(cfg, PERM_LABELS.get(cfg.perm_kind, cfg.perm_kind), mode, "Np", Np, t.uncoded_ber))
            bers = np.array(bers)
            grid = np.array(cfg.np_grid)
            if grid.size > 1 and grid[0] == 0:
                best = int(np.argmin(bers))
                checks.append(
                    Check(
                        f"Rw={Rw} {mode}: some Np > 0 beats Np = 0",
                        bool(np.min(bers[1:]) < bers[0]),
                        f"BER(0)={bers[0]:.3e}, min={np.min(bers[1:]):.3e} at Np={grid[1 + np.argmin(bers[1:])]}",
                    )
                )
                checks.append(
                    Check(
                        f"Rw={Rw} {mode}: BER rises again for large Np (interior argmin)",
                        0 < best < grid.size - 1 and bool(bers[-1] > bers[best]),
                        f"argmin Np={grid[best]}",
                    )
                )
    checks += _counting_checks(rows, N)
    return rows, checks


# -- permutation classes ------------------------------------------------------


def random_descending_becs(rng, count):
    """Strictly decreasing erasure probabilities in (0.01, 0.99)."""
    e = np.sort(rng.uniform(0.01, 0.99, count))[::-1]
    while np.any(np.diff(e) >= 0.0):
        e = np.sort(rng.uniform(0.01, 0.99, count))[::-1]
    return e


def run_permclass(cfg: ExperimentConfig):
    rows, checks = [], []
    rng = np.random.default_rng([cfg.seed, _PERMCLASS_STREAM])
    for N in (2, 4, 8):
        eps = random_descending_becs(rng, N)
        classes = oracle.permutation_classes([ChannelModel.bec(e) for e in eps])
        bound = math.factorial(N) // 2 ** (N - 1)
        rows.append(ResultRow(cfg.kind, f"classes_N{N}", "BEC", "N", N, float("nan"), float("nan"), len(classes), 0, 0, 0, config_hash=cfg.hash()))
        checks.append(Check(f"N={N}: class count {len(classes)} <= {bound}", len(classes) <= bound))
    same = oracle.permutation_classes([ChannelModel.bec(0.3)] * 4)
    checks.append(Check("N=4 identical channels: one class", len(same) == 1))

    target = np.array([0, 3, 1, 2])
    hits = 0
    for _ in range(cfg.permclass_trials):
        eps = random_descending_becs(rng, 4)
        hits += int(_in_optimal_class(eps, target))
    rows.append(ResultRow(cfg.kind, "prop1_hits", "BEC", "trials", cfg.permclass_trials, float("nan"), float("nan"), hits, 0, 0, 0, config_hash=cfg.hash()))
    checks.append(Check("[0,3,1,2] optimal at rate 1/2", hits == cfg.permclass_trials, f"{hits}/{cfg.permclass_trials}"))

    ties = 0
    for _ in range(max(cfg.permclass_trials // 10, 1)):
        e = random_descending_becs(rng, 3)
        eps = np.array([e[0], e[0], e[1], e[2]])
        ties += int(_in_optimal_class(eps, bit_reversal(2)))
    checks.append(Check("eps1 = eps2: bit-reversal ties the optimum", ties == max(cfg.permclass_trials // 10, 1)))
    return rows, checks


def _in_optimal_class(eps, perm, k=2, tol=1e-12):
    perms = oracle._all_permutations(eps.size)
    caps = 1.0 - oracle.bec_polarize(eps[perms])
    score = np.sort(caps, axis=1)[:, -k:].sum(axis=1)
    mine = np.sort(1.0 - oracle.bec_polarize(eps[np.asarray(perm)]))[-k:].sum()
    return mine >= score.max() - tol


# -- construct / characterize ---------------------------------------------------


def run_construct(cfg: ExperimentConfig):
    """Build one code and save it next to the run outputs."""
    from .construction import save_code

    if cfg.char_file:
        char = estimation.load_characterization(cfg.char_file)
        chans = char.channels()
    else:
        N = 1 << cfg.n
        chans = [ChannelModel.bsc(v) for v in linear_bsc_profile(cfg.p_centers[0], cfg.max_dev, N)]
    N = len(chans)
    k = code_dimension(N, cfg.rate)
    spec = build_code(chans, k, cfg.perm_kind, cfg.n_punctured, order_key=cfg.order_key, seed=[cfg.seed, _RANDOM_PERM_STREAM])
    path = cfg.out + ".code.json"
    save_code(spec, path)
    zsum = float(np.sum(np.exp(spec.log_z[spec.info_set])))
    rows = [ResultRow(cfg.kind, cfg.perm_kind, "", "k", k, float("nan"), float("nan"), 0, 0, 0, 0, config_hash=cfg.hash())]
    return rows, [Check(f"code written to {path}", True, f"sum of Z bounds over the information set {zsum:.4e}")]


def run_characterize(cfg: ExperimentConfig):
    """Characterize each Rw and save the characterization plus one current map."""
    rows, checks = [], []
    for Rw in cfg.Rw:
        xcfg = cfg.crossbar(Rw)
        tr, thr = train(cfg, xcfg)
        ber = estimation.uncoded_ber(tr, thr)
        for mode in _modes(cfg):
            char = _char(tr, thr, mode)
            char.meta.update({"Rw": Rw, "N1": cfg.N1, "N2": cfg.N2, "seed": cfg.seed, "config_hash": cfg.hash()})
            estimation.save_characterization(char, f"{cfg.out}.Rw{Rw:g}.{mode}.char.json")
        crossbar.export_current_map(f"{cfg.out}.Rw{Rw:g}.currents.csv", tr.currents[0])
        rows.append(ResultRow(cfg.kind, "training", cfg.mode, "Rw", Rw, ber, float("nan"), tr.T, tr.bits.size, int(round(ber * tr.bits.size)), 0, ber, cfg.hash()))
        checks.append(Check(f"Rw={Rw}: characterization written", True, f"uncoded BER {ber:.3e}"))
    return rows, checks


RUNNERS = {
    "construct": run_construct,
    "synthetic-bsc": run_synthetic_bsc,
    "crossbar-ber": run_crossbar_ber,
    "bsc-vs-bac": run_bsc_vs_bac,
    "puncture-sweep": run_puncture_sweep,
    "permclass": run_permclass,
    "characterize": run_characterize,
}


def run(cfg: ExperimentConfig):
    return RUNNERS[cfg.kind](cfg)


# -- outputs --------------------------------------------------------------


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(dataclasses.asdict(r))


def read_csv(path):
    out = []
    types = {f.name: f.type for f in dataclasses.fields(ResultRow)}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            vals = {}
            for k, v in rec.items():
                t = types[k]
                vals[k] = int(v) if t == "int" else float(v) if t == "float" else v
            out.append(ResultRow(**vals))
    return out


def write_manifest(path, cfg, checks, elapsed):
    with open(path, "w") as fh:
        fh.write(f"experiment: {cfg.kind}\n")
        fh.write(f"config_hash: {cfg.hash()}\n")
        fh.write(f"config: {cfg.canonical()}\n")
        fh.write(f"nspolar: {__version__}\n")
        fh.write(f"numpy: {np.__version__}\n")
        fh.write(f"python: {platform.python_version()}\n")
        fh.write(f"elapsed_s: {elapsed:.2f}\n")
        for c in checks:
            fh.write(f"check: {'PASS' if c.passed else 'FAIL'} | {c.name} | {c.detail}\n")


def run_and_write(cfg: ExperimentConfig):
    """Run, then write ``<out>.csv`` and ``<out>.manifest.txt``."""
    t0 = time.perf_counter()
    rows, checks = run(cfg)
    write_csv(cfg.out + ".csv", rows)
    write_manifest(cfg.out + ".manifest.txt", cfg, checks, time.perf_counter() - t0)
    return rows, checks
