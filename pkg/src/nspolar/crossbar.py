"""Resistive crossbar readout with wire resistance.

Nodal model with two nodes per cell: a wordline node W(i, j) and a bitline
node B(i, j).  The cell conductance joins W(i, j) to B(i, j); neighbouring
wordline nodes W(i, j)-W(i, j+1) and bitline nodes B(i, j)-B(i+1, j) are
joined by one wire segment 1/Rw each.  Every wordline is driven from its
column-0 end through one wire segment (Vread on the selected row, 0 V on the
others) and every bitline is sensed at its row-0 end through one wire
segment into a virtual ground.  All columns are sensed in parallel.

The conductance matrix does not depend on which row is selected, so a whole
array is read with one factorization and N1 right-hand sides.  The default
solver eliminates each wordline (a tridiagonal chain plus its cells) and
solves the remaining block-tridiagonal bitline system; banded Cholesky and
sparse LU on the full nodal matrix are kept as cross-checks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

class SolverError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class CrossbarConfig:
    N1: int = 32
    N2: int = 32
    Rw: float = 25.0
    R_LRS: float = 1e3
    R_HRS: float = 1e6
    Vread: float = 1.0
    solver_rel_tol: float = 1e-10

    def __post_init__(self):
        if self.N1 < 1 or self.N2 < 1:
            raise ValueError("array must have at least one row and column")
        if min(self.Rw, self.R_LRS, self.R_HRS) <= 0.0:
            raise ValueError("resistances must be positive")
        if self.R_HRS <= self.R_LRS:
            raise ValueError("R_HRS must exceed R_LRS")
        if self.solver_rel_tol <= 0.0:
            raise ValueError("solver tolerance must be positive")

    @property
    def n_nodes(self):
        return 2 * self.N1 * self.N2


def _check_bits(cfg, bits):
    bits = np.asarray(bits)
    if bits.shape != (cfg.N1, cfg.N2):
        raise ValueError(f"bit matrix shape {bits.shape} != {(cfg.N1, cfg.N2)}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bit matrix must hold 0/1")
    return bits


def cell_conductance(cfg, bits):
    """1 (HRS) -> 1/R_HRS, 0 (LRS) -> 1/R_LRS."""
    return np.where(np.asarray(bits) == 1, 1.0 / cfg.R_HRS, 1.0 / cfg.R_LRS)


def node_index(cfg):
    """(W, B) index arrays of shape (N1, N2).

    Nodes are interleaved row by row, [W(i, :), B(i, :)], which keeps the
    half-bandwidth at 2*N2.
    """
    base = (2 * cfg.N2 * np.arange(cfg.N1))[:, None] + np.arange(cfg.N2)[None, :]
    return base, base + cfg.N2


def _edges(cfg, g):
    W, B = node_index(cfg)
    gw = 1.0 / cfg.Rw
    a = [W.ravel(), W[:, :-1].ravel(), B[:-1, :].ravel()]
    b = [B.ravel(), W[:, 1:].ravel(), B[1:, :].ravel()]
    w = [g.ravel(), np.full(W[:, :-1].size, gw), np.full(B[:-1, :].size, gw)]
    return np.concatenate(a), np.concatenate(b), np.concatenate(w)


def _terminal_diagonal(cfg):
    # every driver and sense terminal adds one wire segment to ground/source
    W, B = node_index(cfg)
    d = np.zeros(cfg.n_nodes)
    d[W[:, 0]] += 1.0 / cfg.Rw
    d[B[0, :]] += 1.0 / cfg.Rw
    return d


def conductance_matrix(cfg, bits):
    """Sparse symmetric positive definite nodal matrix (fixed nodes eliminated)."""
    bits = _check_bits(cfg, bits)
    a, b, w = _edges(cfg, cell_conductance(cfg, bits))
    n = cfg.n_nodes
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([w, w, -w, -w])
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return (A + sp.diags(_terminal_diagonal(cfg))).tocsr()


def rhs_matrix(cfg, rows=None):
    """Right-hand sides, one column per selected row."""
    rows = np.arange(cfg.N1) if rows is None else np.atleast_1d(rows)
    W, _ = node_index(cfg)
    rhs = np.zeros((cfg.n_nodes, rows.size))
    rhs[W[rows, 0], np.arange(rows.size)] = cfg.Vread / cfg.Rw
    return rhs


def assemble_system(cfg, bits, selected_row: int):
    """Return (A, b) for reading ``selected_row``."""
    if not 0 <= selected_row < cfg.N1:
        raise ValueError(f"row {selected_row} out of range")
    return conductance_matrix(cfg, bits), rhs_matrix(cfg, selected_row)[:, 0]


def _banded_lower(cfg, bits):
    # lower banded storage: ab[k, m] = A[m + k, m]
    g = cell_conductance(cfg, bits)
    W, B = node_index(cfg)
    gw = 1.0 / cfg.Rw
    ab = np.zeros((2 * cfg.N2 + 1, cfg.n_nodes))
    d = _terminal_diagonal(cfg)
    np.add.at(d, W.ravel(), g.ravel())
    np.add.at(d, B.ravel(), g.ravel())
    d[W[:, :-1].ravel()] += gw
    d[W[:, 1:].ravel()] += gw
    d[B[:-1].ravel()] += gw
    d[B[1:].ravel()] += gw
    ab[0] = d
    ab[1, W[:, :-1].ravel()] = -gw
    ab[cfg.N2, W.ravel()] = -g.ravel()
    ab[2 * cfg.N2, B[:-1].ravel()] = -gw
    return ab


def _banded_matvec(ab, X, offsets):
    Y = ab[0][:, None] * X
    for k in offsets:
        band = ab[k, :-k][:, None]
        Y[k:] += band * X[:-k]
        Y[:-k] += band * X[k:]
    return Y


def _chain(n, gw, terminal):
    # Laplacian of an n-node wire chain, with a terminal segment at node 0
    T = np.zeros((n, n))
    i = np.arange(n - 1)
    T[i, i + 1] = -gw
    T[i + 1, i] = -gw
    T[np.arange(n), np.arange(n)] = -T.sum(axis=1)
    if terminal:
        T[0, 0] += gw
    return T


def _solve_block(cfg, bits, rows):
    """Eliminate the wordline nodes row by row, then run block Thomas on the bitlines.

    Returns wordline and bitline voltages, each (N1, N2, len(rows)).
    """
    N1, N2 = cfg.N1, cfg.N2
    gw = 1.0 / cfg.Rw
    R = rows.size
    g = cell_conductance(cfg, bits)
    d = np.arange(N2)
    A = np.broadcast_to(_chain(N2, gw, True), (N1, N2, N2)).copy()
    A[:, d, d] += g
    M = np.linalg.inv(A)
    # bitline self-conductance: vertical segments plus the sense terminal at row 0
    D = np.diag(_chain(N1, gw, True))
    S = -(g[:, :, None] * M * g[:, None, :])
    S[:, d, d] += g + D[:, None]
    rhs = np.zeros((N1, N2, R))
    rhs[rows, :, np.arange(R)] = gw * cfg.Vread * g[rows] * M[rows, :, 0]
    inv = np.empty((N1, N2, N2))
    y = np.empty((N1, N2, R))
    inv[0] = np.linalg.inv(S[0])
    y[0] = rhs[0]
    for i in range(1, N1):
        inv[i] = np.linalg.inv(S[i] - gw * gw * inv[i - 1])
        y[i] = rhs[i] + gw * (inv[i - 1] @ y[i - 1])
    b = np.empty((N1, N2, R))
    b[-1] = inv[-1] @ y[-1]
    for i in range(N1 - 2, -1, -1):
        b[i] = inv[i] @ (y[i] + gw * b[i + 1])
    src = np.zeros((N1, N2, R))
    src[rows, 0, np.arange(R)] = gw * cfg.Vread
    w = M @ (src + g[:, :, None] * b)
    return w, b


def _kcl_residual(cfg, bits, rows, w, b):
    """Relative nodal residual per right-hand side, from the edge list."""
    g = cell_conductance(cfg, bits)[:, :, None]
    gw = 1.0 / cfg.Rw
    R = rows.size
    cell = g * (w - b)
    rw = cell.copy()
    rw[:, :-1] += gw * (w[:, :-1] - w[:, 1:])
    rw[:, 1:] += gw * (w[:, 1:] - w[:, :-1])
    rw[:, 0] += gw * w[:, 0]
    rw[rows, 0, np.arange(R)] -= gw * cfg.Vread
    rb = -cell
    rb[:-1] += gw * (b[:-1] - b[1:])
    rb[1:] += gw * (b[1:] - b[:-1])
    rb[0] += gw * b[0]
    num = np.sqrt(np.sum(rw**2, axis=(0, 1)) + np.sum(rb**2, axis=(0, 1)))
    return num / (gw * abs(cfg.Vread))


def _to_nodes(cfg, w, b):
    W, B = node_index(cfg)
    X = np.empty((cfg.n_nodes, w.shape[2]))
    X[W.ravel()] = w.reshape(-1, w.shape[2])
    X[B.ravel()] = b.reshape(-1, b.shape[2])
    return X


def _from_nodes(cfg, X):
    W, B = node_index(cfg)
    R = X.shape[1]
    return X[W.ravel()].reshape(cfg.N1, cfg.N2, R), X[B.ravel()].reshape(cfg.N1, cfg.N2, R)


SOLVERS = ("block", "banded", "splu")


def _solve(cfg, bits, rows=None, method="block"):
    bits = _check_bits(cfg, bits)
    rows = np.arange(cfg.N1) if rows is None else np.atleast_1d(np.asarray(rows, dtype=np.int64))
    if method == "block":
        w, b = _solve_block(cfg, bits, rows)
    elif method == "banded":
        c = sla.cholesky_banded(_banded_lower(cfg, bits), lower=True, check_finite=False)
        X = sla.cho_solve_banded((c, True), rhs_matrix(cfg, rows), check_finite=False)
        w, b = _from_nodes(cfg, X)
    elif method == "splu":
        A = conductance_matrix(cfg, bits).tocsc()
        X = spla.splu(A, permc_spec="MMD_AT_PLUS_A").solve(rhs_matrix(cfg, rows))
        w, b = _from_nodes(cfg, X)
    else:
        raise ValueError(f"unknown solver {method!r}")
    res = _kcl_residual(cfg, bits, rows, w, b)
    if not np.all(res <= cfg.solver_rel_tol):
        raise SolverError("crossbar solve did not reach tolerance", float(np.max(res)))
    return w, b


def solve_voltages(cfg, bits, rows=None, method="block"):
    """Node voltages for each selected row, shape (n_nodes, len(rows)).

    ``method`` is "block" (default), "banded" (banded Cholesky) or "splu"
    (sparse LU).  Raises SolverError if any solve misses
    ``cfg.solver_rel_tol``.
    """
    return _to_nodes(cfg, *_solve(cfg, bits, rows, method))


def relative_residual(A, X, rhs):
    """Per-column ||AX - b|| / ||b||."""
    r = A @ X - rhs
    return np.linalg.norm(r, axis=0) / np.linalg.norm(rhs, axis=0)


def _column_currents(cfg, bits, w, b):
    # sensed current of column j = sum of cell currents in column j (KCL at
    # the sense node); avoids differencing nearly equal wire voltages
    g = cell_conductance(cfg, bits)[:, :, None]
    return np.sum(g * (w - b), axis=0).T


def read_row(cfg, bits, selected_row: int):
    """Sensed current of every column while ``selected_row`` is driven."""
    if not 0 <= selected_row < cfg.N1:
        raise ValueError(f"row {selected_row} out of range")
    w, b = _solve(cfg, bits, [selected_row])
    return _column_currents(cfg, bits, w, b)[0]


def read_array(cfg, bits, method="block"):
    """CurrentMap: entry (i, j) is column j's current while row i is read."""
    bits = _check_bits(cfg, bits)
    return _column_currents(cfg, bits, *_solve(cfg, bits, None, method))


def read_arrays(cfg, bits_batch):
    """read_array over a (T, N1, N2) batch."""
    bits_batch = np.asarray(bits_batch)
    out = np.empty(bits_batch.shape, dtype=float)
    for t in range(bits_batch.shape[0]):
        out[t] = read_array(cfg, bits_batch[t])
    return out


def terminal_currents(cfg, bits, selected_row: int):
    """(source current, absorbed currents) for one read.

    The absorbed array lists the currents into every grounded terminal: the
    unselected wordline drivers followed by the N2 sense terminals.
    """
    X = solve_voltages(cfg, bits, [selected_row])[:, 0]
    W, B = node_index(cfg)
    gw = 1.0 / cfg.Rw
    source = gw * (cfg.Vread - X[W[selected_row, 0]])
    others = np.delete(np.arange(cfg.N1), selected_row)
    absorbed = np.concatenate([gw * X[W[others, 0]], gw * X[B[0, :]]])
    return float(source), absorbed


def export_current_map(path, current_map):
    """Write a CurrentMap as CSV with columns row, col, amps."""
    I = np.asarray(current_map)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "amps"])
        for i in range(I.shape[0]):
            for j in range(I.shape[1]):
                w.writerow([i, j, repr(float(I[i, j]))])


def load_current_map(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    N1 = max(int(r["row"]) for r in rows) + 1
    N2 = max(int(r["col"]) for r in rows) + 1
    I = np.full((N1, N2), np.nan)
    for r in rows:
        I[int(r["row"]), int(r["col"])] = float(r["amps"])
    return I
