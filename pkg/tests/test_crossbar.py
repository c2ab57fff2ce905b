import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nspolar import crossbar
from nspolar.crossbar import CrossbarConfig


def dense_reference(cfg, bits, row):
    """Textbook nodal analysis from an explicit resistor list; returns sense-terminal currents."""
    N1, N2 = cfg.N1, cfg.N2
    W = {(i, j): i * N2 + j for i in range(N1) for j in range(N2)}
    B = {(i, j): N1 * N2 + i * N2 + j for i in range(N1) for j in range(N2)}
    n = 2 * N1 * N2
    G = np.zeros((n, n))
    rhs = np.zeros(n)

    def between(a, b, r):
        g = 1.0 / r
        G[a, a] += g
        G[b, b] += g
        G[a, b] -= g
        G[b, a] -= g

    def to_source(a, r, v):
        G[a, a] += 1.0 / r
        rhs[a] += v / r

    for i in range(N1):
        to_source(W[i, 0], cfg.Rw, cfg.Vread if i == row else 0.0)
        for j in range(N2):
            between(W[i, j], B[i, j], cfg.R_HRS if bits[i, j] else cfg.R_LRS)
            if j + 1 < N2:
                between(W[i, j], W[i, j + 1], cfg.Rw)
            if i + 1 < N1:
                between(B[i, j], B[i + 1, j], cfg.Rw)
    for j in range(N2):
        to_source(B[0, j], cfg.Rw, 0.0)
    v = np.linalg.solve(G, rhs)
    return np.array([v[B[0, j]] / cfg.Rw for j in range(N2)])


def test_single_cell_closed_form():
    cfg = CrossbarConfig(N1=1, N2=1)
    I = crossbar.read_array(cfg, np.zeros((1, 1), np.uint8))
    assert I[0, 0] == pytest.approx(1.0 / 1050.0, rel=1e-12)
    I = crossbar.read_array(cfg, np.ones((1, 1), np.uint8))
    assert I[0, 0] == pytest.approx(1.0 / (1e6 + 50.0), rel=1e-12)


@pytest.mark.parametrize("shape", [(1, 3), (3, 1), (2, 2), (4, 5), (6, 3)])
def test_matches_dense_reference(shape):
    rng = np.random.default_rng(sum(shape))
    cfg = CrossbarConfig(N1=shape[0], N2=shape[1], Rw=40.0)
    bits = rng.integers(0, 2, shape, dtype=np.uint8)
    I = crossbar.read_array(cfg, bits)
    for r in range(shape[0]):
        np.testing.assert_allclose(I[r], dense_reference(cfg, bits, r), rtol=1e-9)


def test_ideal_wires():
    cfg = CrossbarConfig(N1=32, N2=32, Rw=1e-9)
    bits = np.random.default_rng(0).integers(0, 2, (32, 32), dtype=np.uint8)
    I = crossbar.read_array(cfg, bits)
    ideal = np.where(bits == 1, 1e-6, 1e-3)
    np.testing.assert_allclose(I, ideal, rtol=1e-6)
    assert np.all((I < 5e-4) == (bits == 1))


@pytest.mark.parametrize("method", crossbar.SOLVERS)
def test_solvers_agree(method):
    cfg = CrossbarConfig(N1=8, N2=16, Rw=35.0)
    bits = np.random.default_rng(1).integers(0, 2, (8, 16), dtype=np.uint8)
    ref = crossbar.read_array(cfg, bits, "splu")
    np.testing.assert_allclose(crossbar.read_array(cfg, bits, method), ref, rtol=1e-10)


def test_full_size_residual():
    cfg = CrossbarConfig()
    bits = np.random.default_rng(2).integers(0, 2, (32, 32), dtype=np.uint8)
    X = crossbar.solve_voltages(cfg, bits)
    A = crossbar.conductance_matrix(cfg, bits)
    res = crossbar.relative_residual(A, X, crossbar.rhs_matrix(cfg))
    assert res.max() <= 1e-10
    A1, b1 = crossbar.assemble_system(cfg, bits, 5)
    assert crossbar.relative_residual(A1, X[:, 5:6], b1.reshape(-1, 1))[0] <= 1e-10


def test_conductance_matrix_symmetric():
    cfg = CrossbarConfig(N1=4, N2=4)
    A = crossbar.conductance_matrix(cfg, np.eye(4, dtype=np.uint8)).toarray()
    np.testing.assert_array_equal(A, A.T)
    assert np.all(np.linalg.eigvalsh(A) > 0)


def test_unreachable_tolerance_raises():
    cfg = CrossbarConfig(N1=4, N2=4, solver_rel_tol=1e-30)
    with pytest.raises(crossbar.SolverError):
        crossbar.read_array(cfg, np.zeros((4, 4), np.uint8))


def test_all_lrs_corner_ordering():
    cfg = CrossbarConfig(Rw=25.0)
    I = crossbar.read_array(cfg, np.zeros((32, 32), np.uint8))
    assert I[0, 0] > I[31, 31]
    # the first row sees less wire the farther the column is
    assert np.all(np.diff(I[0]) < 0)


def test_all_hrs_bound():
    cfg = CrossbarConfig(N1=16, N2=16, Rw=35.0)
    I = crossbar.read_array(cfg, np.ones((16, 16), np.uint8))
    assert np.all(I <= cfg.Vread / cfg.R_HRS)
    assert np.all(I > 0)


def test_energy_and_current_balance():
    cfg = CrossbarConfig(N1=8, N2=8, Rw=30.0)
    bits = np.random.default_rng(3).integers(0, 2, (8, 8), dtype=np.uint8)
    for r in (0, 3, 7):
        source, absorbed = crossbar.terminal_currents(cfg, bits, r)
        assert source == pytest.approx(absorbed.sum(), rel=1e-10)
        sense = absorbed[cfg.N1 - 1 :]
        np.testing.assert_allclose(sense, crossbar.read_row(cfg, bits, r), rtol=1e-9)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_currents_positive_and_bounded(seed):
    rng = np.random.default_rng(seed)
    cfg = CrossbarConfig(N1=6, N2=6, Rw=float(rng.uniform(1, 60)))
    bits = rng.integers(0, 2, (6, 6), dtype=np.uint8)
    I = crossbar.read_array(cfg, bits)
    assert np.all(I > 0)
    # a cell can never carry more than an ideal LRS read
    assert np.all(I <= cfg.Vread / cfg.R_LRS)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_setting_a_cell_to_hrs_lowers_its_current(seed):
    rng = np.random.default_rng(seed)
    cfg = CrossbarConfig(N1=6, N2=6, Rw=30.0)
    bits = rng.integers(0, 2, (6, 6), dtype=np.uint8)
    i, j = rng.integers(0, 6, 2)
    bits[i, j] = 0
    lo = crossbar.read_array(cfg, bits)[i, j]
    bits[i, j] = 1
    assert crossbar.read_array(cfg, bits)[i, j] < lo


def test_deterministic_and_csv_round_trip(tmp_path):
    cfg = CrossbarConfig(N1=8, N2=8)
    bits = np.random.default_rng(4).integers(0, 2, (8, 8), dtype=np.uint8)
    a = crossbar.read_array(cfg, bits)
    b = crossbar.read_array(cfg, bits)
    np.testing.assert_array_equal(a, b)
    path = tmp_path / "map.csv"
    crossbar.export_current_map(path, a)
    np.testing.assert_array_equal(crossbar.load_current_map(path), a)


def test_batch_read():
    cfg = CrossbarConfig(N1=4, N2=4)
    batch = np.random.default_rng(5).integers(0, 2, (3, 4, 4), dtype=np.uint8)
    out = crossbar.read_arrays(cfg, batch)
    for t in range(3):
        np.testing.assert_array_equal(out[t], crossbar.read_array(cfg, batch[t]))


def test_config_validation():
    with pytest.raises(ValueError):
        CrossbarConfig(Rw=-1.0)
    with pytest.raises(ValueError):
        CrossbarConfig(N1=0)
    with pytest.raises(ValueError):
        crossbar.read_array(CrossbarConfig(N1=2, N2=2), np.zeros((3, 3), np.uint8))
    with pytest.raises(ValueError):
        crossbar.read_array(CrossbarConfig(N1=2, N2=2), np.full((2, 2), 2))
    with pytest.raises(ValueError):
        crossbar.read_array(CrossbarConfig(N1=2, N2=2), np.zeros((2, 2), np.uint8), method="cg")


def test_all_lrs_minimum_falls_with_rw():
    lows = [crossbar.read_array(CrossbarConfig(N1=16, N2=16, Rw=rw), np.zeros((16, 16), np.uint8)).min() for rw in (5, 15, 25, 35)]
    assert np.all(np.diff(lows) < 0)
