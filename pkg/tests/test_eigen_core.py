import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from partition_flow import circle_model as cm
from partition_flow import grid_model as gm
from partition_flow.eigen_core import (
    DNMatrix,
    SymmetricOperator,
    cluster,
    eig_dense,
    eig_lowest,
    morse_index,
    schur_dn,
)
from partition_flow.errors import FactorizationError, InteriorResonance, ToleranceAmbiguity


def dirichlet_chain(n, h):
    A = sp.diags([np.full(n, 2.0), -np.ones(n - 1), -np.ones(n - 1)], [0, 1, -1]) / h**2
    return SymmetricOperator(A, h=h)


def random_spd(seed, n):
    rng = np.random.default_rng(seed)
    B = sp.random(n, n, density=0.15, random_state=seed)
    A = B + B.T + sp.diags(rng.uniform(0.5, 3.0, n)) * n * 0.2
    return SymmetricOperator(A)


def test_dense_diagonal_is_sorted_diagonal():
    d = np.array([3.0, -1.0, 2.5, 0.0])
    s = eig_dense(np.diag(d))
    assert np.array_equal(s.eigenvalues, np.sort(d))


def test_dense_dirichlet_chain_closed_form():
    n, h = 40, 1.0 / 41
    s = eig_dense(dirichlet_chain(n, h))
    p = np.arange(1, n + 1)
    exact = 4.0 / h**2 * np.sin(p * np.pi / (2 * (n + 1))) ** 2
    assert np.allclose(s.eigenvalues, exact, rtol=0, atol=1e-10 * exact.max())
    V = s.eigenvectors
    assert np.abs(V.T @ V - np.eye(n)).max() < 1e-10


def test_dense_circle_matches_mu():
    cfg = cm.CircleConfig(5)
    lam = 6.25001
    s = eig_dense(cm.build_M(cfg, lam))
    assert np.abs(s.eigenvalues - cm.mu_spectrum(cfg, lam)).max() < 1e-10 * np.abs(s.eigenvalues).max()


def test_dense_cutoff():
    with pytest.raises(ValueError):
        eig_dense(np.eye(5), cutoff=4)


def test_residual_contract():
    A = random_spd(3, 60)
    s = eig_dense(A)
    assert s.residual_norms.max() <= 1e-10 * A.norm()


def test_lowest_rectangle_sine_formula():
    # 63 x 31 interior nodes
    grid = gm.build_grid({"rect": [4.0, 2.0], "h": 1.0 / 16})
    A = gm.assemble_laplacian(grid)
    assert A.dimension == 63 * 31
    s = eig_lowest(A, 10)
    exact = gm.rectangle_eigenvalues(grid.nx, grid.ny, grid.h)[:10]
    assert np.abs(s.eigenvalues - exact).max() < 1e-9 * exact.max()
    assert s.residual_norms.max() <= 1e-10 * A.norm()


def test_lowest_slit_circle_chain():
    n = 400
    s = eig_lowest(cm.circle_chain(n), 2)
    h = 2 * np.pi / n
    # second-order accurate: the error is h^2/48 for the mode 1/2
    assert abs(s.eigenvalues[0] - 0.25) < h**2
    assert abs(s.eigenvalues[1] - s.eigenvalues[0]) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(8, 200), m=st.integers(1, 6))
def test_lowest_agrees_with_dense(seed, n, m):
    A = random_spd(seed, n)
    lo = eig_lowest(A, m, seed=seed).eigenvalues
    full = eig_dense(A, vectors=False).eigenvalues[:m]
    assert np.abs(lo - full).max() <= 1e-9 * max(1.0, np.abs(full).max())


def test_lowest_interior_shift():
    A = dirichlet_chain(50, 1.0)
    full = eig_dense(A, vectors=False).eigenvalues
    shift = 0.5 * (full[10] + full[11])
    s = eig_lowest(A, 2, shift=shift)
    assert np.allclose(np.sort(s.eigenvalues), full[10:12], atol=1e-10)


def test_lowest_shift_on_spectrum():
    with pytest.raises(FactorizationError):
        eig_lowest(np.diag([1.0, 2.0, 3.0]), 1, shift=2.0)


def test_lowest_resolves_multiplicity():
    # plus-partition square: the Dirichlet square has double eigenvalues
    grid = gm.build_grid({"rect": [1, 1], "h": 1 / 16})
    A = gm.assemble_laplacian(grid)
    s = eig_lowest(A, 3)
    assert abs(s.eigenvalues[1] - s.eigenvalues[2]) < 1e-9 * s.eigenvalues[2]


def test_schur_by_hand():
    # H = [[a, b], [b, c]], interior row 0, interface row 1
    a, b, c, lam, h = 5.0, -2.0, 3.0, 1.0, 0.5
    dn = schur_dn(np.array([[a, b], [b, c]]), lam, [1], h=h)
    expected = ((c - lam) - b * b / (a - lam)) / h
    assert dn.entries.shape == (1, 1)
    assert abs(dn.entries[0, 0] - expected) < 1e-14


def test_schur_arc_reproduces_edge_dn():
    # one arc with half-cell mass at the ends, symmetrised by W^{-1/2}
    theta, lam = 2 * np.pi / 3, 2.0
    exact = cm.edge_dn(lam, theta).block()
    errs = []
    for n in (16, 32, 64):
        h = theta / n
        main = np.full(n + 1, 2.0)
        main[0] = main[-1] = 1.0
        K = sp.diags([main, -np.ones(n), -np.ones(n)], [0, 1, -1]) / h
        w = np.full(n + 1, h)
        w[0] = w[-1] = h / 2
        Wi = sp.diags(1 / np.sqrt(w))
        dn = schur_dn(SymmetricOperator(Wi @ K @ Wi), lam, [0, n], h=1.0)
        D = np.sqrt(w[[0, n]])
        errs.append(np.abs(D[:, None] * dn.entries * D[None, :] - exact).max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert (rates > 1.9).all()


def test_schur_positive_below_decoupled_spectrum():
    grid = gm.build_grid({"rect": [2, 1], "h": 1 / 8, "interfaces": [{"id": "m", "points": [[1, 0], [1, 1]]}]})
    A = gm.assemble_laplacian(grid)
    gamma = [r for r, n in enumerate(A.index) if n[0] == 8]
    dn = schur_dn(A, 1.0, gamma)
    assert dn.symmetry_defect() < 1e-12
    assert dn.eigenvalues().min() > 0


def test_schur_resonance():
    grid = gm.build_grid({"rect": [2, 1], "h": 1 / 8, "interfaces": [{"id": "m", "points": [[1, 0], [1, 1]]}]})
    A = gm.assemble_laplacian(grid)
    gamma = [n for n in A.index if n[0] == 8]
    lam = gm.rectangle_eigenvalues(8, 8, 1 / 8)[0]
    with pytest.raises(InteriorResonance):
        schur_dn(A, lam, gamma)


def test_schur_sparse_path_matches_dense():
    grid = gm.build_grid({"rect": [2, 1], "h": 1 / 8, "interfaces": [{"id": "m", "points": [[1, 0], [1, 1]]}]})
    A = gm.assemble_laplacian(grid)
    gamma = [n for n in A.index if n[0] == 8]
    d1 = schur_dn(A, 7.0, gamma).entries
    d2 = schur_dn(A, 7.0, gamma, cutoff=10).entries
    assert np.abs(d1 - d2).max() < 1e-10 * np.abs(d1).max()


def test_morse_examples():
    assert morse_index(np.diag([1.0, 2.0, 0.5])) == 0
    for N in (3, 5, 7):
        cfg = cm.CircleConfig(N)
        lam = (N / 2 + 1e-3) ** 2
        assert morse_index(cm.build_M(cfg, lam)) == 1
        assert morse_index(cm.build_M0(cfg, lam)) == 0
    assert morse_index(DNMatrix(0.0, (0, 1), np.diag([-1.0, 1.0]))) == 1


def test_morse_ambiguous():
    with pytest.raises(ToleranceAmbiguity):
        morse_index(np.diag([1.0, 1e-14, -1.0]))


def test_cluster():
    assert cluster([1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0]) == [(1.0 + 5e-13, 2), (2.0, 1), (3.0, 2)]


def test_operator_symmetry_and_positions():
    grid = gm.build_grid({"rect": [1, 1], "h": 0.25})
    A = gm.assemble_laplacian(grid)
    assert A.is_symmetric()
    assert A.position((2, 2)) == A.index.index((2, 2))
