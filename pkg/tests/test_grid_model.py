import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partition_flow import grid_model as gm
from partition_flow.acceptance import BRICK4, PLUS2X2, TEE3, alternative_slits, random_grid
from partition_flow.eigen_core import eig_dense
from partition_flow.errors import NotAnEigenvector, SlitError, SpecError

MIDLINE = {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "v", "points": [[0.5, 0], [0.5, 1]]}]}


def spectrum(A):
    return eig_dense(A, vectors=False).eigenvalues


def test_midline_counts():
    g = gm.build_grid(MIDLINE)
    assert g.k == 2 and g.poles == ()
    assert len(g.gamma_nodes()) == 7
    assert len(g.subdomain_nodes(1)) == len(g.subdomain_nodes(2)) == 21
    assert all(n[0] == 4 for n in g.gamma_nodes())


def test_no_interfaces():
    g = gm.build_grid({"rect": [1, 1], "h": 0.25})
    assert g.k == 1 and g.gamma_nodes() == []
    assert gm.robin_family(g, gm.assemble_laplacian(g)).gamma_rows.size == 0


def test_plus_has_no_poles():
    g = gm.build_grid(PLUS2X2)
    assert g.k == 4 and g.poles == () and g.slit_edges == frozenset()
    assert len(g.gamma_nodes()) == 13


def test_single_node_square():
    g = gm.build_grid({"rect": [1, 1], "h": 0.5})
    A = gm.assemble_laplacian(g)
    assert A.dimension == 1
    assert A.dense()[0, 0] == 16.0


def test_rectangle_closed_form():
    g = gm.build_grid({"rect": [1.5, 1], "h": 0.125})
    w = spectrum(gm.assemble_laplacian(g))
    exact = gm.rectangle_eigenvalues(g.nx, g.ny, g.h)
    assert np.abs(w - exact).max() < 1e-10 * exact.max()
    assert w.min() > 0


def test_slit_is_laplacian_without_poles():
    g = gm.build_grid(PLUS2X2)
    assert (gm.assemble_slit(g).matrix != gm.assemble_laplacian(g).matrix).nnz == 0


def test_tee_slit_structure():
    g = gm.build_grid(TEE3)
    assert g.poles == ((4, 4),)
    # the arm to the right boundary is cut
    assert len(g.slit_edges) == 8
    assert gm.assemble_slit(g).dimension == gm.assemble_laplacian(g).dimension - 1
    for q in g.quadrants.values():
        assert q == (-1, -1, 1, 1)
    S = gm.assemble_slit(g)
    assert S.is_symmetric()
    assert spectrum(S).min() > 0


def test_edge_sign_across_cut():
    g = gm.build_grid(TEE3)
    # (6,4) sits on the cut; its north neighbour is on the - side, south on +
    assert gm.edge_sign(g, (6, 4), (6, 5), 1) == -1
    assert gm.edge_sign(g, (6, 3), (6, 4), 1) == 1
    # along the cut both ends are flipped together
    assert gm.edge_sign(g, (6, 4), (7, 4), 0) == 1


@pytest.mark.parametrize("spec", [TEE3, BRICK4])
def test_cover_antisymmetric_matches_slit(spec):
    g = gm.build_grid(spec)
    cover = gm.assemble_double_cover(g)
    S = gm.assemble_slit(g)
    assert cover.dimension == 2 * S.dimension
    A = np.linalg.eigvalsh(gm.antisymmetric_part(cover))
    assert np.abs(A - spectrum(S)).max() < 1e-10
    # the symmetric part is the plain Laplacian with the odd points removed
    plain = gm.assemble_laplacian(g)
    keep = [r for r, n in enumerate(plain.index) if n not in g.poles]
    P = spectrum(plain.submatrix(keep))
    assert np.abs(np.linalg.eigvalsh(gm.symmetric_part(cover)) - P).max() < 1e-10


def test_cover_switches_odd_number_around_pole():
    g = gm.build_grid(TEE3)
    x = gm.cover_signs(g)
    i, j = g.poles[0]
    ring = [((i - 1, j - 1), (i, j - 1)), ((i, j - 1), (i + 1, j - 1)),
            ((i + 1, j - 1), (i + 1, j)), ((i + 1, j), (i + 1, j + 1)),
            ((i, j + 1), (i + 1, j + 1)), ((i - 1, j + 1), (i, j + 1)),
            ((i - 1, j), (i - 1, j + 1)), ((i - 1, j - 1), (i - 1, j))]
    assert sum(x[e] for e in ring) % 2 == 1


def test_gauge_moves_and_negative_control():
    g = gm.build_grid(TEE3)
    S = spectrum(gm.assemble_slit(g))
    alts = alternative_slits(g)
    assert len(alts) == 2
    for alt in alts:
        assert alt.slit_edges != g.slit_edges
        assert np.abs(spectrum(gm.assemble_slit(alt)) - S).max() < 1e-10
    # dropping the signs but keeping the odd point removed changes the spectrum
    plain = gm.assemble_laplacian(g)
    keep = [r for r, n in enumerate(plain.index) if n not in g.poles]
    assert np.abs(spectrum(plain.submatrix(keep)) - S).max() > 1e-2


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 500))
def test_random_cover_equivalence(seed):
    g = random_grid(seed)
    S = spectrum(gm.assemble_slit(g))
    A = np.linalg.eigvalsh(gm.antisymmetric_part(gm.assemble_double_cover(g)))
    assert np.abs(S - A).max() < 1e-10


def test_robin_endpoints():
    g = gm.build_grid(MIDLINE)
    fam = gm.robin_family(g, gm.assemble_laplacian(g))
    assert fam.at(0.0) is fam.base
    assert fam.at(np.inf).dimension == 42
    blocks = fam.infinity_blocks()
    assert [b.dimension for b in blocks] == [21, 21]
    union = np.sort(np.concatenate([spectrum(b) for b in blocks]))
    assert np.abs(union - spectrum(fam.at(np.inf))).max() < 1e-9
    with pytest.raises(ValueError):
        fam.at(-1.0)


def test_robin_monotone_in_sigma():
    g = gm.build_grid(PLUS2X2)
    fam = gm.robin_family(g, gm.assemble_laplacian(g))
    prev = spectrum(fam.at(0.0))[:6]
    for s in (1.0, 10.0, 100.0, 1e3, 1e5):
        cur = spectrum(fam.at(s))[:6]
        assert (cur >= prev - 1e-10 * cur.max()).all()
        prev = cur
    inf = spectrum(fam.at(np.inf))[:6]
    assert (prev <= inf + 1e-8).all()


def test_transmission_residual_forms():
    rates = []
    for h in (0.125, 0.0625, 0.03125):
        spec = dict(MIDLINE, h=h)
        g = gm.build_grid(spec)
        fam = gm.robin_family(g, gm.assemble_laplacian(g))
        sigma = 2.0 / h**2
        s = eig_dense(fam.at(sigma))
        u = s.eigenvectors[:, 0]
        u = u / np.abs(u).max()
        assert gm.transmission_residual(g, fam, u, sigma) < 1e-9
        rates.append(gm.transmission_residual(g, fam, u, sigma, form="continuum"))
    # first order in h
    ratios = np.array(rates[:-1]) / np.array(rates[1:])
    assert (ratios > 1.8).all()


def test_transmission_nodal_column():
    # the (2, 1) Dirichlet mode vanishes on the midline
    g = gm.build_grid(MIDLINE)
    fam = gm.robin_family(g, gm.assemble_laplacian(g))
    u = np.array([np.sin(2 * np.pi * i / 8) * np.sin(np.pi * j / 8) for i, j in fam.base.index])
    rows = fam.gamma_rows
    assert np.abs(u[rows]).max() < 1e-12
    lam = 4 / 0.125**2 * (np.sin(2 * np.pi / 16) ** 2 + np.sin(np.pi / 16) ** 2)
    assert gm.transmission_residual(g, fam, u, 0.0, lam=lam, form="continuum") < 1e-9
    assert gm.transmission_residual(g, fam, u, 50.0, lam=lam, form="continuum") < 1e-9


def test_transmission_rejects_non_eigenvector():
    g = gm.build_grid(MIDLINE)
    fam = gm.robin_family(g, gm.assemble_laplacian(g))
    u = np.ones(fam.base.dimension)
    with pytest.raises(NotAnEigenvector):
        gm.transmission_residual(g, fam, u, 1.0)


@pytest.mark.parametrize("spec", [
    {"rect": [1, 1], "h": 0.3},
    {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "d", "points": [[0, 0], [1, 1]]}]},
    {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "a", "points": [[0.5, 0], [0.5, 1]]},
                                                {"id": "b", "points": [[0.625, 0], [0.625, 1]]}]},
    {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "a", "points": [[0.5, 0], [0.5, 0.5]]}]},
    {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "a", "points": [[0.25, 0.25], [0.75, 0.25],
                                                                       [0.75, 0.75], [0.25, 0.75],
                                                                       [0.25, 0.25]]}]},
    {"rect": [1, 1], "h": 0.125, "interfaces": [{"id": "a", "points": [[0, 0], [1, 0]]}]},
    dict(TEE3, poles=[[2, 1]]),
    dict(TEE3, slit=["nope"]),
])
def test_spec_errors(spec):
    with pytest.raises(SpecError):
        gm.build_grid(spec)


def test_slit_errors():
    with pytest.raises(SlitError):
        gm.build_grid(dict(TEE3, slit=[]))
    g = gm.build_grid(TEE3)
    with pytest.raises(SlitError):
        # half of the vertical line: even cut count at the odd point
        g.with_slit(g.interface_edges["v"])


def test_random_specs_build():
    built = 0
    for seed in range(30):
        spec = gm.random_grid_spec(seed)
        try:
            g = gm.build_grid(spec)
        except (SpecError, SlitError):
            continue
        built += 1
        assert gm.assemble_slit(g).dimension == len(g.interior_nodes()) - len(g.poles)
    assert built >= 20
