import numpy as np
import pytest

from partition_flow import flow_analysis as fa
from partition_flow import grid_model as gm
from partition_flow.acceptance import BRICK4, PLUS2X2, RECT_3X2, RECT_NODAL2, RECT_NODAL3, TEE3
from partition_flow.errors import EpsilonWindowEmpty, LevelOnSpectrum, NotEquipartition


def test_sigma_grid():
    s = fa.sigma_grid(1e4, 64)
    assert s.size == 64 and s[0] == 0.0
    assert np.isclose(s[1], 1e-3) and np.isclose(s[-1], 1e4)
    assert (np.diff(s) > 0).all()
    with pytest.raises(ValueError):
        fa.sigma_grid(1.0, 1)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("PARTITION_FLOW_THREADS", "1")
    assert fa.worker_count() == 1
    monkeypatch.setenv("PARTITION_FLOW_THREADS", "3")
    assert fa.worker_count() == 3


def test_sweep_shapes_and_limits():
    g = gm.build_grid(RECT_NODAL2)
    branch = fa.sigma_sweep(fa.family_for(g, False), samples=24)
    assert branch.level_values.shape == (3, 24)
    assert branch.sigma_max == fa.default_sigma_max(g.h)
    assert (np.diff(branch.level_values, axis=1) >= -1e-9).all()
    # at sigma_max the two lowest branches sit on the Dirichlet energy
    assert np.abs(branch.level_values[:2, -1] - branch.infinity_values[:2]).max() < 0.02 * branch.infinity_values[0]
    rows = list(branch.to_rows())
    assert len(rows) == 24 and len(rows[0]) == 4


def test_sweep_threads_agree(monkeypatch):
    g = gm.build_grid(PLUS2X2)
    fam = fa.family_for(g, False)
    a = fa.sigma_sweep(fam, samples=16, workers=1).level_values
    b = fa.sigma_sweep(fam, samples=16, workers=4).level_values
    assert np.array_equal(a, b)


def test_sweep_needs_k_plus_one_levels():
    g = gm.build_grid(RECT_NODAL3)
    with pytest.raises(ValueError):
        fa.sigma_sweep(fa.family_for(g, False), levels=3)


def test_crossing_count_rect3x2():
    g = gm.build_grid(RECT_3X2)
    rep = fa.deficiency(g)
    branch = fa.sigma_sweep(fa.family_for(g, False), levels=6)
    assert fa.crossing_count(branch, rep.extras["lambda"]) == rep.mor == 1
    (n, (lo, hi)), = branch.crossings
    assert hi - lo <= 1e-6 * branch.sigma_max
    # the refined bracket really straddles the level
    fam = branch.family
    assert fa.lowest_eigenvalues(fam.at(lo), n)[n - 1] <= rep.extras["lambda"]
    assert fa.lowest_eigenvalues(fam.at(hi), n)[n - 1] > rep.extras["lambda"]


def test_crossing_count_errors():
    g = gm.build_grid(RECT_NODAL2)
    branch = fa.sigma_sweep(fa.family_for(g, False), samples=16)
    with pytest.raises(LevelOnSpectrum):
        fa.crossing_count(branch, float(branch.level_values[0, 0]))
    with pytest.raises(ValueError):
        fa.crossing_count(branch, 1e9)


@pytest.mark.parametrize("spec,slit,expected", [
    (RECT_NODAL2, False, (2, 2, 1, 0, 0)),
    (RECT_NODAL3, False, (3, 3, 1, 0, 0)),
    (RECT_3X2, False, (3, 4, 1, 1, 1)),
    (PLUS2X2, False, (4, 4, 1, 0, 0)),
    (TEE3, False, (3, 4, 1, 1, 1)),
    (TEE3, True, (3, 5, 0, 1, 2)),
    (BRICK4, False, (4, 5, 2, 2, 1)),
    (BRICK4, True, (4, 6, 0, 1, 2)),
])
def test_deficiency_presets(spec, slit, expected):
    r = fa.deficiency(gm.build_grid(spec), slit_flag=slit, check_flow=True)
    assert (r.k, r.ell, r.m, r.mor, r.def_) == expected
    assert r.identity_residual == 0
    assert r.extras["counting"] == r.mor == r.extras["crossings"]
    assert r.extras["dn_symmetry_defect"] < 1e-12
    assert r.ok()


def test_deficiency_report_round_trip():
    r = fa.deficiency(gm.build_grid(RECT_3X2))
    d = r.to_dict()
    assert d["def"] == 1 and d["identity_residual"] == 0
    assert type(r).from_dict(d).to_dict() == d


def test_not_equipartition():
    g = gm.build_grid({"rect": [3, 1], "h": 0.125, "interfaces": [{"id": "a", "points": [[1, 0], [1, 1]]}]})
    with pytest.raises(NotEquipartition):
        fa.deficiency(g)


def test_epsilon_outside_window():
    g = gm.build_grid(RECT_NODAL2)
    with pytest.raises(EpsilonWindowEmpty):
        fa.deficiency(g, epsilon_policy=1e6)


def test_counting_check_matches_morse():
    g = gm.build_grid(BRICK4)
    for slit in (False, True):
        r = fa.deficiency(g, slit_flag=slit)
        mor, count = fa.counting_check(fa.family_for(g, slit), r.extras["lambda"])
        assert mor == count == r.mor


@pytest.mark.parametrize("spec,slit", [(RECT_NODAL3, False), (PLUS2X2, False), (TEE3, True)])
def test_lemma_both_directions(spec, slit):
    rep = fa.lemma_eigeig_check(gm.build_grid(spec), slit, trials=8, seed=1)
    assert rep.ok and rep.checked > 0
    assert rep.max_mismatch < 1e-8


@pytest.mark.parametrize("spec", [TEE3, BRICK4])
def test_compare_constructions_interlaces(spec):
    c = fa.compare_constructions(gm.build_grid(spec))
    assert c.interlaced
    assert c.restricted.size < c.full.size
    # pinning the slit traces is a genuinely different operator here
    assert not c.contained


def test_compare_circle():
    c = fa.compare_circle(3, (1.5 + 1e-3) ** 2)
    assert c.interlaced and not c.contained
    assert c.full.size == 3 and c.restricted.size == 2


def test_compare_spectra_basic():
    assert fa.compare_spectra([1.0, 2.0, 3.0], [2.0]) == (True, True, 0.0)
    contained, interlaced, _ = fa.compare_spectra([1.0, 2.0, 3.0], [3.5])
    assert not contained and not interlaced
