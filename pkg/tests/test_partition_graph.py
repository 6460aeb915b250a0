import itertools
import json

import numpy as np
from hypothesis import given, settings, strategies as st

from partition_flow import partition_graph as pg
from partition_flow.acceptance import brute_force_slits


def test_mercedes_valid_and_odd():
    g = pg.mercedes_star()
    assert pg.validate(g) == []
    od = pg.odd_data(g)
    assert od.odd_vertices == {"c"} and od.odd_holes == frozenset()


def test_degree_two_vertex_rejected():
    g = pg.PartitionGraph(
        (pg.Vertex("x", pg.INTERIOR), pg.Vertex("a", pg.BOUNDARY, "outer"), pg.Vertex("b", pg.BOUNDARY, "outer")),
        (pg.Edge(0, "x", "a"), pg.Edge(1, "x", "b")),
        ("outer",),
    )
    errs = pg.validate(g)
    assert any("nu_l >= 3" in e for e in errs)


def test_validate_reports_all_problems():
    g = pg.PartitionGraph(
        (pg.Vertex("x", pg.INTERIOR), pg.Vertex("z", pg.BOUNDARY, "nowhere")),
        (pg.Edge(0, "x", "z"), pg.Edge(0, "x", "q")),
        ("outer",),
    )
    errs = pg.validate(g)
    assert len(errs) >= 3


def test_five_star_with_holes():
    g = pg.five_star_with_holes()
    assert pg.validate(g) == []
    deg = g.degrees()
    assert deg["x1"] == 5
    assert [deg[z] for z in ("z1", "z2", "z3", "z4", "z5")] == [1, 3, 1, 1, 1]
    od = pg.odd_data(g)
    assert od.odd_vertices == {"x1"} and od.odd_holes == {"H2"}
    ok, colouring = pg.is_bipartite(g)
    assert ok
    for a, b, _ in g.face_adjacency:
        assert a == b or colouring[a] != colouring[b]


def test_nodal_graph_has_no_odd_vertices():
    g = pg.checkerboard()
    assert pg.validate(g) == []
    assert pg.odd_data(g).odd_vertices == frozenset()
    ok, _ = pg.is_bipartite(g)
    assert ok
    # nothing odd: the empty slit is admissible and is what slit returns
    assert pg.slit_verify(g, [])
    assert pg.slit(g).edges == frozenset()


def test_mercedes_not_bipartite():
    ok, cycle = pg.is_bipartite(pg.mercedes_star())
    assert not ok
    assert len(cycle) == 3 and set(cycle) == {"D1", "D2", "D3"}


def test_mercedes_slit_single_arm():
    g = pg.mercedes_star()
    s = pg.slit(g)
    assert s.sorted() == [2]
    assert pg.slit_verify(g, s)


def test_mercedes_subsets_exhaustive():
    g = pg.mercedes_star()
    accepted = [set(sub) for r in range(4) for sub in itertools.combinations(range(3), r)
                if pg.slit_verify(g, sub)]
    assert accepted == [{0}, {1}, {2}]
    assert not pg.slit_verify(g, [0, 1])
    assert not pg.slit_verify(g, [])


def test_forest_is_unchanged():
    # a single arc from an odd hole to the outer boundary: no cycle on the sphere
    g = pg.PartitionGraph(
        (pg.Vertex("a", pg.BOUNDARY, "outer"), pg.Vertex("b", pg.BOUNDARY, "H")),
        (pg.Edge(0, "a", "b"),),
        ("outer", "H"),
        faces=("D",), face_adjacency=(("D", "D", 0),),
    )
    assert pg.validate(g) == []
    assert pg.slit(g).sorted() == [0]


def test_theta_graph():
    g = pg.theta_graph()
    assert pg.validate(g) == []
    s = pg.slit(g)
    assert s.sorted() == [2, 3]
    assert s.edges in brute_force_slits(g)
    assert pg.odd_data(g, s.edges) == pg.odd_data(g)


def test_find_cycle_self_loop_and_parallel():
    assert pg.find_cycle(["a"], [(0, "a", "a")]) == [0]
    assert sorted(pg.find_cycle(["a", "b"], [(0, "a", "b"), (1, "a", "b")])) == [0, 1]
    assert pg.find_cycle(["a", "b", "c"], [(0, "a", "b"), (1, "b", "c")]) is None


def test_slit_deterministic():
    g = pg.five_star_with_holes()
    assert pg.slit(g) == pg.slit(g)


def test_json_round_trip(tmp_path):
    g = pg.five_star_with_holes()
    p = tmp_path / "g.json"
    p.write_text(json.dumps(g.to_dict()))
    h = pg.PartitionGraph.load(p)
    assert h == g
    assert pg.slit(h) == pg.slit(g)


@settings(max_examples=120, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), edges=st.integers(2, 10))
def test_random_graphs_slit_membership(seed, edges):
    g = pg.random_partition_graph(np.random.default_rng(seed), max_edges=edges)
    assert pg.validate(g) == []
    s = pg.slit(g)
    accepted = brute_force_slits(g)
    assert pg.slit_verify(g, s)
    assert s.edges in accepted
    # the cycle test and the face-connectivity oracle accept the same sets
    by_cycles = [frozenset(sub) for r in range(len(g.edges) + 1)
                 for sub in itertools.combinations(g.edge_ids, r) if pg.slit_verify(g, sub)]
    assert set(by_cycles) == set(accepted)
