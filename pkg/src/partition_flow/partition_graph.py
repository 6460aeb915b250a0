"""Combinatorial boundary sets of planar partitions.

A partition is described by the graph of its boundary set: interior
critical vertices, boundary points (each on a boundary component), arcs
between them, and the faces (subdomains) with their adjacency across
arcs.  Geometric data such as angles is never computed; it can be
attached as metadata flags.

Compactification collapses every boundary component to a single point,
which turns the domain into a punctured sphere.  On the sphere a set of
arcs leaves the complement connected exactly when it contains no cycle,
which is what the slitting routine exploits.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class Vertex:
    id: Hashable
    kind: str
    component: Hashable = None


@dataclass(frozen=True)
class Edge:
    id: int
    u: Hashable
    v: Hashable


@dataclass(frozen=True)
class PartitionGraph:
    """Boundary set of a partition.

    ``holes`` lists every boundary component; ``outer`` names the exterior
    one (default: the first).  ``face_adjacency`` holds one
    ``(face_a, face_b, edge_id)`` triple per arc; an arc with the same face
    on both sides has ``face_a == face_b``.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    holes: tuple = ()
    outer: Hashable = None
    faces: tuple = ()
    face_adjacency: tuple = ()
    flags: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.outer is None and self.holes:
            object.__setattr__(self, "outer", self.holes[0])

    # -- lookups ---------------------------------------------------------
    def vertex(self, vid) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def edge(self, eid) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    @property
    def interior_vertices(self):
        return [v for v in self.vertices if v.kind == INTERIOR]

    @property
    def inner_holes(self):
        return [m for m in self.holes if m != self.outer]

    def degrees(self, edge_ids=None) -> dict:
        deg = {v.id: 0 for v in self.vertices}
        keep = None if edge_ids is None else set(edge_ids)
        for e in self.edges:
            if keep is not None and e.id not in keep:
                continue
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def component_ends(self, edge_ids=None) -> dict:
        """Number of arc ends arriving at each boundary component."""
        deg = self.degrees(edge_ids)
        out = {m: 0 for m in self.holes}
        for v in self.vertices:
            if v.kind == BOUNDARY:
                out[v.component] += deg[v.id]
        return out

    # -- compactification -------------------------------------------------
    def compact_vertex(self, vid):
        v = self.vertex(vid)
        return ("P", v.component) if v.kind == BOUNDARY else vid

    def compactified(self):
        """Sphere graph: ordered vertex list and ``(edge_id, a, b)`` triples.

        Interior vertices keep their input order and are followed by one
        point per boundary component, in ``holes`` order.
        """
        verts = [v.id for v in self.interior_vertices] + [("P", m) for m in self.holes]
        kind = {v.id: v for v in self.vertices}

        def cv(x):
            v = kind[x]
            return ("P", v.component) if v.kind == BOUNDARY else x

        edges = sorted((e.id, cv(e.u), cv(e.v)) for e in self.edges)
        return verts, edges

    # -- (de)serialisation ------------------------------------------------
    def to_dict(self) -> dict:
        verts = []
        for v in self.vertices:
            d = {"id": v.id, "kind": v.kind}
            if v.kind == BOUNDARY:
                d["component"] = v.component
            verts.append(d)
        return {
            "vertices": verts,
            "edges": [{"id": e.id, "ends": [e.u, e.v]} for e in self.edges],
            "holes": list(self.holes),
            "outer": self.outer,
            "faces": list(self.faces),
            "face_adjacency": [list(t) for t in self.face_adjacency],
            "flags": dict(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionGraph":
        verts = tuple(
            Vertex(_key(v["id"]), v.get("kind", INTERIOR), _key(v.get("component")))
            for v in d["vertices"]
        )
        edges = tuple(
            Edge(int(e["id"]), _key(e["ends"][0]), _key(e["ends"][1])) for e in d["edges"]
        )
        holes = tuple(_key(m) for m in d.get("holes", ()))
        outer = _key(d["outer"]) if d.get("outer") is not None else None
        faces = tuple(_key(f) for f in d.get("faces", ()))
        adj = tuple((_key(a), _key(b), int(e)) for a, b, e in d.get("face_adjacency", ()))
        return cls(verts, edges, holes, outer, faces, adj, dict(d.get("flags", {})))

    @classmethod
    def load(cls, path) -> "PartitionGraph":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _key(x):
    # JSON has no tuples; lists become tuples so they stay hashable
    return tuple(_key(y) for y in x) if isinstance(x, list) else x


@dataclass(frozen=True)
class OddData:
    odd_vertices: frozenset
    odd_holes: frozenset


@dataclass(frozen=True)
class SlitSet:
    edges: frozenset

    def sorted(self):
        return sorted(self.edges)


# ---------------------------------------------------------------------------
# validation and parity
# ---------------------------------------------------------------------------

def validate(graph: PartitionGraph) -> list[str]:
    """List every violated combinatorial constraint (empty list means ok)."""
    errs = []
    ids = [v.id for v in graph.vertices]
    if len(set(ids)) != len(ids):
        errs.append("duplicate vertex ids")
    eids = [e.id for e in graph.edges]
    if len(set(eids)) != len(eids):
        errs.append("duplicate edge ids")
    known = set(ids)
    holes = set(graph.holes)
    for v in graph.vertices:
        if v.kind not in (INTERIOR, BOUNDARY):
            errs.append(f"vertex {v.id!r}: unknown kind {v.kind!r}")
        elif v.kind == BOUNDARY and v.component not in holes:
            errs.append(f"vertex {v.id!r}: boundary component {v.component!r} not in holes")
    dangling = False
    for e in graph.edges:
        for x in (e.u, e.v):
            if x not in known:
                errs.append(f"edge {e.id}: unknown endpoint {x!r}")
                dangling = True
    if graph.holes and graph.outer not in holes:
        errs.append(f"outer component {graph.outer!r} not in holes")
    if dangling:
        return errs

    deg = graph.degrees()
    for v in graph.vertices:
        if v.kind == INTERIOR and deg[v.id] < 3:
            errs.append(f"vertex {v.id!r}: nu_l >= 3 violated (degree {deg[v.id]})")
        if v.kind == BOUNDARY and deg[v.id] < 1:
            errs.append(f"vertex {v.id!r}: rho_m >= 1 violated (degree 0)")

    if graph.faces:
        faces = set(graph.faces)
        seen = defaultdict(int)
        for a, b, eid in graph.face_adjacency:
            seen[eid] += 1
            for f in (a, b):
                if f not in faces:
                    errs.append(f"face adjacency names unknown face {f!r}")
        for eid in eids:
            if seen.get(eid, 0) != 1:
                errs.append(f"edge {eid}: appears {seen.get(eid, 0)} times in face_adjacency")
        # Euler on the sphere, one extra for each additional component
        verts, edges = graph.compactified()
        V, E, F = len(verts), len(edges), len(faces)
        C = _count_components(verts, edges)
        if V - E + F != 1 + C:
            errs.append(f"Euler characteristic V-E+F={V - E + F} != {1 + C}")
    return errs


def _count_components(verts, edges) -> int:
    uf = _UnionFind(verts)
    for _, a, b in edges:
        uf.union(a, b)
    return len({uf.find(v) for v in verts})


def odd_data(graph: PartitionGraph, edge_ids=None) -> OddData:
    """Odd interior vertices and odd inner holes of ``graph``.

    With ``edge_ids`` the parities are those of the sub-collection.
    """
    deg = graph.degrees(edge_ids)
    odd_v = frozenset(v.id for v in graph.interior_vertices if deg[v.id] % 2)
    ends = graph.component_ends(edge_ids)
    odd_h = frozenset(m for m in graph.inner_holes if ends[m] % 2)
    return OddData(odd_v, odd_h)


def is_bipartite(graph: PartitionGraph):
    """Two-colour the face graph, or return an odd cycle of faces.

    Returns ``(True, colouring)`` or ``(False, cycle)``.  Arcs with the same
    face on both sides do not separate anything and are ignored.
    """
    nbrs = defaultdict(list)
    for a, b, _ in graph.face_adjacency:
        if a != b:
            nbrs[a].append(b)
            nbrs[b].append(a)
    color, parent = {}, {}
    for start in graph.faces:
        if start in color:
            continue
        color[start], parent[start] = 0, None
        queue = deque([start])
        while queue:
            f = queue.popleft()
            for g in nbrs[f]:
                if g not in color:
                    color[g], parent[g] = 1 - color[f], f
                    queue.append(g)
                elif color[g] == color[f]:
                    return False, _odd_cycle(parent, f, g)
    return True, color


def _odd_cycle(parent, a, b):
    def path(x):
        out = []
        while x is not None:
            out.append(x)
            x = parent[x]
        return out

    pa, pb = path(a), path(b)
    common = set(pa) & set(pb)
    ia = next(i for i, x in enumerate(pa) if x in common)
    ib = next(i for i, x in enumerate(pb) if x in common)
    return pa[: ia + 1] + pb[:ib][::-1]


# ---------------------------------------------------------------------------
# slitting
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def find_cycle(verts, edges):
    """First cycle met by depth-first search, as a list of edge ids.

    Starts from the earliest vertex in ``verts`` and always tries the
    lowest edge id first.  Returns None on a forest.
    """
    inc = defaultdict(list)
    for eid, a, b in edges:
        inc[a].append((eid, b))
        if a != b:
            inc[b].append((eid, a))
    for lst in inc.values():
        lst.sort(key=lambda t: t[0])

    state = {}
    for root in verts:
        if root in state:
            continue
        # stack of (vertex, edge used to enter it, iterator position)
        stack = [(root, None)]
        pos = {root: 0}
        on_stack = {root: 0}
        state[root] = 1
        while stack:
            v, via = stack[-1]
            i = pos[v]
            if i == len(inc[v]):
                stack.pop()
                del on_stack[v]
                continue
            pos[v] = i + 1
            eid, w = inc[v][i]
            if eid == via:
                continue
            if w in on_stack:
                depth = on_stack[w]
                cycle = [stack[j][1] for j in range(depth + 1, len(stack))]
                return cycle + [eid]
            if w in state:
                continue
            state[w] = 1
            pos[w] = 0
            on_stack[w] = len(stack)
            stack.append((w, eid))
    return None


def slit(graph: PartitionGraph) -> SlitSet:
    """Delete cycles of the compactified graph until none is left."""
    verts, edges = graph.compactified()
    while True:
        cycle = find_cycle(verts, edges)
        if cycle is None:
            break
        gone = set(cycle)
        edges = [t for t in edges if t[0] not in gone]
    return SlitSet(frozenset(t[0] for t in edges))


def has_cycle(graph: PartitionGraph, edge_ids) -> bool:
    verts, edges = graph.compactified()
    keep = set(edge_ids)
    uf = _UnionFind(verts)
    for eid, a, b in edges:
        if eid in keep and not uf.union(a, b):
            return True
    return False


def slit_verify(graph: PartitionGraph, candidate) -> bool:
    ids = candidate.edges if isinstance(candidate, SlitSet) else frozenset(candidate)
    if not ids <= set(graph.edge_ids):
        return False
    if odd_data(graph, ids) != odd_data(graph):
        return False
    return not has_cycle(graph, ids)


# ---------------------------------------------------------------------------
# random planar partition graphs
# ---------------------------------------------------------------------------

def random_partition_graph(rng, max_edges: int = 10, max_holes: int = 2) -> PartitionGraph:
    """Random partition graph built on the sphere with its faces.

    Faces are cyclic lists of darts ``(edge, forward)``.  Growth steps are
    chords inside a face (possibly loops), new holes hung from a corner, and
    subdivisions creating a new interior vertex that then receives a chord.
    Boundary points are finally split off the component points.
    """
    rng = np.random.default_rng(rng)
    ends = {}          # edge -> [tail, head] on the sphere
    faces = []
    comps = ["outer"]

    def tail(d):
        e, fwd = d
        return ends[e][0] if fwd else ends[e][1]

    def chord(fi, i, j):
        face = faces[fi]
        n = len(ends)
        a, b = tail(face[i]), tail(face[j])
        ends[n] = [a, b]
        if i <= j:
            A = face[i:j] + [(n, False)]
            B = face[j:] + face[:i] + [(n, True)]
        else:
            A = face[i:] + face[:j] + [(n, False)]
            B = face[j:i] + [(n, True)]
        faces[fi] = A
        faces.append(B)

    # start: one arc from the outer boundary back to itself
    ends[0] = [("P", "outer"), ("P", "outer")]
    faces.extend([[(0, True)], [(0, False)]])
    interior = []

    def subdivide(e, fi):
        # split e into (e -> x, n -> rest); the new vertex x gets a chord
        x = f"x{len(interior)}"
        interior.append(x)
        n = len(ends)
        a, b = ends[e]
        ends[e] = [a, x]
        ends[n] = [x, b]
        for face in faces:
            k = 0
            while k < len(face):
                d = face[k]
                if d[0] == e:
                    face[k:k + 1] = [(e, True), (n, True)] if d[1] else [(n, False), (e, False)]
                    k += 2
                else:
                    k += 1
        face = faces[fi]
        corners = [k for k, d in enumerate(face) if tail(d) == x]
        i = corners[0]
        j = int(rng.integers(len(face)))
        chord(fi, i, j)

    subdivide(0, 0)
    while len(ends) < max_edges:
        room = max_edges - len(ends)
        r = rng.random()
        fi = int(rng.integers(len(faces)))
        face = faces[fi]
        if r < 0.35 and room >= 2:
            e = face[int(rng.integers(len(face)))][0]
            fi2 = next(k for k, f in enumerate(faces) if any(d[0] == e for d in f))
            subdivide(e, fi2)
        elif r < 0.5 and len(comps) <= max_holes:
            m = f"H{len(comps)}"
            comps.append(m)
            i = int(rng.integers(len(face)))
            n = len(ends)
            v = tail(face[i])
            ends[n] = [v, ("P", m)]
            faces[fi] = face[:i] + [(n, True), (n, False)] + face[i:]
        else:
            i = int(rng.integers(len(face)))
            j = int(rng.integers(len(face)))
            chord(fi, i, j)
    return _realise(ends, faces, comps, interior, rng)


def _realise(ends, faces, comps, interior, rng) -> PartitionGraph:
    verts = [Vertex(x, INTERIOR) for x in interior]
    points = defaultdict(list)
    edges = []
    for e in sorted(ends):
        out = []
        for end in ends[e]:
            if isinstance(end, tuple):
                m = end[1]
                if points[m] and rng.random() < 0.5:
                    z = points[m][int(rng.integers(len(points[m])))]
                else:
                    z = f"z_{m}_{len(points[m])}"
                    points[m].append(z)
                    verts.append(Vertex(z, BOUNDARY, m))
                out.append(z)
            else:
                out.append(end)
        edges.append(Edge(e, out[0], out[1]))
    side = defaultdict(list)
    for fi, face in enumerate(faces):
        for e, _ in face:
            side[e].append(f"D{fi}")
    adj = tuple((side[e][0], side[e][1], e) for e in sorted(ends))
    return PartitionGraph(
        tuple(verts), tuple(edges), tuple(comps), "outer",
        tuple(f"D{fi}" for fi in range(len(faces))), adj,
    )


# ---------------------------------------------------------------------------
# reference graphs
# ---------------------------------------------------------------------------

def mercedes_star() -> PartitionGraph:
    verts = (
        Vertex("c", INTERIOR),
        Vertex("z1", BOUNDARY, "outer"),
        Vertex("z2", BOUNDARY, "outer"),
        Vertex("z3", BOUNDARY, "outer"),
    )
    edges = (Edge(0, "c", "z1"), Edge(1, "c", "z2"), Edge(2, "c", "z3"))
    adj = (("D1", "D2", 1), ("D2", "D3", 2), ("D3", "D1", 0))
    return PartitionGraph(verts, edges, ("outer",), "outer", ("D1", "D2", "D3"), adj)


def checkerboard() -> PartitionGraph:
    verts = (Vertex("c", INTERIOR),) + tuple(
        Vertex(f"z{i}", BOUNDARY, "outer") for i in range(4)
    )
    edges = tuple(Edge(i, "c", f"z{i}") for i in range(4))
    adj = tuple((f"D{i}", f"D{(i + 1) % 4}", (i + 1) % 4) for i in range(4))
    return PartitionGraph(verts, edges, ("outer",), "outer",
                          tuple(f"D{i}" for i in range(4)), adj)


def five_star_with_holes() -> PartitionGraph:
    """One critical point of degree 5 in a domain with three holes.

    Boundary points z1..z5 have degrees 1, 3, 1, 1, 1; z2 carries a loop
    cutting a cap off the outer boundary, z3 and z4 sit on hole H1, z5 on
    hole H2 (the only odd hole), and H3 receives no arc.
    """
    verts = (
        Vertex("x1", INTERIOR),
        Vertex("z1", BOUNDARY, "outer"),
        Vertex("z2", BOUNDARY, "outer"),
        Vertex("z3", BOUNDARY, "H1"),
        Vertex("z4", BOUNDARY, "H1"),
        Vertex("z5", BOUNDARY, "H2"),
    )
    edges = (
        Edge(0, "x1", "z1"), Edge(1, "x1", "z3"), Edge(2, "x1", "z4"),
        Edge(3, "x1", "z2"), Edge(4, "x1", "z5"), Edge(5, "z2", "z2"),
    )
    adj = (
        ("D1", "D2", 0), ("D1", "DA", 1), ("DA", "D1", 2),
        ("D1", "D2", 3), ("D2", "D2", 4), ("D2", "D3", 5),
    )
    return PartitionGraph(verts, edges, ("outer", "H1", "H2", "H3"), "outer",
                          ("D1", "DA", "D2", "D3"), adj)


def theta_graph() -> PartitionGraph:
    """Two degree-3 vertices joined by a double arc, each tied to the boundary."""
    verts = (
        Vertex("a", INTERIOR), Vertex("b", INTERIOR),
        Vertex("za", BOUNDARY, "outer"), Vertex("zb", BOUNDARY, "outer"),
    )
    edges = (Edge(0, "a", "b"), Edge(1, "a", "b"), Edge(2, "a", "za"), Edge(3, "b", "zb"))
    adj = (("D0", "D1", 0), ("D0", "D2", 1), ("D1", "D2", 2), ("D1", "D2", 3))
    return PartitionGraph(verts, edges, ("outer",), "outer", ("D0", "D1", "D2"), adj)
