"""Finite-difference model of a partitioned rectangle.

The rectangle ``[0, Lx] x [0, Ly]`` is sampled at ``(i*h, j*h)``.  Nodes on
the outer boundary carry Dirichlet data and are eliminated.  Interfaces are
axis-aligned polylines through lattice points; the nodes they cover form
the discrete boundary set, and the remaining interior nodes split into
4-connected subdomains.

Three operators live on this grid: the plain 5-point Laplacian, the signed
("slit") Laplacian that realizes an antiperiodic cut along a slitting set,
and the explicit two-sheet cover whose antisymmetric part reproduces the
slit operator.  ``robin_family`` adds an interface mass on top of either.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from . import partition_graph as pg
from .eigen_core import SymmetricOperator
from .errors import NotAnEigenvector, SlitError, SpecError

DIRICHLET = -1
INTERFACE = -2
POLE = -3

# counter-clockwise: E, N, W, S
DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _edge(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass
class Arc:
    id: int
    nodes: tuple          # lattice path, first and last are vertices

    def edges(self):
        return [_edge(a, b) for a, b in zip(self.nodes, self.nodes[1:])]


@dataclass
class GridPartition:
    h: float
    nx: int
    ny: int
    labels: np.ndarray                     # (nx+1, ny+1) codes, subdomains 1..k
    gamma_edges: frozenset                 # lattice edges covered by interfaces
    interface_edges: dict                  # polyline id -> frozenset of edges
    arcs: list
    graph: pg.PartitionGraph
    poles: tuple
    slit_edges: frozenset = frozenset()
    quadrants: dict = field(default_factory=dict)   # slit node -> 4 signs
    name: str = ""

    @property
    def domain_count(self) -> int:
        return int(self.labels.max(initial=0))

    @property
    def k(self) -> int:
        return self.domain_count

    def is_dirichlet(self, node) -> bool:
        i, j = node
        return i <= 0 or j <= 0 or i >= self.nx or j >= self.ny

    def interior_nodes(self):
        return [(i, j) for i in range(1, self.nx) for j in range(1, self.ny)]

    def gamma_nodes(self):
        return [n for n in self.interior_nodes() if self.labels[n] in (INTERFACE, POLE)]

    def subdomain_nodes(self, label: int):
        return [n for n in self.interior_nodes() if self.labels[n] == label]

    @property
    def slit_nodes(self):
        return sorted(self.quadrants)

    def side(self, node, neighbour) -> int:
        """Sign (+1 or -1) of the side of slit node ``node`` facing ``neighbour``."""
        q = self.quadrants.get(node)
        if q is None:
            return 1
        d = DIRS.index((neighbour[0] - node[0], neighbour[1] - node[1]))
        return q[d]

    def with_slit(self, slit_edges) -> "GridPartition":
        """Copy of this grid carrying a different slitting set."""
        g = GridPartition(self.h, self.nx, self.ny, self.labels, self.gamma_edges,
                          self.interface_edges, self.arcs, self.graph, self.poles,
                          name=self.name)
        _attach_slit(g, frozenset(slit_edges))
        return g

    def arc_edges(self, arc_ids):
        out = set()
        for a in arc_ids:
            out.update(self.arcs[a].edges())
        return frozenset(out)


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------

def _lattice(value, h, what):
    q = value / h
    r = round(q)
    if abs(q - r) > 1e-9 * max(1.0, abs(q)):
        raise SpecError(f"{what}={value!r} is not a multiple of h={h!r}")
    return int(r)


def load_spec(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def build_grid(domain_spec, partition_spec=None, h=None) -> GridPartition:
    """Label a rectangular grid from a JSON-like description.

    ``domain_spec`` holds ``rect: [Lx, Ly]`` and ``h``; ``partition_spec``
    holds ``interfaces`` (list of ``{"id", "points"}``), optional ``slit``
    (list of interface ids, or ``"auto"``) and optional ``poles`` (checked
    against the odd junctions found).  A single dict with all keys works
    too.
    """
    spec = dict(domain_spec)
    if partition_spec:
        spec.update(partition_spec)
    if h is not None:
        spec["h"] = h
    try:
        Lx, Ly = (float(v) for v in spec["rect"])
        h = float(spec["h"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"domain needs 'rect': [Lx, Ly] and 'h' ({exc})") from None
    if h <= 0 or Lx <= 0 or Ly <= 0:
        raise SpecError("rect sides and h must be positive")
    nx, ny = _lattice(Lx, h, "Lx"), _lattice(Ly, h, "Ly")
    if nx < 2 or ny < 2:
        raise SpecError("grid has no interior nodes")

    # rasterise the interfaces
    interface_edges = {}
    for k, item in enumerate(spec.get("interfaces", [])):
        iid = item.get("id", k) if isinstance(item, dict) else k
        pts = item["points"] if isinstance(item, dict) else item
        if len(pts) < 2:
            raise SpecError(f"interface {iid!r}: needs at least two points")
        lat = []
        for x, y in pts:
            i, j = _lattice(float(x), h, f"interface {iid!r} x"), _lattice(float(y), h, f"interface {iid!r} y")
            if not (0 <= i <= nx and 0 <= j <= ny):
                raise SpecError(f"interface {iid!r}: point ({x}, {y}) outside the rectangle")
            lat.append((i, j))
        edges = set()
        for (i0, j0), (i1, j1) in zip(lat, lat[1:]):
            if i0 != i1 and j0 != j1:
                raise SpecError(f"interface {iid!r}: segment ({i0},{j0})-({i1},{j1}) not axis-aligned")
            n = max(abs(i1 - i0), abs(j1 - j0))
            if n == 0:
                continue
            di, dj = (i1 - i0) // n, (j1 - j0) // n
            for s in range(n):
                a = (i0 + s * di, j0 + s * dj)
                b = (a[0] + di, a[1] + dj)
                edges.add(_edge(a, b))
        if iid in interface_edges:
            raise SpecError(f"duplicate interface id {iid!r}")
        interface_edges[iid] = frozenset(edges)
    gamma = frozenset().union(*interface_edges.values()) if interface_edges else frozenset()

    def on_boundary(n):
        return n[0] in (0, nx) or n[1] in (0, ny)

    labels = np.zeros((nx + 1, ny + 1), dtype=int)
    labels[0, :] = labels[nx, :] = labels[:, 0] = labels[:, ny] = DIRICHLET
    nbr = defaultdict(list)
    for a, b in sorted(gamma):
        if on_boundary(a) and on_boundary(b):
            raise SpecError(f"interface runs along the outer boundary at {a}-{b}")
        nbr[a].append(b)
        nbr[b].append(a)
        for n in (a, b):
            if not on_boundary(n):
                labels[n] = INTERFACE

    # interface nodes must not touch each other except along interfaces
    for n in nbr:
        if on_boundary(n):
            continue
        for di, dj in DIRS:
            m = (n[0] + di, n[1] + dj)
            if labels[m] == INTERFACE and _edge(n, m) not in gamma:
                raise SpecError(f"interfaces too close: {n} and {m} are adjacent but not joined")

    free = labels == 0
    lab, k = ndimage.label(free)       # default structure is 4-connectivity
    labels[free] = lab[free]
    if gamma and k == 0:
        raise SpecError("no subdomain nodes left")
    if not gamma and k != 1:
        raise SpecError("domain without interfaces must be connected")

    # vertices of the boundary set: boundary points and nodes of degree != 2
    deg = {n: len(v) for n, v in nbr.items()}
    vertices = sorted(n for n in nbr if on_boundary(n) or deg[n] != 2)
    for n in vertices:
        if not on_boundary(n) and deg[n] == 1:
            raise SpecError(f"interface ends inside the domain at node {n}")
    poles = tuple(n for n in vertices if not on_boundary(n) and deg[n] % 2 == 1)
    for n in poles:
        labels[n] = POLE
    if "poles" in spec and spec["poles"] is not None:
        given = {(_lattice(float(x), h, "pole x"), _lattice(float(y), h, "pole y"))
                 for x, y in spec["poles"]}
        if given != set(poles):
            raise SpecError(f"poles {sorted(given)} do not match odd junctions {sorted(poles)}")

    arcs = _trace_arcs(nbr, vertices)
    covered = set().union(*(a.edges() for a in arcs)) if arcs else set()
    if covered != set(gamma):
        raise SpecError("interface contains a closed loop without junctions")

    graph = _extract_graph(nx, ny, labels, arcs, vertices, on_boundary, k)
    errs = pg.validate(graph)
    if errs:
        raise SpecError("boundary set is not weakly regular: " + "; ".join(errs))

    grid = GridPartition(h, nx, ny, labels, gamma, interface_edges, arcs, graph, poles,
                         name=str(spec.get("name", "")))
    slit_spec = spec.get("slit")
    if slit_spec is None:
        slit_spec = "auto" if poles else []
    if slit_spec == "auto":
        chosen = pg.slit(graph)
        slit_edges = grid.arc_edges(sorted(chosen.edges))
    else:
        unknown = [s for s in slit_spec if s not in interface_edges]
        if unknown:
            raise SpecError(f"slit names unknown interface ids {unknown}")
        slit_edges = frozenset().union(*(interface_edges[s] for s in slit_spec)) if slit_spec else frozenset()
    _attach_slit(grid, slit_edges)
    return grid


def _trace_arcs(nbr, vertices):
    vset = set(vertices)
    used = set()
    arcs = []
    for v in vertices:
        for w in sorted(nbr[v]):
            if _edge(v, w) in used:
                continue
            path = [v, w]
            used.add(_edge(v, w))
            while path[-1] not in vset:
                cur, prev = path[-1], path[-2]
                nxt = [x for x in nbr[cur] if x != prev and _edge(cur, x) not in used]
                if not nxt:
                    break
                used.add(_edge(cur, nxt[0]))
                path.append(nxt[0])
            arcs.append(Arc(len(arcs), tuple(path)))
    return arcs


def _vid(n, on_boundary):
    return f"{'z' if on_boundary(n) else 'x'}{n[0]}_{n[1]}"


def _extract_graph(nx, ny, labels, arcs, vertices, on_boundary, k) -> pg.PartitionGraph:
    verts = []
    for n in vertices:
        if on_boundary(n):
            verts.append(pg.Vertex(_vid(n, on_boundary), pg.BOUNDARY, "outer"))
        else:
            verts.append(pg.Vertex(_vid(n, on_boundary), pg.INTERIOR))
    edges = tuple(
        pg.Edge(a.id, _vid(a.nodes[0], on_boundary), _vid(a.nodes[-1], on_boundary))
        for a in arcs
    )
    adj = []
    for a in arcs:
        left = right = None
        for p, q in zip(a.nodes, a.nodes[1:]):
            d = (q[0] - p[0], q[1] - p[1])
            nl = DIRS[(DIRS.index(d) + 1) % 4]
            for sgn, slot in ((1, "l"), (-1, "r")):
                for base in (p, q):
                    c = (base[0] + sgn * nl[0], base[1] + sgn * nl[1])
                    if 0 <= c[0] <= nx and 0 <= c[1] <= ny and labels[c] > 0:
                        if slot == "l" and left is None:
                            left = int(labels[c])
                        if slot == "r" and right is None:
                            right = int(labels[c])
            if left is not None and right is not None:
                break
        if left is None or right is None:
            raise SpecError(f"arc {a.id} from {a.nodes[0]} to {a.nodes[-1]} has no subdomain node beside it")
        adj.append((f"D{left}", f"D{right}", a.id))
    return pg.PartitionGraph(
        tuple(verts), edges, ("outer",), "outer",
        tuple(f"D{i}" for i in range(1, k + 1)), tuple(adj),
    )


def _attach_slit(grid: GridPartition, slit_edges: frozenset):
    """Check parities and compute quadrant signs around every slit node."""
    if not slit_edges <= grid.gamma_edges:
        raise SlitError("slit edges must lie on the interfaces")
    grid.slit_edges = slit_edges
    cut = defaultdict(lambda: [False] * 4)
    forward = {}
    for a, b in sorted(slit_edges):
        d = DIRS.index((b[0] - a[0], b[1] - a[1]))
        cut[a][d] = True
        cut[b][(d + 2) % 4] = True
    # forward direction of each slit node along its arc
    for arc in grid.arcs:
        for p, q in zip(arc.nodes, arc.nodes[1:]):
            if _edge(p, q) in slit_edges and p not in forward:
                forward[p] = DIRS.index((q[0] - p[0], q[1] - p[1]))
    poles = set(grid.poles)
    quads = {}
    for n in sorted(cut):
        c = cut[n]
        ncut = sum(c)
        if n in poles:
            if ncut % 2 == 0:
                raise SlitError(f"odd point {n} is reached by an even number ({ncut}) of slit edges")
            continue
        if grid.is_dirichlet(n):
            continue
        if ncut % 2:
            raise SlitError(f"node {n} has {ncut} slit directions: a neighbour would lie on both sides")
        q = [1, 0, 0, 0]
        for i in range(1, 4):
            q[i] = -q[i - 1] if c[i] else q[i - 1]
        f = forward.get(n, c.index(True))
        if q[f] == 1:
            q = [-s for s in q]
        quads[n] = tuple(q)
    for n in poles:
        if n not in cut:
            raise SlitError(f"odd point {n} is not reached by the slitting set")
    grid.quadrants = quads
    if grid.graph.edges:
        ids = [a.id for a in grid.arcs if set(a.edges()) <= slit_edges]
        if grid.arc_edges(ids) == slit_edges and not pg.slit_verify(grid.graph, ids):
            raise SlitError("slitting set disconnects the domain or changes parities")


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _dofs(grid: GridPartition, drop_poles: bool):
    nodes = grid.interior_nodes()
    if drop_poles:
        poles = set(grid.poles)
        nodes = [n for n in nodes if n not in poles]
    return nodes


def _assemble(grid: GridPartition, nodes, sign) -> SymmetricOperator:
    pos = {n: r for r, n in enumerate(nodes)}
    inv_h2 = 1.0 / grid.h**2
    rows, cols, vals = [], [], []
    for n, r in pos.items():
        rows.append(r)
        cols.append(r)
        vals.append(4.0 * inv_h2)
        for d in (0, 1):   # E and N: each edge once
            m = (n[0] + DIRS[d][0], n[1] + DIRS[d][1])
            c = pos.get(m)
            if c is None:
                continue
            w = -sign(n, m, d) * inv_h2
            rows += [r, c]
            cols += [c, r]
            vals += [w, w]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(nodes), len(nodes)))
    return SymmetricOperator(A, tuple(nodes), grid.h)


def assemble_laplacian(grid: GridPartition) -> SymmetricOperator:
    """5-point Dirichlet Laplacian on all interior nodes."""
    return _assemble(grid, _dofs(grid, drop_poles=False), lambda n, m, d: 1)


def edge_sign(grid: GridPartition, n, m, d: int) -> int:
    """Sign of the coupling from ``n`` to its neighbour ``m`` in direction ``d``."""
    qn = grid.quadrants.get(n)
    qm = grid.quadrants.get(m)
    sn = qn[d] if qn else 1
    sm = qm[(d + 1) % 4] if qm else 1
    return sn * sm


def assemble_slit(grid: GridPartition) -> SymmetricOperator:
    """Signed Laplacian with the odd points pinned to zero.

    Each slit node keeps one unknown, the value seen from its ``+`` side;
    couplings towards its ``-`` side are negated.
    """
    return _assemble(grid, _dofs(grid, drop_poles=True),
                     lambda n, m, d: edge_sign(grid, n, m, d))


def cover_signs(grid: GridPartition) -> dict:
    """Sheet-switching edges of the two-sheet cover, from holonomy alone.

    Every bounded face of the grid graph (interior nodes minus odd points)
    must carry holonomy -1 if it surrounds an odd number of odd points and
    +1 otherwise.  The switching set is solved face by face along a
    spanning tree of the dual graph, without reference to any slit.
    Returns ``{edge: 0 or 1}`` (1 = switch sheet).
    """
    nodes = set(_dofs(grid, drop_poles=True))
    nx, ny = grid.nx, grid.ny
    OUTER = "outer"
    parent = {OUTER: OUTER}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i in range(nx):
        for j in range(ny):
            parent[(i, j)] = (i, j)

    def cells_of(a, b):
        # the two cells beside lattice edge a-b (a < b)
        if a[1] == b[1]:      # horizontal
            i, j = a
            return ((i, j - 1) if j > 0 else OUTER), ((i, j) if j < ny else OUTER)
        i, j = a
        return ((i - 1, j) if i > 0 else OUTER), ((i, j) if i < nx else OUTER)

    alive = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            for d in (0, 1):
                a, b = (i, j), (i + DIRS[d][0], j + DIRS[d][1])
                if b[0] > nx or b[1] > ny:
                    continue
                c1, c2 = cells_of(a, b)
                if a in nodes and b in nodes:
                    alive.append(((a, b), c1, c2))
                else:
                    union(c1, c2)
    root_outer = find(OUTER)
    hol = defaultdict(int)
    for p in grid.poles:
        f = find((p[0], p[1]))
        if f != root_outer:
            hol[f] ^= 1

    dual = defaultdict(list)
    for e, c1, c2 in alive:
        f1, f2 = find(c1), find(c2)
        if f1 != f2:
            dual[f1].append((e, f2))
            dual[f2].append((e, f1))
    order, tree_edge = [root_outer], {root_outer: None}
    queue = deque([root_outer])
    while queue:
        f = queue.popleft()
        for e, g in dual[f]:
            if g not in tree_edge:
                tree_edge[g] = e
                order.append(g)
                queue.append(g)
    x = {e: 0 for e, _, _ in alive}
    for f in reversed(order[1:]):
        s = hol[f]
        for e, _ in dual[f]:
            if e != tree_edge[f]:
                s ^= x[e]
        x[tree_edge[f]] = s
    return x


def assemble_double_cover(grid: GridPartition) -> SymmetricOperator:
    """Explicit two-sheet cover of the grid graph minus odd points.

    Rows are ``(node, sheet)`` with sheet 0 first; dimension is twice the
    slit operator's.
    """
    nodes = _dofs(grid, drop_poles=True)
    n = len(nodes)
    pos = {v: r for r, v in enumerate(nodes)}
    x = cover_signs(grid)
    inv_h2 = 1.0 / grid.h**2
    rows = list(range(2 * n))
    cols = list(range(2 * n))
    vals = [4.0 * inv_h2] * (2 * n)
    for (a, b), s in sorted(x.items()):
        ra, rb = pos[a], pos[b]
        for sheet in (0, 1):
            other = sheet ^ s
            rows += [ra + sheet * n, rb + other * n]
            cols += [rb + other * n, ra + sheet * n]
            vals += [-inv_h2, -inv_h2]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))
    index = tuple((v, 0) for v in nodes) + tuple((v, 1) for v in nodes)
    return SymmetricOperator(A, index, grid.h)


def antisymmetric_part(cover: SymmetricOperator) -> np.ndarray:
    """Restriction of a two-sheet operator to ``u(., 1) = -u(., 0)``."""
    n = cover.dimension // 2
    Q = sp.vstack([sp.identity(n), -sp.identity(n)]) / np.sqrt(2.0)
    return (Q.T @ cover.matrix @ Q).toarray()


def symmetric_part(cover: SymmetricOperator) -> np.ndarray:
    n = cover.dimension // 2
    Q = sp.vstack([sp.identity(n), sp.identity(n)]) / np.sqrt(2.0)
    return (Q.T @ cover.matrix @ Q).toarray()


# ---------------------------------------------------------------------------
# Robin family
# ---------------------------------------------------------------------------

@dataclass
class RobinFamily:
    base: SymmetricOperator
    interface_mass: np.ndarray
    grid: GridPartition

    @property
    def gamma_rows(self) -> np.ndarray:
        return np.flatnonzero(self.interface_mass)

    @property
    def free_rows(self) -> np.ndarray:
        return np.flatnonzero(self.interface_mass == 0)

    def at(self, sigma: float) -> SymmetricOperator:
        """``T_sigma``; ``sigma = inf`` removes the interface unknowns."""
        if np.isinf(sigma):
            return self.base.submatrix(self.free_rows)
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if sigma == 0:
            return self.base
        return self.base.shifted(sigma * self.interface_mass)

    def infinity_blocks(self):
        """Dirichlet operators of the subdomains, in label order."""
        T = self.at(np.inf)
        out = []
        for lab in range(1, self.grid.domain_count + 1):
            rows = [r for r, n in enumerate(T.index) if self.grid.labels[n] == lab]
            out.append(T.submatrix(rows))
        return out


def robin_family(grid: GridPartition, base: SymmetricOperator) -> RobinFamily:
    mass = np.zeros(base.dimension)
    for r, n in enumerate(base.index):
        if grid.labels[n] in (INTERFACE, POLE):
            mass[r] = grid.h
    return RobinFamily(base, mass, grid)


def transmission_residual(grid: GridPartition, family: RobinFamily, u, sigma: float,
                          lam: float | None = None, form: str = "discrete",
                          tol: float = 1e-8) -> float:
    """Largest mismatch of the interface condition at the Gamma nodes.

    At a Gamma node ``g`` let ``F`` be the sum of one-sided differences
    ``(u_g - s*u_n)/h`` towards subdomain neighbours (the normal
    derivatives) and ``tau`` the same sum towards interface, odd or
    boundary neighbours (tangential part, O(h)).  ``form="discrete"``
    returns ``max |F + tau + sigma*h^2*u_g - h*lam*u_g|``, which vanishes
    for any exact eigenvector; ``form="continuum"`` returns
    ``max |F + sigma*h^2*u_g|``, the continuum transmission condition with
    Robin parameter ``sigma*h^2``.
    """
    u = np.asarray(u, dtype=float)
    T = family.at(sigma)
    Tu = T.matrix @ u
    if lam is None:
        lam = float(u @ Tu / (u @ u))
    scale = max(T.norm(), 1.0)
    if np.linalg.norm(Tu - lam * u) > tol * scale * np.linalg.norm(u):
        raise NotAnEigenvector(
            f"||T u - lam u|| = {np.linalg.norm(Tu - lam * u):.3e} for lam={lam:.6g}"
        )
    base = family.base
    pos = {n: r for r, n in enumerate(base.index)}
    h = grid.h
    worst = 0.0
    for r in family.gamma_rows:
        g = base.index[r]
        F = tau = 0.0
        for d, (di, dj) in enumerate(DIRS):
            m = (g[0] + di, g[1] + dj)
            c = pos.get(m)
            s = edge_sign(grid, g, m, d) if c is not None else 1
            diff = (u[r] - (s * u[c] if c is not None else 0.0)) / h
            if c is not None and grid.labels[m] > 0:
                F += diff
            else:
                tau += diff
        robin = sigma * h * h * u[r]
        if form == "discrete":
            val = F + tau + robin - h * lam * u[r]
        elif form == "continuum":
            val = F + robin
        else:
            raise ValueError(f"unknown form {form!r}")
        worst = max(worst, abs(val))
    return worst


# ---------------------------------------------------------------------------
# reference and random configurations
# ---------------------------------------------------------------------------

def rectangle_eigenvalues(nx: int, ny: int, h: float) -> np.ndarray:
    """Closed-form spectrum of the 5-point Dirichlet Laplacian on a rectangle."""
    p = np.arange(1, nx)
    q = np.arange(1, ny)
    lx = 4.0 / h**2 * np.sin(p * np.pi / (2 * nx)) ** 2
    ly = 4.0 / h**2 * np.sin(q * np.pi / (2 * ny)) ** 2
    return np.sort((lx[:, None] + ly[None, :]).ravel())


def random_grid_spec(rng, max_nodes: int = 12, h: float = 0.25, poles: bool = True) -> dict:
    """Random rectangle cut by full vertical lines and horizontal segments.

    Lines keep a gap of at least two cells to each other and to the outer
    boundary; horizontal segments ending on a vertical line create
    T-junctions (odd points) unless matched on the other side.
    """
    rng = np.random.default_rng(rng)
    nx = int(rng.integers(6, max_nodes + 1))
    ny = int(rng.integers(6, max_nodes + 1))
    cols = _spaced(rng, 2, nx - 2, int(rng.integers(0, 3)))
    rows = _spaced(rng, 2, ny - 2, int(rng.integers(0 if cols else 1, 3)))
    interfaces = []
    for c in cols:
        interfaces.append({"id": f"v{c}", "points": [[c * h, 0.0], [c * h, ny * h]]})
    stops = [0] + cols + [nx]
    for r in rows:
        for a, b in zip(stops, stops[1:]):
            if poles and cols and rng.random() < 0.4:
                continue
            interfaces.append({"id": f"h{r}_{a}", "points": [[a * h, r * h], [b * h, r * h]]})
    if not interfaces:
        interfaces.append({"id": f"h{rows[0]}_0", "points": [[0.0, rows[0] * h], [nx * h, rows[0] * h]]})
    return {"rect": [nx * h, ny * h], "h": h, "interfaces": interfaces, "slit": "auto"}


def _spaced(rng, lo, hi, count):
    chosen = []
    for _ in range(count):
        options = [c for c in range(lo, hi + 1) if all(abs(c - x) >= 2 for x in chosen)]
        if not options:
            break
        chosen.append(int(rng.choice(options)))
    return sorted(chosen)

