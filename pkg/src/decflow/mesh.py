"""Triangle meshes and their circumcentric dual geometry.

Simulation state lives on cells (one value per cell, or one matrix entry per
adjacent cell pair), while curls and vorticities live on the dual polygons
around primal nodes.  This module loads/generates 2D simplicial meshes and
precomputes every dual-geometry quantity the discrete operators need:

* cell areas ``omega`` and circumcenters,
* primal edge lengths ``|h_ij|`` and dual edge lengths ``|*h_ij]`` between
  circumcenters (circumcenter-to-edge-midpoint for boundary edges),
* the counterclockwise fan of cells around every node (cyclic for interior
  nodes, an open chain for boundary nodes),
* kite areas (intersection of a node's dual polygon with one cell), nodal
  dual areas ``|*e|``, and the quadrature constants ``W_ijk`` / ``K_ijk``
  built from them,
* the shared-edge endpoint labels ``e+_ij`` / ``e-_ij`` per adjacent pair.

Orientation conventions (used consistently by every operator):

* cells are stored counterclockwise (auto-corrected on load);
* the fan of cells around a node is ordered counterclockwise, so the sign
  ``s_ij = +1`` exactly when ``j`` is the ccw-successor of ``i`` in the fan;
* ``e+_ij`` is the endpoint of the shared edge at which the step ``i -> j``
  runs counterclockwise (equivalently: the endpoint lying to the left of the
  dual edge from circumcenter ``i`` to circumcenter ``j``);
* for a middle cell ``i`` at node ``e`` with fan neighbors ``j`` (ccw next)
  and ``k`` (ccw previous), the triplet ``(i, j, k)`` is positively oriented
  and ``K_ijk = +kappa(e, i)/|*e|``.

The nodal dual area ``|*e|`` is the sum of kites over the *chain-interior*
cells of the fan (cells having both fan neighbors), which is the full dual
polygon area at interior nodes.  This choice makes the curl-curl quadrature
identities exact on bounded meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mesh",
    "MeshGeometry",
    "MeshError",
    "load_mesh",
    "generate_rect_mesh",
    "jitter_mesh",
    "compute_geometry",
    "validate",
]


class MeshError(ValueError):
    """Malformed input, broken topology, or geometry unusable by the operators."""


# ---------------------------------------------------------------------------
# Mesh topology
# ---------------------------------------------------------------------------


@dataclass
class Mesh:
    """A 2D simplicial cell complex.

    Attributes
    ----------
    nodes:
        ``(num_nodes, 2)`` float array of vertex positions.
    cells:
        ``(num_cells, 3)`` int array of node indices, counterclockwise.
    neighbors:
        ``neighbors[i]`` is the sorted array of indices of cells sharing an
        edge with cell ``i``, *including* ``i`` itself.
    cell_adjacency:
        ``(num_cells, 3)``; entry ``[c, t]`` is the cell across the edge
        opposite local vertex ``t`` of cell ``c``, or ``-1`` on the boundary.
    boundary_cells:
        boolean flags; ``True`` for cells with at least one boundary edge
        (these are the cells adjacent to the environment).
    reoriented:
        indices of input cells that were flipped to counterclockwise.
    """

    nodes: np.ndarray
    cells: np.ndarray
    neighbors: list
    cell_adjacency: np.ndarray
    boundary_cells: np.ndarray
    reoriented: tuple

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def env_index(self) -> int:
        """Index of the environment cell in extended (N+1)-sized arrays."""
        return self.num_cells

    @property
    def interior_cells(self) -> np.ndarray:
        """Cells with no boundary edge (the no-slip degrees of freedom)."""
        return ~self.boundary_cells


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _signed_areas(nodes: np.ndarray, cells: np.ndarray) -> np.ndarray:
    p0, p1, p2 = nodes[cells[:, 0]], nodes[cells[:, 1]], nodes[cells[:, 2]]
    return 0.5 * _cross2(p1 - p0, p2 - p0)


def _build_mesh(nodes: np.ndarray, cells: np.ndarray) -> Mesh:
    nodes = np.asarray(nodes, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    if nodes.ndim != 2 or nodes.shape[1] != 2:
        raise MeshError("node array must have shape (num_nodes, 2)")
    if cells.ndim != 2 or cells.shape[1] != 3:
        raise MeshError("cell array must have shape (num_cells, 3)")
    if len(cells) == 0:
        raise MeshError("mesh has no cells")
    if cells.min() < 0 or cells.max() >= len(nodes):
        raise MeshError("cell references a node index out of range")
    for c, tri in enumerate(cells):
        if len(set(tri.tolist())) != 3:
            raise MeshError(f"cell {c} repeats a node index")

    areas = _signed_areas(nodes, cells)
    flipped = np.flatnonzero(areas < 0.0)
    if flipped.size:
        cells = cells.copy()
        tmp = cells[flipped, 1].copy()
        cells[flipped, 1] = cells[flipped, 2]
        cells[flipped, 2] = tmp
        areas = _signed_areas(nodes, cells)
    scale = max(np.abs(nodes).max(), 1.0)
    if np.any(areas <= 1e-14 * scale * scale):
        bad = int(np.argmin(areas))
        raise MeshError(f"cell {bad} is degenerate (area {areas[bad]:.3e})")

    # Edge table: local edge t of a cell is the edge opposite vertex t.
    edge_users: dict = {}
    for c in range(len(cells)):
        for t in range(3):
            a = int(cells[c, (t + 1) % 3])
            b = int(cells[c, (t + 2) % 3])
            key = (a, b) if a < b else (b, a)
            edge_users.setdefault(key, []).append((c, t))
    adjacency = np.full((len(cells), 3), -1, dtype=np.int64)
    for key, users in edge_users.items():
        if len(users) > 2:
            raise MeshError(f"edge {key} is shared by {len(users)} cells")
        if len(users) == 2:
            (c1, t1), (c2, t2) = users
            if c1 == c2:
                raise MeshError(f"cell {c1} uses edge {key} twice")
            adjacency[c1, t1] = c2
            adjacency[c2, t2] = c1

    boundary_cells = (adjacency < 0).any(axis=1)
    neighbors = [
        np.unique(np.append(adjacency[c][adjacency[c] >= 0], c))
        for c in range(len(cells))
    ]

    # Edge-connectedness.
    seen = np.zeros(len(cells), dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        c = stack.pop()
        for d in adjacency[c]:
            if d >= 0 and not seen[d]:
                seen[d] = True
                stack.append(int(d))
    if not seen.all():
        raise MeshError("mesh is not edge-connected")

    return Mesh(
        nodes=nodes,
        cells=cells,
        neighbors=neighbors,
        cell_adjacency=adjacency,
        boundary_cells=boundary_cells,
        reoriented=tuple(int(c) for c in flipped),
    )


def load_mesh(text: str) -> Mesh:
    """Parse a plain-text mesh.

    Format: line 1 is ``NP NC``; then NP lines ``x y``; then NC lines
    ``i j k`` (0-based node indices).  ``#`` starts a comment.  Cell
    orientation is corrected to counterclockwise if needed.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise MeshError("empty mesh file")

    head = rows[0][1].split()
    if len(head) != 2:
        raise MeshError(f"line {rows[0][0]}: expected 'NP NC' header")
    try:
        n_points, n_cells = int(head[0]), int(head[1])
    except ValueError as exc:
        raise MeshError(f"line {rows[0][0]}: non-integer header") from exc
    if n_points < 3:
        raise MeshError("mesh needs at least 3 nodes")
    if n_cells < 1:
        raise MeshError("empty cell list")
    if len(rows) != 1 + n_points + n_cells:
        raise MeshError(
            f"expected {1 + n_points + n_cells} content lines, got {len(rows)}"
        )

    nodes = np.empty((n_points, 2))
    for p in range(n_points):
        lineno, line = rows[1 + p]
        parts = line.split()
        if len(parts) != 2:
            raise MeshError(f"line {lineno}: expected 'x y'")
        try:
            nodes[p] = [float(parts[0]), float(parts[1])]
        except ValueError as exc:
            raise MeshError(f"line {lineno}: bad coordinate") from exc

    cells = np.empty((n_cells, 3), dtype=np.int64)
    for c in range(n_cells):
        lineno, line = rows[1 + n_points + c]
        parts = line.split()
        if len(parts) != 3:
            raise MeshError(f"line {lineno}: expected 'i j k'")
        try:
            cells[c] = [int(parts[0]), int(parts[1]), int(parts[2])]
        except ValueError as exc:
            raise MeshError(f"line {lineno}: bad node index") from exc

    return _build_mesh(nodes, cells)


def generate_rect_mesh(nx: int, ny: int, lx: float, ly: float) -> Mesh:
    """Structured offset-row triangulation of the rectangle [0,lx] x [0,ly].

    ``ny`` horizontal strips; node rows alternate between "straight" rows of
    nx+1 points and half-pitch "offset" rows of nx+2 points, and each strip
    is triangulated as a zigzag fan of 2*nx+1 triangles closed by two small
    right triangles (caps) at the left/right domain edges.  With
    ``ly/ny > lx/(2*nx)`` every zigzag triangle is acute, so circumcenters
    are strictly interior and all dual edges between adjacent cells have
    positive length; the caps' circumcenters sit on their (interior)
    hypotenuses, which still yields positive dual lengths and kites.

    Cell count is ``(2*nx + 1) * ny``.
    """
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be >= 1")
    if lx <= 0 or ly <= 0:
        raise MeshError("lx and ly must be > 0")
    dx = lx / nx

    coords: list = []
    rows: list = []
    for r in range(ny + 1):
        y = ly * r / ny
        if r % 2 == 0:
            xs = np.linspace(0.0, lx, nx + 1)
        else:
            xs = np.concatenate(([0.0], (np.arange(nx) + 0.5) * dx, [lx]))
        start = len(coords)
        coords.extend((x, y) for x in xs)
        rows.append(np.arange(start, start + len(xs)))

    cells = []
    for r in range(ny):
        b, t = rows[r], rows[r + 1]
        if r % 2 == 0:  # straight bottom row, offset top row
            cells.append((b[0], t[1], t[0]))
            for m in range(nx):
                cells.append((b[m], b[m + 1], t[m + 1]))
            for m in range(1, nx):
                cells.append((t[m + 1], t[m], b[m]))
            cells.append((b[nx], t[nx + 1], t[nx]))
        else:  # offset bottom row, straight top row
            cells.append((b[0], b[1], t[0]))
            for m in range(1, nx):
                cells.append((b[m], b[m + 1], t[m]))
            for m in range(nx):
                cells.append((b[m + 1], t[m + 1], t[m]))
            cells.append((b[nx + 1], t[nx], b[nx]))

    return _build_mesh(np.array(coords), np.array(cells, dtype=np.int64))


def jitter_mesh(mesh: Mesh, amount: float, rng: np.random.Generator) -> Mesh:
    """Perturb interior nodes by up to ``amount`` * (shortest incident edge).

    Boundary nodes stay put so the domain is unchanged.  The result keeps the
    original topology; callers should revalidate (large ``amount`` can create
    obtuse triangles with degenerate duals).
    """
    nodes = mesh.nodes.copy()
    on_boundary = np.zeros(mesh.num_nodes, dtype=bool)
    edge_min = np.full(mesh.num_nodes, np.inf)
    for c in range(mesh.num_cells):
        for t in range(3):
            a = int(mesh.cells[c, (t + 1) % 3])
            b = int(mesh.cells[c, (t + 2) % 3])
            ln = float(np.hypot(*(mesh.nodes[b] - mesh.nodes[a])))
            edge_min[a] = min(edge_min[a], ln)
            edge_min[b] = min(edge_min[b], ln)
            if mesh.cell_adjacency[c, t] < 0:
                on_boundary[a] = on_boundary[b] = True
    interior = np.flatnonzero(~on_boundary)
    if interior.size:
        angles = rng.uniform(0.0, 2.0 * np.pi, interior.size)
        radii = amount * edge_min[interior] * np.sqrt(rng.uniform(0.0, 1.0, interior.size))
        nodes[interior, 0] += radii * np.cos(angles)
        nodes[interior, 1] += radii * np.sin(angles)
    return _build_mesh(nodes, mesh.cells)


# ---------------------------------------------------------------------------
# Dual geometry
# ---------------------------------------------------------------------------


@dataclass
class MeshGeometry:
    """Every precomputed circumcentric-dual quantity.

    Pairwise quantities are stored as dense ``(N, N)`` arrays that vanish off
    the adjacency pattern; per-node fan data is stored both as ragged lists
    (``rings``, ``kappa``) and as flattened index tables for vectorized
    operator assembly:

    * ``pair_*``: one row per consecutive ccw fan pair ``(i, j)`` at a node
      (the dual-polygon boundary segments; this is the support of the total
      vorticity sums),
    * ``tri_*``: one row per kite triplet -- middle cell ``i`` with fan
      neighbors ``j`` (ccw next) and ``k`` (ccw previous) at node ``e`` --
      with the kite area, ``W_ijk`` and signed ``K_ijk``,
    * ``adj_*``: one row per ordered adjacent cell pair with its ``e+``/``e-``
      endpoint node indices.
    """

    mesh: Mesh
    omega: np.ndarray
    omega_env: float
    circumcenters: np.ndarray
    adj: np.ndarray
    h_len: np.ndarray
    star_h_len: np.ndarray
    flat_coef: np.ndarray
    sharp_coef: np.ndarray
    rings: list
    ring_cyclic: np.ndarray
    kappa: list
    star_e: np.ndarray
    pair_node: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    tri_node: np.ndarray
    tri_i: np.ndarray
    tri_j: np.ndarray
    tri_k: np.ndarray
    tri_kappa: np.ndarray
    tri_w: np.ndarray
    tri_kconst: np.ndarray
    adj_i: np.ndarray
    adj_j: np.ndarray
    adj_eplus: np.ndarray
    adj_eminus: np.ndarray
    ta_row: np.ndarray
    ta_col: np.ndarray
    ta_tri: np.ndarray
    ta_sign: np.ndarray
    dup_row: np.ndarray
    dup_col: np.ndarray
    dup_tri: np.ndarray
    dup_sign: np.ndarray
    boundary_factor: np.ndarray
    bnd_cell: np.ndarray
    bnd_h: np.ndarray
    bnd_star_h: np.ndarray
    eps_geom: float
    diameter: float

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.ring_cyclic


def _circumcenters(nodes: np.ndarray, cells: np.ndarray) -> np.ndarray:
    a, b, c = nodes[cells[:, 0]], nodes[cells[:, 1]], nodes[cells[:, 2]]
    ab, ac = b - a, c - a
    d = 2.0 * _cross2(ab, ac)  # = 4 * signed area, positive for ccw cells
    ab2 = (ab * ab).sum(axis=1)
    ac2 = (ac * ac).sum(axis=1)
    ux = (ac[:, 1] * ab2 - ab[:, 1] * ac2) / d
    uy = (ab[:, 0] * ac2 - ac[:, 0] * ab2) / d
    return a + np.stack([ux, uy], axis=1)


def _node_fans(mesh: Mesh, issues: list) -> tuple:
    """Counterclockwise fan of cells around every node.

    Returns ``(rings, cyclic)``.  ``rings[v]`` lists the incident cells in
    ccw order; ``cyclic[v]`` is True for interior nodes (the list wraps).
    Appends a message to ``issues`` for non-manifold nodes (their fans are
    left empty, which disables the associated operators' stencils there).
    """
    cells = mesh.cells
    adjacency = mesh.cell_adjacency
    incident: list = [[] for _ in range(mesh.num_nodes)]
    for c in range(mesh.num_cells):
        for p in range(3):
            incident[int(cells[c, p])].append((c, p))

    rings: list = []
    cyclic = np.zeros(mesh.num_nodes, dtype=bool)
    for v in range(mesh.num_nodes):
        items = incident[v]
        if not items:
            rings.append(np.empty(0, dtype=np.int64))
            continue
        # Walking ccw around v from cell (v, a, b) crosses the edge (v, b),
        # which is the edge opposite local vertex p+1.
        nxt = {}
        prv = {}
        pos = {c: p for c, p in items}
        for c, p in items:
            nxt[c] = int(adjacency[c, (p + 1) % 3])
            prv[c] = int(adjacency[c, (p + 2) % 3])
        starts = [c for c, _ in items if prv[c] < 0]
        if len(starts) == 0:  # interior node: cyclic fan
            ring = [items[0][0]]
            while True:
                nc = nxt[ring[-1]]
                if nc == ring[0]:
                    break
                if nc < 0 or nc in ring or len(ring) > len(items):
                    ring = None
                    break
                ring.append(nc)
            if ring is None or len(ring) != len(items):
                issues.append(f"node {v}: non-manifold interior fan")
                rings.append(np.empty(0, dtype=np.int64))
                continue
            cyclic[v] = True
            rings.append(np.array(ring, dtype=np.int64))
        elif len(starts) == 1:  # boundary node: open chain
            ring = [starts[0]]
            while nxt[ring[-1]] >= 0:
                nc = nxt[ring[-1]]
                if nc in ring or len(ring) > len(items):
                    ring = None
                    break
                ring.append(nc)
            if ring is None or len(ring) != len(items):
                issues.append(f"node {v}: non-manifold boundary fan")
                rings.append(np.empty(0, dtype=np.int64))
                continue
            rings.append(np.array(ring, dtype=np.int64))
        else:
            issues.append(f"node {v}: {len(starts)} fans meet (pinched node)")
            rings.append(np.empty(0, dtype=np.int64))
        del pos
    return rings, cyclic


def _polygon_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _geometry(mesh: Mesh, issues: list) -> MeshGeometry:
    nodes, cells = mesh.nodes, mesh.cells
    n = mesh.num_cells
    omega = _signed_areas(nodes, cells)
    cc = _circumcenters(nodes, cells)

    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    diameter = float(np.hypot(*(hi - lo)))
    eps_geom = 1e-12 * diameter

    # Pairwise lengths over adjacent pairs.
    adj = np.zeros((n, n), dtype=bool)
    h_len = np.zeros((n, n))
    star_h = np.zeros((n, n))
    boundary_factor = np.zeros(n)
    bnd_cell: list = []
    bnd_h: list = []
    bnd_sh: list = []
    for c in range(n):
        for t in range(3):
            d = int(mesh.cell_adjacency[c, t])
            a = int(cells[c, (t + 1) % 3])
            b = int(cells[c, (t + 2) % 3])
            hlen = float(np.hypot(*(nodes[b] - nodes[a])))
            if d >= 0:
                if d < c:
                    continue  # handled once per unordered pair
                slen = float(np.hypot(*(cc[d] - cc[c])))
                adj[c, d] = adj[d, c] = True
                h_len[c, d] = h_len[d, c] = hlen
                star_h[c, d] = star_h[d, c] = slen
                if slen <= eps_geom:
                    issues.append(
                        f"degenerate dual edge between cells {c} and {d} "
                        f"(|*h| = {slen:.3e})"
                    )
            else:
                mid = 0.5 * (nodes[a] + nodes[b])
                slen = float(np.hypot(*(mid - cc[c])))
                if slen <= eps_geom:
                    issues.append(
                        f"degenerate boundary dual edge on cell {c} "
                        f"(|*h| = {slen:.3e})"
                    )
                else:
                    boundary_factor[c] += hlen / slen
                bnd_cell.append(c)
                bnd_h.append(hlen)
                bnd_sh.append(slen)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(adj, star_h / np.where(h_len > 0, h_len, 1.0), 0.0)
        inv_ratio = np.where(adj & (star_h > eps_geom), h_len / np.where(star_h > 0, star_h, 1.0), 0.0)
    flat_coef = 2.0 * omega[:, None] * ratio
    sharp_coef = inv_ratio / (2.0 * omega[:, None])

    rings, cyclic = _node_fans(mesh, issues)

    # Kites and fan tables.
    kappa: list = []
    star_e = np.zeros(mesh.num_nodes)
    pair_node, pair_i, pair_j = [], [], []
    tri_node, tri_i, tri_j, tri_k = [], [], [], []
    tri_kappa = []
    for v in range(mesh.num_nodes):
        ring = rings[v]
        m = len(ring)
        if m == 0:
            kappa.append(np.empty(0))
            continue
        pv = nodes[v]
        kv = np.empty(m)
        for t, c in enumerate(ring):
            p = int(np.flatnonzero(cells[c] == v)[0])
            a = int(cells[c, (p + 1) % 3])
            b = int(cells[c, (p + 2) % 3])
            quad = np.array(
                [pv, 0.5 * (pv + nodes[a]), cc[c], 0.5 * (pv + nodes[b])]
            )
            kv[t] = _polygon_area(quad)
            if kv[t] <= eps_geom * diameter:
                issues.append(
                    f"non-positive kite at node {v}, cell {c} "
                    f"(area {kv[t]:.3e})"
                )
        kappa.append(kv)
        # Consecutive ccw pairs (dual-polygon boundary).
        last = m if cyclic[v] else m - 1
        for t in range(last):
            pair_node.append(v)
            pair_i.append(int(ring[t]))
            pair_j.append(int(ring[(t + 1) % m]))
        # Chain-interior cells: both fan neighbors present.
        if cyclic[v]:
            middles = range(m)
        else:
            middles = range(1, m - 1)
        se = 0.0
        for t in middles:
            se += kv[t]
        star_e[v] = se
        for t in middles:
            tri_node.append(v)
            tri_i.append(int(ring[t]))
            tri_j.append(int(ring[(t + 1) % m]))  # ccw next
            tri_k.append(int(ring[(t - 1) % m]))  # ccw previous
            tri_kappa.append(kv[t])

    tri_node = np.array(tri_node, dtype=np.int64)
    tri_i = np.array(tri_i, dtype=np.int64)
    tri_j = np.array(tri_j, dtype=np.int64)
    tri_k = np.array(tri_k, dtype=np.int64)
    tri_kappa = np.array(tri_kappa)
    se_of_tri = star_e[tri_node] if len(tri_node) else np.empty(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tri_w = np.where(
            tri_kappa > 0, se_of_tri**2 / (2.0 * omega[tri_i] * np.where(tri_kappa != 0, tri_kappa, 1.0)), 0.0
        )
        tri_kconst = np.where(se_of_tri > 0, tri_kappa / np.where(se_of_tri != 0, se_of_tri, 1.0), 0.0)

    # Kite partition check (cell areas).
    kite_sum = np.zeros(n)
    for v in range(mesh.num_nodes):
        ring = rings[v]
        if len(ring):
            np.add.at(kite_sum, ring, kappa[v])
    bad = np.flatnonzero(np.abs(kite_sum - omega) > 1e-12 * diameter * diameter)
    for c in bad:
        issues.append(
            f"kites of cell {c} sum to {kite_sum[c]:.15g}, area is "
            f"{omega[c]:.15g}"
        )

    # e+/e- labels per ordered adjacent pair: at a node, each consecutive
    # ccw fan pair (i, j) has that node as its e+.
    eplus = {}
    for v, i, j in zip(pair_node, pair_i, pair_j):
        eplus[(i, j)] = v
    adj_i, adj_j, adj_ep, adj_em = [], [], [], []
    for i, j in zip(*np.nonzero(adj)):
        key, rkey = (int(i), int(j)), (int(j), int(i))
        if key in eplus and rkey in eplus:
            adj_i.append(int(i))
            adj_j.append(int(j))
            adj_ep.append(eplus[key])
            adj_em.append(eplus[rkey])
        else:
            issues.append(f"adjacent pair ({i},{j}) missing a fan endpoint")

    # Two-away one-form entry assignments.  Triplet (i, j, k) at node e fixes
    # the entries between the fan neighbors j and k of its middle cell:
    #   Z[j, k] = +K*omega(e) - Z[i, j]... (forward, sign +1)
    #   Z[k, j] = -K*omega(e) - ...        (reversed fan orientation, sign -1)
    # Entries are skipped when j, k happen to share an edge (their value is
    # already the adjacent one).  Later triplets hitting an already-assigned
    # entry go to the duplicate table, checked for consistency by ``flat``.
    ta_seen = {}
    ta_rows: list = [[], [], [], []]
    dup_rows: list = [[], [], [], []]
    for t in range(len(tri_node)):
        j, k = int(tri_j[t]), int(tri_k[t])
        if j == k or adj[j, k]:
            continue
        for row, col, sign in ((j, k, 1.0), (k, j, -1.0)):
            target = ta_rows if (row, col) not in ta_seen else dup_rows
            if (row, col) not in ta_seen:
                ta_seen[(row, col)] = t
            target[0].append(row)
            target[1].append(col)
            target[2].append(t)
            target[3].append(sign)

    low_degree = [
        v
        for v in range(mesh.num_nodes)
        if cyclic[v] and len(rings[v]) < 5
    ]
    for v in low_degree:
        issues.append(
            f"interior node {v} has degree {len(rings[v])} < 5 (two-away "
            "one-form entries may be ambiguous)"
        )

    return MeshGeometry(
        mesh=mesh,
        omega=omega,
        omega_env=float(omega.sum()),
        circumcenters=cc,
        adj=adj,
        h_len=h_len,
        star_h_len=star_h,
        flat_coef=flat_coef,
        sharp_coef=sharp_coef,
        rings=rings,
        ring_cyclic=cyclic,
        kappa=kappa,
        star_e=star_e,
        pair_node=np.array(pair_node, dtype=np.int64),
        pair_i=np.array(pair_i, dtype=np.int64),
        pair_j=np.array(pair_j, dtype=np.int64),
        tri_node=tri_node,
        tri_i=tri_i,
        tri_j=tri_j,
        tri_k=tri_k,
        tri_kappa=tri_kappa,
        tri_w=tri_w,
        tri_kconst=tri_kconst,
        adj_i=np.array(adj_i, dtype=np.int64),
        adj_j=np.array(adj_j, dtype=np.int64),
        adj_eplus=np.array(adj_ep, dtype=np.int64),
        adj_eminus=np.array(adj_em, dtype=np.int64),
        ta_row=np.array(ta_rows[0], dtype=np.int64),
        ta_col=np.array(ta_rows[1], dtype=np.int64),
        ta_tri=np.array(ta_rows[2], dtype=np.int64),
        ta_sign=np.array(ta_rows[3]),
        dup_row=np.array(dup_rows[0], dtype=np.int64),
        dup_col=np.array(dup_rows[1], dtype=np.int64),
        dup_tri=np.array(dup_rows[2], dtype=np.int64),
        dup_sign=np.array(dup_rows[3]),
        boundary_factor=boundary_factor,
        bnd_cell=np.array(bnd_cell, dtype=np.int64),
        bnd_h=np.array(bnd_h),
        bnd_star_h=np.array(bnd_sh),
        eps_geom=eps_geom,
        diameter=diameter,
    )


def compute_geometry(mesh: Mesh) -> MeshGeometry:
    """Compute the full dual geometry; raises on degenerate configurations.

    Degenerate means: a dual edge (between adjacent cells, or circumcenter to
    boundary-edge midpoint) shorter than ``1e-12 * diameter``, a non-positive
    kite, a broken kite partition, or a non-manifold node fan.  Loaded meshes
    with obtuse triangles are fine as long as those quantities stay positive.
    """
    issues: list = []
    geom = _geometry(mesh, issues)
    hard = [
        s
        for s in issues
        if not s.startswith("interior node")  # degree warnings are advisory
    ]
    if hard:
        raise MeshError("; ".join(hard))
    return geom


def validate(mesh: Mesh, geometry: MeshGeometry | None = None) -> list:
    """Collect every violated invariant; returns an empty list when valid.

    Reports (never raises): degenerate dual edges, non-positive kites, kite
    partition failures, non-manifold fans, low-degree interior nodes, and a
    note for each input cell that had to be reoriented.  ``geometry`` is
    recomputed when not supplied.
    """
    issues: list = []
    for c in mesh.reoriented:
        issues.append(f"cell {c} was clockwise; reoriented")
    del geometry  # geometry is derived data; recompute to inspect it
    _geometry(mesh, issues)
    return issues
