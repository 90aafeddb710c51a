"""The three-colored (3,12^2) star lattice and outcome-configuration algebra.

Construction: a triangle replaces each vertex of a honeycomb lattice (two
triangles per unit cell, "A" and "B"), and each honeycomb edge becomes a
bridge between triangle corners. Site index layout:

    site = ((cell_i * L2 + cell_j) * 2 + sub) * 3 + corner

with sub 0 = A, 1 = B and corner in {0,1,2}. Corner d of an A triangle gets
color (x,y,z)[d]; corner d of a B triangle gets (x,y,z)[d+1 mod 3], which
makes the coloring proper on every triangle and bridge.

An outcome configuration sigma assigns one of {x,y,z} (stored 0,1,2) to each
site. Domains are maximal like-outcome connected sets; a configuration is
admissible (h=1) iff every domain's induced subgraph is bipartite; its weight
is h * 2^L * beta^{N_m} with L = (#domains) - (#inter-domain lattice edges)
and beta = (3-delta^2)/(2 delta^2).
"""

from dataclasses import dataclass, field

import numpy as np

from .deform import deformed_weight_base
from .graphstate import SimpleGraph, simple_graph

__all__ = [
    "AXES",
    "ColoredLattice",
    "build_star_lattice",
    "DomainDecomposition",
    "decompose_domains",
    "OutcomeStats",
    "config_stats",
    "config_weight",
    "encoded_graph",
    "EncodedGraph",
    "has_crossing_path",
    "domain_stats",
    "dodecagon_heuristic",
    "monochromatic_dodecagons",
    "sigma_from_string",
]

AXES = ("x", "y", "z")

# bridge corner d of A(i,j) attaches to corner d of B(i - [d==1], j - [d==2])
_BRIDGE_SHIFT = ((0, 0), (-1, 0), (0, -1))
_CORNER_DIR = np.array([[1.0, 0.0], [-0.5, -np.sqrt(3) / 2], [-0.5, np.sqrt(3) / 2]])
_CORNER_RADIUS = 0.3


@dataclass(frozen=True)
class ColoredLattice:
    """Immutable star lattice with coloring, geometry, faces, and adjacency."""

    L1: int
    L2: int
    periodic: bool
    n: int
    edges: np.ndarray  # (E, 2) int32, each row sorted
    color: np.ndarray  # (n,) int8 in {0,1,2} for {x,y,z}
    pos: np.ndarray  # (n, 2) float
    cell_i: np.ndarray
    cell_j: np.ndarray
    sub: np.ndarray
    corner: np.ndarray
    nbr_ptr: np.ndarray  # CSR adjacency
    nbr: np.ndarray
    triangles: np.ndarray  # (2*L1*L2, 3) int32
    dodecagons: np.ndarray  # (L1*L2, 12) int32; empty when L < 2

    def neighbors(self, v):
        return self.nbr[self.nbr_ptr[v] : self.nbr_ptr[v + 1]]

    def as_simple_graph(self):
        return simple_graph(self.n, [tuple(e) for e in self.edges], pos=self.pos)


def _site(i, j, sub, corner, L1, L2):
    return ((i * L2 + j) * 2 + sub) * 3 + corner


def build_star_lattice(L1, L2, boundary="periodic"):
    """Build the colored star lattice; 6 sites and 9 periodic edges per cell."""
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    periodic = boundary == "periodic"
    if L1 < 1 or L2 < 1:
        raise ValueError("lattice sizes must be positive")
    if not periodic and (L1 < 2 or L2 < 2):
        raise ValueError("open-boundary lattices need L1, L2 >= 2 for crossing tests")

    n = 6 * L1 * L2
    cell_i = np.empty(n, dtype=np.int32)
    cell_j = np.empty(n, dtype=np.int32)
    sub = np.empty(n, dtype=np.int8)
    corner = np.empty(n, dtype=np.int8)
    color = np.empty(n, dtype=np.int8)
    pos = np.empty((n, 2), dtype=float)

    a1 = np.array([1.5, np.sqrt(3) / 2])
    a2 = np.array([1.5, -np.sqrt(3) / 2])
    b_off = np.array([1.0, 0.0])

    for i in range(L1):
        for j in range(L2):
            for s in range(2):
                center = i * a1 + j * a2 + (b_off if s else 0.0)
                for d in range(3):
                    v = _site(i, j, s, d, L1, L2)
                    cell_i[v], cell_j[v], sub[v], corner[v] = i, j, s, d
                    color[v] = (d + s) % 3
                    direction = _CORNER_DIR[d] * (1 if s == 0 else -1)
                    pos[v] = center + _CORNER_RADIUS * direction

    edges = []
    triangles = []
    for i in range(L1):
        for j in range(L2):
            for s in range(2):
                tri = [_site(i, j, s, d, L1, L2) for d in range(3)]
                triangles.append(tri)
                edges += [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
            for d, (di, dj) in enumerate(_BRIDGE_SHIFT):
                bi, bj = i + di, j + dj
                if periodic:
                    bi, bj = bi % L1, bj % L2
                elif not (0 <= bi < L1 and 0 <= bj < L2):
                    continue
                edges.append(
                    (_site(i, j, 0, d, L1, L2), _site(bi, bj, 1, d, L1, L2))
                )

    edges = np.array([sorted(e) for e in edges], dtype=np.int32)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]

    counts = np.zeros(n, dtype=np.int32)
    for a, b in edges:
        counts[a] += 1
        counts[b] += 1
    nbr_ptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(counts, out=nbr_ptr[1:])
    nbr = np.empty(2 * len(edges), dtype=np.int32)
    fill = nbr_ptr[:-1].copy()
    for a, b in edges:
        nbr[fill[a]] = b
        fill[a] += 1
        nbr[fill[b]] = a
        fill[b] += 1

    dodecagons = _dodecagon_faces(L1, L2) if periodic and min(L1, L2) >= 2 else (
        np.empty((0, 12), dtype=np.int32)
    )

    return ColoredLattice(
        L1=L1,
        L2=L2,
        periodic=periodic,
        n=n,
        edges=edges,
        color=color,
        pos=pos,
        cell_i=cell_i,
        cell_j=cell_j,
        sub=sub,
        corner=corner,
        nbr_ptr=nbr_ptr,
        nbr=nbr,
        triangles=np.array(triangles, dtype=np.int32),
        dodecagons=dodecagons,
    )


def _dodecagon_faces(L1, L2):
    """12-site faces (one per cell) walking the surrounding six triangles."""
    faces = np.empty((L1 * L2, 12), dtype=np.int32)
    for i in range(L1):
        for j in range(L2):
            ip, jm = (i + 1) % L1, (j - 1) % L2
            cycle = [
                (i, j, 0, 0),
                (i, j, 1, 0),
                (i, j, 1, 1),
                (ip, j, 0, 1),
                (ip, j, 0, 2),
                (ip, jm, 1, 2),
                (ip, jm, 1, 0),
                (ip, jm, 0, 0),
                (ip, jm, 0, 1),
                (i, jm, 1, 1),
                (i, jm, 1, 2),
                (i, j, 0, 2),
            ]
            faces[i * L2 + j] = [_site(*c, L1, L2) for c in cycle]
    return faces


def sigma_from_string(text):
    """Parse an outcome string like 'xyzzyx' into the int8 representation."""
    lut = {c: k for k, c in enumerate(AXES)}
    return np.array([lut[c] for c in text], dtype=np.int8)


# --- domain decomposition -----------------------------------------------------


@dataclass
class DomainDecomposition:
    domain_id: np.ndarray  # (n,) int, compact 0..k-1
    domains: list  # list of site-index arrays
    bond_multiplicity: dict  # (d1, d2) sorted -> count over lattice edges
    field_sigma: np.ndarray = field(default=None, repr=False)

    @property
    def n_domains(self):
        return len(self.domains)

    @property
    def n_inter_edges(self):
        return sum(self.bond_multiplicity.values())


def decompose_domains(lat, sigma):
    """Union-find over like-outcome edges; multiplicity count over the rest."""
    sigma = np.asarray(sigma)
    if sigma.shape != (lat.n,):
        raise ValueError("sigma length does not match lattice")
    parent = np.arange(lat.n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    inter = []
    for a, b in lat.edges:
        if sigma[a] == sigma[b]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        else:
            inter.append((a, b))

    roots = np.array([find(v) for v in range(lat.n)])
    uniq, domain_id = np.unique(roots, return_inverse=True)
    domains = [np.flatnonzero(domain_id == k) for k in range(len(uniq))]
    mult = {}
    for a, b in inter:
        da, db = domain_id[a], domain_id[b]
        key = (min(da, db), max(da, db))
        mult[key] = mult.get(key, 0) + 1
    return DomainDecomposition(
        domain_id=domain_id, domains=domains, bond_multiplicity=mult, field_sigma=sigma
    )


def _domain_is_bipartite(lat, sigma, sites):
    """BFS 2-coloring of one domain's induced subgraph."""
    label = sigma[sites[0]]
    par = {}
    for start in sites:
        if start in par:
            continue
        par[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for u in lat.neighbors(v):
                if sigma[u] != label:
                    continue
                if u not in par:
                    par[u] = par[v] ^ 1
                    queue.append(u)
                elif par[u] == par[v]:
                    return False
    return True


@dataclass(frozen=True)
class OutcomeStats:
    """Scalar summary of a configuration: admissibility and weight exponents."""

    admissible: bool  # h(sigma) = 1
    n_match: int  # sites where sigma equals the deformation coloring
    n_domains: int
    n_inter_edges: int

    @property
    def loop_exponent(self):
        """L = |V| - |E| of the domain multigraph."""
        return self.n_domains - self.n_inter_edges


def config_stats(lat, sigma, decomp=None):
    sigma = np.asarray(sigma)
    if decomp is None:
        decomp = decompose_domains(lat, sigma)
    admissible = all(
        _domain_is_bipartite(lat, sigma, dom) for dom in decomp.domains if len(dom) > 1
    )
    return OutcomeStats(
        admissible=admissible,
        n_match=int(np.sum(sigma == lat.color)),
        n_domains=decomp.n_domains,
        n_inter_edges=decomp.n_inter_edges,
    )


def config_weight(lat, sigma, delta, include_loop_term=True):
    """Unnormalized outcome weight h * 2^L * ((3-delta^2)/(2 delta^2))^N_m.

    The 2^L factor is exact and on by default; ``include_loop_term=False``
    drops it (the heuristic that treats it as negligible on this lattice).
    """
    stats = config_stats(lat, sigma)
    if not stats.admissible:
        return 0.0
    beta = deformed_weight_base(delta)
    w = beta ** stats.n_match
    if include_loop_term:
        w *= 2.0 ** stats.loop_exponent
    return w


# --- encoded graph and percolation tests ---------------------------------------


@dataclass(frozen=True)
class EncodedGraph:
    graph: SimpleGraph  # vertices = domains, edges = odd-multiplicity bonds
    centroid: np.ndarray  # (k, 2) mean site position per domain
    extent: list  # per-domain (min_i, max_i, min_j, max_j) in cell coordinates


def encoded_graph(lat, decomp, check_admissible=True):
    """Apply the mod-2 bond rule to the domain multigraph."""
    if check_admissible:
        sigma = decomp.field_sigma
        for dom in decomp.domains:
            if len(dom) > 1 and not _domain_is_bipartite(lat, sigma, dom):
                raise ValueError("encoded graph undefined for inadmissible configs")
    k = decomp.n_domains
    edges = [pair for pair, m in decomp.bond_multiplicity.items() if m % 2 == 1]
    centroid = np.array([lat.pos[dom].mean(axis=0) for dom in decomp.domains])
    extent = [
        (
            int(lat.cell_i[dom].min()),
            int(lat.cell_i[dom].max()),
            int(lat.cell_j[dom].min()),
            int(lat.cell_j[dom].max()),
        )
        for dom in decomp.domains
    ]
    return EncodedGraph(
        graph=simple_graph(k, edges, pos=centroid), centroid=centroid, extent=extent
    )


def has_crossing_path(eg, lat, dimension):
    """True iff a connected component of the encoded graph touches both
    extreme unit-cell strips (first and last column/row) of the dimension."""
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    cells = lat.cell_i if dimension == 1 else lat.cell_j
    last = (lat.L1 if dimension == 1 else lat.L2) - 1
    k = eg.graph.n
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in eg.graph.edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    touch_lo = [False] * k
    touch_hi = [False] * k
    for dom_idx, (lo_i, hi_i, lo_j, hi_j) in enumerate(eg.extent):
        lo, hi = (lo_i, hi_i) if dimension == 1 else (lo_j, hi_j)
        r = find(dom_idx)
        if lo == 0:
            touch_lo[r] = True
        if hi == last:
            touch_hi[r] = True
    return any(lo and hi for lo, hi in zip(touch_lo, touch_hi))


def domain_stats(decomp):
    """(max size, mean size, domain count)."""
    sizes = [len(d) for d in decomp.domains]
    return max(sizes), sum(sizes) / len(sizes), len(sizes)


def dodecagon_heuristic():
    """All-12-outcomes-match probability estimate 2*3/3^12 for one face."""
    return 6.0 / 3.0**12


def monochromatic_dodecagons(lat, sigma):
    """How many 12-site faces carry a single outcome under sigma."""
    if lat.dodecagons.shape[0] == 0:
        raise ValueError("dodecagon faces need a periodic lattice with L1, L2 >= 2")
    vals = np.asarray(sigma)[lat.dodecagons]
    return int(np.sum(np.all(vals == vals[:, :1], axis=1)))
