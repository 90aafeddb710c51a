"""Graph states, stabilizers, reduced density matrices, and encoded variants.

Qubit j maps to bit position N-1-j of the amplitude index (site 0 is the
slowest index, matching numpy.kron ordering throughout the package).
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "SimpleGraph",
    "simple_graph",
    "graph_state",
    "stabilizer_generator",
    "two_site_rdm",
    "z_measure_delete",
    "encoded_graph_state",
    "write_graphml",
    "write_dot",
]

MAX_QUBITS = 24


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph: vertex count, sorted edge tuples, optional 2D positions."""

    n: int
    edges: tuple
    pos: np.ndarray = None

    def neighbors(self, v):
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)


def simple_graph(n, edges, pos=None):
    """Validated constructor: rejects self-loops, parallel edges, bad indices."""
    norm = []
    seen = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"self-loop at vertex {a}")
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a},{b}) out of range for {n} vertices")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ValueError(f"parallel edge {key}")
        seen.add(key)
        norm.append(key)
    if pos is not None:
        pos = np.asarray(pos, dtype=float)
        if pos.shape != (n, 2):
            raise ValueError("positions must be (n, 2)")
    return SimpleGraph(n=n, edges=tuple(sorted(norm)), pos=pos)


def _bits(graph):
    """(2^n, n) array of computational-basis bits, site 0 in column 0."""
    idx = np.arange(1 << graph.n)
    return (idx[:, None] >> (graph.n - 1 - np.arange(graph.n))) & 1


def graph_state(graph):
    """|G> = prod_{(u,v) in E} CZ_uv |+>^n as a dense amplitude vector."""
    if graph.n > MAX_QUBITS:
        raise ValueError(f"{graph.n} qubits exceeds the dense-state cap {MAX_QUBITS}")
    bits = _bits(graph)
    sign = np.zeros(1 << graph.n, dtype=np.int64)
    for u, v in graph.edges:
        sign += bits[:, u] * bits[:, v]
    amps = ((-1.0) ** sign) / np.sqrt(1 << graph.n)
    return amps.astype(complex)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def stabilizer_generator(graph, v):
    """Dense X_v prod_{u in n(v)} Z_u (small systems only)."""
    labels = ["I"] * graph.n
    labels[v] = "X"
    for u in graph.neighbors(v):
        labels[u] = "Z"
    return reduce(np.kron, (_PAULI[c] for c in labels))


def two_site_rdm(state, i, j, n=None):
    """Partial trace of |state><state| down to qubits (i, j), in that order."""
    state = np.asarray(state, dtype=complex)
    if n is None:
        n = state.size.bit_length() - 1
    if state.size != 1 << n:
        raise ValueError("state length is not a power of two")
    if i == j:
        raise ValueError("need two distinct qubits")
    t = state.reshape([2] * n)
    rest = [ax for ax in range(n) if ax not in (i, j)]
    m = t.transpose([i, j] + rest).reshape(4, -1)
    return m @ m.conj().T


def z_measure_delete(graph, v):
    """Graph update for a Z measurement: remove v and its incident edges.

    Vertices above v shift down by one; byproduct corrections are left to the
    state-level verifier (the percolation pipeline only needs connectivity).
    """
    if not 0 <= v < graph.n:
        raise ValueError(f"vertex {v} not in graph")

    def relabel(u):
        return u - 1 if u > v else u

    edges = [(relabel(a), relabel(b)) for a, b in graph.edges if v not in (a, b)]
    pos = None
    if graph.pos is not None:
        pos = np.delete(graph.pos, v, axis=0)
    return simple_graph(graph.n - 1, edges, pos)


def encoded_graph_state(graph, logical_bases):
    """Graph state carried on embedded 2D subspaces of larger local spaces.

    ``logical_bases`` holds one (v0, v1) pair of orthonormal local vectors per
    vertex; the returned vector lives on the tensor product of those local
    spaces and equals graph_state(graph) when every basis is the qubit one.
    """
    if len(logical_bases) != graph.n:
        raise ValueError("need one logical basis per vertex")
    for v0, v1 in logical_bases:
        v0, v1 = np.asarray(v0), np.asarray(v1)
        gram = np.array(
            [[np.vdot(v0, v0), np.vdot(v0, v1)], [np.vdot(v1, v0), np.vdot(v1, v1)]]
        )
        if np.linalg.norm(gram - np.eye(2)) > 1e-10:
            raise ValueError("logical basis is not orthonormal")
    bits = _bits(graph)
    sign = np.zeros(1 << graph.n, dtype=np.int64)
    for u, v in graph.edges:
        sign += bits[:, u] * bits[:, v]
    dims = [len(b[0]) for b in logical_bases]
    out = np.zeros(int(np.prod(dims)), dtype=complex)
    for row, s in zip(bits, sign):
        vec = reduce(np.kron, (logical_bases[j][row[j]] for j in range(graph.n)))
        out += ((-1.0) ** s) * vec
    return out / np.sqrt(1 << graph.n)


def write_graphml(graph, path):
    """Minimal GraphML writer (node positions as x/y data keys when present)."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="x" for="node" attr.name="x" attr.type="double"/>',
        '  <key id="y" for="node" attr.name="y" attr.type="double"/>',
        '  <graph id="G" edgedefault="undirected">',
    ]
    for v in range(graph.n):
        if graph.pos is not None:
            x, y = graph.pos[v]
            lines.append(
                f'    <node id="n{v}"><data key="x">{x:.6f}</data>'
                f'<data key="y">{y:.6f}</data></node>'
            )
        else:
            lines.append(f'    <node id="n{v}"/>')
    for k, (a, b) in enumerate(graph.edges):
        lines.append(f'    <edge id="e{k}" source="n{a}" target="n{b}"/>')
    lines += ["  </graph>", "</graphml>", ""]
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def write_dot(graph, path):
    """Plain undirected DOT output."""
    lines = ["graph {"]
    for v in range(graph.n):
        if graph.pos is not None:
            x, y = graph.pos[v]
            lines.append(f'  n{v} [pos="{x:.4f},{y:.4f}!"];')
        else:
            lines.append(f"  n{v};")
    for a, b in graph.edges:
        lines.append(f"  n{a} -- n{b};")
    lines += ["}", ""]
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
