"""Deformed spin-1 ring: MPS ground states, projector chains, and spectra.

The undeformed model is the spin-1 AKLT ring. Each site j carries the rank-2
projector P_j = Sx^2 (even j) or Sz^2 (odd j); applying every P_j to the AKLT
state produces an encoded ring graph state, and the one-parameter family
D_j(delta)^-1 |AKLT> interpolates between the two at constant gap budget.
This module builds the matching two-body and three-body parent Hamiltonians,
their exact delta -> 0 limits, symmetry-resolved spectra, gap-scaling fits,
and the single-mode excitation dispersion of the undeformed point.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import sectors
from .deform import deformation, deform_term, limit_term
from .graphstate import encoded_graph_state, simple_graph
from .linalg import EigsError, SparseOperator, embed_term, hermitian_eig, range_projector
from .spin import axis_state, spin_operators, total_spin_projector

__all__ = [
    "MPSState",
    "aklt_mps",
    "deformed_ground_state",
    "fidelity_per_site",
    "error_per_site",
    "fidelity_check",
    "ring_fidelity",
    "site_axis",
    "site_projector",
    "logical_operators",
    "ring_graph_state",
    "ChainHamiltonian",
    "two_body_term",
    "three_body_term",
    "two_body_limit",
    "three_body_limit",
    "build_chain",
    "build_limit_chain",
    "SectorSpectrum",
    "sector_spectra",
    "gap",
    "gap_scaling_fit",
    "lambda_minmax",
    "two_term_kernel_dim",
    "CrackionPoint",
    "crackion_dispersion",
    "crackion_scaling",
    "SPECTRUM_CSV_COLUMNS",
    "spectrum_csv_text",
]

_SITE = spin_operators(1)


def site_axis(j):
    """Deformation axis of site j: x on even sites, z on odd sites."""
    return "x" if j % 2 == 0 else "z"


def site_projector(j):
    s = _SITE.operator(site_axis(j))
    return s @ s


@lru_cache(maxsize=None)
def _aklt_tensor():
    # bond-space conventions: A^{+1}, A^{0}, A^{-1} on physical index 0,1,2
    sp = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return np.array(
        [math.sqrt(2 / 3) * sp, -math.sqrt(1 / 3) * sz, -math.sqrt(2 / 3) * sp.T])


@dataclass(frozen=True)
class MPSState:
    """Periodic matrix-product state with one (3, 2, 2) tensor per site."""

    tensors: tuple

    @property
    def n(self):
        return len(self.tensors)

    def contract(self):
        """Dense normalized amplitude vector, site 0 on the slowest index."""
        psi = np.asarray(self.tensors[0], dtype=complex)
        for t in self.tensors[1:]:
            psi = np.einsum("iab,mbc->imac", psi.reshape(-1, 2, 2), t)
            psi = psi.reshape(-1, 2, 2)
        vec = np.trace(psi, axis1=1, axis2=2)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("MPS contracts to the zero vector")
        return vec / norm


def aklt_mps(n):
    """The undeformed AKLT state on an n-site ring."""
    if n < 2:
        raise ValueError("need at least two sites")
    return MPSState(tensors=(_aklt_tensor(),) * n)


def deformed_ground_state(delta, n):
    """[tensor_j D_j(delta)^-1] |AKLT> as site-dependent MPS tensors."""
    if n < 2 or n % 2:
        raise ValueError("the deformation pattern needs an even ring")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    a = _aklt_tensor()
    tensors = []
    for j in range(n):
        d_inv = deformation(site_projector(j), delta).inverse
        tensors.append(np.einsum("mk,kab->mab", d_inv, a))
    return MPSState(tensors=tuple(tensors))


def _graph_tensors(n):
    a = _aklt_tensor()
    return [np.einsum("mk,kab->mab", site_projector(j), a) for j in range(n)]


def _transfer(ts_bra, ts_ket):
    """Product of per-site transfer matrices <bra site| ket site>."""
    e = np.eye(4, dtype=complex)
    for b, k in zip(ts_bra, ts_ket):
        e = e @ sum(np.kron(b[m].conj(), k[m]) for m in range(3))
    return e


def _leading(e):
    w = np.linalg.eigvals(e)
    return w[np.argmax(np.abs(w))]


def fidelity_per_site(delta):
    """Closed-form per-site overlap of the deformed state with the target."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 2.0 / (delta**2 + 2.0)


def error_per_site(delta):
    return 1.0 - fidelity_per_site(delta)


def fidelity_check(delta, n):
    """Total n-site fidelity contracted from leading transfer eigenvalues.

    Builds the two-site mixed and norm transfer blocks of the deformed state
    against the fully projected state and raises their dominant eigenvalues
    to the ring length; the result is comparable to fidelity_per_site**n.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even ring length")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    target = _graph_tensors(2)
    deformed = deformed_ground_state(delta, 2).tensors
    lam_mix = _leading(_transfer(target, deformed))
    lam_tgt = _leading(_transfer(target, target))
    lam_def = _leading(_transfer(deformed, deformed))
    if abs(lam_tgt.imag) > 1e-12 or abs(lam_def.imag) > 1e-12:
        raise RuntimeError("norm transfer eigenvalues should be real")
    per_two_sites = abs(lam_mix) ** 2 / (lam_tgt.real * lam_def.real)
    return per_two_sites ** (n / 2)


def ring_fidelity(delta, n):
    """Exact finite-ring fidelity |<target|psi(delta)>|^2 via full traces."""
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even ring length")
    target = _graph_tensors(n)
    deformed = deformed_ground_state(delta, n).tensors
    num = abs(np.trace(_transfer(target, deformed))) ** 2
    den = (np.trace(_transfer(target, target)).real
           * np.trace(_transfer(deformed, deformed)).real)
    return num / den


def logical_operators(axis):
    """Encoded-qubit (Z, X) pair on the |m=+1>, |m=-1> subspace of S_axis."""
    k0 = axis_state(_SITE, axis, 1)
    k1 = axis_state(_SITE, axis, -1)
    z = np.outer(k0, k0.conj()) - np.outer(k1, k1.conj())
    x = np.outer(k0, k1.conj()) + np.outer(k1, k0.conj())
    return z, x


def ring_graph_state(n):
    """Ring graph state on the encoded qubits as a dense 3^n vector."""
    if n < 3:
        raise ValueError("a ring needs at least three vertices")
    g = simple_graph(n, [(j, (j + 1) % n) for j in range(n)])
    bases = [
        (axis_state(_SITE, site_axis(j), 1), axis_state(_SITE, site_axis(j), -1))
        for j in range(n)
    ]
    return encoded_graph_state(g, bases)


# ---------------------------------------------------------------------------
# Hamiltonians


@lru_cache(maxsize=None)
def _undeformed_two_body():
    return total_spin_projector(1, 1, 2)


@lru_cache(maxsize=None)
def _undeformed_three_body():
    h2 = _undeformed_two_body()
    dims = [3, 3, 3]
    total = (embed_term(h2, [0, 1], dims).to_dense()
             + embed_term(h2, [1, 2], dims).to_dense())
    return range_projector(total)


@lru_cache(maxsize=None)
def two_body_term(delta, parity):
    """Deformed bond projector on sites (j, j+1) with j % 2 == parity."""
    d0 = deformation(site_projector(parity), delta)
    d1 = deformation(site_projector(parity + 1), delta)
    return deform_term(_undeformed_two_body(), [d0, d1])


@lru_cache(maxsize=None)
def three_body_term(delta, parity):
    """Deformed triple term on sites (j-1, j, j+1) with j-1 % 2 == parity."""
    ds = [deformation(site_projector(parity + i), delta) for i in range(3)]
    return deform_term(_undeformed_three_body(), ds)


@lru_cache(maxsize=None)
def two_body_limit(parity):
    """Exact delta -> 0 limit of the deformed bond projector."""
    ps = [site_projector(parity), site_projector(parity + 1)]
    return limit_term(_undeformed_two_body(), ps)


@lru_cache(maxsize=None)
def three_body_limit(parity):
    """Exact delta -> 0 limit of the deformed triple term."""
    ps = [site_projector(parity + i) for i in range(3)]
    return limit_term(_undeformed_three_body(), ps)


@dataclass(frozen=True)
class ChainHamiltonian:
    """Sum of local projector terms on a periodic even ring."""

    n: int
    delta: float
    body: int
    terms: tuple
    operator: SparseOperator = field(repr=False)

    @property
    def dim(self):
        return 3**self.n


def _assemble(n, delta, body, local_for_parity):
    terms = []
    for j in range(n):
        if body == 2:
            sites = (j, (j + 1) % n)
            mat = local_for_parity[j % 2]
        else:
            sites = ((j - 1) % n, j, (j + 1) % n)
            mat = local_for_parity[(j - 1) % 2]
        terms.append((sites, mat))
    dims = [3] * n
    op = None
    for sites, mat in terms:
        emb = embed_term(mat, list(sites), dims)
        op = emb if op is None else op + emb
    return ChainHamiltonian(
        n=n, delta=delta, body=body, terms=tuple(terms), operator=op)


def _check_even_ring(n):
    if n < 4 or n % 2:
        raise ValueError("ring length must be even and at least 4")


def build_chain(delta, n, body=2):
    """Deformed parent Hamiltonian on an n-site ring (body = 2 or 3)."""
    _check_even_ring(n)
    if body not in (2, 3):
        raise ValueError("body must be 2 or 3")
    if delta <= 0:
        raise ValueError("delta must be positive; use build_limit_chain for 0")
    if delta > 1:
        raise ValueError("delta must lie in (0, 1]")
    maker = two_body_term if body == 2 else three_body_term
    return _assemble(n, delta, body, [maker(delta, 0), maker(delta, 1)])


def build_limit_chain(n, body=2):
    """The exact delta -> 0 Hamiltonian (terms from the graded limit)."""
    _check_even_ring(n)
    if body not in (2, 3):
        raise ValueError("body must be 2 or 3")
    maker = two_body_limit if body == 2 else three_body_limit
    return _assemble(n, 0.0, body, [maker(0), maker(1)])


# ---------------------------------------------------------------------------
# Spectra


@dataclass(frozen=True)
class SectorSpectrum:
    """Lowest levels of one (momentum, flip) symmetry sector."""

    k_index: int
    momentum: float
    sector: str
    energies: np.ndarray = field(repr=False)
    dim: int = 0


def _translation_step(ham, step):
    if step == 2:
        return
    # one-site translation requires identical terms on both parities
    mats = [ham.terms[0][1], ham.terms[1][1]]
    if not np.allclose(mats[0], mats[1], atol=1e-12):
        raise ValueError(
            "one-site translation sectors need parity-independent terms "
            "(undeformed point only)")


def sector_spectra(ham, n_levels=6, step=2):
    """Block-diagonalize by translations and the global Z2 x Z2 flips.

    Returns one SectorSpectrum per non-empty (momentum, flip) sector with the
    lowest ``n_levels`` energies (the full sector spectrum when ``n_levels``
    is None). Eigensolver failures are re-raised with the sector label.
    """
    _translation_step(ham, step)
    group = sectors.chain_group(ham.n, step)
    table = sectors.orbit_table(group)
    out = []
    for k_index in range(group.t_count):
        for label in sectors.FLIP_SECTORS:
            basis = sectors.sector_basis(group, table, k_index, label)
            if basis.dim == 0:
                continue
            block = sectors.sector_hamiltonian(ham.terms, table, basis)
            try:
                vals = sectors.sector_eigenvalues(block, n_levels)
            except EigsError as exc:
                raise EigsError(
                    f"sector (k={k_index}, {label}): {exc}") from exc
            out.append(SectorSpectrum(
                k_index=k_index,
                momentum=group.momentum(k_index),
                sector=label,
                energies=vals,
                dim=basis.dim,
            ))
    return out


def gap(ham, degeneracy_tol=1e-9):
    """E1 - E0 of the assembled chain; rejects degenerate ground states."""
    from .linalg import lowest_eigs

    vals = lowest_eigs(ham.operator, 3)
    if vals[1] - vals[0] < degeneracy_tol:
        raise ValueError(
            f"ground state is degenerate (E1-E0 = {vals[1] - vals[0]:.3e}); "
            "gap undefined")
    return float(vals[1] - vals[0])


def gap_scaling_fit(deltas, n, body=2):
    """Least-squares slope of log(gap) against log(delta); returns (slope, gaps)."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or len(deltas) < 2:
        raise ValueError("need at least two delta values")
    if (deltas <= 0).any() or (deltas > 1).any():
        raise ValueError("delta grid must lie in (0, 1]")
    gaps = np.array([gap(build_chain(d, n, body)) for d in deltas])
    slope = np.polyfit(np.log(deltas), np.log(gaps), 1)[0]
    return float(slope), gaps


def lambda_minmax(delta):
    """Extremal nonzero eigenvalues of two overlapping deformed bond terms."""
    vals = _two_term_eigenvalues(delta)
    top = vals[-1]
    nonzero = vals[vals > 1e-9 * top]
    return float(nonzero[0]), float(nonzero[-1])


def two_term_kernel_dim(delta):
    """Kernel dimension of the same two-term sum (the local ground space)."""
    vals = _two_term_eigenvalues(delta)
    return int(np.sum(vals <= 1e-9 * vals[-1]))


def _two_term_eigenvalues(delta):
    dims = [3, 3, 3]
    total = (
        embed_term(two_body_term(delta, 0), [0, 1], dims).to_dense()
        + embed_term(two_body_term(delta, 1), [1, 2], dims).to_dense())
    vals, _ = hermitian_eig(total)
    return vals


# ---------------------------------------------------------------------------
# Crackions


@dataclass(frozen=True)
class CrackionPoint:
    """Lowest single-flip excitation at one single-site momentum."""

    k_index: int
    momentum: float
    energy: float
    flip_energies: tuple
    splitting: float


def crackion_dispersion(n, delta=1.0):
    """Lowest x/y/z-sector level per one-site momentum of the undeformed ring.

    Only valid where one-site translation is a symmetry (delta = 1). The
    three flip sectors are degenerate there; the per-point splitting is
    reported so callers can check it.
    """
    _check_even_ring(n)
    ham = build_chain(delta, n, body=2)
    _translation_step(ham, 1)
    group = sectors.chain_group(n, step=1)
    table = sectors.orbit_table(group)
    points = []
    for k_index in range(n):
        lows = []
        for label in ("x", "y", "z"):
            basis = sectors.sector_basis(group, table, k_index, label)
            if basis.dim == 0:
                raise RuntimeError("flip sector unexpectedly empty")
            block = sectors.sector_hamiltonian(ham.terms, table, basis)
            try:
                vals = sectors.sector_eigenvalues(block, 1)
            except EigsError as exc:
                raise EigsError(
                    f"sector (k={k_index}, {label}): {exc}") from exc
            lows.append(float(vals[0]))
        points.append(CrackionPoint(
            k_index=k_index,
            momentum=group.momentum(k_index),
            energy=min(lows),
            flip_energies=tuple(lows),
            splitting=max(lows) - min(lows),
        ))
    return points


def crackion_scaling(deltas, n):
    """Log-log slopes of the lowest x-sector level vs delta.

    Uses two-site translation sectors, which survive deformation: momentum
    index 0 hosts the band minimum (one-site k = pi folds onto it) and index
    t_count // 2 a representative away from the minimum. Returns
    (slope at the minimum, slope away from it).
    """
    _check_even_ring(n)
    deltas = np.asarray(deltas, dtype=float)
    group = sectors.chain_group(n, step=2)
    table = sectors.orbit_table(group)
    k_other = group.t_count // 2
    if k_other == 0:
        raise ValueError("ring too short to separate momenta")
    e_min, e_other = [], []
    for d in deltas:
        ham = build_chain(float(d), n, body=2)
        for k_index, sink in ((0, e_min), (k_other, e_other)):
            basis = sectors.sector_basis(group, table, k_index, "x")
            block = sectors.sector_hamiltonian(ham.terms, table, basis)
            vals = sectors.sector_eigenvalues(block, 1)
            sink.append(float(vals[0]))
    slope_min = np.polyfit(np.log(deltas), np.log(e_min), 1)[0]
    slope_other = np.polyfit(np.log(deltas), np.log(e_other), 1)[0]
    return float(slope_min), float(slope_other)


# ---------------------------------------------------------------------------
# CSV export

SPECTRUM_CSV_COLUMNS = ("delta", "N", "body", "k_index", "sector",
                        "level_index", "energy")


def spectrum_csv_text(spectra, delta, n, body, meta=None):
    """Render sector spectra as CSV with '#' metadata comment lines."""
    import csv
    import io

    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPECTRUM_CSV_COLUMNS)
    for spec in spectra:
        for idx, energy in enumerate(np.asarray(spec.energies)):
            writer.writerow([
                f"{delta:.6g}", n, body, spec.k_index, spec.sector, idx,
                f"{float(energy):.10g}",
            ])
    return buf.getvalue()
