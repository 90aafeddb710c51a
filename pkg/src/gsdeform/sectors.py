"""Symmetry-adapted product bases for ring Hamiltonians.

The symmetry group is abelian: cyclic translations by a fixed step composed
with the two commuting global pi-rotation flips exp(i*pi*Sx) and
exp(i*pi*Sz). Every group element acts on the product basis |m_0...m_{n-1}>
as a signed permutation, so each symmetry sector gets an orthonormal basis of
projected representatives and the Hamiltonian restricts to a much smaller
sparse block per sector. Basis states are indexed by little-endian base-3
codes (site 0 on the slowest tensor index, matching embed_term).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .linalg import EigsError
from .spin import pi_rotation, spin_operators

__all__ = [
    "signed_permutation",
    "ChainGroup",
    "chain_group",
    "OrbitTable",
    "orbit_table",
    "SectorBasis",
    "sector_basis",
    "sector_hamiltonian",
    "sector_eigenvalues",
    "FLIP_SECTORS",
]

#: flip-sector labels keyed by the (exp(i pi Sx), exp(i pi Sz)) eigenvalue pair
FLIP_SECTORS = {"1": (1, 1), "x": (1, -1), "z": (-1, 1), "y": (-1, -1)}


def signed_permutation(u, tol=1e-12):
    """Decompose a phased permutation matrix into (perm, phase).

    Requires exactly one unit-modulus entry per column: u[perm[j], j] =
    phase[j] and everything else below tol. Raises otherwise.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    n = u.shape[0]
    perm = np.empty(n, dtype=np.int64)
    phase = np.empty(n, dtype=complex)
    for j in range(n):
        col = u[:, j].copy()
        i = int(np.argmax(np.abs(col)))
        entry = col[i]
        col[i] = 0.0
        if abs(abs(entry) - 1.0) > tol or np.abs(col).max() > tol:
            raise ValueError("matrix is not a signed permutation")
        perm[j] = i
        phase[j] = entry
    if len(set(perm.tolist())) != n:
        raise ValueError("matrix is not a signed permutation")
    return perm, phase


@dataclass(frozen=True)
class ChainGroup:
    """Translations by ``step`` sites times the global Z2 x Z2 flips.

    Elements are indexed g = 4*t + f with t a translation count and
    f in {0: identity, 1: x flip, 2: z flip, 3: xz flip}. ``flip_maps``
    and ``flip_signs`` give the single-site action of each flip on z-basis
    digits: U|d> = sign[d] |map[d]>.
    """

    n: int
    step: int
    t_count: int
    flip_maps: np.ndarray
    flip_signs: np.ndarray
    pow3: np.ndarray

    @property
    def order(self):
        return 4 * self.t_count

    def momentum(self, k_index):
        return 2.0 * np.pi * k_index / self.t_count

    def character(self, k_index, sector):
        """chi(g) for all group elements, ordered g = 4*t + f."""
        ex, ez = FLIP_SECTORS[sector]
        omega = np.exp(-2j * np.pi * k_index / self.t_count)
        chi_t = omega ** np.arange(self.t_count)
        chi_f = np.array([1, ex, ez, ex * ez], dtype=complex)
        return np.kron(chi_t, chi_f)


def chain_group(n, step=2):
    if n < 2 or n % 2:
        raise ValueError("symmetry sectors need an even number of sites")
    if step not in (1, 2) or n % step:
        raise ValueError("translation step must be 1 or 2 and divide n")
    site = spin_operators(1)
    rx = pi_rotation(site, "x")
    rz = pi_rotation(site, "z")
    maps = np.empty((4, 3), dtype=np.int64)
    signs = np.empty((4, 3), dtype=np.int64)
    for f, u in enumerate((np.eye(3), rx, rz, rx @ rz)):
        perm, phase = signed_permutation(u)
        if np.abs(phase.imag).max() > 1e-12:
            raise ValueError("flip phases are expected to be real signs")
        maps[f] = perm
        signs[f] = np.rint(phase.real).astype(np.int64)
    return ChainGroup(
        n=n,
        step=step,
        t_count=n // step,
        flip_maps=maps,
        flip_signs=signs,
        pow3=3 ** np.arange(n, dtype=np.int64),
    )


def codes_to_digits(codes, n):
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[:, None] // (3 ** np.arange(n, dtype=np.int64))) % 3).astype(np.int8)


def _flip_sign(group, digits, f):
    """Sign of the flip part, a parity over sites (translation invariant)."""
    neg = group.flip_signs[f] < 0
    cnt = neg[digits].sum(axis=1, dtype=np.int64)
    return 1 - 2 * (cnt & 1)


def _apply_element(group, digits, t, f):
    """Codes of U_g |digits> for g = (translate by t*step, then flip f).

    Translating digits right by tau and re-encoding equals a dot product
    with the cyclically shifted power vector, so no per-element digit copy
    is needed.
    """
    mapped = group.flip_maps[f][digits]
    weights = np.roll(group.pow3, -t * group.step)
    return mapped @ weights


@dataclass(frozen=True)
class OrbitTable:
    """Group orbits over the full code space.

    For every code c: ``rep[c]`` is the smallest code in its orbit, and the
    stored element g = (t[c], f[c]) with sign s[c] satisfies
    U_g |c> = s[c] |rep[c]>. ``reps`` lists the orbit representatives.
    """

    group: ChainGroup
    rep: np.ndarray
    t: np.ndarray
    f: np.ndarray
    sign: np.ndarray
    reps: np.ndarray


def orbit_table(group):
    n = group.n
    dim = 3**n
    codes = np.arange(dim, dtype=np.int64)
    digits = codes_to_digits(codes, n)
    rep = codes.copy()
    t_of = np.zeros(dim, dtype=np.int16)
    f_of = np.zeros(dim, dtype=np.int8)
    sign = np.ones(dim, dtype=np.int8)
    for f in range(4):
        s_f = _flip_sign(group, digits, f)
        mapped = group.flip_maps[f][digits]
        for t in range(group.t_count):
            img = mapped @ np.roll(group.pow3, -t * group.step)
            better = img < rep
            rep[better] = img[better]
            t_of[better] = t
            f_of[better] = f
            sign[better] = s_f[better]
    reps = np.flatnonzero(rep == codes)
    return OrbitTable(group=group, rep=rep, t=t_of, f=f_of, sign=sign, reps=reps)


@dataclass(frozen=True)
class SectorBasis:
    """Orthonormal symmetrized basis of one (momentum, flip) sector.

    ``nu_all`` holds the projected norm of every orbit representative in the
    table (zero when the orbit does not support this sector); ``index_all``
    maps a representative's position in table.reps to its basis column, -1
    when absent. ``reps`` and ``nu`` cover the kept representatives only.
    """

    group: ChainGroup
    k_index: int
    sector: str
    reps: np.ndarray
    nu: np.ndarray
    nu_all: np.ndarray
    index_all: np.ndarray

    @property
    def dim(self):
        return len(self.reps)

    @property
    def momentum(self):
        return self.group.momentum(self.k_index)


def sector_basis(group, table, k_index, sector, tol=1e-12):
    """Project orbit representatives into one symmetry sector.

    The squared norm of the projected representative is the character-weighted
    count of its stabilizer, nu^2 = (1/|G|) sum_{g r = r} chi*(g) s_g(r).
    """
    if not 0 <= k_index < group.t_count:
        raise ValueError(f"momentum index {k_index} out of range")
    chi = group.character(k_index, sector)
    reps = table.reps
    digits = codes_to_digits(reps, group.n)
    nusq = np.zeros(len(reps), dtype=complex)
    for f in range(4):
        s_f = _flip_sign(group, digits, f)
        mapped = group.flip_maps[f][digits]
        for t in range(group.t_count):
            img = mapped @ np.roll(group.pow3, -t * group.step)
            fixed = img == reps
            if fixed.any():
                nusq[fixed] += np.conj(chi[4 * t + f]) * s_f[fixed]
    nusq /= group.order
    if np.abs(nusq.imag).max() > 1e-10:
        raise RuntimeError("sector norms should be real")
    nusq = nusq.real
    keep = nusq > tol
    nu_all = np.where(keep, np.sqrt(np.clip(nusq, 0.0, None)), 0.0)
    index_all = np.full(len(reps), -1, dtype=np.int64)
    index_all[keep] = np.arange(int(keep.sum()))
    return SectorBasis(
        group=group,
        k_index=k_index,
        sector=sector,
        reps=reps[keep],
        nu=nu_all[keep],
        nu_all=nu_all,
        index_all=index_all,
    )


def sector_hamiltonian(terms, table, basis, tol=1e-9):
    """Restrict a sum of local terms to one symmetry sector.

    ``terms`` is a sequence of (sites, matrix) local operators in the
    embed_term convention (first listed site on the slowest index). Matrix
    elements follow from projecting each image state back to its orbit
    representative: H[j,i] += A * s * chi(g)^* * nu_j / nu_i where U_g maps
    the image code to its representative with sign s.
    """
    group = basis.group
    chi = group.character(basis.k_index, basis.sector)
    reps = basis.reps
    dim = basis.dim
    if dim == 0:
        return sp.csr_matrix((0, 0), dtype=complex)
    digits = codes_to_digits(reps, group.n)
    rows, cols, vals = [], [], []
    for sites, mat in terms:
        sites = list(sites)
        k = len(sites)
        loc_pow = 3 ** np.arange(k - 1, -1, -1, dtype=np.int64)
        lcode = digits[:, sites].astype(np.int64) @ loc_pow
        mat = np.asarray(mat, dtype=complex)
        for loc in range(3**k):
            src = np.flatnonzero(lcode == loc)
            if src.size == 0:
                continue
            src_codes = reps[src]
            loc_digits = (loc // loc_pow) % 3
            for new in np.flatnonzero(np.abs(mat[:, loc]) > 1e-14):
                amp = mat[new, loc]
                new_digits = (new // loc_pow) % 3
                offset = int(
                    ((new_digits - loc_digits) * group.pow3[sites]).sum())
                img = src_codes + offset
                rep_codes = table.rep[img]
                pos = np.searchsorted(table.reps, rep_codes)
                j = basis.index_all[pos]
                ok = j >= 0
                if not ok.any():
                    continue
                g = 4 * table.t[img].astype(np.int64) + table.f[img]
                coeff = (
                    amp
                    * table.sign[img]
                    * np.conj(chi[g])
                    * basis.nu_all[pos]
                    / basis.nu[src]
                )
                rows.append(j[ok])
                cols.append(src[ok])
                vals.append(coeff[ok])
    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    dev = abs(h - h.getH()).max()
    scale = max(abs(h).max(), 1.0)
    if dev > tol * scale:
        raise RuntimeError(f"sector block is not Hermitian: deviation {dev:.3e}")
    return (h + h.getH()) * 0.5


def sector_eigenvalues(h, n_levels=None, dense_cutoff=600, tol=1e-10):
    """Ascending eigenvalues of one sector block.

    Dense for small blocks or when the full spectrum is requested; Lanczos
    otherwise. Non-convergence raises EigsError so callers can attach the
    sector label.
    """
    dim = h.shape[0]
    if dim == 0:
        return np.empty(0)
    if n_levels is None or dim <= dense_cutoff or n_levels >= dim - 1:
        vals = np.linalg.eigvalsh(h.toarray())
        return vals if n_levels is None else vals[:n_levels]
    try:
        vals = spla.eigsh(
            h, k=n_levels, which="SA", tol=tol, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise EigsError(
            f"Lanczos converged {len(exc.eigenvalues)}/{n_levels} levels"
        ) from exc
    return np.sort(vals)
