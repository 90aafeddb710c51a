"""Dense and sparse Hermitian linear algebra used across the package.

Everything here is a thin, contract-checked layer over numpy/scipy: dense
eigendecomposition, kernel/range projectors (the Q map that flattens nonzero
eigenvalues to 1), tensor-product embedding of local terms, and a Lanczos
front-end for lowest eigenvalues. All matrices are complex128 throughout.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SparseOperator",
    "hermitian_eig",
    "range_projector",
    "kron",
    "embed_term",
    "lowest_eigs",
    "EigsError",
]

#: relative threshold below which eigenvalues count as zero in range_projector
KERNEL_TOL = 1e-9


class EigsError(RuntimeError):
    """Iterative eigensolver failed; carries the residual diagnostics."""


def _as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_eig(a, check=True, rtol=1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Rejects visibly non-Hermitian input instead of silently symmetrizing.
    """
    a = _as_matrix(a)
    if check:
        dev = np.linalg.norm(a - a.conj().T)
        scale = max(np.linalg.norm(a), 1.0)
        if dev > rtol * scale:
            raise ValueError(f"matrix is not Hermitian: ||A - A^dag|| = {dev:.3e}")
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def range_projector(a, tol=KERNEL_TOL):
    """Projector onto the orthogonal complement of ker(A), for PSD Hermitian A.

    Eigenvalues below ``tol * max(eig)`` count as zero, so the output has the
    same kernel as A with all remaining eigenvalues flattened to 1.
    """
    a = _as_matrix(a)
    vals, vecs = hermitian_eig(a)
    top = vals[-1] if len(vals) else 0.0
    if top <= 0.0:
        if vals[0] < -tol:
            raise ValueError(f"matrix is not PSD: min eigenvalue {vals[0]:.3e}")
        return np.zeros_like(a)
    cut = tol * top
    if vals[0] < -cut:
        raise ValueError(f"matrix is not PSD: min eigenvalue {vals[0]:.3e}")
    keep = vecs[:, vals > cut]
    return keep @ keep.conj().T


def kron(a, b):
    """Tensor product of two matrices (first factor on the slow index)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


class SparseOperator:
    """A Hermitian operator given by its dimension and a matvec closure."""

    def __init__(self, dim, matvec):
        self.dim = int(dim)
        self._matvec = matvec

    def apply(self, v):
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.dim,):
            raise ValueError(f"vector shape {v.shape} does not match dim {self.dim}")
        return self._matvec(v)

    def __add__(self, other):
        if not isinstance(other, SparseOperator) or other.dim != self.dim:
            return NotImplemented
        return SparseOperator(self.dim, lambda v: self.apply(v) + other.apply(v))

    def to_dense(self):
        """Reconstruct the dense matrix column by column (small dims only)."""
        out = np.empty((self.dim, self.dim), dtype=complex)
        e = np.zeros(self.dim, dtype=complex)
        for j in range(self.dim):
            e[j] = 1.0
            out[:, j] = self.apply(e)
            e[j] = 0.0
        return out

    def as_linear_operator(self):
        return spla.LinearOperator((self.dim, self.dim), matvec=self.apply, dtype=complex)


def embed_term(term, sites, dims):
    """Embed a local operator on the given sites into the full product space.

    ``term`` acts on ``prod(dims[s] for s in sites)`` with the site order of
    ``sites``; identity everywhere else. Returns a SparseOperator.
    """
    term = _as_matrix(term)
    dims = list(dims)
    nsites = len(dims)
    sites = list(sites)
    for s in sites:
        if not 0 <= s < nsites:
            raise IndexError(f"site {s} out of range for {nsites} sites")
    if len(set(sites)) != len(sites):
        raise ValueError("repeated site indices")
    dterm = 1
    for s in sites:
        dterm *= dims[s]
    if term.shape != (dterm, dterm):
        raise ValueError(f"term shape {term.shape} does not match sites {sites} dims")
    full_dim = int(np.prod(dims))
    rest = [ax for ax in range(nsites) if ax not in sites]
    perm = sites + rest
    inv = np.argsort(perm)
    tshaped = term.reshape([dims[s] for s in sites] * 2)

    def matvec(v):
        t = v.reshape(dims).transpose(perm).reshape(dterm, -1)
        t = term @ t
        t = t.reshape([dims[s] for s in perm]).transpose(inv)
        return t.reshape(full_dim)

    op = SparseOperator(full_dim, matvec)
    op.term = tshaped  # kept for introspection/debugging
    return op


def lowest_eigs(op, k, tol=1e-10, max_iter=None):
    """k lowest eigenvalues of a Hermitian PSD SparseOperator (ascending).

    Uses ARPACK Lanczos ('SA'); densifies when k is too close to the
    dimension for the iterative solver to apply. Non-convergence raises
    EigsError with the residual count.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dim = op.dim
    if k >= dim - 1 or dim <= 64:
        dense = op.to_dense()
        vals, _ = hermitian_eig(dense, check=False)
        return vals[: min(k, dim)]
    ncv = min(dim, max(2 * k + 20, 40))
    try:
        vals = spla.eigsh(
            op.as_linear_operator(),
            k=k,
            which="SA",
            tol=tol,
            ncv=ncv,
            maxiter=max_iter,
            return_eigenvectors=False,
        )
    except spla.ArpackNoConvergence as exc:
        got = len(exc.eigenvalues)
        raise EigsError(
            f"Lanczos converged only {got}/{k} eigenvalues "
            f"(dim {dim}, maxiter {max_iter})"
        ) from exc
    return np.sort(vals)
