"""Deformation operators, deformed interaction terms, and reduction POVMs.

The central objects: a rank-2 projector P per site singles out a logical qubit
subspace; D(delta) = delta*P + (I-P) squeezes the complement; an interaction
h on a set of sites is deformed to Q([tensor D] h [tensor D]) where Q flattens
the nonzero spectrum to 1. The ground state of the deformed model is
[tensor D^-1] applied to the undeformed ground state, and the delta->0 limit
of the deformed terms is computed exactly by a graded subspace limit.
"""

from dataclasses import dataclass
from functools import reduce
from itertools import combinations

import numpy as np

from .linalg import hermitian_eig, kron, range_projector
from .spin import axis_projector, axis_state, spin_operators

__all__ = [
    "DeformationOp",
    "deformation",
    "deform_term",
    "limit_term",
    "reduction_povm_undeformed",
    "reduction_povm_deformed",
    "deformed_weight_base",
]


@dataclass(frozen=True)
class DeformationOp:
    """D(delta) = delta*P + (I-P) for a rank-2 projector P, with its inverse."""

    delta: float
    projector: np.ndarray
    matrix: np.ndarray
    inverse: np.ndarray


def deformation(projector, delta):
    if delta <= 0:
        raise ValueError("delta must be positive; the delta=0 limit has its own builder")
    p = np.asarray(projector, dtype=complex)
    eye = np.eye(p.shape[0], dtype=complex)
    d = delta * p + (eye - p)
    d_inv = p / delta + (eye - p)
    return DeformationOp(delta=delta, projector=p, matrix=d, inverse=d_inv)


def _rank(a, tol=1e-9):
    vals, _ = hermitian_eig(a, check=False)
    top = max(vals[-1], 1.0)
    return int(np.sum(vals > tol * top))


def deform_term(h, deformations):
    """Q([tensor D_j] h [tensor D_j]) on the sites of the local term h.

    ``deformations`` is one DeformationOp per site of h, in site order. For
    invertible D the Q map of the conjugated term is exactly the orthogonal
    projector onto (tensor D) im(h), so it is computed by orthonormalizing
    D applied to a range basis of h -- stable at small delta, where the
    nonzero eigenvalues of DhD themselves underflow any fixed threshold.
    The result is a projector of the same rank as Q(h) for every delta > 0.
    """
    h = np.asarray(h, dtype=complex)
    big_d = reduce(kron, (d.matrix for d in deformations))
    if big_d.shape != h.shape:
        raise ValueError(f"deformations cover dim {big_d.shape[0]}, term has {h.shape[0]}")
    vals, vecs = hermitian_eig(h)
    top = max(vals[-1].real, 1.0)
    if vals[0] < -1e-9 * top:
        raise ValueError("local term must be PSD")
    image = vecs[:, vals > 1e-9 * top]
    q, _ = np.linalg.qr(big_d @ image)
    return q @ q.conj().T


def _weight_graded_projectors(projectors):
    """Orthogonal projectors G_w grouping tensor factors by logical weight.

    D^-1 = sum_w delta^-w G_w where G_w sums the products with exactly w
    factors of P and (I-P) elsewhere.
    """
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    qs = [np.eye(p.shape[0], dtype=complex) - p for p in ps]
    n = len(ps)
    grades = []
    for w in range(n + 1):
        g = None
        for chosen in combinations(range(n), w):
            factors = [ps[i] if i in chosen else qs[i] for i in range(n)]
            term = reduce(kron, factors)
            g = term if g is None else g + term
        grades.append(g)
    return grades


def _orth_columns(a, tol=1e-10):
    """Orthonormal basis of the column space and of the (coefficient) null space."""
    if a.shape[1] == 0:
        return a, np.zeros((0, 0), dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    top = s[0] if len(s) else 0.0
    r = int(np.sum(s > tol * max(top, 1.0)))
    return u[:, :r], vh[r:].conj().T


def limit_term(h, projectors):
    """The delta->0 operator limit of the deformed term, computed exactly.

    ker Q(DhD) = D(delta)^-1 ker h; expanding D^-1 in logical-weight grades
    D^-1 = sum_w delta^-w G_w turns the delta->0 subspace limit into the
    associated graded space: filter V = ker h by top weight and collect the
    leading components, L = sum_w G_w(V_w) with V_w = V ∩ ker G_{w+1} ∩ ...
    The limit term is I - (projector onto L).
    """
    h = np.asarray(h, dtype=complex)
    grades = _weight_graded_projectors(projectors)
    dim = h.shape[0]
    vals, vecs = hermitian_eig(h, check=True)
    top = max(vals[-1], 1.0)
    basis = vecs[:, vals <= 1e-9 * top]  # ker h
    limit_proj = np.zeros((dim, dim), dtype=complex)
    for g in reversed(grades):
        lead, drop = _orth_columns(g @ basis)
        limit_proj += lead @ lead.conj().T
        basis = basis @ drop
        if basis.shape[1] == 0:
            break
    return np.eye(dim, dtype=complex) - limit_proj


# --- spin-3/2 reduction POVMs -------------------------------------------------

_SQ23 = np.sqrt(2.0 / 3.0)


def _extreme_projector(axis):
    """Projector onto the |±3/2>_axis doublet of a spin-3/2 site."""
    site = spin_operators(1.5)
    return axis_projector(site, axis, (1.5, -1.5))


def reduction_povm_undeformed():
    """The three measurement operators F^b reducing spin-3/2 to a qubit.

    F^b = sqrt(2/3) (|3/2>_b<3/2| + |-3/2>_b<-3/2|); together a valid POVM.
    """
    site = spin_operators(1.5)
    out = {}
    for axis in ("x", "y", "z"):
        hi = axis_state(site, axis, 1.5)
        lo = axis_state(site, axis, -1.5)
        out[axis] = _SQ23 * (np.outer(hi, hi.conj()) + np.outer(lo, lo.conj()))
    return out


def deformed_weight_base(delta):
    """The per-matched-site weight factor (3 - delta^2) / (2 delta^2)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return (3.0 - delta**2) / (2.0 * delta**2)


def reduction_povm_deformed(c_axis, delta):
    """Deformed reduction POVM for a site whose deformation axis is c_axis.

    F~^b(delta) = kappa^(1/2 if b==c else 0) * F^b * D(delta), with
    kappa = (3-delta^2)/(2 delta^2); completeness holds for any delta in (0,1].
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    kappa = deformed_weight_base(delta)
    d = deformation(_extreme_projector(c_axis), delta)
    out = {}
    for axis, f in reduction_povm_undeformed().items():
        scale = np.sqrt(kappa) if axis == c_axis else 1.0
        out[axis] = scale * f @ d.matrix
    return out
