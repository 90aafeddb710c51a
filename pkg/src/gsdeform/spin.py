"""Spin operators, rotated eigenbases, and total-spin projectors."""

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_eig, kron

__all__ = [
    "SpinSite",
    "spin_operators",
    "axis_basis",
    "axis_state",
    "axis_projector",
    "rotation",
    "pi_rotation",
    "total_spin_projector",
]

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class SpinSite:
    """Spin quantum number, local dimension, and the three spin matrices."""

    s: float
    dim: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    def operator(self, axis):
        return {"x": self.sx, "y": self.sy, "z": self.sz}[axis]


def spin_operators(s):
    """Standard spin-s matrices in the S_z eigenbasis ordered m = s..-s."""
    two_s = round(2 * s)
    if two_s <= 0 or abs(2 * s - two_s) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {s}")
    s = two_s / 2.0
    dim = two_s + 1
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    # <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)); basis is descending in m
    up = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((dim, dim), dtype=complex)
    sp[np.arange(dim - 1), np.arange(1, dim)] = up
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return SpinSite(s=s, dim=dim, sx=sx, sy=sy, sz=sz)


def rotation(site, axis, theta):
    """exp(-i * theta * S_axis), computed by eigendecomposition."""
    vals, vecs = hermitian_eig(site.operator(axis), check=False)
    return (vecs * np.exp(-1j * theta * vals)) @ vecs.conj().T


def axis_basis(site, axis):
    """Unitary whose columns are |m>_axis in the z basis, ordered m = s..-s.

    Conventions: z->x by a pi/2 rotation about y, z->y by a -pi/2 rotation
    about x, so all three bases follow from the same S_z eigenvectors.
    """
    if axis == "z":
        return np.eye(site.dim, dtype=complex)
    if axis == "x":
        return rotation(site, "y", np.pi / 2)
    if axis == "y":
        return rotation(site, "x", -np.pi / 2)
    raise ValueError(f"unknown axis {axis!r}")


def axis_state(site, axis, m):
    """The |m>_axis eigenvector of S_axis."""
    idx = round(site.s - m)
    if not 0 <= idx < site.dim:
        raise ValueError(f"m={m} out of range for spin {site.s}")
    return axis_basis(site, axis)[:, idx]


def axis_projector(site, axis, magnitudes):
    """Projector onto span{ |m>_axis : m in magnitudes }."""
    cols = [axis_state(site, axis, m) for m in magnitudes]
    v = np.column_stack(cols)
    return v @ v.conj().T


def pi_rotation(site, axis):
    """Global-flip generator exp(i * pi * S_axis) on one site."""
    return rotation(site, axis, -np.pi)


def total_spin_projector(s1, s2, j):
    """Projector onto the total-spin-J eigenspace of two coupled spins."""
    site1, site2 = spin_operators(s1), spin_operators(s2)
    lo, hi = abs(site1.s - site2.s), site1.s + site2.s
    if not (lo - 1e-9 <= j <= hi + 1e-9) or abs(2 * j - round(2 * j)) > 1e-12:
        raise ValueError(f"J={j} outside the allowed range [{lo}, {hi}]")
    i1 = np.eye(site1.dim, dtype=complex)
    i2 = np.eye(site2.dim, dtype=complex)
    tot2 = np.zeros((site1.dim * site2.dim,) * 2, dtype=complex)
    for axis in AXES:
        stot = kron(site1.operator(axis), i2) + kron(i1, site2.operator(axis))
        tot2 += stot @ stot
    vals, vecs = hermitian_eig(tot2, check=False)
    target = j * (j + 1)
    sel = np.abs(vals - target) < 1e-8
    if not sel.any():
        raise ValueError(f"no total-spin eigenvalue near J(J+1)={target}")
    v = vecs[:, sel]
    return v @ v.conj().T
