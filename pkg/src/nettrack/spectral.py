"""Symmetric eigendecompositions with a deterministic ordering convention.

Everything downstream (communication matrices, stability radii, mode-wise
MSD sums) reads spectra through this module so that eigenvalue indices mean
the same thing everywhere: sorted descending, eigenvector signs normalized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10
# components smaller than this are treated as zero when picking the sign pivot
_SIGN_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues sorted descending; eigenvectors[:, k] pairs with eigenvalues[k]."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _normalize_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its first component above the pivot tolerance is positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.nonzero(np.abs(col) > _SIGN_PIVOT_TOL)[0]
        pivot = nz[0] if nz.size else int(np.argmax(np.abs(col)))
        if col[pivot] < 0:
            out[:, k] = -col
    return out


def eig_sym(m: np.ndarray) -> SpectralDecomp:
    """Full eigendecomposition of a symmetric matrix.

    Rejects input with max asymmetry above SYMMETRY_TOL.  Eigenvalues come
    back sorted descending and each eigenvector is sign-normalized (first
    nonzero component positive), so the output is deterministic given
    identical input bits.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric: max |M - M^T| = {asym:.3e}")
    vals, vecs = np.linalg.eigh(m)
    order = np.argsort(-vals, kind="stable")
    vals = np.ascontiguousarray(vals[order])
    vecs = _normalize_signs(vecs[:, order])
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return SpectralDecomp(eigenvalues=vals, eigenvectors=vecs)


def spectral_norm(m: np.ndarray) -> float:
    """Largest |eigenvalue| of a symmetric matrix."""
    return float(np.max(np.abs(eig_sym(m).eigenvalues)))
