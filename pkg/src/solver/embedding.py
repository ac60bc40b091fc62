"""
Complex Hermitian matrices on top of the real conic kernel.

A Hermitian H is represented in real programs by its embedding
[[Re H, -Im H], [Im H, Re H]], which is PSD exactly when H is and has twice
its trace; callers halve trace-based quantities.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import linalg

from src.errors import StructuralError
from src.solver.cones import svec
from src.utils.parameters import DEFAULT_HERMITIAN_TOL, DEFAULT_PSD_TOL, DEFAULT_RANK_ONE_RATIO_TOL


def check_hermitian(H: np.ndarray, tol: float = DEFAULT_HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * scale:
        raise StructuralError("matrix is not Hermitian")
    return H


def hermitian_embed(H: np.ndarray, tol: float = DEFAULT_HERMITIAN_TOL) -> np.ndarray:
    """
    Real symmetric embedding of a Hermitian matrix.

    Args:
        H: (n, n) complex Hermitian matrix
        tol: Accepted asymmetry, relative to the largest entry

    Returns:
        np.ndarray: (2n, 2n) real matrix [[Re H, -Im H], [Im H, Re H]]
    """
    H = check_hermitian(H, tol)
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def hermitian_unembed(E: np.ndarray) -> np.ndarray:
    """Recover H from a (possibly slightly perturbed) embedding by averaging its blocks."""
    n = E.shape[0] // 2
    re = (E[:n, :n] + E[n:, n:]) / 2.0
    im = (E[n:, :n] - E[:n, n:]) / 2.0
    H = re + 1j * im
    return (H + H.conj().T) / 2.0


# =============================================
# Real parameterisation of Hermitian matrices
# =============================================
#
# An n x n Hermitian matrix has n^2 real parameters: Re H on and below the
# diagonal (np.tril_indices(n) order) followed by Im H strictly below the
# diagonal (np.tril_indices(n, -1) order).

def hermitian_parameter_count(n: int) -> int:
    return n * n


def hermitian_to_parameters(H: np.ndarray) -> np.ndarray:
    n = H.shape[0]
    rows, cols = np.tril_indices(n)
    low_rows, low_cols = np.tril_indices(n, -1)
    return np.concatenate([H.real[rows, cols], H.imag[low_rows, low_cols]])


def hermitian_from_parameters(params: np.ndarray, n: int) -> np.ndarray:
    rows, cols = np.tril_indices(n)
    low_rows, low_cols = np.tril_indices(n, -1)
    split = rows.size
    H = np.zeros((n, n), dtype=complex)
    H[rows, cols] = params[:split]
    H[low_rows, low_cols] += 1j * params[split:]
    upper = np.tril(H, -1).conj().T
    return H + upper


@lru_cache(maxsize=16)
def _embedding_map(n: int) -> np.ndarray:
    count = hermitian_parameter_count(n)
    basis = np.zeros((count, n, n), dtype=complex)
    rows, cols = np.tril_indices(n)
    low_rows, low_cols = np.tril_indices(n, -1)
    index = np.arange(rows.size)
    basis[index, rows, cols] = 1.0
    basis[index, cols, rows] = 1.0
    index = rows.size + np.arange(low_rows.size)
    basis[index, low_rows, low_cols] = 1j
    basis[index, low_cols, low_rows] = -1j
    re, im = basis.real, basis.imag
    embedded = np.concatenate([
        np.concatenate([re, -im], axis=2),
        np.concatenate([im, re], axis=2),
    ], axis=1)
    mapping = svec(embedded).T
    mapping.flags.writeable = False
    return mapping


def hermitian_embedding_map(n: int) -> np.ndarray:
    """
    Linear map from the n^2 Hermitian parameters to svec of the embedding.

    Returns:
        np.ndarray: Read-only (2n(2n+1)/2, n^2) matrix
    """
    return _embedding_map(n)


def hermitian_inner_product(D: np.ndarray, n: int) -> np.ndarray:
    """
    Row vector r with r @ params == Re trace(D H) for Hermitian D.

    Uses trace(embed(D) embed(H)) = 2 Re trace(D H), hence the factor 1/2.
    """
    return 0.5 * svec(hermitian_embed(D)) @ hermitian_embedding_map(n)


# =============================================
# Rank-one extraction
# =============================================

def rank_one_extract(Q: np.ndarray, ratio_tol: float = DEFAULT_RANK_ONE_RATIO_TOL,
                     psd_tol: float = DEFAULT_PSD_TOL) -> Tuple[bool, np.ndarray]:
    """
    Test whether a PSD matrix is numerically rank one.

    Args:
        Q: Real symmetric or complex Hermitian PSD matrix
        ratio_tol: Q is rank one when lambda_max / trace >= 1 - ratio_tol
        psd_tol: Accepted negative eigenvalue, relative to the largest

    Returns:
        (is_rank_one, principal_vector) with principal_vector = sqrt(lambda_max) u_max
    """
    Q = check_hermitian(Q, max(DEFAULT_HERMITIAN_TOL, psd_tol))
    Q = (Q + Q.conj().T) / 2.0
    eigenvalues, eigenvectors = linalg.eigh(Q)
    largest = float(eigenvalues[-1])
    if eigenvalues[0] < -psd_tol * max(1.0, abs(largest)):
        raise StructuralError(f"matrix is indefinite (smallest eigenvalue {eigenvalues[0]:.3e})")
    clipped = np.clip(eigenvalues, 0.0, None)
    total = float(clipped.sum())
    vector = np.sqrt(max(largest, 0.0)) * eigenvectors[:, -1]
    if total <= 0.0:
        return False, vector
    return bool(largest / total >= 1.0 - ratio_tol), vector
