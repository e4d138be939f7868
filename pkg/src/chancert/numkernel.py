"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of complex dtype. Eigenvalues
are always returned in descending order.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NotHermitian, NotPSD, NotSquare, ShapeMismatch

#: Symmetry tolerance for ``hermitian_eig``.
HERMITIAN_TOL = 1e-9
#: Eigenvalues down to ``-PSD_TOL`` are clamped to zero instead of raising.
PSD_TOL = 1e-9
#: Eigenvalues strictly above this count towards the rank.
RANK_TOL = 1e-9


@dataclass(frozen=True)
class EigSystem:
    """Eigenvalues (descending) and the matching eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __iter__(self):
        yield self.values
        yield self.vectors


def as_cmatrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d array, got shape {M.shape}")
    return M


def check_square(M):
    M = as_cmatrix(M)
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"matrix of shape {M.shape} is not square")
    return M


def hermitian_eig(M, tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix, largest eigenvalue first.

    Raises ``NotHermitian`` when ``max|M - M^dagger|`` exceeds ``tol``.
    """
    M = check_square(M)
    if M.size and np.max(np.abs(M - M.conj().T)) > tol:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh((M + M.conj().T) / 2)
    return EigSystem(values[::-1].copy(), vectors[:, ::-1].copy())


def rounding_floor(values):
    """Magnitude below which an eigenvalue is indistinguishable from the
    eigensolver's rounding error."""
    if not values.size:
        return 0.0
    return 8 * values.size * np.finfo(float).eps * max(abs(values[0]), abs(values[-1]))


def psd_sqrt(M, tol=PSD_TOL):
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues at rounding level are zeroed: their square roots would
    otherwise leak O(sqrt(eps)) into fidelities of rank-deficient states.
    """
    values, vectors = hermitian_eig(M)
    if values.size and values[-1] < -tol:
        raise NotPSD(f"smallest eigenvalue {values[-1]:.3e} is below -{tol:g}")
    values = np.where(values > rounding_floor(values), values, 0.0)
    roots = np.sqrt(values)
    return (vectors * roots) @ vectors.conj().T


def trace_norm(M):
    """Schatten 1-norm (sum of singular values)."""
    M = check_square(M)
    return float(np.linalg.svd(M, compute_uv=False).sum())


def matrix_rank(M, tol=RANK_TOL):
    """Number of eigenvalues of a Hermitian PSD matrix above ``tol``."""
    return int(np.count_nonzero(hermitian_eig(M).values > tol))


def partial_trace(M, dim_a, dim_b, keep="A"):
    """Partial trace over one factor of a bipartite operator.

    Subsystem A is the leading (slow) index: row ``a * dim_b + i``.
    ``keep`` selects the factor that survives.
    """
    M = as_cmatrix(M)
    d = dim_a * dim_b
    if M.shape != (d, d):
        raise ShapeMismatch(f"expected a {d}x{d} matrix, got {M.shape}")
    T = M.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.trace(T, axis1=1, axis2=3)
    if keep == "B":
        return np.trace(T, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def kron(A, B):
    return np.kron(as_cmatrix(A), as_cmatrix(B))


def is_unitary(U, tol=1e-8):
    U = check_square(U)
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)
