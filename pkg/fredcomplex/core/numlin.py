"""Tolerance-aware dense linear algebra.

Every rank decision goes through :func:`rank_tol`, so the threshold that
turned singular values into an integer is always recorded.
"""

from collections import namedtuple

import numpy as np

from fredcomplex.exceptions import NonFiniteMatrix, StructuralError
from fredcomplex.providers import Logger

DEFAULT_TOL_REL = 1e-10
# singular values closer than this factor to the threshold are marginal
MARGINAL_FACTOR = 10.0


RankDecision = namedtuple(
    'RankDecision', ['rank', 'singular_values', 'threshold_used', 'marginal']
)


def as_matrix(M, name='matrix'):
    """Convert input to a finite complex matrix.

    :param M: array-like with two dimensions
    :param str name: name used in error messages

    :return: numpy array of dtype complex128
    """
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2:
        raise StructuralError(
            '{} must be two-dimensional, got shape {}'.format(name, arr.shape)
        )
    if not np.all(np.isfinite(arr)):
        raise NonFiniteMatrix('{} has NaN or Inf entries'.format(name))

    return arr


def norm2(M):
    """Spectral norm, zero for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _svd(M, full_matrices=False):
    """SVD computed on the orientation with at least as many rows as columns.

    M and its adjoint share the factorization bit for bit whenever they
    are not square.
    """
    rows, cols = M.shape
    if rows >= cols:
        return np.linalg.svd(M, full_matrices=full_matrices)
    u, s, vh = np.linalg.svd(M.conj().T, full_matrices=full_matrices)
    return vh.conj().T, s, u.conj().T


def _singular_values(M):
    """Singular values that M and its adjoint share exactly.

    A square matrix is decomposed in both orientations and the values are
    merged elementwise, which is symmetric in M and M*.
    """
    rows, cols = M.shape
    s = np.linalg.svd(M if rows >= cols else M.conj().T, compute_uv=False)
    if rows == cols:
        s = np.maximum(s, np.linalg.svd(M.conj().T, compute_uv=False))

    return s


def _decide(s, shape, tol_rel, scale=None):
    if scale is None:
        if s.size == 0 or s[0] == 0.0:
            return RankDecision(0, s, 0.0, False)
        scale = s[0] * max(shape)
    threshold = tol_rel * scale
    rank = int(np.count_nonzero(s > threshold))
    marginal = bool(np.any(
        (s > threshold / MARGINAL_FACTOR) & (s < threshold * MARGINAL_FACTOR)
    ))
    if marginal:
        Logger.debug(
            'Marginal rank decision: rank {} threshold {:.3e}'.format(
                rank, threshold)
        )

    return RankDecision(rank, s, threshold, marginal)


def rank_tol(M, tol_rel=DEFAULT_TOL_REL, scale=None):
    """Numerical rank with a relative threshold.

    :param M: matrix
    :param float tol_rel: relative tolerance; the threshold is
        tol_rel * sigma_1 * max(rows, cols)
    :param float scale: replaces sigma_1 * max(rows, cols), so that several
        matrices share one absolute threshold

    :return RankDecision:
    """
    M = as_matrix(M)
    if M.size == 0:
        return RankDecision(0, np.zeros(0), 0.0, False)

    return _decide(_singular_values(M), M.shape, tol_rel, scale)


def svd_decision(M, tol_rel=DEFAULT_TOL_REL, full_matrices=False, scale=None):
    """SVD together with its rank decision.

    :return: (U, s, Vh, RankDecision)
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if M.size == 0:
        u = np.eye(rows, dtype=np.complex128)
        vh = np.eye(cols, dtype=np.complex128)
        if not full_matrices:
            u = u[:, :0]
            vh = vh[:0, :]
        return u, np.zeros(0), vh, RankDecision(0, np.zeros(0), 0.0, False)
    u, s, vh = _svd(M, full_matrices=full_matrices)
    shared = _singular_values(M) if rows == cols else s

    return u, s, vh, _decide(shared, M.shape, tol_rel, scale)


def pinv(M, tol_rel=DEFAULT_TOL_REL, scale=None):
    """Moore-Penrose pseudoinverse truncated at the rank decision.

    :param M: matrix
    :param float tol_rel: relative tolerance

    :return: cols x rows matrix
    """
    M = as_matrix(M)
    u, s, vh, decision = svd_decision(M, tol_rel, scale=scale)
    r = decision.rank
    if r == 0:
        return np.zeros((M.shape[1], M.shape[0]), dtype=np.complex128)

    return (vh[:r].conj().T / s[:r]) @ u[:, :r].conj().T


def kernel_basis(M, tol_rel=DEFAULT_TOL_REL, scale=None):
    """Orthonormal basis of the numerical kernel (columns)."""
    M = as_matrix(M)
    _, _, vh, decision = svd_decision(M, tol_rel, True, scale)

    return vh[decision.rank:].conj().T


def image_basis(M, tol_rel=DEFAULT_TOL_REL, scale=None):
    """Orthonormal basis of the numerical range (columns)."""
    M = as_matrix(M)
    u, _, _, decision = svd_decision(M, tol_rel, scale=scale)

    return u[:, :decision.rank]


def cokernel_basis(M, tol_rel=DEFAULT_TOL_REL, scale=None):
    """Orthonormal basis of the orthogonal complement of the range."""
    M = as_matrix(M)
    u, _, _, decision = svd_decision(M, tol_rel, True, scale)

    return u[:, decision.rank:]


def projector(basis):
    """Orthogonal projector onto the span of orthonormal columns."""
    basis = np.asarray(basis, dtype=np.complex128)
    P = basis @ basis.conj().T

    return 0.5 * (P + P.conj().T)


def kernel_projector(M, tol_rel=DEFAULT_TOL_REL):
    """Orthogonal projection onto the numerical kernel.

    :param M: matrix
    :param float tol_rel: relative tolerance

    :return: Hermitian idempotent cols x cols matrix
    """
    return projector(kernel_basis(M, tol_rel))


def subspace_distance(U, V):
    """Gap metric between two subspaces.

    :param U: matrix with orthonormal columns
    :param V: matrix with orthonormal columns of the same ambient dimension

    :return float: ||P_U - P_V||_2 in [0, 1]
    """
    U = as_matrix(U, 'U')
    V = as_matrix(V, 'V')
    if U.shape[0] != V.shape[0]:
        raise StructuralError(
            'ambient dimensions differ: {} != {}'.format(
                U.shape[0], V.shape[0])
        )
    if U.shape[1] == 0 and V.shape[1] == 0:
        return 0.0

    return float(min(1.0, norm2(projector(U) - projector(V))))


def sum_basis(*bases, tol_rel=DEFAULT_TOL_REL):
    """Orthonormal basis of the sum of subspaces given by column blocks."""
    blocks = [np.asarray(b, dtype=np.complex128) for b in bases]
    stacked = np.hstack(blocks)
    if stacked.shape[1] == 0:
        return stacked

    return image_basis(stacked, tol_rel)


def intersection_dim(U, V, tol_rel=DEFAULT_TOL_REL):
    """Dimension of the intersection of two column spans."""
    du = rank_tol(U, tol_rel).rank if np.size(U) else 0
    dv = rank_tol(V, tol_rel).rank if np.size(V) else 0
    both = sum_basis(U, V, tol_rel=tol_rel).shape[1]

    return du + dv - both
