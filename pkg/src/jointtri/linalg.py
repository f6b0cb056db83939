"""Dense structured linear algebra.

Triangular projections, the selector onto the strictly-lower subspace,
skew exponential / orthogonal logarithm, the real eigensolver, ordered
Schur decomposition, and matrix metrics.  All vectorizations are
column-major, fixed globally.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ComplexEigenvalues,
    DimensionMismatch,
    LogBranchAmbiguous,
    NearDefective,
    NegativeDeterminant,
)

# Tolerances pinned by the module contracts.
SKEW_TOL = 1e-12
ORTHO_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-8
EIG_GAP_TOL = 1e-10
LOG_BRANCH_TOL = 1e-6


def vec(a):
    """Column-major vectorization of a matrix."""
    return np.asarray(a).flatten(order="F")


def unvec(x, d):
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(x).reshape((d, d), order="F")


def low_part(a):
    """Strictly lower-triangular part: entries kept iff i > j."""
    return np.tril(np.asarray(a, dtype=float), -1)


def up_part(a):
    """Strictly upper-triangular part: entries kept iff i < j."""
    return np.triu(np.asarray(a, dtype=float), 1)


def _require_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def _require_skew(x, tol=SKEW_TOL):
    x = _require_square(x, "skew direction")
    if np.max(np.abs(x + x.T)) > tol:
        raise DimensionMismatch("matrix is not skew-symmetric within tolerance")
    return x


def require_orthogonal(u, tol=ORTHO_TOL):
    """Validate ||U^T U - I||_F <= tol and return U as a float array."""
    u = _require_square(u, "orthogonal frame")
    d = u.shape[0]
    if np.linalg.norm(u.T @ u - np.eye(d)) > tol:
        raise DimensionMismatch("matrix is not orthogonal within tolerance")
    return u


def lower_pairs(d):
    """Strictly-lower index pairs (i, j), i > j, in column-major order."""
    return [(i, j) for j in range(d) for i in range(j + 1, d)]


@dataclass(frozen=True)
class LowProjector:
    """Selector onto the strictly-lower subspace of vectorized matrices.

    p_low has shape (d(d-1)/2, d^2) and satisfies p_low p_low^T = I and
    p_low^T p_low = low_mask.  low_mask / up_mask are the 0/1 diagonal
    operators keeping the strictly lower / upper entries of vec(A).
    """

    d: int
    p_low: np.ndarray
    low_mask: np.ndarray
    up_mask: np.ndarray

    @property
    def n_low(self):
        return self.d * (self.d - 1) // 2

    def project(self, a):
        """P_low vec(A): the strictly-lower entries as a vector."""
        return self.p_low @ vec(a)

    def embed(self, x):
        """mat(P_low^T x): a strictly lower-triangular matrix."""
        return unvec(self.p_low.T @ np.asarray(x, dtype=float), self.d)


def build_low_projector(d):
    """Build the selector for dimension d (d = 1 yields a 0-row selector)."""
    if d < 1:
        raise DimensionMismatch("d must be >= 1")
    pairs = lower_pairs(d)
    p_low = np.zeros((len(pairs), d * d))
    for row, (i, j) in enumerate(pairs):
        p_low[row, i + j * d] = 1.0
    low_mask = p_low.T @ p_low
    up_idx = [i + j * d for j in range(d) for i in range(j)]
    up_mask = np.zeros((d * d, d * d))
    for k in up_idx:
        up_mask[k, k] = 1.0
    return LowProjector(d=d, p_low=p_low, low_mask=low_mask, up_mask=up_mask)


def skew_exp(x, scale=1.0):
    """Orthogonal frame e^{scale X} for a skew-symmetric X."""
    x = _require_skew(x)
    if scale == 0.0 or not np.any(x):
        return np.eye(x.shape[0])
    return scipy.linalg.expm(scale * x)


def orthogonal_log(q):
    """Principal logarithm of a rotation, returned as a skew matrix.

    Rejects frames with determinant -1 and rotations with an eigenvalue
    within LOG_BRANCH_TOL of -1, where the principal branch is ambiguous.
    """
    q = require_orthogonal(q)
    d = q.shape[0]
    if np.linalg.det(q) < 0:
        raise NegativeDeterminant("frame has determinant -1; no real skew logarithm")
    eigs = np.linalg.eigvals(q)
    if np.min(np.abs(eigs + 1.0)) < LOG_BRANCH_TOL:
        raise LogBranchAmbiguous("eigenvalue near -1; principal log branch ambiguous")
    log_q = scipy.linalg.logm(q)
    x = 0.5 * (log_q.real - log_q.real.T)
    if np.linalg.norm(skew_exp(x) - q) > 1e-10 * max(1.0, np.sqrt(d)):
        raise LogBranchAmbiguous("log round trip failed; input too close to branch cut")
    return x


@dataclass(frozen=True)
class EigenSystem:
    """Real simple spectrum: values ascending, unit-norm right eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def real_eigen(m):
    """Eigendecomposition of a matrix with real simple eigenvalues.

    Values are sorted ascending; each eigenvector has unit Euclidean norm
    and its first significant entry positive.
    """
    m = _require_square(m)
    scale = np.linalg.norm(m)
    values, vectors = np.linalg.eig(m)
    tol = EIG_GAP_TOL * max(scale, 1.0)
    if np.max(np.abs(values.imag)) > tol:
        raise ComplexEigenvalues("matrix has complex eigenvalues")
    values = values.real
    order = np.argsort(values)
    values = values[order]
    vectors = vectors[:, order].real
    if np.min(np.diff(values), initial=np.inf) < EIG_GAP_TOL * max(scale, 1.0):
        raise NearDefective("eigenvalue gap below tolerance; nearly defective")
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    vectors = _fix_column_signs(vectors)
    residual = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    if np.any(residual > EIG_RESIDUAL_TOL * max(scale, 1.0)):
        raise NearDefective("eigenvector residual above tolerance")
    return EigenSystem(values=values, vectors=vectors)


def _fix_column_signs(u, tol=1e-12):
    """Flip column signs so the first significant entry of each is positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.nonzero(np.abs(col) > tol * max(np.max(np.abs(col)), 1.0))[0]
        if nz.size and col[nz[0]] < 0:
            u[:, j] = -col
    return u


def ordered_schur(m, order=None):
    """Schur factor with eigenvalues on the diagonal in a requested order.

    order[k] indexes into the ascending eigenvalue list; position k of the
    diagonal of U^T M U receives that eigenvalue.  Defaults to ascending.
    Built by QR of the permuted eigenvector matrix, valid for real simple
    spectra; column signs are normalized (first significant entry positive).
    """
    m = _require_square(m)
    eig = real_eigen(m)
    d = m.shape[0]
    if order is None:
        order = np.arange(d)
    order = np.asarray(order, dtype=int)
    if sorted(order.tolist()) != list(range(d)):
        raise DimensionMismatch("order must be a permutation of 0..d-1")
    w = eig.vectors[:, order]
    q, r = np.linalg.qr(w)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    q = _fix_column_signs(q)
    t = q.T @ m @ q
    return q, t


def matrix_metrics(a):
    """Frobenius norm, spectral norm, and condition number via SVD.

    A rank-deficient input reports condition = inf.
    """
    a = _require_square(a)
    fro = np.linalg.norm(a)
    s = np.linalg.svd(a, compute_uv=False)
    smax = s[0]
    smin = s[-1]
    cond = np.inf if smin == 0.0 else smax / smin
    return fro, smax, cond
