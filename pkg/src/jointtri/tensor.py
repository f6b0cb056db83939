"""Canonical tensor decomposition via joint triangularization.

Slices of a (noisy) rank-d symmetric third-order tensor are turned into
nearly jointly diagonalizable observable matrices; the triangularizer's
diagonal recovers the component ratios, and the pencil equation recovers
the column scales.  Includes the first-order noise expansion of the
observable matrices and the component estimation error bound.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    RankDeficient,
    SingularY,
    SingularZ,
    ZeroColumnSum,
)
from .linalg import matrix_metrics
from .triangularize import MatrixSet

RANK_REL_TOL = 1e-10
SOLVE_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Tensor3:
    """Cubic third-order tensor, flat index (n, n', n'') = n*N^2 + n'*N + n''."""

    n: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float).ravel()
        if self.n < 1 or data.size != self.n**3:
            raise DimensionMismatch("data length must be N^3")
        if not np.all(np.isfinite(data)):
            raise DimensionMismatch("tensor entries must be finite")
        object.__setattr__(self, "data", data)

    def as_cube(self):
        return self.data.reshape((self.n, self.n, self.n))


def tensor_from_components(z):
    """Ground tensor sum_i z_i (x) z_i (x) z_i from an N x d component matrix."""
    z = np.asarray(z, dtype=float)
    cube = np.einsum("ni,mi,ki->nmk", z, z, z)
    return Tensor3(n=z.shape[0], data=cube.ravel())


def slices(t):
    """The N frontal slices m_n with [m_n]_{n'n''} = T_{n n' n''}."""
    cube = t.as_cube()
    return [cube[n].copy() for n in range(t.n)]


def _solve_right(a, b):
    """Solve X B = A for X with a residual check (no explicit inverse)."""
    x = np.linalg.solve(b.T, a.T).T
    if np.linalg.norm(x @ b - a) > SOLVE_RESIDUAL_TOL * max(np.linalg.norm(a), 1.0):
        raise RankDeficient("pencil solve residual above tolerance")
    return x


def observable_matrices(t, d, theta):
    """Observable matrices from dimension-reduced slices.

    With weights w = sqrt(N) * theta (so the unit-norm ones-direction
    reproduces plain unweighted sums), the matrices are
    M_n = (U_d^T m_n V_d)(U_d^T m_w V_d)^{-1}; reduction is skipped when
    d = N.  Returns (MatrixSet, (U_d, V_d) or None).  The identity
    sum_n w_n M_n = I holds by construction.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (t.n,):
        raise DimensionMismatch("theta length must equal the tensor dimension N")
    if d < 1 or d > t.n:
        raise DimensionMismatch("need 1 <= d <= N")
    weights = np.sqrt(t.n) * theta
    raw = slices(t)
    pencil = sum(w * m for w, m in zip(weights, raw))
    s = np.linalg.svd(pencil, compute_uv=False)
    if s[d - 1] <= RANK_REL_TOL * s[0]:
        raise RankDeficient("d-th singular value of the weighted slice sum vanishes")
    reduction = None
    if d < t.n:
        u_full, _, vt_full = np.linalg.svd(pencil)
        u_d, v_d = u_full[:, :d], vt_full[:d, :].T
        raw = [u_d.T @ m @ v_d for m in raw]
        pencil = u_d.T @ pencil @ v_d
        reduction = (u_d, v_d)
    mats = tuple(_solve_right(m, pencil) for m in raw)
    return MatrixSet(mats), reduction


def first_order_model(z, noise):
    """Noise-free observable matrices and their first-order noise terms.

    For square invertible Z with nonzero column sums (theta = ones):
    M_n = Z diag(e_n^T Z) diag(1^T Z)^{-1} Z^{-1} and
    W_n = e_n m^{-1} - m_n m^{-1} e m^{-1}, the minus sign fixed by the
    finite-difference oracle on (m_n + sigma e_n)(m + sigma e)^{-1}.
    Returns (M list, W list, per-matrix M bound, per-matrix W bound).
    """
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    if z.shape != (d, d):
        raise DimensionMismatch("first-order model requires a square Z (N = d)")
    if np.linalg.matrix_rank(z) < d:
        raise SingularZ("Z is singular")
    col_sums = z.sum(axis=0)
    if np.min(np.abs(col_sums)) == 0.0:
        raise ZeroColumnSum("a column of Z sums to zero")
    if noise.n != d:
        raise DimensionMismatch("noise tensor dimension must match Z")
    m_slices = [z @ np.diag(z[n]) @ z.T for n in range(d)]
    m = z @ np.diag(col_sums) @ z.T
    m_inv = np.linalg.inv(m)
    e_slices = slices(noise)
    e_sum = sum(e_slices)
    m_list, w_list = [], []
    for n in range(d):
        m_list.append(m_slices[n] @ m_inv)
        w_list.append(e_slices[n] @ m_inv - m_slices[n] @ m_inv @ e_sum @ m_inv)
    eps = float(np.linalg.norm(noise.data))
    _, _, kappa = matrix_metrics(z)
    z_norm = np.linalg.norm(z)
    min_col = float(np.min(np.abs(col_sums)))
    m_bound = d * kappa**2 * np.max(np.abs(z)) / min_col
    w_bound = eps * np.sqrt(d) * kappa**2 / (z_norm**2 * min_col) * (1.0 + m_bound)
    return m_list, w_list, float(m_bound), float(w_bound)


def estimate_components(u, mset):
    """Ratio matrix Y with Y_ni = [U^T M_n U]_ii (components over column sums)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (mset.d, mset.d):
        raise DimensionMismatch("frame dimension does not match matrix set")
    return np.stack([np.diag(u.T @ m @ u) for m in mset.matrices])


def recover_scales(m_theta_hat, y, theta):
    """Column scales from the weighted-pencil equation; returns Z*.

    s_i is the real cube root of [Y^{-1} m_theta Y^{-T}]_ii and
    Z* = Y diag(s).  m_theta_hat must be the weighted slice sum in the
    same convention as observable_matrices (weights sqrt(N) * theta).
    """
    y = np.asarray(y, dtype=float)
    m_theta_hat = np.asarray(m_theta_hat, dtype=float)
    if y.shape[0] != y.shape[1]:
        raise DimensionMismatch("scale recovery requires a square ratio matrix")
    if np.linalg.matrix_rank(y) < y.shape[0]:
        raise SingularY("ratio matrix Y is singular")
    core = np.linalg.solve(y, np.linalg.solve(y, m_theta_hat.T).T)
    s = np.cbrt(np.diag(core))
    return y * s


def component_gamma(z):
    """gamma = (1/N) min over pairs of sum_n (Z_ni - Z_ni')^2."""
    z = np.asarray(z, dtype=float)
    n, d = z.shape
    if d < 2:
        raise DegenerateSpectrum("component eigengap undefined for d = 1")
    gamma = min(
        float(np.sum((z[:, i] - z[:, j]) ** 2))
        for i in range(d)
        for j in range(i + 1, d)
    )
    return gamma / n


def component_error_bound(z, eps, sigma):
    """Entrywise first-order bound on the component ratio estimation error.

    4 N sigma sqrt(d(d-1)) kappa(Z)^4 / gamma * M^2 W + sigma W, with M, W
    the observable-matrix norm bounds and gamma the scaled component gap.
    """
    z = np.asarray(z, dtype=float)
    n, d = z.shape
    if n != d:
        raise DimensionMismatch("component bound requires N = d")
    if np.linalg.matrix_rank(z) < d:
        raise SingularZ("Z is singular")
    gamma = component_gamma(z)
    if gamma <= 0.0:
        raise DegenerateSpectrum("two identical component columns: gamma = 0")
    _, _, kappa = matrix_metrics(z)
    col_sums = z.sum(axis=0)
    min_col = float(np.min(np.abs(col_sums)))
    if min_col == 0.0:
        raise ZeroColumnSum("a column of Z sums to zero")
    m_const = n * kappa**2 * np.max(np.abs(z)) / min_col
    w_const = (
        eps * np.sqrt(n) * kappa**2 / (np.linalg.norm(z) ** 2 * min_col)
        * (1.0 + m_const)
    )
    bound = (
        4.0 * n * sigma * np.sqrt(d * (d - 1)) * kappa**4 / gamma
        * m_const**2 * w_const
        + sigma * w_const
    )
    return float(bound)


def match_columns(estimated, reference):
    """Permute estimated columns to best match reference (exhaustive, d <= 8).

    Returns (permuted estimate, permutation tuple).
    """
    from itertools import permutations

    estimated = np.asarray(estimated, dtype=float)
    reference = np.asarray(reference, dtype=float)
    d = estimated.shape[1]
    if d > 8:
        raise DimensionMismatch("exhaustive column matching limited to d <= 8")
    best_perm = None
    best_err = np.inf
    for perm in permutations(range(d)):
        err = np.max(np.abs(estimated[:, perm] - reference))
        if err < best_err:
            best_err = err
            best_perm = perm
    return estimated[:, best_perm], best_perm
