"""Approximate joint triangularization over the orthogonal group.

The objective is the total squared Frobenius mass below the diagonal of
the rotated matrices.  First-order descent uses the exact skew
exponential as retraction with Armijo backtracking, seeded by the Schur
factor of a separating linear combination of the inputs.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    LineSearchStalled,
    NoSeparatingBeta,
)
from .linalg import low_part, ordered_schur, skew_exp

SEPARATION_GAP_REL = 1e-8


@dataclass(frozen=True)
class MatrixSet:
    """N square matrices of shared dimension d."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=float) for m in self.matrices)
        if not mats:
            raise DimensionMismatch("matrix set must contain at least one matrix")
        d = mats[0].shape[0]
        for m in mats:
            if m.shape != (d, d):
                raise DimensionMismatch("all matrices must share dimension d")
            if not np.all(np.isfinite(m)):
                raise DimensionMismatch("matrix entries must be finite")
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self):
        return self.matrices[0].shape[0]

    @property
    def n(self):
        return len(self.matrices)

    def combine(self, beta):
        """The pencil sum_n beta_n M_n."""
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.n,):
            raise DimensionMismatch("beta length must equal the number of matrices")
        return sum(b * m for b, m in zip(beta, self.matrices))


def _check_frame(u, mset):
    u = np.asarray(u, dtype=float)
    if u.shape != (mset.d, mset.d):
        raise DimensionMismatch("frame dimension does not match matrix set")
    return u


def loss(u, mset):
    """Sum of squared strictly-lower entries of the rotated matrices."""
    u = _check_frame(u, mset)
    total = 0.0
    for m in mset.matrices:
        total += np.sum(low_part(u.T @ m @ u) ** 2)
    return float(total)


def gradient(u, mset):
    """Riemannian gradient, a skew matrix S - S^T.

    S = sum_n [A_n^T, low(A_n)] with A_n = U^T M_n U; the inner product
    against a tangent X gives the derivative of t -> loss(U e^{tX}).
    """
    u = _check_frame(u, mset)
    s = np.zeros((mset.d, mset.d))
    for m in mset.matrices:
        a = u.T @ m @ u
        g = low_part(a)
        s += a.T @ g - g @ a.T
    return s - s.T


def hessian_form(u, mset, x):
    """Second derivative of t -> loss(U e^{tX}) at t = 0."""
    u = _check_frame(u, mset)
    x = np.asarray(x, dtype=float)
    if x.shape != (mset.d, mset.d):
        raise DimensionMismatch("direction dimension does not match matrix set")
    total = 0.0
    for m in mset.matrices:
        a = u.T @ m @ u
        g = low_part(a)
        gd = low_part(a @ x - x @ a)
        gdd = low_part((a @ x - x @ a) @ x - x @ (a @ x - x @ a))
        total += 2.0 * np.sum(gd * gd) + 2.0 * np.sum(gdd * g)
    return float(total)


def eigenvalue_separation(m):
    """(min real gap, all-real flag) for the spectrum of a pencil."""
    eigs = np.linalg.eigvals(m)
    scale = max(np.linalg.norm(m), 1.0)
    all_real = bool(np.max(np.abs(eigs.imag)) <= 1e-8 * scale)
    re = np.sort(eigs.real)
    gap = float(np.min(np.diff(re))) if re.size > 1 else np.inf
    return gap, all_real


def find_separating_beta(mset, strategy="ones", seed=0, max_tries=50):
    """Unit vector beta whose pencil has real, well-separated eigenvalues.

    Tries the normalized ones vector first (strategy "ones"), then seeded
    random unit vectors.  The separation floor is relative to the pencil
    norm.  Returns (beta, achieved_gap).
    """
    if strategy not in ("ones", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(seed)
    candidates = []
    if strategy == "ones":
        candidates.append(np.ones(mset.n) / np.sqrt(mset.n))
    for _ in range(max_tries):
        v = rng.standard_normal(mset.n)
        candidates.append(v / np.linalg.norm(v))
    for beta in candidates[:max_tries]:
        pencil = mset.combine(beta)
        gap, all_real = eigenvalue_separation(pencil)
        if all_real and gap > SEPARATION_GAP_REL * np.linalg.norm(pencil):
            return beta, gap
    raise NoSeparatingBeta(
        f"no separating combination found after {max_tries} tries"
    )


def schur_initializer(mset, beta):
    """Orthogonal frame triangularizing the beta-pencil of the set."""
    pencil = mset.combine(beta)
    u, _ = ordered_schur(pencil)
    return u


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 500
    grad_tol: float = 1e-12
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0

    def __post_init__(self):
        if self.max_iters < 0 or self.grad_tol <= 0:
            raise ValueError("max_iters must be >= 0 and grad_tol > 0")
        if not 0 < self.armijo_c < 1 or not 0 < self.backtrack_factor < 1:
            raise ValueError("armijo_c and backtrack_factor must lie in (0,1)")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")


@dataclass
class DescentTrace:
    loss_values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    step_lengths: list = field(default_factory=list)
    termination: str = ""


STEP_UNDERFLOW = 1e-16


def descend(mset, u_init, config=OptimizerConfig()):
    """First-order descent with Armijo backtracking and exact retraction.

    Iterates U <- U e^{t D} with D = -grad/||grad||; the accepted loss
    sequence is non-increasing.  Raises LineSearchStalled (carrying the
    last iterate) if backtracking underflows.
    """
    u = _check_frame(u_init, mset)
    trace = DescentTrace()
    current = loss(u, mset)
    step_guess = config.initial_step
    for _ in range(config.max_iters):
        g = gradient(u, mset)
        g_norm = np.linalg.norm(g)
        if g_norm <= config.grad_tol:
            trace.termination = "grad_tol"
            return u, trace
        direction = -g / g_norm
        step = step_guess
        while True:
            candidate = u @ skew_exp(direction, step)
            new = loss(candidate, mset)
            if new <= current - config.armijo_c * step * g_norm:
                break
            step *= config.backtrack_factor
            if step < STEP_UNDERFLOW:
                trace.termination = "stalled"
                raise LineSearchStalled(
                    "Armijo backtracking underflowed", frame=u, trace=trace
                )
        u = candidate
        current = new
        # warm-start the next search one expansion above the accepted step
        step_guess = min(config.initial_step, step / config.backtrack_factor)
        trace.loss_values.append(current)
        trace.grad_norms.append(g_norm)
        trace.step_lengths.append(step)
    trace.termination = "max_iters"
    return u, trace
