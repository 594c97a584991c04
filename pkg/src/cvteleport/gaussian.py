"""Exact single-mode Gaussian fast path.

Moments convention matches the Fock side: hbar = 1, vacuum covariance is
identity / 2, and a coherent amplitude alpha sits at mean
(sqrt(2) Re alpha, sqrt(2) Im alpha).  The random-displacement channel with
a Gaussian kernel simply adds nbar to each quadrature variance, which gives
a third, closed-form verification path for the Fock machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, momentum_operator, position_operator

__all__ = [
    "GaussianState",
    "coherent_gaussian",
    "apply_gaussian_channel",
    "gaussian_fidelity",
    "fock_to_gaussian_moments",
]


@dataclass(frozen=True)
class GaussianState:
    """First and second quadrature moments of a single mode."""

    mean: np.ndarray  # (2,), (<x>, <p>)
    cov: np.ndarray  # (2, 2) symmetric, eigenvalues >= 1/2

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(2)
        cov = np.asarray(self.cov, dtype=np.float64).reshape(2, 2)
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise ValueError("covariance matrix must be symmetric")
        if np.linalg.eigvalsh(cov)[0] < 0.5 - 1e-12:
            raise ValueError("covariance violates the vacuum bound 1/2")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def is_coherent(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.cov - 0.5 * np.eye(2))) <= tol)


def coherent_gaussian(alpha: complex) -> GaussianState:
    alpha = complex(alpha)
    mean = math.sqrt(2.0) * np.array([alpha.real, alpha.imag])
    return GaussianState(mean, 0.5 * np.eye(2))


def apply_gaussian_channel(state: GaussianState, nbar: float) -> GaussianState:
    """Random displacement with variance nbar per quadrature: mean unchanged,
    covariance grows by nbar * identity."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    return GaussianState(state.mean, state.cov + nbar * np.eye(2))


def gaussian_fidelity(a: GaussianState, b: GaussianState) -> float:
    """Overlap of a coherent state with an arbitrary Gaussian state,

        F = exp(-d^T (Va + Vb)^{-1} d / 2) / sqrt(det(Va + Vb)).

    ``a`` must be coherent; then F equals <alpha| rho_b |alpha>.
    """
    if not a.is_coherent():
        raise ValueError("first argument must be a coherent state (cov = I/2)")
    total = a.cov + b.cov
    d = b.mean - a.mean
    det = float(np.linalg.det(total))
    if det <= 0:
        raise ValueError("covariance sum is not positive definite")
    expo = -0.5 * float(d @ np.linalg.solve(total, d))
    return float(np.clip(math.exp(expo) / math.sqrt(det), 0.0, 1.0))


def fock_to_gaussian_moments(rho: DensityMatrix) -> GaussianState:
    """First/second quadrature moments extracted from a Fock-basis state.

    Does not assert the state is Gaussian; it is the bridge used to
    cross-check covariance growth through the channel.
    """
    n = rho.n_max
    x_op = position_operator(n)
    p_op = momentum_operator(n)
    tr = rho.trace
    mx = float(np.trace(rho.data @ x_op).real) / tr
    mp = float(np.trace(rho.data @ p_op).real) / tr
    xx = float(np.trace(rho.data @ (x_op @ x_op)).real) / tr
    pp = float(np.trace(rho.data @ (p_op @ p_op)).real) / tr
    xp = float(np.trace(rho.data @ (x_op @ p_op + p_op @ x_op)).real) / (2.0 * tr)
    cov = np.array([[xx - mx * mx, xp - mx * mp], [xp - mx * mp, pp - mp * mp]])
    return GaussianState(np.array([mx, mp]), cov)
