"""EPR measurement machinery: the ideal entangled resource, the measurement
eigenvectors as overlap functionals, the two-mode squeezed vacuum, and the
outcome-displacement kernel.

The improper vectors are never materialized.  With |Phi> = (2 pi)^{-1/2}
sum_n |n,n> the two families used throughout are

    |Psi(x, p)> = (1 (x) D(x, p)) |Phi>
    |Phi(x, p)> = (1 (x) D(-x, p)) |Phi> * exp(-i p x / 2)

which are related by |Psi(x, p)> = exp(-i p x / 2) |Phi(-x, p)>.  The kernel

    P(x, p) = <Psi(x, p)| W |Psi(x, p)>

is what drives both the teleportation channel and the dense-coding channel
matrix.  Phases are carried consistently even where only |.|^2 survives,
because the off-diagonal elements <Phi(a)| W |Phi(b)> need them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .defaults import DEFAULTS
from .errors import NumericalConsistencyError
from .fock import (
    DensityMatrix,
    PhasePoint,
    TwoModeState,
    displacement_batch,
    displacement_diagonal,
)
from .grids import PhaseGrid, chunked

__all__ = [
    "EprVector",
    "tmsv",
    "tmsv_leakage",
    "epr_overlap",
    "epr_overlaps",
    "psi_overlap",
    "kernel_value",
    "kernel_values",
    "f_w_element",
    "refined_kernel_values",
]

_TWO_PI = 2.0 * math.pi
_NEG_FLOOR = DEFAULTS["kernel_negative_floor"]
_CHUNK = 1024


@dataclass(frozen=True)
class EprVector:
    """The ideal (improper) resource |Phi> = (2 pi)^{-1/2} sum_n |n,n>.

    Exists only through its Schmidt coefficients; it is never normalized.
    Its (improper) projector has pair correlation C[m,n] = 1/(2 pi), so the
    partial trace over either mode is identity / (2 pi) by construction.
    """

    n_max: int

    @property
    def schmidt(self) -> np.ndarray:
        return np.full(self.n_max, 1.0 / math.sqrt(_TWO_PI))

    def projector(self) -> TwoModeState:
        corr = np.full((self.n_max, self.n_max), 1.0 / _TWO_PI, dtype=np.complex128)
        return TwoModeState(self.n_max, pair_corr=corr)


def tmsv_leakage(r: float, n_max: int) -> float:
    return math.tanh(r) ** (2 * n_max) if r > 0 else 0.0


def tmsv(r: float, n_max: int, leakage_warn: float = 1e-6) -> TwoModeState:
    """Two-mode squeezed vacuum with Schmidt coefficients tanh^n(r) / cosh(r).

    The coefficients are the exact infinite-dimensional ones, so the state
    carries a norm deficit tanh(r)^(2 n_max) that is reported as leakage.
    """
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    t = math.tanh(r)
    coeffs = t ** np.arange(n_max) / math.cosh(r)
    leak = tmsv_leakage(r, n_max)
    if leak > leakage_warn:
        warnings.warn(
            f"TMSV(r={r}) truncation leakage {leak:.3e} at n_max={n_max}",
            RuntimeWarning,
            stacklevel=2,
        )
    return TwoModeState(n_max, schmidt=coeffs, leakage=leak)


# ---------------------------------------------------------------------------
# overlaps


def _pure_amplitudes(state: TwoModeState) -> np.ndarray:
    """Amplitude matrix psi[a, b] of a pure state (Schmidt or dense)."""
    return state.vector()


def _trace_overlap(psi: np.ndarray, d_batch: np.ndarray) -> np.ndarray:
    # sum_{m,b} conj(D[b,m]) psi[m,b] for each matrix in the batch
    return np.einsum("bnm,mn->b", d_batch.conj(), psi)


def psi_overlap(state: TwoModeState, pt: PhasePoint) -> complex:
    """<Psi(x, p) | psi> for a pure two-mode state."""
    pt = PhasePoint(*pt)
    psi = _pure_amplitudes(state)
    d = displacement_batch(np.array([pt.alpha]), state.n_max)
    return complex(_trace_overlap(psi, d)[0] / math.sqrt(_TWO_PI))


def epr_overlap(state: TwoModeState, pt: PhasePoint) -> complex:
    """<Phi(x, p) | psi>, including the exp(+i p x / 2) phase.

    Schmidt-form states reduce to a diagonal displacement sum; other pure
    states fall back to the dense amplitude contraction.
    """
    pt = PhasePoint(*pt)
    phase = np.exp(0.5j * pt.p * pt.x)
    alpha_phi = (-pt.x + 1j * pt.p) / math.sqrt(2.0)
    if state.schmidt is not None:
        diag = displacement_diagonal(np.array([alpha_phi]), state.n_max)[0]
        return complex(phase * np.dot(state.schmidt, diag) / math.sqrt(_TWO_PI))
    psi = _pure_amplitudes(state)
    d = displacement_batch(np.array([alpha_phi]), state.n_max)
    return complex(phase * _trace_overlap(psi, d)[0] / math.sqrt(_TWO_PI))


def epr_overlaps(state: TwoModeState, pts: np.ndarray) -> np.ndarray:
    """Batched <Phi(x, p) | psi> over pts with shape (B, 2)."""
    pts = np.asarray(pts, dtype=np.float64)
    phases = np.exp(0.5j * pts[:, 1] * pts[:, 0])
    alphas = (-pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2.0)
    psi = _pure_amplitudes(state)
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for sl in chunked(pts.shape[0], _CHUNK):
        d = displacement_batch(alphas[sl], state.n_max)
        out[sl] = _trace_overlap(psi, d)
    return phases * out / math.sqrt(_TWO_PI)


# ---------------------------------------------------------------------------
# kernel


def _dense_quadratic(state: TwoModeState, alphas: np.ndarray) -> np.ndarray:
    """v^dag W v with v the flattened transpose of D(alpha), per point."""
    n = state.n_max
    dense = state.dense()
    out = np.empty(alphas.size, dtype=np.complex128)
    for sl in chunked(alphas.size, _CHUNK):
        d = displacement_batch(alphas[sl], n)
        # vec index (m, b) -> D[b, m]
        v = d.transpose(0, 2, 1).reshape(-1, n * n)
        out[sl] = np.einsum("bi,bi->b", v.conj(), v @ dense.T)
    return out


def kernel_values(W: TwoModeState, pts: np.ndarray) -> np.ndarray:
    """P(x, p) = <Psi(x,p)| W |Psi(x,p)> for every row of pts, shape (B,).

    Schmidt-diagonal mixtures use the diagonal displacement sum (O(n^2) per
    point); general states use the dense quadratic form, which is the
    arbiter path.  Values are clipped of numerical noise but a violation
    below the configured floor raises.
    """
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    alphas = (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2.0)
    corr = W.pair_correlation()
    if corr is not None:
        diag = displacement_diagonal(alphas, W.n_max)
        raw = np.einsum("bm,mn,bn->b", diag, corr, diag)
    else:
        raw = _dense_quadratic(W, alphas)
    vals = raw.real / _TWO_PI
    worst = float(vals.min(initial=0.0))
    if worst < _NEG_FLOOR:
        raise NumericalConsistencyError(
            f"kernel value {worst:.3e} below the negativity floor"
        )
    return np.clip(vals, 0.0, None)


def kernel_value(W: TwoModeState, pt: PhasePoint) -> float:
    pt = PhasePoint(*pt)
    return float(kernel_values(W, np.array([[pt.x, pt.p]]))[0])


def f_w_element(W: TwoModeState, a: PhasePoint, b: PhasePoint) -> complex:
    """Off-diagonal resource element <Phi(a)| W |Phi(b)>.

    The diagonal reduces to the kernel evaluated with the x sign flipped:
    f_w_element(W, a, a) == kernel_value(W, (-a.x, a.p)).
    """
    a = PhasePoint(*a)
    b = PhasePoint(*b)
    n = W.n_max
    phase = np.exp(0.5j * (a.p * a.x - b.p * b.x))
    alpha_a = (-a.x + 1j * a.p) / math.sqrt(2.0)
    alpha_b = (-b.x + 1j * b.p) / math.sqrt(2.0)
    corr = W.pair_correlation()
    if corr is not None:
        d1 = displacement_diagonal(np.array([alpha_a]), n)[0]
        d2 = displacement_diagonal(np.array([alpha_b]), n)[0]
        inner = d1 @ corr @ d2
    else:
        dense = W.dense()
        da = displacement_batch(np.array([alpha_a]), n)[0]
        db = displacement_batch(np.array([alpha_b]), n)[0]
        v1 = da.T.reshape(-1)
        v2 = db.T.reshape(-1)
        inner = v1.conj() @ dense @ v2
    return complex(phase * inner / _TWO_PI)


def refined_kernel_values(
    W: TwoModeState,
    grid: PhaseGrid,
    tol: Optional[float] = None,
    max_refine: int = 3,
) -> Tuple[PhaseGrid, np.ndarray]:
    """Kernel samples on ``grid``, refining until the normalization settles.

    Doubles the resolution until the discrete normalization moves by less
    than ``tol`` (default from the defaults table) or ``max_refine`` is hit.
    """
    tol = DEFAULTS["grid_refine_tol"] if tol is None else tol
    vals = kernel_values(W, grid.points())
    norm = float(np.dot(grid.weights(), vals))
    for _ in range(max_refine):
        finer = grid.refine()
        finer_vals = kernel_values(W, finer.points())
        finer_norm = float(np.dot(finer.weights(), finer_vals))
        if abs(finer_norm - norm) < tol:
            return grid, vals
        grid, vals, norm = finer, finer_vals, finer_norm
    return grid, vals
