"""Direct simulation of the standard teleportation protocol: conditional
post-measurement states, the outcome probability density, and the
ensemble-averaged output.

This is the ground-truth oracle against which the random-displacement
channel is verified.  The joint (x, p) measurement on the input mode Q and
resource mode A is evaluated through the Schmidt expansion of the
measurement vectors, so the unnormalized Bob operator at outcome (x, p) is

    Btilde(x, p) = (1 / 2 pi) sum_{m,n} M[m, n] * W_B[m, n]

with M = D(x,p)^dag rho D(x,p) and W_B[m, n] the mode-B block <m|_A W |n>_A.
The three-mode state is never formed.  For resources supported on diagonal
index pairs (every TMSV and TMSV mixture) the contraction collapses to a
Hadamard product with the pair-correlation matrix, at O(n_max^2) per point;
the general dense contraction is O(n_max^4) per point and is the arbiter.

Bob's correction is D(x, p) applied to Btilde; the probability density of
the outcome is the trace of Btilde before correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .channel import ChannelConfig, grid_for
from .defaults import DEFAULTS
from .errors import DimensionMismatchError
from .fock import (
    DensityMatrix,
    PhasePoint,
    TwoModeState,
    displacement_batch,
    momentum_operator,
    position_operator,
)
from .grids import PhaseGrid, chunked
from .sampling import fit_envelope, rejection_sample

__all__ = [
    "ConditionalOutcome",
    "conditional_output",
    "outcome_density",
    "mean_quadratures",
    "conditional_fidelities",
    "average_output",
    "sample_outcomes",
]

_TWO_PI = 2.0 * math.pi
_CHUNK = 512
_DENSITY_FLOOR = DEFAULTS["degenerate_density_floor"]


@dataclass(frozen=True)
class ConditionalOutcome:
    """One measurement outcome: the point, Bob's corrected state, and the
    probability density at that point.  ``degenerate`` flags outcomes whose
    density underflowed; their state is a placeholder."""

    pt: PhasePoint
    state: Optional[DensityMatrix]
    density: float
    degenerate: bool = False


class _Contractor:
    """Per-(rho, W) workspace shared by all the protocol entry points."""

    def __init__(self, rho: DensityMatrix, W: TwoModeState, input_trace_tol: float):
        if rho.n_max != W.n_max:
            raise DimensionMismatchError(
                f"input dim {rho.n_max} != resource dim {W.n_max}"
            )
        for label, deficit in (("input", rho.trace_deficit), ("resource", W.trace_deficit)):
            if abs(deficit) > input_trace_tol:
                raise ValueError(
                    f"{label} trace deficit {deficit:.3e} exceeds {input_trace_tol:.1e}"
                )
        self.rho = rho
        self.n = rho.n_max
        self.corr = W.pair_correlation()
        if self.corr is None:
            n = self.n
            # W4[m, b, n, d] -> matrix [(m,n), (b,d)] for a single GEMM per chunk
            w4 = W.dense().reshape(n, n, n, n)
            self.wmat = np.ascontiguousarray(
                w4.transpose(0, 2, 1, 3).reshape(n * n, n * n)
            )
        else:
            self.wmat = None

    def btilde(self, alphas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Unnormalized conditional Bob operators and the displacement batch."""
        d = displacement_batch(alphas, self.n)
        m = d.conj().transpose(0, 2, 1) @ self.rho.data @ d
        if self.corr is not None:
            bt = self.corr[None, :, :] * m
        else:
            v = m.reshape(m.shape[0], -1)
            bt = (v @ self.wmat).reshape(m.shape[0], self.n, self.n)
        return bt / _TWO_PI, d

    def densities(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        alphas = (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2.0)
        out = np.empty(alphas.size, dtype=np.float64)
        for sl in chunked(alphas.size, _CHUNK):
            bt, _ = self.btilde(alphas[sl])
            out[sl] = np.einsum("bii->b", bt).real
        return out

    def corrected(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(corrected unnormalized states, densities) for a block of points."""
        pts = np.asarray(pts, dtype=np.float64)
        alphas = (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2.0)
        bt, d = self.btilde(alphas)
        dens = np.einsum("bii->b", bt).real
        return d @ bt @ d.conj().transpose(0, 2, 1), dens


def conditional_output(
    rho: DensityMatrix,
    W: TwoModeState,
    pt: PhasePoint,
    input_trace_tol: float = DEFAULTS["input_trace_tol"],
) -> ConditionalOutcome:
    """Bob's normalized state and the outcome density at one point."""
    pt = PhasePoint(*pt)
    work = _Contractor(rho, W, input_trace_tol)
    states, dens = work.corrected(np.array([[pt.x, pt.p]]))
    density = float(dens[0])
    if density < _DENSITY_FLOOR:
        placeholder = DensityMatrix(np.eye(rho.n_max) / rho.n_max)
        return ConditionalOutcome(pt, placeholder, 0.0, degenerate=True)
    # density is the pre-correction trace (the outcome probability); the
    # returned state is explicitly normalized by its own trace so the two
    # differ only by the displacement truncation defect.
    out = states[0] / float(np.trace(states[0]).real)
    out = 0.5 * (out + out.conj().T)
    return ConditionalOutcome(pt, DensityMatrix(out), density)


def outcome_density(
    rho: DensityMatrix,
    W: TwoModeState,
    pts: np.ndarray,
    input_trace_tol: float = DEFAULTS["input_trace_tol"],
) -> np.ndarray:
    """Probability density of measurement outcomes at each row of pts."""
    return _Contractor(rho, W, input_trace_tol).densities(pts)


def mean_quadratures(
    rho: DensityMatrix,
    W: TwoModeState,
    pts: np.ndarray,
    input_trace_tol: float = DEFAULTS["input_trace_tol"],
) -> np.ndarray:
    """(<x>, <p>) of the normalized conditional state at each point, (B, 2).

    Vectorized so that large outcome samples never materialize their states.
    """
    work = _Contractor(rho, W, input_trace_tol)
    pts = np.asarray(pts, dtype=np.float64)
    x_op = position_operator(rho.n_max)
    p_op = momentum_operator(rho.n_max)
    out = np.empty((pts.shape[0], 2), dtype=np.float64)
    for sl in chunked(pts.shape[0], _CHUNK):
        states, _ = work.corrected(pts[sl])
        norms = np.einsum("bii->b", states).real
        norms = np.where(norms < _DENSITY_FLOOR, np.nan, norms)
        out[sl, 0] = np.einsum("bij,ji->b", states, x_op).real / norms
        out[sl, 1] = np.einsum("bij,ji->b", states, p_op).real / norms
    return out


def conditional_fidelities(
    rho: DensityMatrix,
    W: TwoModeState,
    pts: np.ndarray,
    input_trace_tol: float = DEFAULTS["input_trace_tol"],
) -> np.ndarray:
    """Fidelity of each normalized conditional state with a pure input."""
    vec = rho.as_vector()
    tr = float(np.vdot(vec, vec).real)
    work = _Contractor(rho, W, input_trace_tol)
    pts = np.asarray(pts, dtype=np.float64)
    out = np.empty(pts.shape[0], dtype=np.float64)
    for sl in chunked(pts.shape[0], _CHUNK):
        states, _ = work.corrected(pts[sl])
        norms = np.einsum("bii->b", states).real
        norms = np.where(norms < _DENSITY_FLOOR, np.nan, norms)
        amp = np.einsum("i,bij,j->b", vec.conj(), states, vec).real
        out[sl] = amp / (norms * tr)
    return np.clip(out, 0.0, 1.0)


def average_output(
    rho: DensityMatrix,
    W: TwoModeState,
    cfg: Optional[ChannelConfig] = None,
    grid: Optional[PhaseGrid] = None,
) -> DensityMatrix:
    """Ensemble-averaged teleported state: the quadrature-weighted sum of the
    corrected, unnormalized conditional operators.

    Shares the grid rule (and optionally the grid object) with the channel
    so that the equivalence between the two is compared on identical
    discretizations.  The output trace reports how much outcome density the
    grid captured; a shortfall beyond 1e-2 means the extent is inadequate.
    """
    cfg = cfg or ChannelConfig()
    work = _Contractor(rho, W, cfg.input_trace_tol)
    if grid is None:
        grid = grid_for(cfg, 1.0, rho)
    pts = grid.points()
    weights = grid.weights()
    partials = []
    mass = 0.0
    for sl in chunked(pts.shape[0], _CHUNK):
        states, dens = work.corrected(pts[sl])
        partials.append(np.einsum("b,bij->ij", weights[sl], states))
        mass += float(np.dot(weights[sl], dens))
    expected = rho.trace * W.trace
    if abs(mass - expected) > 1e-2:
        raise ValueError(
            f"outcome density mass {mass:.4f} differs from {expected:.4f}; "
            "grid extent is inadequate for this input"
        )
    out = np.sum(partials, axis=0)
    out = 0.5 * (out + out.conj().T)
    deficit = rho.trace - float(np.trace(out).real)
    return DensityMatrix(out, leakage=max(deficit, 0.0))


def sample_outcomes(
    rho: DensityMatrix,
    W: TwoModeState,
    count: int,
    seed: int,
    cfg: Optional[ChannelConfig] = None,
    with_states: bool = True,
) -> List[ConditionalOutcome]:
    """Monte Carlo draw of measurement outcomes by rejection sampling.

    The envelope is a Gaussian calibrated on the config grid and inflated by
    the configured factor; a density value above the envelope anywhere is a
    hard EnvelopeError.  The seed is required and fully determines the
    output.  ``with_states=False`` skips building the conditional states
    (outcomes carry state=None), which keeps large samples cheap.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if seed is None:
        raise ValueError("an explicit seed is required")
    cfg = cfg or ChannelConfig()
    work = _Contractor(rho, W, cfg.input_trace_tol)
    grid = grid_for(cfg, 1.0, rho)
    env = fit_envelope(grid, work.densities(grid.points()))
    rng = np.random.default_rng(seed)
    pts = rejection_sample(work.densities, env, count, rng)
    outcomes: List[ConditionalOutcome] = []
    if not with_states:
        dens = work.densities(pts)
        return [
            ConditionalOutcome(PhasePoint(*pt), None, float(d))
            for pt, d in zip(pts, dens)
        ]
    for sl in chunked(count, _CHUNK):
        states, dens = work.corrected(pts[sl])
        for pt, raw, d in zip(pts[sl], states, dens):
            if d < _DENSITY_FLOOR:
                outcomes.append(
                    ConditionalOutcome(
                        PhasePoint(*pt),
                        DensityMatrix(np.eye(rho.n_max) / rho.n_max),
                        0.0,
                        degenerate=True,
                    )
                )
                continue
            mat = raw / float(np.trace(raw).real)
            outcomes.append(
                ConditionalOutcome(
                    PhasePoint(*pt),
                    DensityMatrix(0.5 * (mat + mat.conj().T)),
                    float(d),
                )
            )
    return outcomes
