"""Truncated Fock-space linear algebra: operators, canonical states, tensor
products, partial traces and state distance measures.

Conventions, fixed once for the whole package:

* hbar = 1 and [x, p] = i, so the vacuum has variance 1/2 per quadrature.
* a = (x + i p) / sqrt(2); a phase-space point (x, p) maps to the complex
  displacement amplitude alpha = (x + i p) / sqrt(2).
* The displacement for an outcome (x, p) is D(x, p) = exp(i(p x_op - x p_op))
  = exp(alpha a^dag - conj(alpha) a).
* Two-mode matrices are flattened with row index a * n_max + b for the basis
  ket |a> (x) |b>.  This convention is load-bearing; see tests.

Displacement matrices are built from the closed-form matrix elements
(associated-Laguerre form) with log-factorial prefactors, never by
exponentiating the truncated generator, which distorts large-amplitude
elements.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.special import eval_genlaguerre, eval_laguerre, factorial, gammaln

from .defaults import DEFAULTS
from .errors import DegenerateInputError, DimensionMismatchError

__all__ = [
    "PhasePoint",
    "DensityMatrix",
    "TwoModeState",
    "annihilation",
    "creation",
    "number_operator",
    "position_operator",
    "momentum_operator",
    "displacement",
    "displacement_batch",
    "displacement_diagonal",
    "vacuum",
    "fock_state",
    "coherent_state",
    "coherent_amplitudes",
    "cat_state",
    "thermal_state",
    "random_density_matrix",
    "tensor",
    "partial_trace",
    "mix_two_mode",
    "two_mode_pure",
    "fidelity",
    "trace_distance",
]

_HERM_TOL = DEFAULTS["hermiticity_tol"]
_LEAK_WARN = DEFAULTS["constructor_leakage_warn"]


class PhasePoint(NamedTuple):
    """A point (x, p) in phase space; also labels a displacement."""

    x: float
    p: float

    @property
    def alpha(self) -> complex:
        return (self.x + 1j * self.p) / math.sqrt(2.0)


def _check_dim(n_max: int) -> int:
    n_max = int(n_max)
    if n_max < 2:
        raise ValueError(f"truncation dimension must be >= 2, got {n_max}")
    return n_max


def _check_hermitian(data: np.ndarray, what: str) -> None:
    defect = np.max(np.abs(data - data.conj().T))
    if defect > _HERM_TOL:
        raise ValueError(f"{what} is not Hermitian (defect {defect:.3e})")


@dataclass(frozen=True)
class DensityMatrix:
    """Single-mode state on the truncated basis |0> .. |n_max-1>.

    ``leakage`` records probability weight lost to the truncation when the
    state was built (it is diagnostic data, not part of the matrix).
    """

    data: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"density matrix must be square, got {data.shape}")
        _check_dim(data.shape[0])
        _check_hermitian(data, "density matrix")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n_max(self) -> int:
        return self.data.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def trace_deficit(self) -> float:
        return 1.0 - self.trace

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.data @ op))

    def mean_photon(self) -> float:
        return float(np.sum(np.arange(self.n_max) * np.diag(self.data).real))

    def purity(self) -> float:
        return float(np.trace(self.data @ self.data).real)

    def is_pure(self, tol: float = 1e-8) -> bool:
        tr = self.trace
        if tr <= 0:
            return False
        return self.purity() / tr**2 >= 1.0 - tol

    def eigen_floor(self) -> float:
        return float(np.linalg.eigvalsh(self.data)[0])

    def as_vector(self, tol: float = 1e-8) -> np.ndarray:
        """Dominant eigenvector; only meaningful for (near-)pure states."""
        if not self.is_pure(tol):
            raise ValueError("state is not pure within tolerance")
        vals, vecs = np.linalg.eigh(self.data)
        return vecs[:, -1] * math.sqrt(max(vals[-1], 0.0))

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise DegenerateInputError("cannot normalize a traceless state")
        return DensityMatrix(self.data / tr, leakage=self.leakage)

    def validate(self, trace_tol: Optional[float] = None) -> None:
        """Full invariant check: positivity floor and optional trace bound."""
        floor = self.eigen_floor()
        if floor < DEFAULTS["positivity_floor"]:
            raise ValueError(f"state has negative eigenvalue {floor:.3e}")
        if trace_tol is not None and abs(self.trace_deficit) > trace_tol:
            raise ValueError(
                f"trace deficit {self.trace_deficit:.3e} exceeds bound {trace_tol:.1e}"
            )


_UNSET = object()


@dataclass(frozen=True)
class TwoModeState:
    """State of two modes with the row convention a * n_max + b for |a,b>.

    At least one representation must be supplied:

    * ``data``      -- dense (n_max^2, n_max^2) matrix;
    * ``schmidt``   -- real coefficients c_n of a pure state sum_n c_n |n,n>;
    * ``pair_corr`` -- matrix C with  W = sum_{m,n} C[m,n] |m,m><n,n|
      (covers every mixture of Schmidt-diagonal pure states).

    Dense data is materialized lazily from the compact forms.
    """

    n_max: int
    data: Optional[np.ndarray] = None
    schmidt: Optional[np.ndarray] = None
    pair_corr: Optional[np.ndarray] = None
    leakage: float = 0.0
    _corr_cache: object = field(default=_UNSET, repr=False, compare=False)

    def __post_init__(self):
        n = _check_dim(self.n_max)
        object.__setattr__(self, "n_max", n)
        if self.data is None and self.schmidt is None and self.pair_corr is None:
            raise ValueError("TwoModeState needs data, schmidt or pair_corr")
        if self.schmidt is not None:
            c = np.asarray(self.schmidt, dtype=np.float64)
            if c.shape != (n,):
                raise ValueError(f"schmidt vector must have shape ({n},)")
            c = c.copy()
            c.flags.writeable = False
            object.__setattr__(self, "schmidt", c)
        if self.pair_corr is not None:
            corr = np.asarray(self.pair_corr, dtype=np.complex128)
            if corr.shape != (n, n):
                raise ValueError(f"pair_corr must have shape ({n}, {n})")
            _check_hermitian(corr, "pair correlation matrix")
            corr = corr.copy()
            corr.flags.writeable = False
            object.__setattr__(self, "pair_corr", corr)
        if self.data is not None:
            data = np.asarray(self.data, dtype=np.complex128)
            if data.shape != (n * n, n * n):
                raise ValueError(f"two-mode matrix must have shape ({n*n}, {n*n})")
            _check_hermitian(data, "two-mode state")
            data = data.copy()
            data.flags.writeable = False
            object.__setattr__(self, "data", data)

    @property
    def trace(self) -> float:
        if self.data is not None:
            return float(np.trace(self.data).real)
        if self.pair_corr is not None:
            return float(np.trace(self.pair_corr).real)
        return float(np.sum(self.schmidt**2))

    @property
    def trace_deficit(self) -> float:
        return 1.0 - self.trace

    def is_pure_schmidt(self) -> bool:
        return self.schmidt is not None

    def dense(self) -> np.ndarray:
        """Dense matrix, built on demand and cached."""
        if self.data is not None:
            return self.data
        n = self.n_max
        corr = self.pair_correlation()
        dense = np.zeros((n * n, n * n), dtype=np.complex128)
        idx = np.arange(n) * (n + 1)  # flat index of |m,m>
        dense[np.ix_(idx, idx)] = corr
        dense.flags.writeable = False
        object.__setattr__(self, "data", dense)
        return dense

    def pair_correlation(self) -> Optional[np.ndarray]:
        """C[m,n] with W = sum C[m,n] |m,m><n,n|, or None if unsupported.

        Detection from dense data compares the total weight against the
        weight on diagonal index pairs; the answer is cached.
        """
        if self.pair_corr is not None:
            return self.pair_corr
        if self.schmidt is not None:
            return np.outer(self.schmidt, self.schmidt).astype(np.complex128)
        if self._corr_cache is not _UNSET:
            return self._corr_cache
        n = self.n_max
        idx = np.arange(n) * (n + 1)
        corr = self.data[np.ix_(idx, idx)]
        on_diag = float(np.sum(np.abs(corr) ** 2))
        total = float(np.sum(np.abs(self.data) ** 2))
        result = corr if total - on_diag <= 1e-24 + 1e-12 * total else None
        object.__setattr__(self, "_corr_cache", result)
        return result

    def vector(self, tol: float = 1e-8) -> np.ndarray:
        """State vector as an (n_max, n_max) amplitude matrix psi[a, b]."""
        n = self.n_max
        if self.schmidt is not None:
            psi = np.zeros((n, n), dtype=np.complex128)
            np.fill_diagonal(psi, self.schmidt)
            return psi
        tr = self.trace
        vals, vecs = np.linalg.eigh(self.dense())
        if tr <= 0 or vals[-1] / tr < 1.0 - tol:
            raise ValueError("two-mode state is not pure within tolerance")
        return (vecs[:, -1] * math.sqrt(max(vals[-1], 0.0))).reshape(n, n)

    def validate(self, trace_tol: Optional[float] = None) -> None:
        floor = float(np.linalg.eigvalsh(self.dense())[0])
        if floor < DEFAULTS["positivity_floor"]:
            raise ValueError(f"state has negative eigenvalue {floor:.3e}")
        if trace_tol is not None and abs(self.trace_deficit) > trace_tol:
            raise ValueError(
                f"trace deficit {self.trace_deficit:.3e} exceeds bound {trace_tol:.1e}"
            )


# ---------------------------------------------------------------------------
# operators


def annihilation(n_max: int) -> np.ndarray:
    """Matrix of a with <n-1| a |n> = sqrt(n)."""
    n = _check_dim(n_max)
    return np.diag(np.sqrt(np.arange(1, n, dtype=np.float64)), k=1).astype(np.complex128)


def creation(n_max: int) -> np.ndarray:
    return annihilation(n_max).conj().T


def number_operator(n_max: int) -> np.ndarray:
    n = _check_dim(n_max)
    return np.diag(np.arange(n, dtype=np.float64)).astype(np.complex128)


def position_operator(n_max: int) -> np.ndarray:
    a = annihilation(n_max)
    return (a + a.conj().T) / math.sqrt(2.0)


def momentum_operator(n_max: int) -> np.ndarray:
    a = annihilation(n_max)
    return (a - a.conj().T) / (1j * math.sqrt(2.0))


def _as_alpha(pt: Union[PhasePoint, Sequence[float], complex]) -> complex:
    if isinstance(pt, PhasePoint):
        return pt.alpha
    if isinstance(pt, complex):
        return pt
    x, p = pt
    return (x + 1j * p) / math.sqrt(2.0)


def displacement_batch(alphas: np.ndarray, n_max: int) -> np.ndarray:
    """Displacement matrices D(alpha) for a batch of amplitudes, shape (B, n, n).

    Element (m, n) for m >= n is
        sqrt(n!/m!) * alpha^(m-n) * exp(-|alpha|^2/2) * L_n^{(m-n)}(|alpha|^2)
    and the m < n block follows from D(alpha)^dag = D(-alpha).  The factorial
    ratio is evaluated through log-gamma to stay finite at any order.
    """
    n = _check_dim(n_max)
    alphas = np.asarray(alphas, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(alphas)):
        raise ValueError("displacement amplitudes must be finite")
    y = np.abs(alphas) ** 2
    rows, cols = np.indices((n, n))
    lo = np.minimum(rows, cols)
    k = np.abs(rows - cols)
    logpref = 0.5 * (gammaln(lo + 1.0) - gammaln(np.maximum(rows, cols) + 1.0))

    y_b = y[:, None, None]
    base = np.where(rows >= cols, alphas[:, None, None], -np.conj(alphas)[:, None, None])
    lag = eval_genlaguerre(lo[None, :, :], k[None, :, :], y_b)
    return np.exp(logpref[None, :, :] - 0.5 * y_b) * base ** k[None, :, :] * lag


def displacement(pt, n_max: int) -> np.ndarray:
    """Single displacement matrix for a PhasePoint, (x, p) pair or alpha."""
    alpha = _as_alpha(pt)
    return displacement_batch(np.array([alpha]), n_max)[0]


def displacement_diagonal(alphas: np.ndarray, n_max: int) -> np.ndarray:
    """Diagonal elements <n|D(alpha)|n> = exp(-|alpha|^2/2) L_n(|alpha|^2).

    They are real and depend on alpha only through |alpha|^2; shape (B, n).
    """
    n = _check_dim(n_max)
    y = np.abs(np.asarray(alphas, dtype=np.complex128).ravel()) ** 2
    orders = np.arange(n)
    return np.exp(-0.5 * y)[:, None] * eval_laguerre(orders[None, :], y[:, None])


# ---------------------------------------------------------------------------
# states


def vacuum(n_max: int) -> DensityMatrix:
    return fock_state(0, n_max)


def fock_state(n: int, n_max: int) -> DensityMatrix:
    dim = _check_dim(n_max)
    if not 0 <= n < dim:
        raise ValueError(f"photon number {n} outside basis 0..{dim - 1}")
    data = np.zeros((dim, dim), dtype=np.complex128)
    data[n, n] = 1.0
    return DensityMatrix(data)


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Truncated coherent amplitudes exp(-|a|^2/2) a^n / sqrt(n!)."""
    dim = _check_dim(n_max)
    ns = np.arange(dim)
    return np.exp(-0.5 * abs(alpha) ** 2) * alpha**ns / np.sqrt(factorial(ns))


def coherent_state(alpha: complex, n_max: int) -> DensityMatrix:
    """Coherent state as a pure density matrix; not renormalized.

    The truncation deficit 1 - ||psi||^2 is reported through ``leakage``
    and a warning fires when it exceeds the configured threshold.
    """
    alpha = complex(alpha)
    dim = _check_dim(n_max)
    if abs(alpha) ** 2 > dim / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha)**2:.2f} exceeds n_max/4 = {dim / 4:.1f}; "
            "truncation may be severe",
            RuntimeWarning,
            stacklevel=2,
        )
    amps = coherent_amplitudes(alpha, dim)
    leak = 1.0 - float(np.vdot(amps, amps).real)
    if leak > _LEAK_WARN:
        warnings.warn(
            f"coherent state truncation leakage {leak:.3e}", RuntimeWarning, stacklevel=2
        )
    return DensityMatrix(np.outer(amps, amps.conj()), leakage=max(leak, 0.0))


def cat_state(alpha: complex, phase: float, n_max: int) -> DensityMatrix:
    """Normalized superposition of |alpha> and e^{i phase} |-alpha>.

    phase = 0 is the even cat, phase = pi the odd cat.  A vanishing analytic
    norm (e.g. alpha = 0 with phase = pi) is a hard error.
    """
    alpha = complex(alpha)
    dim = _check_dim(n_max)
    norm_sq = 2.0 * (1.0 + math.cos(phase) * math.exp(-2.0 * abs(alpha) ** 2))
    if norm_sq < 1e-12:
        raise DegenerateInputError(
            f"cat state with alpha={alpha}, phase={phase} has vanishing norm"
        )
    vec = coherent_amplitudes(alpha, dim) + np.exp(1j * phase) * coherent_amplitudes(
        -alpha, dim
    )
    leak = 1.0 - float(np.vdot(vec, vec).real) / norm_sq
    vec = vec / np.linalg.norm(vec)
    return DensityMatrix(np.outer(vec, vec.conj()), leakage=max(leak, 0.0))


def thermal_state(nbar: float, n_max: int) -> DensityMatrix:
    """Thermal state with geometric weights nbar^n / (1+nbar)^(n+1).

    Renormalized over the truncated basis; the pre-normalization tail weight
    is reported as ``leakage``.
    """
    if nbar < 0:
        raise DegenerateInputError(f"thermal photon number must be >= 0, got {nbar}")
    dim = _check_dim(n_max)
    if nbar == 0:
        return vacuum(dim)
    ratio = nbar / (1.0 + nbar)
    weights = ratio ** np.arange(dim) / (1.0 + nbar)
    tail = ratio**dim
    return DensityMatrix(np.diag(weights / weights.sum()), leakage=tail)


def random_density_matrix(
    n_max: int, rng: np.random.Generator, rank: Optional[int] = None
) -> DensityMatrix:
    """Ginibre-ensemble random mixed state (full rank unless ``rank`` given)."""
    dim = _check_dim(n_max)
    rank = dim if rank is None else int(rank)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(0.5 * (rho + rho.conj().T))


# ---------------------------------------------------------------------------
# two-mode structure


def tensor(a: DensityMatrix, b: DensityMatrix) -> TwoModeState:
    """Product state a (x) b under the row convention a * n_max + b."""
    if a.n_max != b.n_max:
        raise DimensionMismatchError(f"dims differ: {a.n_max} vs {b.n_max}")
    leak = 1.0 - (1.0 - a.leakage) * (1.0 - b.leakage)
    return TwoModeState(a.n_max, data=np.kron(a.data, b.data), leakage=leak)


def two_mode_pure(psi: np.ndarray, leakage: float = 0.0) -> TwoModeState:
    """Pure two-mode state from an (n_max, n_max) amplitude matrix psi[a, b]."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
        raise ValueError("amplitude matrix must be square")
    vec = psi.reshape(-1)
    return TwoModeState(psi.shape[0], data=np.outer(vec, vec.conj()), leakage=leakage)


def mix_two_mode(states: Iterable[TwoModeState], weights: Sequence[float]) -> TwoModeState:
    """Convex mixture of two-mode states, kept compact when possible."""
    states = list(states)
    weights = np.asarray(weights, dtype=np.float64)
    if len(states) == 0 or len(states) != len(weights):
        raise ValueError("need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    n = states[0].n_max
    if any(s.n_max != n for s in states):
        raise DimensionMismatchError("mixture components have different dims")
    leak = float(np.dot(weights, [s.leakage for s in states]))
    corrs = [s.pair_correlation() for s in states]
    if all(c is not None for c in corrs):
        corr = sum(w * c for w, c in zip(weights, corrs))
        return TwoModeState(n, pair_corr=corr, leakage=leak)
    dense = sum(w * s.dense() for w, s in zip(weights, states))
    return TwoModeState(n, data=dense, leakage=leak)


def partial_trace(state: TwoModeState, keep: str) -> DensityMatrix:
    """Trace out one mode; ``keep`` is "A" (first) or "B" (second)."""
    keep = str(keep).upper()
    if keep not in ("A", "B"):
        raise ValueError("keep must be 'A' or 'B'")
    n = state.n_max
    corr = state.pair_correlation()
    if corr is not None:
        # sum_{m,n} C[m,n] |m,m><n,n| traces to diag(C) on either mode
        reduced = np.diag(np.diag(corr))
    else:
        w4 = state.data.reshape(n, n, n, n)  # [a, b, c, d] = <a,b|W|c,d>
        reduced = np.einsum("abad->bd", w4) if keep == "B" else np.einsum("abcb->ac", w4)
    return DensityMatrix(0.5 * (reduced + reduced.conj().T), leakage=state.leakage)


# ---------------------------------------------------------------------------
# distances


def _check_same_dim(a: DensityMatrix, b: DensityMatrix) -> None:
    if a.n_max != b.n_max:
        raise DimensionMismatchError(f"dims differ: {a.n_max} vs {b.n_max}")


def fidelity(a: DensityMatrix, b: DensityMatrix, trace_tol: float = 1e-2) -> float:
    """Uhlmann fidelity F(a, b) = (Tr sqrt(sqrt(a) b sqrt(a)))^2.

    Uses the pure-state shortcut <psi| b |psi> when one argument is pure;
    both paths agree to 1e-10 (tested).
    """
    _check_same_dim(a, b)
    for s in (a, b):
        if abs(s.trace_deficit) > trace_tol:
            raise ValueError(
                f"state trace deficit {s.trace_deficit:.3e} exceeds {trace_tol:.1e}"
            )
    if a.is_pure():
        psi = a.as_vector()
        return float(np.clip(np.real(psi.conj() @ b.data @ psi), 0.0, 1.0))
    if b.is_pure():
        return fidelity(b, a, trace_tol)
    vals, vecs = np.linalg.eigh(a.data)
    vals = np.clip(vals, 0.0, None)
    sqrt_a = (vecs * np.sqrt(vals)) @ vecs.conj().T
    inner = sqrt_a @ b.data @ sqrt_a
    ev = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.clip(np.sum(np.sqrt(ev)) ** 2, 0.0, 1.0))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """T(a, b) = (1/2) * sum |eig(a - b)|."""
    _check_same_dim(a, b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.data - b.data))))
