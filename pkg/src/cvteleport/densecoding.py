"""Continuous-variable dense coding with the standard protocol.

Alice encodes a classical point (x, p) as a displacement on her half of the
shared resource; Bob's joint measurement returns (x', p') with conditional
density

    P(x', p' | x, p) = kernel(x - x', p' - p)

where ``kernel`` is the same outcome function that characterizes the
teleportation channel.  The asymmetric argument signs are kept exactly as
stated; for even kernels (every TMSV resource) they are unobservable, and a
regression test pins them on a deliberately asymmetric synthetic resource.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .channel import GaussianKernel, SampledKernel, noisy_nbar
from .epr import kernel_value, kernel_values
from .errors import DimensionMismatchError
from .fock import PhasePoint, TwoModeState
from .grids import PhaseGrid, default_extent
from .defaults import DEFAULTS
from .sampling import fit_envelope, rejection_sample

__all__ = [
    "DenseCodingChannel",
    "dense_coding_channel",
    "noisy_dense_coding",
    "channel_matrix",
    "simulate_transmission",
    "mutual_information_gaussian",
    "histogram_mi_bits",
    "empirical_mutual_information",
]

Source = Union[TwoModeState, "DenseCodingChannel"]


@dataclass(frozen=True)
class DenseCodingChannel:
    """Dense-coding channel backed by a kernel or directly by a resource state."""

    kernel: Optional[Union[GaussianKernel, SampledKernel]] = None
    source: Optional[TwoModeState] = None

    def __post_init__(self):
        if (self.kernel is None) == (self.source is None):
            raise ValueError("provide exactly one of kernel or source state")

    def error_density(self, pts: np.ndarray) -> np.ndarray:
        """Kernel density of the displacement error (u, v) = (x-x', p'-p)."""
        pts = np.asarray(pts, dtype=np.float64)
        if self.source is not None:
            return kernel_values(self.source, pts)
        if self.kernel.is_identity:
            raise ValueError("identity channel has a delta error density")
        return self.kernel.value(pts[:, 0], pts[:, 1])

    def probability(self, encoded: PhasePoint, measured: PhasePoint) -> float:
        """Channel matrix entry P(measured | encoded)."""
        encoded = PhasePoint(*encoded)
        measured = PhasePoint(*measured)
        err = np.array([[encoded.x - measured.x, measured.p - encoded.p]])
        return float(self.error_density(err)[0])


def dense_coding_channel(W: TwoModeState) -> DenseCodingChannel:
    return DenseCodingChannel(source=W)


def noisy_dense_coding(r: float, transmission: float) -> DenseCodingChannel:
    """Gaussian dense-coding channel of a squeezed resource after loss."""
    return DenseCodingChannel(kernel=GaussianKernel(noisy_nbar(r, transmission)))


def channel_matrix(W: TwoModeState, encoded: PhasePoint, measured: PhasePoint) -> float:
    """P(x', p' | x, p) for resource W, evaluated as kernel(x-x', p'-p).

    Deliberately the same code path as the teleportation kernel: dense
    coding and teleportation are characterized by the same function.
    """
    encoded = PhasePoint(*encoded)
    measured = PhasePoint(*measured)
    return kernel_value(W, PhasePoint(encoded.x - measured.x, measured.p - encoded.p))


def _as_points(messages: Sequence) -> np.ndarray:
    pts = np.asarray([(m[0], m[1]) for m in messages], dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("messages must be a sequence of (x, p) pairs")
    return pts


def _draw_errors(source: Source, count: int, rng: np.random.Generator) -> np.ndarray:
    """Displacement errors (u, v) ~ kernel, iid across messages."""
    channel = source if isinstance(source, DenseCodingChannel) else None
    if channel is not None and isinstance(channel.kernel, GaussianKernel):
        if channel.kernel.is_identity:
            return np.zeros((count, 2))
        scale = math.sqrt(channel.kernel.nbar)
        return scale * rng.standard_normal((count, 2))
    # state-backed (or tabulated) kernel: rejection sampling against the
    # pointwise density, calibrated on the default grid
    if channel is not None and isinstance(channel.kernel, SampledKernel):
        grid = channel.kernel.grid
        density_fn = channel.error_density
    else:
        W = source if isinstance(source, TwoModeState) else channel.source
        grid = PhaseGrid.centered(default_extent(1.0), DEFAULTS["grid_resolution"])
        density_fn = lambda pts: kernel_values(W, pts)
    env = fit_envelope(grid, density_fn(grid.points()))
    return rejection_sample(density_fn, env, count, rng)


def simulate_transmission(
    source: Source, messages: Sequence, seed: int
) -> List[PhasePoint]:
    """Measured points for each encoded message, reproducible under seed.

    The error distribution does not depend on the encoded point, so one
    batch of kernel draws serves all messages; the signs follow the channel
    matrix convention x' = x - u, p' = p + v.
    """
    if seed is None:
        raise ValueError("an explicit seed is required")
    pts = _as_points(messages)
    rng = np.random.default_rng(seed)
    errs = _draw_errors(source, pts.shape[0], rng)
    measured_x = pts[:, 0] - errs[:, 0]
    measured_p = pts[:, 1] + errs[:, 1]
    return [PhasePoint(float(x), float(p)) for x, p in zip(measured_x, measured_p)]


def mutual_information_gaussian(signal_var: float, nbar: float) -> float:
    """Bits per channel use for Gaussian signalling over the Gaussian kernel:
    one (1/2) log2(1 + S/N) per quadrature, two quadratures."""
    if signal_var <= 0 or nbar <= 0:
        raise ValueError("signal_var and nbar must be positive")
    return math.log2(1.0 + signal_var / nbar)


def histogram_mi_bits(a: np.ndarray, b: np.ndarray) -> float:
    """Plug-in mutual information (bits) from a 2-d histogram with
    Freedman-Diaconis binning on each marginal."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    edges_a = np.histogram_bin_edges(a, bins="fd")
    edges_b = np.histogram_bin_edges(b, bins="fd")
    counts, _, _ = np.histogram2d(a, b, bins=(edges_a, edges_b))
    joint = counts / counts.sum()
    pa = joint.sum(axis=1, keepdims=True)
    pb = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    ratio = joint[mask] / (pa @ pb)[mask]
    return float(np.sum(joint[mask] * np.log2(ratio)))


def empirical_mutual_information(
    source: Source, signal_var: float, samples: int, seed: int
) -> float:
    """Estimate the per-use mutual information by transmitting Gaussian
    messages and summing the per-quadrature histogram estimates."""
    rng = np.random.default_rng(seed)
    messages = math.sqrt(signal_var) * rng.standard_normal((samples, 2))
    received = simulate_transmission(source, messages, seed=seed + 1)
    received = np.asarray(received, dtype=np.float64)
    return histogram_mi_bits(messages[:, 0], received[:, 0]) + histogram_mi_bits(
        messages[:, 1], received[:, 1]
    )
