"""Uniform phase-space quadrature grids.

The default grid is square, centered on the origin with an odd number of
points per axis (so the origin is a node), trapezoid weights, and half-width

    L = 5 * sqrt(max(nbar, 1) + mean_photon_input + 1)

where nbar is the Gaussian kernel parameter (or 1 for a generic resource)
and mean_photon_input the mean photon number of the state being pushed
through.  The rule is deliberately fixed so that runs are reproducible;
``refine`` doubles the resolution while keeping the node set nested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np

from .defaults import DEFAULTS

__all__ = ["PhaseGrid", "default_extent", "default_grid", "chunked"]

_UNSET = object()


def default_extent(nbar: float, mean_photon: float = 0.0) -> float:
    """Half-width of the default grid for a kernel nbar and input energy."""
    return 5.0 * math.sqrt(max(nbar, 1.0) + max(mean_photon, 0.0) + 1.0)


@dataclass(frozen=True)
class PhaseGrid:
    """Square grid over [-extent, extent]^2 with trapezoid weights."""

    axis: np.ndarray
    w1d: np.ndarray
    _points: object = field(default=_UNSET, repr=False, compare=False)

    @classmethod
    def centered(cls, extent: float, resolution: int) -> "PhaseGrid":
        resolution = int(resolution)
        if extent <= 0:
            raise ValueError(f"grid extent must be positive, got {extent}")
        if resolution < 41 or resolution % 2 == 0:
            raise ValueError(f"resolution must be odd and >= 41, got {resolution}")
        axis = np.linspace(-extent, extent, resolution)
        h = axis[1] - axis[0]
        w1d = np.full(resolution, h)
        w1d[0] = w1d[-1] = h / 2.0
        axis.flags.writeable = False
        w1d.flags.writeable = False
        return cls(axis=axis, w1d=w1d)

    @property
    def extent(self) -> float:
        return float(self.axis[-1])

    @property
    def resolution(self) -> int:
        return self.axis.size

    @property
    def spacing(self) -> float:
        return float(self.axis[1] - self.axis[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.resolution, self.resolution)

    @property
    def size(self) -> int:
        return self.resolution**2

    def points(self) -> np.ndarray:
        """All (x, p) nodes, shape (resolution^2, 2), x-major order."""
        if self._points is _UNSET:
            xg, pg = np.meshgrid(self.axis, self.axis, indexing="ij")
            pts = np.column_stack([xg.ravel(), pg.ravel()])
            pts.flags.writeable = False
            object.__setattr__(self, "_points", pts)
        return self._points

    def weights(self) -> np.ndarray:
        """Flat quadrature weights matching ``points`` order."""
        return np.outer(self.w1d, self.w1d).ravel()

    def alphas(self) -> np.ndarray:
        pts = self.points()
        return (pts[:, 0] + 1j * pts[:, 1]) / math.sqrt(2.0)

    def refine(self) -> "PhaseGrid":
        """Same extent, doubled density (resolution -> 2R - 1, still odd)."""
        return PhaseGrid.centered(self.extent, 2 * self.resolution - 1)

    def compatible(self, other: "PhaseGrid") -> bool:
        return self.axis.shape == other.axis.shape and np.array_equal(
            self.axis, other.axis
        )


def default_grid(
    nbar: float = 1.0, mean_photon: float = 0.0, resolution: int | None = None
) -> PhaseGrid:
    resolution = DEFAULTS["grid_resolution"] if resolution is None else resolution
    return PhaseGrid.centered(default_extent(nbar, mean_photon), resolution)


def chunked(total: int, size: int) -> Iterator[slice]:
    """Slices covering range(total) in blocks of at most ``size``."""
    for start in range(0, total, size):
        yield slice(start, min(start + size, total))
