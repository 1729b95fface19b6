"""Initial data used throughout the experiments."""

from __future__ import annotations

import numpy as np

from .field_grid import RealField, SpatialGrid
from .errors import InvalidParameterError


def soliton_profile(x, p: complex) -> np.ndarray:
    """Traveling-wave profile ``R_p(y) = 2 Im p / |y + p|^2``."""
    p = complex(p)
    if p.imag <= 0:
        raise InvalidParameterError("soliton parameter must satisfy Im p > 0")
    x = np.asarray(x, dtype=float)
    return 2.0 * p.imag / ((x + p.real) ** 2 + p.imag ** 2)


def soliton(grid: SpatialGrid, p: complex = 1j, shift: float = 0.0, sign: float = 1.0) -> RealField:
    """``sign * R_p(x - shift)`` sampled on ``grid``."""
    return RealField(grid, sign * soliton_profile(grid.x - shift, p))


def multi_soliton(grid: SpatialGrid, params, shifts=None) -> RealField:
    """Superposition of profiles, e.g. ``params=[1j, 2j], shifts=[0, 8]``."""
    shifts = [0.0] * len(params) if shifts is None else shifts
    vals = sum(soliton_profile(grid.x - s, p) for p, s in zip(params, shifts))
    return RealField(grid, np.asarray(vals, dtype=float) + np.zeros(grid.point_count))


def gaussian(grid: SpatialGrid, amplitude: float = 0.3, width: float = 2.0, center: float = 0.0) -> RealField:
    """``amplitude * exp(-((x - center)/width)^2)``."""
    if width <= 0:
        raise InvalidParameterError("width must be positive")
    return RealField(grid, amplitude * np.exp(-((grid.x - center) / width) ** 2))


def box(grid: SpatialGrid, amplitude: float = 1.0, half_length: float = 1.0) -> RealField:
    """Indicator ``amplitude * 1_(-half_length, half_length)``; discontinuous, experimental."""
    x = grid.x
    vals = np.where(np.abs(x) < half_length, amplitude, 0.0)
    vals[np.isclose(np.abs(x), half_length)] = 0.5 * amplitude
    return RealField(grid, vals)
