"""Operators on the discrete Hardy space: Toeplitz, Lax, X* and I+.

All operators act on the coefficient vectors of :class:`HardyField`.  The
inner product carries the trapezoidal weights ``w = (1/2, 1, 1, ...)``, so the
natural matrices are self-adjoint with respect to ``diag(w)`` rather than the
Euclidean product.  :class:`LaxMatrix` therefore keeps both the action matrix
and its Hermitian similarity transform ``W^(1/2) A W^(-1/2)``, which is what
the eigensolver consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field_grid import HardyField, RealField, SpatialGrid, szego_project
from .errors import GridMismatchError, InvalidParameterError

__all__ = [
    "ToeplitzMatrix",
    "LaxMatrix",
    "assemble_toeplitz",
    "toeplitz_apply",
    "assemble_lax",
    "lax_apply",
    "xstar_apply",
    "i_plus",
]


def _convolution_block(b: RealField) -> np.ndarray:
    """``B[n, m] = b_hat(xi_n - xi_m) / 2L`` for ``0 <= n, m < M/2``."""
    g = b.grid
    spec = b.spectrum()
    n = np.arange(g.hardy_size)
    return spec[(n[:, None] - n[None, :]) % g.point_count] / (2 * g.half_width)


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """Dense Toeplitz operator ``T_b f = Pi(b f)``.

    ``matrix`` holds the Hermitian kernel ``b_hat(xi_n - xi_m)/2L``; the action
    on coefficients is ``matrix @ (w * c)``.
    """

    symbol: RealField
    matrix: np.ndarray = field(repr=False)

    def apply(self, f: HardyField) -> HardyField:
        if f.grid != self.symbol.grid:
            raise GridMismatchError("Toeplitz symbol and argument live on different grids")
        return HardyField(f.grid, self.matrix @ (f.grid.hardy_weights * f.coefficients))


def assemble_toeplitz(b: RealField) -> ToeplitzMatrix:
    return ToeplitzMatrix(b, _convolution_block(b))


def toeplitz_apply(b: RealField, f: HardyField) -> HardyField:
    """Matrix-free ``Pi(b f)`` through physical-space multiplication."""
    if b.grid != f.grid:
        raise GridMismatchError("symbol and argument live on different grids")
    return szego_project(b.values * f.values(), f.grid)


@dataclass(frozen=True, eq=False)
class LaxMatrix:
    """Dense representation of ``L = D - T_u`` on the Hardy grid.

    Attributes
    ----------
    grid : SpatialGrid
    hermitian : ndarray
        ``diag(xi) - W^(1/2) B W^(1/2)``, Hermitian for real ``u``.
    kernel : ndarray
        The Toeplitz kernel ``B``.
    """

    grid: SpatialGrid
    hermitian: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.hermitian

    def apply(self, f: HardyField) -> HardyField:
        g = self.grid
        c = f.coefficients
        return HardyField(g, g.hardy_xi * c - self.kernel @ (g.hardy_weights * c))

    def to_coefficients(self, vectors: np.ndarray) -> np.ndarray:
        """Map eigenvectors of ``hermitian`` back to Hardy coefficients."""
        return vectors / np.sqrt(self.grid.hardy_weights)[:, None]


def assemble_lax(u0: RealField) -> LaxMatrix:
    g = u0.grid
    B = _convolution_block(u0)
    s = np.sqrt(g.hardy_weights)
    H = -(s[:, None] * B * s[None, :])
    H[np.diag_indices_from(H)] += g.hardy_xi
    return LaxMatrix(g, H, B)


def lax_apply(u0: RealField, f: HardyField) -> HardyField:
    """Matrix-free ``D f - T_u f``."""
    t = toeplitz_apply(u0, f)
    return HardyField(f.grid, f.grid.hardy_xi * f.coefficients - t.coefficients)


def xstar_apply(f: HardyField) -> HardyField:
    """``X* f``, realized on the frequency side as ``i d/dxi``.

    The derivative is the second-order summation-by-parts difference: a
    one-sided stencil at ``xi = 0``, central differences inside, and a zero
    value beyond the top of the grid.  With the trapezoidal weights this gives
    ``Im <X* f, f> = -|I+(f)|^2 / 4 pi`` exactly, the discrete counterpart of
    the continuum identity.
    """
    c = f.coefficients
    d = f.grid.freq_spacing
    out = np.empty_like(c)
    out[0] = (c[1] - c[0]) / d
    out[1:-1] = (c[2:] - c[:-2]) / (2 * d)
    out[-1] = -c[-2] / (2 * d)
    return HardyField(f.grid, 1j * out)


def i_plus(f: HardyField, method: str = "boundary") -> complex:
    """Boundary value ``f_hat(0+)``.

    ``method="boundary"`` returns the stored zero-frequency coefficient, which
    under the trapezoidal convention is the boundary value itself.
    ``method="richardson"`` extrapolates quadratically from modes 1, 2, 3 and
    is kept as a diagnostic.
    """
    c = f.coefficients
    if method == "boundary":
        return complex(c[0])
    if method == "richardson":
        return complex(3 * c[1] - 3 * c[2] + c[3])
    raise InvalidParameterError(f"unknown method {method!r}")
