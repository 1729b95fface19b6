"""Spatial torus grid, real and Hardy-space fields, and Fourier multipliers.

Conventions
-----------
The real line is replaced by the torus ``[-L, L)`` sampled at ``M`` points
``x_k = -L + k h`` with ``h = 2L/M``.  The forward transform is the
trapezoidal approximation of ``f_hat(xi) = int f(x) exp(-i xi x) dx`` and the
inverse carries the factor ``1/(2 pi)``, so that on the discrete frequencies
``xi_n = n pi / L``

    f_hat_n = h * sum_k f_k exp(-i xi_n x_k),
    f_k     = (1 / 2L) * sum_n f_hat_n exp(i xi_n x_k).

A :class:`HardyField` stores ``f_hat`` at the nonnegative frequencies
``xi_0 = 0, ..., xi_{M/2-1}``.  The coefficient at ``xi_0`` is the genuine
boundary value ``f_hat(0+)``.  Integrals over the half line use the
trapezoidal rule, i.e. the zero mode carries weight one half, both in the
inner product and when the field is synthesized in physical space.  With this
choice ``Pi f + conj(Pi f) = f`` holds exactly for real ``f`` (up to the
Nyquist mode, which belongs to neither half).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, InvalidParameterError

__all__ = [
    "SpatialGrid",
    "RealField",
    "HardyField",
    "make_grid",
    "szego_project",
    "hilbert_transform",
    "abs_derivative",
    "derivative",
    "free_evolve",
    "field_to_text",
    "field_from_text",
    "field_to_json",
    "field_from_json",
]


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic grid of ``point_count`` samples on ``[-half_width, half_width)``."""

    half_width: float
    point_count: int

    def __post_init__(self):
        L, M = self.half_width, self.point_count
        if not np.isfinite(L) or L <= 0:
            raise InvalidParameterError(f"half width must be positive, got {L!r}")
        if int(M) != M or M < 8 or M % 2:
            raise InvalidParameterError(f"point count must be an even integer >= 8, got {M!r}")
        object.__setattr__(self, "half_width", float(L))
        object.__setattr__(self, "point_count", int(M))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.point_count

    @property
    def freq_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def hardy_size(self) -> int:
        return self.point_count // 2

    @cached_property
    def x(self) -> np.ndarray:
        pts = -self.half_width + self.spacing * np.arange(self.point_count)
        pts.flags.writeable = False
        return pts

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers in FFT order, from ``-M/2`` to ``M/2-1``."""
        n = np.fft.fftfreq(self.point_count, 1.0 / self.point_count).round().astype(int)
        n.flags.writeable = False
        return n

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequencies ``xi_n`` in FFT order."""
        f = self.mode_index * self.freq_spacing
        f.flags.writeable = False
        return f

    @cached_property
    def hardy_xi(self) -> np.ndarray:
        f = self.freq_spacing * np.arange(self.hardy_size)
        f.flags.writeable = False
        return f

    @cached_property
    def hardy_weights(self) -> np.ndarray:
        """Trapezoidal weights of the half-line frequency quadrature."""
        w = np.ones(self.hardy_size)
        w[0] = 0.5
        w.flags.writeable = False
        return w

    @cached_property
    def _sign(self) -> np.ndarray:
        # exp(-i xi_n x_0) = exp(i n pi) = (-1)^n, the shift from FFT to grid origin
        s = 1.0 - 2.0 * (np.arange(self.point_count) % 2)
        s.flags.writeable = False
        return s

    @property
    def nyquist_index(self) -> int:
        return self.point_count // 2

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Discrete approximation of the continuous transform, FFT order."""
        return self.spacing * self._sign * np.fft.fft(values)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward` (complex output)."""
        return np.fft.ifft(self._sign * spectrum) / self.spacing


def make_grid(L: float, M: int) -> SpatialGrid:
    """Build a :class:`SpatialGrid` with half width ``L`` and ``M`` points."""
    return SpatialGrid(L, M)


def _check_same_grid(a: SpatialGrid, b: SpatialGrid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples of a function on a :class:`SpatialGrid`."""

    grid: SpatialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.point_count,):
            raise InvalidParameterError(
                f"expected {self.grid.point_count} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: SpatialGrid, func) -> "RealField":
        return cls(grid, func(np.asarray(grid.x)))

    def spectrum(self) -> np.ndarray:
        return self.grid.forward(self.values)

    def mass(self) -> float:
        return float(self.grid.spacing * np.sum(self.values))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.spacing * np.sum(self.values ** 2)))

    def h1_norm(self) -> float:
        dv = derivative(self).values
        return float(np.sqrt(self.grid.spacing * np.sum(self.values ** 2 + dv ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def reflected(self) -> "RealField":
        """Samples of ``x -> f(-x)`` using the torus identification ``-L = L``."""
        return RealField(self.grid, np.roll(self.values[::-1], 1))

    def _binary(self, other, op):
        if isinstance(other, RealField):
            _check_same_grid(self.grid, other.grid)
            return RealField(self.grid, op(self.values, other.values))
        return RealField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return RealField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class HardyField:
    """Element of the discrete Hardy space, stored as ``f_hat(xi_n)``, ``n >= 0``."""

    grid: SpatialGrid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex, copy=True)
        if c.shape != (self.grid.hardy_size,):
            raise InvalidParameterError(
                f"expected {self.grid.hardy_size} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "HardyField":
        return cls(grid, np.zeros(grid.hardy_size, complex))

    def torus_spectrum(self) -> np.ndarray:
        """Full FFT-ordered coefficient array used for synthesis."""
        F = np.zeros(self.grid.point_count, complex)
        F[: self.grid.hardy_size] = self.grid.hardy_weights * self.coefficients
        return F

    def values(self) -> np.ndarray:
        """Complex samples of the field on the spatial grid."""
        return self.grid.inverse(self.torus_spectrum())

    def evaluate(self, z) -> np.ndarray:
        """Holomorphic extension ``f(z) = (1/2pi) int_0^inf exp(i z xi) f_hat dxi``."""
        z = np.asarray(z, dtype=complex)
        if np.any(z.imag < 0):
            raise InvalidParameterError("evaluation points must lie in the closed upper half plane")
        g = self.grid
        kernel = np.exp(1j * np.multiply.outer(z, g.hardy_xi))
        return kernel @ (g.hardy_weights * self.coefficients) / (2 * g.half_width)

    def inner(self, other: "HardyField") -> complex:
        """L2 inner product, linear in the first argument."""
        _check_same_grid(self.grid, other.grid)
        g = self.grid
        return complex(np.sum(g.hardy_weights * self.coefficients * np.conj(other.coefficients))
                       / (2 * g.half_width))

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def i_plus(self) -> complex:
        return complex(self.coefficients[0])

    def __add__(self, other: "HardyField") -> "HardyField":
        _check_same_grid(self.grid, other.grid)
        return HardyField(self.grid, self.coefficients + other.coefficients)

    def __sub__(self, other: "HardyField") -> "HardyField":
        _check_same_grid(self.grid, other.grid)
        return HardyField(self.grid, self.coefficients - other.coefficients)

    def __mul__(self, scalar) -> "HardyField":
        return HardyField(self.grid, self.coefficients * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return HardyField(self.grid, -self.coefficients)


def szego_project(f, grid: SpatialGrid | None = None) -> HardyField:
    """Orthogonal projection onto nonnegative frequencies.

    ``f`` may be a :class:`RealField`, a :class:`HardyField` (returned
    unchanged, which is how idempotence is realized), or a complex sample
    array together with ``grid``.
    """
    if isinstance(f, HardyField):
        return f
    if isinstance(f, RealField):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise InvalidParameterError("a grid is required for raw sample arrays")
        values = np.asarray(f)
        if values.shape != (grid.point_count,):
            raise GridMismatchError(f"sample array of shape {values.shape} does not fit {grid}")
    spec = grid.forward(values)
    return HardyField(grid, spec[: grid.hardy_size])


def _multiplier(f: RealField, mult: np.ndarray) -> RealField:
    out = f.grid.inverse(f.spectrum() * mult)
    return RealField(f.grid, out.real)


def hilbert_transform(f: RealField) -> RealField:
    """Fourier multiplier ``-i sgn(xi)``; the zero and Nyquist modes are removed."""
    g = f.grid
    mult = -1j * np.sign(g.xi)
    mult[g.nyquist_index] = 0.0
    return _multiplier(f, mult)


def abs_derivative(f: RealField) -> RealField:
    """Fourier multiplier ``|xi|``; the Nyquist mode is removed, as for ``H d/dx``."""
    mult = np.abs(f.grid.xi)
    mult[f.grid.nyquist_index] = 0.0
    return _multiplier(f, mult)


def derivative(f: RealField) -> RealField:
    """Spectral derivative; the Nyquist mode is removed to keep the output real."""
    g = f.grid
    mult = 1j * g.xi
    mult[g.nyquist_index] = 0.0
    return _multiplier(f, mult)


def free_evolve(w0: RealField, t: float) -> RealField:
    """Linear flow ``w_t = d_x |D| w``, i.e. the multiplier ``exp(i t xi |xi|)``.

    The Nyquist mode is left untouched so that the map stays real, unitary and
    a one-parameter group on the grid.
    """
    g = w0.grid
    mult = np.exp(1j * t * g.xi * np.abs(g.xi))
    mult[g.nyquist_index] = 1.0
    return _multiplier(w0, mult)


# ---------------------------------------------------------------- serialization

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def field_to_text(f) -> str:
    """Columnar text: a header line, then ``x value`` (or ``x re im``) rows.

    Hardy fields are written in physical space as complex samples.
    """
    g = f.grid
    if isinstance(f, RealField):
        cols = [f.values]
    else:
        vals = f.values()
        cols = [vals.real, vals.imag]
    lines = [f"# L={_fmt(g.half_width)} M={g.point_count}"]
    for k in range(g.point_count):
        lines.append(" ".join([_fmt(g.x[k])] + [_fmt(c[k]) for c in cols]))
    return "\n".join(lines) + "\n"


def field_from_text(text: str) -> RealField:
    """Parse the output of :func:`field_to_text` for a real field."""
    rows, L = [], None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("L="):
                    L = float(tok[2:])
            continue
        rows.append([float(tok) for tok in line.split()])
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidParameterError("expected two columns (x, value)")
    if L is None:
        L = -data[0, 0]
    return RealField(make_grid(L, data.shape[0]), data[:, 1])


def field_to_json(f) -> str:
    g = f.grid
    env = {"grid": {"L": float(g.half_width), "M": g.point_count}}
    if isinstance(f, RealField):
        env["values"] = [float(v) for v in f.values]
    else:
        env["kind"] = "hardy"
        env["coefficients"] = [[float(c.real), float(c.imag)] for c in f.coefficients]
    return json.dumps(env)


def field_from_json(text: str):
    env = json.loads(text)
    grid = make_grid(env["grid"]["L"], env["grid"]["M"])
    if env.get("kind") == "hardy":
        c = np.array(env["coefficients"], dtype=float)
        return HardyField(grid, c[:, 0] + 1j * c[:, 1])
    return RealField(grid, env["values"])
