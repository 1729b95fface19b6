"""Generalized eigenfunctions, distorted Fourier transform and radiation profiles.

For ``lambda > 0`` the bounded solutions of ``(L_u - lambda) m = 0`` are
normalized by ``m_-(x) ~ exp(i lambda x)`` as ``x -> -inf`` and
``m_+(x) ~ exp(i lambda x)`` as ``x -> +inf``.  Writing ``g = u m`` they solve

    m_-(x) = e^{i lam x} + i e^{i lam x} int_{-inf}^x e^{-i lam y} Pi(g)(y) dy,
    m_+(x) = e^{i lam x} - i e^{i lam x} int_x^{+inf} e^{-i lam y} Pi(g)(y) dy.

Numerically
-----------
* The datum is placed in a zero-padded box twice as wide as the grid, with
  the sample at ``x = -L`` split evenly between ``-L`` and ``+L`` so that the
  support is symmetric under ``x -> -x``.
* ``Pi`` is the Szego projector on the line, ``(g + i H g)/2``, with ``H`` the
  exact Hilbert transform of the band-limited (sinc) interpolant of the
  samples.  No periodization enters.
* The indefinite integral uses the trapezoid rule with the Euler-Maclaurin
  end correction.  The part outside the box is done in closed form: there
  ``Pi(g)(y) = (i/2pi) int g(s)/(y-s) ds`` and the oscillatory integrals reduce
  to exponential integrals ``E1``.
* The resulting dense-but-structured linear system is solved matrix free by
  GMRES.

Because ``m_pm`` lie in the Hardy class, ``int Pi(u) conj(m) = int u conj(m)``,
which is how the transform of ``Pi u0`` is evaluated without any tail error.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spl
import scipy.special as sps
from scipy.interpolate import CubicSpline

from .errors import GridMismatchError, InvalidParameterError, NonconvergenceError
from .field_grid import HardyField, RealField, SpatialGrid, szego_project
from .spectrum import SpectrumData, half_line_nodes, spectral_support

__all__ = [
    "LambdaGrid",
    "ScatteringData",
    "VolterraSolver",
    "solve_m_minus",
    "solve_m_plus",
    "scattering_data",
    "distorted_transform",
    "radiation_profiles",
    "radiation_field",
    "radiation_mass",
    "PlancherelBudget",
    "plancherel_budget",
    "plancherel_residual",
    "lax_residual",
]


@dataclass(frozen=True, eq=False)
class LambdaGrid:
    """Spectral parameters with quadrature weights for ``int ... d lambda``.

    Use :meth:`uniform` for an equispaced grid on ``[lower, upper]`` (trapezoid
    weights) and :meth:`graded` for Gauss-Legendre panels on ``(0, upper]``
    refined towards zero, which captures the whole continuous spectrum.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "uniform"

    def __post_init__(self):
        n = np.asarray(self.nodes, float)
        if n.ndim != 1 or n.size < 2:
            raise InvalidParameterError("a lambda grid needs at least two points")
        if n[0] <= 0 or np.any(np.diff(n) <= 0):
            raise InvalidParameterError("lambda nodes must be positive and increasing")
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "weights", np.asarray(self.weights, float))

    @classmethod
    def uniform(cls, lower: float = 0.2, upper: float = 4.0, count: int = 64) -> "LambdaGrid":
        if not 0 < lower < upper or count < 2:
            raise InvalidParameterError("need 0 < lower < upper and count >= 2")
        nodes = np.linspace(lower, upper, int(count))
        w = np.full(nodes.size, nodes[1] - nodes[0])
        w[[0, -1]] *= 0.5
        return cls(nodes, w, "uniform")

    @classmethod
    def graded(cls, upper: float, first: float = 1e-6, panel: float = 0.25,
               order: int = 8) -> "LambdaGrid":
        nodes, w = half_line_nodes(upper, first=first, panel=panel, inner_order=order,
                                   outer_order=order)
        return cls(nodes, w, "graded")

    @property
    def lower(self) -> float:
        return float(self.nodes[0])

    @property
    def upper(self) -> float:
        return float(self.nodes[-1])

    @property
    def count(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(self.weights * values)


def _central(F: np.ndarray, h: float, order: int) -> np.ndarray:
    """Sixth-order (first) or fourth-order (third) central derivative.

    The three points at each end fall back to lower order; the functions
    differentiated here are smooth and slowly varying near the box edges.
    """
    if order == 1:
        c = np.array([-1, 9, -45, 0, 45, -9, 1]) / (60 * h)
        low = np.gradient(F, h, edge_order=2)
    else:
        c = np.array([1, -8, 13, 0, -13, 8, -1]) / (8 * h ** 3)
        low = np.gradient(np.gradient(np.gradient(F, h, edge_order=2), h, edge_order=2),
                          h, edge_order=2)
    out = np.convolve(F, c[::-1], mode="same")
    out[:3], out[-3:] = low[:3], low[-3:]
    return out


class VolterraSolver:
    """Reusable solver for ``m_pm(., lambda)`` of one datum.

    Parameters
    ----------
    u0 : RealField
    pad : int
        The computational box is ``pad`` times wider than the grid.
    tol : float
        Relative GMRES tolerance.
    max_restarts : int
        GMRES restart cycles (of 120 iterations) before giving up.
    """

    def __init__(self, u0: RealField, pad: int = 2, tol: float = 1e-12,
                 max_restarts: int = 20):
        if pad < 2 or int(pad) != pad:
            raise InvalidParameterError("pad must be an integer >= 2")
        g = u0.grid
        M, h = g.point_count, g.spacing
        self.grid, self.tol, self.max_restarts = g, tol, max_restarts
        half = pad * M // 2
        # padded points y_k = k h for k = -(half-1) .. half-1: symmetric, odd count
        self.y = h * np.arange(-(half - 1), half)
        n = self.y.size
        self.offset = half - 1 - M // 2  # index of x_0 = -L inside y
        ud = np.zeros(n)
        ud[self.offset: self.offset + M] = u0.values
        ud[self.offset] *= 0.5
        ud[self.offset + M] = 0.5 * u0.values[0]
        self.u = ud
        self.h = h
        self.support = np.nonzero(ud)[0]
        self.edges = (self.y[0], self.y[-1])
        # odd sinc-Hilbert kernel 2/(pi m) on odd offsets
        m = np.arange(-(n - 1), n)
        kern = np.zeros(m.size)
        odd = m % 2 != 0
        kern[odd] = 2.0 / (np.pi * m[odd])
        self._nfft = 1 << int(np.ceil(np.log2(3 * n)))
        col = np.zeros(self._nfft)
        col[:n] = kern[n - 1:]
        col[self._nfft - (n - 1):] = kern[: n - 1]
        self._kern_hat = np.fft.fft(col)

    # -- building blocks ------------------------------------------------------
    def hardy_part(self, g: np.ndarray) -> np.ndarray:
        """Line Szego projection of the sinc interpolant of ``g``."""
        n = self.y.size
        hg = np.fft.ifft(self._kern_hat * np.fft.fft(g, self._nfft))[:n]
        return 0.5 * g + 0.5j * hg

    def _cumulative(self, F: np.ndarray) -> np.ndarray:
        """Trapezoid running integral with two Euler-Maclaurin corrections."""
        h = self.h
        d1 = _central(F, h, 1)
        d3 = _central(F, h, 3)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (F[1:] + F[:-1]))])
        return cum - h ** 2 / 12.0 * (d1 - d1[0]) + h ** 4 / 720.0 * (d3 - d3[0])

    def _tail_weights(self, lam: float):
        """Weights turning ``g`` on the support into the two outer integrals."""
        ys = self.y[self.support]
        a, b = self.edges
        pref = 1j * self.h / (2 * np.pi) * np.exp(-1j * lam * ys)
        return -pref * sps.exp1(-1j * lam * (ys - a)), pref * sps.exp1(1j * lam * (b - ys))

    def operator(self, lam: float, sign: int):
        """The map ``m -> K m`` for the chosen normalization."""
        phase = np.exp(1j * lam * self.y)
        w_left, w_right = self._tail_weights(lam)
        s = self.support

        def apply(m):
            g = self.u * m
            F = np.conj(phase) * self.hardy_part(g)
            cum = self._cumulative(F)
            if sign < 0:
                return 1j * phase * (w_left @ g[s] + cum)
            return -1j * phase * (w_right @ g[s] + cum[-1] - cum)

        return apply, phase

    # -- solve ----------------------------------------------------------------
    def solve(self, lam: float, sign: int = -1):
        """Return ``(m on the padded box, defect norm, iterations)``."""
        if lam <= 0:
            raise InvalidParameterError("lambda must be positive")
        apply, phase = self.operator(lam, sign)
        n = self.y.size
        if not np.any(self.u):
            return phase.copy(), 0.0, 0
        A = spl.LinearOperator((n, n), matvec=lambda v: v - apply(v), dtype=complex)
        count = [0]

        def cb(_):
            count[0] += 1

        m, info = spl.gmres(A, phase, rtol=self.tol, atol=0.0, restart=120,
                            maxiter=self.max_restarts,
                            callback=cb, callback_type="pr_norm")
        defect = float(np.sqrt(self.h) * np.linalg.norm(m - apply(m) - phase))
        limit = 1e-6 * np.sqrt(self.grid.point_count)
        if info != 0 or defect > limit:
            raise NonconvergenceError(
                f"Volterra solve at lambda={lam:g} stalled (defect {defect:.2e})")
        return m, defect, count[0]

    def on_grid(self, m: np.ndarray) -> np.ndarray:
        return m[self.offset: self.offset + self.grid.point_count]

    def transform_of_datum(self, m: np.ndarray) -> complex:
        """``int u conj(m) dx``, equal to the transform of ``Pi u``."""
        return complex(self.h * np.sum(self.u * np.conj(m)))


def solve_m_minus(u0: RealField, lam: float, solver: VolterraSolver | None = None) -> np.ndarray:
    """``m_-(x_k, lam)`` on the grid points."""
    solver = solver or VolterraSolver(u0)
    return solver.on_grid(solver.solve(lam, -1)[0])


def solve_m_plus(u0: RealField, lam: float, solver: VolterraSolver | None = None) -> np.ndarray:
    """``m_+(x_k, lam)`` on the grid points."""
    solver = solver or VolterraSolver(u0)
    return solver.on_grid(solver.solve(lam, +1)[0])


def lax_residual(u0: RealField, m: np.ndarray, lam: float, inner: float = 0.5) -> float:
    """Max of ``|(D - lam) m - Pi(u m)|`` over ``|x| < inner * L``.

    ``m`` is given on the grid points.  It is multiplied by a smooth cutoff
    equal to one on ``|x| < 0.7 L`` and vanishing near ``+-L``, and the
    derivative is then taken spectrally on the torus, so the check is
    independent of the quadrature inside the Volterra solver.
    """
    g = u0.grid
    solver = VolterraSolver(u0)
    full = np.zeros(solver.y.size, complex)
    M = g.point_count
    full[solver.offset: solver.offset + M] = m
    P = solver.on_grid(solver.hardy_part(solver.u * full))
    L = g.half_width
    ramp = (np.abs(g.x) - 0.7 * L) / (0.2 * L)
    cut = 0.5 * sps.erfc(6.0 * (ramp - 0.5))
    cut[ramp <= 0] = 1.0
    k = np.fft.fftfreq(M, d=g.spacing) * 2 * np.pi
    dm = np.fft.ifft(1j * k * np.fft.fft(cut * m))
    res = -1j * dm - lam * m - P
    mask = np.abs(g.x) < inner * L
    return float(np.max(np.abs(res[mask])))


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Sampled generalized eigenfunctions and transforms of ``Pi u0``.

    ``dft_minus``/``dft_plus`` hold the transforms against ``m_-``/``m_+``;
    the radiation profiles are ``radiation_plus = dft_minus`` and
    ``radiation_minus = dft_plus``.
    """

    grid: SpatialGrid
    lambda_grid: LambdaGrid
    m_minus: np.ndarray | None = field(repr=False)
    m_plus: np.ndarray | None = field(repr=False)
    dft_minus: np.ndarray = field(repr=False)
    dft_plus: np.ndarray = field(repr=False)
    defects: np.ndarray = field(repr=False)
    iterations: np.ndarray = field(repr=False)

    @property
    def a_minus(self) -> np.ndarray:
        return np.exp(-1j * np.outer(self.grid.x, self.lambda_grid.nodes)) * self.m_minus

    @property
    def radiation_plus(self) -> np.ndarray:
        return self.dft_minus

    @property
    def radiation_minus(self) -> np.ndarray:
        return self.dft_plus

    def to_dict(self) -> dict:
        def cplx(a):
            return [[float(v.real), float(v.imag)] for v in a]
        return {
            "lambda": [float(v) for v in self.lambda_grid.nodes],
            "lambda_weights": [float(v) for v in self.lambda_grid.weights],
            "lambda_kind": self.lambda_grid.kind,
            "dft_minus": cplx(self.dft_minus),
            "dft_plus": cplx(self.dft_plus),
            "max_defect": float(np.max(self.defects)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save_columns(self, path) -> None:
        """Binary dump of all sampled arrays (``numpy.savez``)."""
        arrays = {"lambda": self.lambda_grid.nodes, "dft_minus": self.dft_minus,
                  "dft_plus": self.dft_plus, "x": self.grid.x}
        if self.m_minus is not None:
            arrays.update(m_minus=self.m_minus, m_plus=self.m_plus)
        np.savez(path, **arrays)


def _sweep(u0: RealField, nodes: np.ndarray, keep_fields: bool, workers: int,
           signs=(-1, 1)):
    solver = VolterraSolver(u0)
    blank = np.full(u0.grid.point_count, np.nan + 0j)

    def one(lam):
        out = {}
        for sgn in (-1, 1):
            if sgn in signs:
                m, defect, its = solver.solve(lam, sgn)
                out[sgn] = (solver.transform_of_datum(m), defect, its,
                            solver.on_grid(m) if keep_fields else None)
            else:
                out[sgn] = (np.nan + 0j, 0.0, 0, blank if keep_fields else None)
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, nodes))
    return [one(lam) for lam in nodes]


def scattering_data(u0: RealField, lambda_grid: LambdaGrid | None = None,
                    keep_fields: bool = True, workers: int = 1,
                    signs=(-1, 1)) -> ScatteringData:
    """Solve for ``m_pm`` on every node of ``lambda_grid``.

    The default grid is ``[0.2, 4]`` with 64 points.  ``signs`` restricts the
    work to one normalization; the other one is then filled with NaN.
    """
    lg = lambda_grid or LambdaGrid.uniform()
    res = _sweep(u0, lg.nodes, keep_fields, workers, signs)

    def col(sgn, k):
        return [r[sgn][k] for r in res]

    fields = (np.column_stack(col(-1, 3)), np.column_stack(col(1, 3))) if keep_fields else (None, None)
    defects = np.maximum(col(-1, 1), col(1, 1))
    iterations = np.add(col(-1, 2), col(1, 2))
    return ScatteringData(u0.grid, lg, *fields, np.array(col(-1, 0)), np.array(col(1, 0)),
                          defects, iterations)


def distorted_transform(f, sd: ScatteringData, sign: int = -1) -> np.ndarray:
    """``f~(lam) = int f conj(m_pm(., lam)) dx`` on the nodes of ``sd``.

    ``f`` is a :class:`HardyField` (paired over the box with the trapezoid
    rule) or a :class:`RealField` ``v``, in which case the transform of
    ``Pi v`` is returned through ``int v conj(m)``, which has no truncation
    tail.
    """
    if sd.m_minus is None:
        raise InvalidParameterError("scattering data was computed without fields")
    if f.grid != sd.grid:
        raise GridMismatchError("field and scattering data live on different grids")
    m = sd.m_minus if sign < 0 else sd.m_plus
    vals = f.values if isinstance(f, RealField) else f.values()
    return sd.grid.spacing * (vals @ np.conj(m))


def radiation_profiles(u0: RealField, sd: ScatteringData) -> tuple[np.ndarray, np.ndarray]:
    """``(u_inf^+ hat, u_inf^- hat) = (Pi u0~^-, Pi u0~^+)`` on the nodes of ``sd``.

    These are the transforms of the datum the eigenfunctions were computed
    for, evaluated inside the padded box (so reflection symmetry is exact).
    """
    if u0.grid != sd.grid:
        raise GridMismatchError("datum and scattering data live on different grids")
    return sd.dft_minus.copy(), sd.dft_plus.copy()


def radiation_field(u0: RealField, sign: int = +1, xi_max: float | None = None,
                    workers: int = 1) -> tuple[RealField, np.ndarray]:
    """Real radiation profile ``u_inf^pm`` on the grid and its half-line transform.

    The transform ``Pi u0~^(-sign)`` is needed at the grid frequencies
    ``0 <= xi_n <= xi_max`` (higher modes are set to zero).  On small grids
    it is evaluated there directly, with the zero mode extrapolated.  When
    the frequency grid is finer than a graded Gauss rule on ``(0, xi_max]``
    the transform is computed on that rule and interpolated by a cubic
    spline instead, which is much cheaper on wide boxes.
    """
    g = u0.grid
    xi_max = spectral_support(u0) if xi_max is None else float(xi_max)
    n_top = max(int(np.floor(xi_max / g.freq_spacing)), 4)
    n_top = min(n_top, g.hardy_size - 1)
    coarse = LambdaGrid.graded(xi_max, first=1e-4, panel=0.5)
    c = np.zeros(g.hardy_size, complex)
    if n_top <= coarse.count:
        res = _sweep(u0, g.hardy_xi[1: n_top + 1], False, workers, signs=(-sign,))
        c[1: n_top + 1] = [r[-sign][0] for r in res]
        c[0] = 3 * c[1] - 3 * c[2] + c[3]
    else:
        res = _sweep(u0, coarse.nodes, False, workers, signs=(-sign,))
        vals = np.array([r[-sign][0] for r in res])
        spline = CubicSpline(coarse.nodes, vals)
        c[: n_top + 1] = spline(g.hardy_xi[: n_top + 1])
    hf = HardyField(g, c)
    return RealField(g, 2.0 * hf.values().real), c


def radiation_mass(u0: RealField, xi_max: float | None = None, workers: int = 1) -> float:
    """``(1/2pi) int_0^inf |Pi u0~(lam)|^2 d lam`` on graded Gauss nodes."""
    xi_max = spectral_support(u0) if xi_max is None else float(xi_max)
    lg = LambdaGrid.graded(xi_max)
    res = _sweep(u0, lg.nodes, False, workers, signs=(-1,))
    vals = np.array([r[-1][0] for r in res])
    return float(lg.integrate(np.abs(vals) ** 2) / (2 * np.pi))


@dataclass(frozen=True)
class PlancherelBudget:
    """Terms of ``sum |<f, phi_j>|^2 + int |f~|^2 d lam / 2pi = ||f||^2``."""

    bound: float
    continuous: float
    norm_sq: float

    @property
    def residual(self) -> float:
        return abs(self.bound + self.continuous - self.norm_sq)

    @property
    def relative(self) -> float:
        return self.residual / self.norm_sq if self.norm_sq > 0 else 0.0


def _bound_pairings(f, u0: RealField, spec: SpectrumData) -> np.ndarray:
    if spec.count == 0:
        return np.zeros(0)
    if isinstance(f, RealField) and spec.method == "line":
        from .spectrum import _LineOperator
        op = _LineOperator(f, spec.quadrature.nodes, spec.quadrature.weights)
        return np.array([np.sum(spec.quadrature.weights * np.conj(v) * op.u_hat) / (2 * np.pi)
                         for v in spec.quadrature.values])
    fh = szego_project(f)
    return np.array([fh.inner(phi) for phi in spec.eigenfunctions])


def plancherel_budget(f, u0: RealField, sd: ScatteringData, spec: SpectrumData,
                      sign: int = -1) -> PlancherelBudget:
    """Assemble the distorted Plancherel identity for ``f``.

    ``f`` may be a :class:`HardyField` or a :class:`RealField` ``v`` standing
    for ``Pi v``.  The continuous part only covers the nodes of ``sd``; use
    :meth:`LambdaGrid.graded` to cover the whole half line.
    """
    bound = float(np.sum(np.abs(_bound_pairings(f, u0, spec)) ** 2))
    if isinstance(f, RealField) and f.grid == u0.grid and np.array_equal(f.values, u0.values):
        ft = sd.dft_minus if sign < 0 else sd.dft_plus
    else:
        ft = distorted_transform(f, sd, sign)
    cont = float(sd.lambda_grid.integrate(np.abs(ft) ** 2) / (2 * np.pi))
    norm_sq = szego_project(f).norm() ** 2
    return PlancherelBudget(bound, cont, norm_sq)


def plancherel_residual(f, u0: RealField, sd: ScatteringData, spec: SpectrumData,
                        sign: int = -1) -> float:
    """``|LHS - RHS|`` of the distorted Plancherel identity."""
    return plancherel_budget(f, u0, sd, spec, sign).residual
