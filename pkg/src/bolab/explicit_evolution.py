"""The solution through its explicit resolvent formula.

For ``Im z > 0``

    Pi u(t, z) = (1 / 2 i pi) I+((X* - 2t L_u0 - z)^(-1) Pi u0),

where everything on the right acts on the frequency side: ``X* = i d/dxi``,
``L_u0 = xi - T_u0`` and ``I+`` is the boundary value at ``xi = 0``.  Two
discretizations of the same operator ``A = X* - 2t L_u0`` are provided.

* :func:`resolvent_solve` solves ``(A - z) f = b`` by preconditioned GMRES.
  ``d/dxi`` is the fourth-order summation-by-parts stencil and the Toeplitz
  part is a discrete convolution applied by FFT.
* :func:`solution_transform` uses ``(A - z)^(-1) = i int_0^inf e^{-is(A - z)} ds``,
  which gives ``u_hat(t, s) = I+(e^{-isA} Pi u0)`` for ``s >= 0``.  The group
  generated by ``X* - 2t xi`` is an exact shift with a quadratic phase, so
  ``e^{-isA}`` is integrated with an integrating-factor RK4 scheme on a
  frequency grid of spacing ``pi / (r L)``.  This yields the whole profile of
  ``u(t)`` at once and is what :func:`field_at_time` uses.

The refinement factor ``r`` sets both the phase resolution in ``xi`` and
the size ``r L`` of the periodic box in which ``u(t)`` is synthesized.  It
has to grow with ``|t|``; see :func:`refinement_for`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .errors import IllConditionedError, InvalidParameterError, PreconditionError
from .field_grid import HardyField, RealField, SpatialGrid, make_grid, szego_project
from .spectrum import SpectrumData, spectral_support

__all__ = [
    "ResolventSolve",
    "ProbeResult",
    "refinement_for",
    "resolvent_solve",
    "omega_eval",
    "solution_transform",
    "field_at_time",
    "field_on_box",
    "invariants",
    "soliton_limit_probe",
    "radiation_limit_probe",
]

# fourth-order summation-by-parts first derivative: boundary block and norm
_SBP_ROWS = (
    (-24 / 17, 59 / 34, -4 / 17, -3 / 34),
    (-1 / 2, 0.0, 1 / 2, 0.0),
    (4 / 43, -59 / 86, 0.0, 59 / 86, -4 / 43),
    (3 / 98, 0.0, -59 / 98, 0.0, 32 / 49, -4 / 49),
)
_SBP_NORM = np.array([17 / 48, 59 / 48, 43 / 48, 49 / 48])


def refinement_for(u0: RealField, t: float, xi_max: float) -> int:
    """Smallest safe refinement factor ``r`` for time ``t``.

    The dispersive part of ``u(t)`` reaches ``|x| ~ 2 |t| xi_max`` and the
    phase ``t xi^2`` must be resolved on the frequency grid; coherent
    structures move at most at speed ``~ 4 pi sup|u0|``.
    """
    L = u0.grid.half_width
    return int(max(2, math.ceil(2 + 4 * abs(t) * xi_max / L),
                   math.ceil(8 * math.pi * abs(t) * u0.sup_norm() / L)))


def _top_frequency(u0: RealField, xi_max: float | None) -> float:
    if xi_max is None:
        return spectral_support(u0)
    if xi_max <= 0:
        raise InvalidParameterError("xi_max must be positive")
    return min(float(xi_max), u0.grid.nyquist_index * u0.grid.freq_spacing)


class _FrequencyProblem:
    """Discrete ``A = X* - 2t (xi - T_u0)`` on ``xi_k = k pi / (r L)``, ``k < K``."""

    def __init__(self, u0: RealField, t: float, refine: int, xi_max: float):
        g = u0.grid
        L, M = g.half_width, g.point_count
        self.t, self.refine = float(t), int(refine)
        self.step = np.pi / (refine * L)
        self.count = int(np.ceil(xi_max / self.step)) + 1
        self.xi = self.step * np.arange(self.count)
        self.datum_hat = self._transform(u0.values.astype(complex), g)
        K = self.count
        self._nfft = 1 << int(np.ceil(np.log2(2 * K)))
        col = np.zeros(self._nfft, complex)
        col[:K] = self.datum_hat[K - 1:]
        col[self._nfft - (K - 1):] = self.datum_hat[: K - 1]
        self._conv_hat = np.fft.fft(col)

    def _transform(self, values: np.ndarray, g: SpatialGrid) -> np.ndarray:
        """Samples ``f_hat(j * step)`` for ``|j| < K`` of a function living on the grid box.

        The sample at ``-L`` is shared evenly with ``+L``, which keeps the
        construction exactly symmetric under ``x -> -x``.
        """
        P = self.refine * g.point_count
        if self.count > P // 2:
            raise InvalidParameterError("frequency grid exceeds the spatial resolution")
        pad = np.zeros(P, complex)
        pad[: g.point_count] = values
        pad[0] *= 0.5
        pad[g.point_count] = 0.5 * values[0]
        j = np.fft.fftfreq(P, 1.0 / P)
        F = g.spacing * np.fft.fft(pad) * np.exp(1j * j * self.step * g.half_width)
        return F[np.arange(-(self.count - 1), self.count) % P]

    def rhs_from(self, f, g: SpatialGrid) -> np.ndarray:
        if isinstance(f, HardyField):
            return self._transform(f.values(), g)[self.count - 1:]
        if isinstance(f, RealField):
            return self._transform(f.values.astype(complex), g)[self.count - 1:]
        f = np.asarray(f, complex)
        if f.shape != (self.count,):
            raise InvalidParameterError("right-hand side must match the frequency grid")
        return f

    def convolve(self, v: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """``(1/2pi) int u0_hat(xi - eta) v(eta) d eta`` with the given quadrature weights."""
        y = np.fft.ifft(self._conv_hat * np.fft.fft(weights * v, self._nfft))[: self.count]
        return y * self.step / (2 * np.pi)

    # -- resolvent ---------------------------------------------------------------
    @property
    def derivative(self) -> sp.csr_matrix:
        K, d = self.count, self.step
        D = sp.diags([np.full(K - 1, 2 / 3), np.full(K - 2, -1 / 12),
                      np.full(K - 1, -2 / 3), np.full(K - 2, 1 / 12)],
                     [1, 2, -1, -2], shape=(K, K), format="lil")
        for i, row in enumerate(_SBP_ROWS):
            D[i, :] = 0
            for k, v in enumerate(row):
                D[i, k] = v
        return D.tocsr() / d

    def resolvent(self, z: complex, rhs: np.ndarray, tol: float = 1e-11):
        K, t = self.count, self.t
        w = np.ones(K)
        w[:4] = _SBP_NORM
        D = self.derivative
        pre = spl.splu((1j * D - sp.diags(2 * t * self.xi + z)).tocsc())

        def apply(v):
            return 1j * (D @ v) - (2 * t * self.xi + z) * v + 2 * t * self.convolve(v, w)

        A = spl.LinearOperator((K, K), matvec=apply, dtype=complex)
        P = spl.LinearOperator((K, K), matvec=pre.solve, dtype=complex)
        count = [0]

        def cb(_):
            count[0] += 1

        sol, info = spl.gmres(A, rhs, M=P, rtol=tol, atol=0.0, restart=200, maxiter=20,
                              callback=cb, callback_type="pr_norm")
        nb = np.linalg.norm(rhs)
        defect = np.linalg.norm(apply(sol) - rhs) / nb if nb else 0.0
        if info != 0 or not np.all(np.isfinite(sol)) or defect > 1e3 * tol:
            raise IllConditionedError(
                f"resolvent at t={t:g}, z={z:.4g} did not converge (defect {defect:.1e}); "
                "increase Im z or the frequency resolution")
        return sol, count[0], float(defect)

    # -- group -------------------------------------------------------------------
    def trace(self, rhs: np.ndarray | None = None):
        """``s -> I+(e^{-isA} b)`` sampled at ``s = 2 k step`` until the grid is exhausted."""
        K, d, t = self.count, self.step, self.t
        w = np.ones(K)
        w[0] = 0.5
        shift_phase = np.exp(2j * t * (self.xi * d + d * d / 2))

        def N(v):
            return -2j * t * self.convolve(v, w)

        def E(v):
            out = np.zeros_like(v)
            out[:-1] = v[1:]
            return out * shift_phase

        v = self.datum_hat[K - 1:].copy() if rhs is None else rhs.copy()
        ds = 2 * d
        out = [v[0]]
        for _ in range((K - 1) // 2):
            Ev = E(v)
            E2v = E(Ev)
            k1 = N(v)
            k2 = N(E(v + 0.5 * ds * k1))
            k3 = N(Ev + 0.5 * ds * k2)
            k4 = N(E2v + ds * E(k3))
            v = E2v + ds / 6 * (E(E(k1)) + 2 * E(k2 + k3) + k4)
            out.append(v[0])
        return ds * np.arange(len(out)), np.array(out)


@lru_cache(maxsize=8)
def _problem_cached(key, t, refine, xi_max):
    return _FrequencyProblem(key.field, t, refine, xi_max)


class _Key:
    """Hashable handle so frequency problems can be reused across calls."""

    def __init__(self, u0: RealField):
        self.field = u0
        self._h = hash((u0.grid, u0.values.tobytes()))

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return (isinstance(other, _Key) and self.field.grid == other.field.grid
                and np.array_equal(self.field.values, other.field.values))


def _problem(u0: RealField, t: float, xi_max: float | None, refine: int | None):
    top = _top_frequency(u0, xi_max)
    r = refinement_for(u0, t, top) if refine is None else int(refine)
    if r < 1:
        raise InvalidParameterError("refine must be a positive integer")
    return _problem_cached(_Key(u0), float(t), r, top)


@dataclass(frozen=True, eq=False)
class ResolventSolve:
    """Solution of ``(X* - 2t L_u0 - z) f = b`` on the frequency grid."""

    t: float
    z: complex
    xi: np.ndarray = field(repr=False)
    f_hat: np.ndarray = field(repr=False)
    boundary_value: complex
    iterations: int
    defect: float

    @property
    def omega(self) -> complex:
        return self.boundary_value / (2j * np.pi)


def resolvent_solve(u0: RealField, t: float, z: complex, rhs=None,
                    xi_max: float | None = None, refine: int | None = None) -> ResolventSolve:
    """Solve the frequency-side resolvent equation.

    ``rhs`` defaults to ``Pi u0``; a :class:`HardyField`, a :class:`RealField`
    (meaning its projection) or an array on the frequency grid may be given.
    """
    z = complex(z)
    if z.imag <= 0:
        raise InvalidParameterError("the resolvent needs Im z > 0")
    prob = _problem(u0, t, xi_max, refine)
    b = prob.datum_hat[prob.count - 1:] if rhs is None else prob.rhs_from(rhs, u0.grid)
    sol, its, defect = prob.resolvent(z, b)
    return ResolventSolve(float(t), z, prob.xi, sol, complex(sol[0]), its, defect)


def omega_eval(u0: RealField, t: float, z: complex, f=None, **kw) -> complex:
    """``Omega_t f(z) = I+((X* - 2t L_u0 - z)^(-1) f) / (2 i pi)``; ``f = Pi u0`` gives ``Pi u(t, z)``."""
    return resolvent_solve(u0, t, z, rhs=f, **kw).omega


def solution_transform(u0: RealField, t: float, xi_max: float | None = None,
                       refine: int | None = None, f=None):
    """``(s, u_hat(t, s))`` for ``s`` in ``[0, xi_max]``.

    ``u(t)`` is real, so this half-line profile determines it:
    ``u(t, x) = (1/pi) Re int_0^inf u_hat(t, s) e^{isx} ds``.  Given ``f``
    the same construction returns the transform of ``Omega_t f`` instead.
    """
    prob = _problem(u0, t, xi_max, refine)
    return prob.trace(None if f is None else prob.rhs_from(f, u0.grid))


def _synthesize(s: np.ndarray, uh: np.ndarray, grid: SpatialGrid, eps: float) -> np.ndarray:
    """``2 Re (1/2pi) int_0^inf uh(s) e^{is(x + i eps)} ds`` at the points of ``grid``.

    ``s`` must be equispaced with ``grid.spacing * ds * N = 2 pi`` for an
    integer ``N >= grid.point_count``.
    """
    ds = s[1] - s[0]
    N = int(round(2 * np.pi / (ds * grid.spacing)))
    w = np.full(s.size, ds)
    w[0] *= 0.5
    c = w * uh * np.exp(-eps * s) * np.exp(-1j * s * grid.half_width)
    buf = np.zeros(max(N, s.size), complex)
    buf[: s.size] = c
    vals = np.fft.ifft(buf)[: grid.point_count] * buf.size
    return vals.real / np.pi


def field_at_time(u0: RealField, t: float, eps: float = 0.0, xi_max: float | None = None,
                  refine: int | None = None, richardson: bool = True) -> RealField:
    """``u(t)`` on the grid of ``u0``.

    With ``eps = 0`` (the default) the boundary values are taken directly from
    ``u_hat(t, s)``.  With ``eps > 0`` the field is evaluated at ``x + i eps``
    and, if ``richardson``, combined as ``2 u(eps) - u(2 eps)``.
    """
    if eps < 0:
        raise InvalidParameterError("eps must be nonnegative")
    s, uh = solution_transform(u0, t, xi_max, refine)
    if eps == 0:
        vals = _synthesize(s, uh, u0.grid, 0.0)
    elif richardson:
        vals = 2 * _synthesize(s, uh, u0.grid, eps) - _synthesize(s, uh, u0.grid, 2 * eps)
    else:
        vals = _synthesize(s, uh, u0.grid, eps)
    return RealField(u0.grid, vals)


def field_on_box(u0: RealField, t: float, xi_max: float | None = None,
                 refine: int | None = None) -> RealField:
    """``u(t)`` on the whole periodic box ``[-rL/2, rL/2)`` resolved by the frequency grid."""
    s, uh = solution_transform(u0, t, xi_max, refine)
    g = u0.grid
    N = int(round(2 * np.pi / ((s[1] - s[0]) * g.spacing)))
    wide = make_grid(N * g.spacing / 2, N)
    return RealField(wide, _synthesize(s, uh, wide, 0.0))


def invariants(u0: RealField, t: float, xi_max: float | None = None,
               refine: int | None = None) -> dict:
    """``||u(t)||`` over the line and ``||L_u Pi u||`` on the synthesis box."""
    s, uh = solution_transform(u0, t, xi_max, refine)
    w = np.full(s.size, s[1] - s[0])
    w[0] *= 0.5
    norm = float(np.sqrt(np.sum(w * np.abs(uh) ** 2) / np.pi))
    u = field_on_box(u0, t, xi_max, refine)
    pu = szego_project(u)
    lax = HardyField(u.grid, u.grid.hardy_xi * pu.coefficients
                     - szego_project(u.values * pu.values(), u.grid).coefficients)
    return {"t": float(t), "norm": norm, "lax_norm": lax.norm()}


@dataclass(frozen=True)
class ProbeResult:
    """Probe values along ``t`` together with the predicted limit."""

    times: tuple
    values: tuple
    predicted: complex | tuple

    def errors(self) -> np.ndarray:
        pred = np.broadcast_to(np.asarray(self.predicted), (len(self.values),))
        return np.abs(np.asarray(self.values) - pred)

    def rows(self):
        pred = np.broadcast_to(np.asarray(self.predicted), (len(self.values),))
        return [(t, v.real, v.imag, p.real, p.imag) for t, v, p in zip(self.times, self.values, pred)]


def soliton_limit_probe(u0: RealField, spec: SpectrumData, j: int, z: complex, t_list,
                        xi_max: float | None = None, refine: int | None = None) -> ProbeResult:
    """``Pi u(t, z - 2t lambda_j)`` for ``t`` in ``t_list``; ``j`` counts from 1.

    The predicted limit is ``i / (z - <X* phi_j, phi_j>) = i / (z + p_j)``.
    """
    if spec.count == 0:
        raise PreconditionError("the datum has no bound state to follow")
    if not 1 <= j <= spec.count:
        raise InvalidParameterError(f"j must lie in 1..{spec.count}")
    lam, p = spec.eigenvalues[j - 1], spec.p[j - 1]
    vals = tuple(omega_eval(u0, t, complex(z) - 2 * t * lam, xi_max=xi_max, refine=refine)
                 for t in t_list)
    return ProbeResult(tuple(float(t) for t in t_list), vals, 1j / (complex(z) + p))


def radiation_limit_probe(u0: RealField, sd, phi_test, t_list, eps: float | None = None,
                          xi_max: float | None = None, refine: int | None = None) -> ProbeResult:
    """Weak radiation limit paired against ``phi_test`` on the nodes of ``sd``.

    Returns ``int (2t)^(1/2) e^{i t lam^2} Pi u(t, i eps - 2t lam) phi(lam) d lam`` for each
    ``t``.  The prediction is
    ``(e^{i pi/4}/sqrt(2 pi)) int u~(lam) e^{-lam eps} phi(lam) d lam``, where the factor
    ``e^{-lam eps}`` accounts for evaluating above the real axis and ``u~`` is
    the transform against ``m_-``.
    """
    if any(t <= 0 for t in t_list):
        raise InvalidParameterError("the radiation probe is defined for positive times")
    lg = sd.lambda_grid
    lam = lg.nodes
    phi = np.asarray(phi_test(lam) if callable(phi_test) else phi_test, float)
    top = _top_frequency(u0, xi_max)
    eps = max(4 * np.pi / top, 0.02) if eps is None else float(eps)
    if eps <= 0:
        raise InvalidParameterError("eps must be positive")
    active = np.nonzero(phi)[0]
    values, preds = [], []
    for t in t_list:
        acc = 0j
        for k in active:
            om = omega_eval(u0, t, 1j * eps - 2 * t * lam[k], xi_max=top, refine=refine)
            acc += lg.weights[k] * np.sqrt(2 * t) * np.exp(1j * t * lam[k] ** 2) * om * phi[k]
        values.append(complex(acc))
        preds.append(complex(np.exp(1j * np.pi / 4) / np.sqrt(2 * np.pi)
                             * lg.integrate(sd.radiation_plus * np.exp(-lam * eps) * phi)))
    return ProbeResult(tuple(float(t) for t in t_list), tuple(values), tuple(preds))
