"""Discrete spectrum of the Lax operator and the soliton parameters.

Two engines are available.

``method="grid"``
    Dense Hermitian eigendecomposition of :class:`~bolab.hardy_ops.LaxMatrix`
    on the torus frequencies.  Eigenvalues closer to zero than ``threshold``
    (default ``4 * dxi``) are discarded as essential-spectrum debris.

``method="line"``
    Nystrom discretization of the same operator on the half line
    ``[0, Xi]``, using composite Gauss-Legendre panels refined geometrically
    towards ``xi = 0``.  The datum is still the sampled one, but no torus
    periodicity enters, so bound states whose eigenfunctions are much wider
    than the box (eigenvalues of order ``1e-3``) are resolved.

Both engines fix the phase of each eigenfunction so that ``I+(phi_j) >= 0``
and compute ``p_j = -<X* phi_j, phi_j>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateSpectrumError, InvalidParameterError
from .field_grid import HardyField, RealField, szego_project
from .hardy_ops import assemble_lax, xstar_apply

__all__ = [
    "SpectrumData",
    "LineQuadrature",
    "discrete_spectrum",
    "wu_residuals",
    "spectral_support",
    "half_line_nodes",
]

GAP_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class LineQuadrature:
    """Half-line nodes and the eigenfunction values used by the line engine."""

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray  # shape (N, n_nodes)


@dataclass(frozen=True, eq=False)
class SpectrumData:
    """Bound states of ``L_u`` sorted by increasing eigenvalue.

    Attributes
    ----------
    eigenvalues : ndarray
        ``lambda_1 < ... < lambda_N < 0``.
    eigenfunctions : list of HardyField
        Unit-norm eigenfunctions sampled on the grid frequencies.
    i_plus : ndarray
        Boundary values ``I+(phi_j)``, real and nonnegative.
    p : ndarray
        Soliton parameters ``p_j = -<X* phi_j, phi_j>``.
    pairings : ndarray
        ``<phi_j, Pi u0>``.
    wu_residuals : ndarray
        Shape ``(N, 2)``; see :func:`wu_residuals`.
    eigen_residuals : ndarray
        ``||L phi_j - lambda_j phi_j||``.
    """

    method: str
    threshold: float
    eigenvalues: np.ndarray
    eigenfunctions: list = field(repr=False)
    i_plus: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    pairings: np.ndarray = field(repr=False)
    wu_residuals: np.ndarray = field(repr=False)
    eigen_residuals: np.ndarray = field(repr=False)
    quadrature: LineQuadrature | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    N = count

    @property
    def velocities(self) -> np.ndarray:
        return 1.0 / self.p.imag

    def to_dict(self) -> dict:
        return {
            "N": self.count,
            "method": self.method,
            "threshold": self.threshold,
            "lambdas": [float(v) for v in self.eigenvalues],
            "p": [{"re": float(v.real), "im": float(v.imag)} for v in self.p],
            "velocities": [float(v) for v in self.velocities],
            "i_plus": [float(v.real) for v in self.i_plus],
            "wu_residuals": [[float(a), float(b)] for a, b in self.wu_residuals],
            "eigen_residuals": [float(v) for v in self.eigen_residuals],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_gaps(ev: np.ndarray) -> None:
    if len(ev) > 1 and np.min(np.diff(ev)) < GAP_TOLERANCE:
        raise DegenerateSpectrumError(
            f"eigenvalues {ev} contain a gap below {GAP_TOLERANCE:g}")


def _phase_fix(i0: complex) -> complex:
    """Unimodular factor making ``i0`` real and nonnegative."""
    return np.exp(-1j * np.angle(i0)) if abs(i0) > 0 else 1.0


# ---------------------------------------------------------------- grid engine

def _grid_spectrum(u0: RealField, threshold: float) -> SpectrumData:
    g = u0.grid
    lax = assemble_lax(u0)
    ev, vecs = sla.eigh(lax.hermitian, subset_by_value=(-np.inf, -threshold), driver="evr")
    order = np.argsort(ev)
    ev, vecs = ev[order], vecs[:, order]
    _check_gaps(ev)
    coeffs = lax.to_coefficients(vecs)
    piu = szego_project(u0)
    funcs, ip, ps, pair, res = [], [], [], [], []
    for j, lam in enumerate(ev):
        phi = HardyField(g, coeffs[:, j])
        phi = phi * (1.0 / phi.norm())
        phi = phi * _phase_fix(phi.i_plus())
        funcs.append(phi)
        ip.append(phi.i_plus())
        ps.append(-xstar_apply(phi).inner(phi))
        pair.append(phi.inner(piu))
        res.append((lax.apply(phi) - phi * lam).norm())
    ip, pair = np.array(ip, complex), np.array(pair, complex)
    wu = np.column_stack([np.abs(np.abs(pair) ** 2 + 2 * np.pi * ev),
                          np.abs(ev * ip + pair)]) if len(ev) else np.zeros((0, 2))
    return SpectrumData("grid", threshold, ev, funcs, ip, np.array(ps, complex), pair, wu,
                        np.array(res))


# ---------------------------------------------------------------- line engine

def spectral_support(u0: RealField, rel_tol: float = 3e-8, floor: float = 2.0) -> float:
    """Frequency beyond which ``|u0_hat|`` stays below ``rel_tol * max``."""
    g = u0.grid
    a = np.abs(u0.spectrum()[: g.hardy_size])
    big = np.nonzero(a > rel_tol * a.max())[0] if a.max() > 0 else np.array([0])
    top = g.hardy_xi[min(big[-1] + 1, g.hardy_size - 1)]
    return float(min(max(top, floor), g.hardy_xi[-1]))


def half_line_nodes(xi_max: float, first: float = 1e-8, ratio: float = 2.0,
                    panel: float = 0.25, inner_order: int = 8, outer_order: int = 12,
                    cap: float | None = None):
    """Composite Gauss-Legendre nodes on ``[0, xi_max]``.

    Panels grow geometrically from ``first`` up to 1, but never beyond width
    ``cap`` when it is given, and are uniform of width ``panel`` afterwards.
    """
    edges = [0.0, first]
    while edges[-1] * ratio < 1.0 and (cap is None or edges[-1] * (ratio - 1) < cap):
        edges.append(edges[-1] * ratio)
    while edges[-1] < 1.0 - 1e-12:
        edges.append(min(edges[-1] + cap, 1.0) if cap else 1.0)
    while edges[-1] < xi_max - 1e-12:
        edges.append(min(edges[-1] + panel, xi_max) if xi_max - edges[-1] > 0.5 * panel
                     else xi_max)
    nodes, weights = [], []
    rules = {n: leggauss(n) for n in (inner_order, outer_order)}
    for a, b in zip(edges[:-1], edges[1:]):
        gx, gw = rules[inner_order if b <= 1.0 else outer_order]
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * gx)
        weights.append(0.5 * (b - a) * gw)
    return np.concatenate(nodes), np.concatenate(weights)


class _LineOperator:
    """Frequency-side Lax operator for a sampled datum, on arbitrary nodes."""

    def __init__(self, u0: RealField, nodes: np.ndarray, weights: np.ndarray):
        g = u0.grid
        self.u0, self.grid = u0, g
        self.nodes, self.weights = nodes, weights
        self.hu = g.spacing * u0.values
        self.E = np.exp(-1j * np.outer(nodes, g.x))
        self.u_hat = self.E @ self.hu

    def kernel(self) -> np.ndarray:
        return (self.E * self.hu) @ self.E.conj().T / (2 * np.pi)

    def interpolate(self, vals: np.ndarray, lam: float, xi: np.ndarray, derivative=False):
        """Nystrom interpolant ``phi(xi) = (1/2pi) int u_hat(xi-eta) phi(eta) deta / (xi-lam)``."""
        y = self.hu * (self.E.conj().T @ (self.weights * vals))
        ph = np.exp(-1j * np.outer(xi, self.grid.x))
        G = ph @ y / (2 * np.pi)
        phi = G / (xi - lam)
        if not derivative:
            return phi
        dG = ph @ (-1j * self.grid.x * y) / (2 * np.pi)
        return phi, dG / (xi - lam) - G / (xi - lam) ** 2


def _line_spectrum(u0: RealField, threshold: float, xi_max: float | None) -> SpectrumData:
    g = u0.grid
    xi_max = spectral_support(u0) if xi_max is None else float(xi_max)
    # the kernel oscillates like exp(-i xi x) with |x| up to L
    L = g.half_width
    nodes, weights = half_line_nodes(xi_max, panel=min(0.25, 16.0 / L), cap=4.0 / L)
    op = _LineOperator(u0, nodes, weights)
    sw = np.sqrt(weights)
    H = -(sw[:, None] * op.kernel() * sw[None, :])
    H[np.diag_indices_from(H)] += nodes
    ev, vecs = sla.eigh(H, subset_by_value=(-np.inf, -threshold), driver="evr")
    order = np.argsort(ev)
    ev, vecs = ev[order], vecs[:, order]
    _check_gaps(ev)
    funcs, ip, ps, pair, res, vals_all = [], [], [], [], [], []
    for j, lam in enumerate(ev):
        v = vecs[:, j] / sw
        v = v / np.sqrt(np.sum(weights * np.abs(v) ** 2) / (2 * np.pi))
        i0 = op.interpolate(v, lam, np.array([0.0]))[0]
        ph = _phase_fix(i0)
        v, i0 = v * ph, i0 * ph
        phi, dphi = op.interpolate(v, lam, nodes, derivative=True)
        ps.append(-np.sum(weights * 1j * dphi * np.conj(phi)) / (2 * np.pi))
        pair.append(np.sum(weights * v * np.conj(op.u_hat)) / (2 * np.pi))
        defect = (nodes - lam) * (v - phi)
        res.append(np.sqrt(np.sum(weights * np.abs(defect) ** 2) / (2 * np.pi)))
        funcs.append(HardyField(g, op.interpolate(v, lam, g.hardy_xi)))
        ip.append(i0)
        vals_all.append(v)
    ip, pair = np.array(ip, complex), np.array(pair, complex)
    wu = np.column_stack([np.abs(np.abs(pair) ** 2 + 2 * np.pi * ev),
                          np.abs(ev * ip + pair)]) if len(ev) else np.zeros((0, 2))
    quad = LineQuadrature(nodes, weights, np.array(vals_all).reshape(len(ev), len(nodes)))
    return SpectrumData("line", threshold, ev, funcs, ip, np.array(ps, complex), pair, wu,
                        np.array(res), quad)


def discrete_spectrum(u0: RealField, threshold: float | None = None, method: str = "grid",
                      xi_max: float | None = None) -> SpectrumData:
    """Negative eigenvalues of the Lax operator with soliton parameters.

    Parameters
    ----------
    u0 : RealField
        Real, decaying initial datum.
    threshold : float, optional
        Eigenvalues in ``[-threshold, 0)`` are discarded.  Defaults to
        ``4 * dxi`` for the grid engine and ``1e-7`` for the line engine.
    method : {"grid", "line"}
    xi_max : float, optional
        Top of the half-line quadrature (line engine only).

    Raises
    ------
    DegenerateSpectrumError
        If two returned eigenvalues are closer than ``1e-8``.
    """
    if method == "grid":
        thr = 4 * u0.grid.freq_spacing if threshold is None else float(threshold)
        return _grid_spectrum(u0, thr)
    if method == "line":
        thr = 1e-7 if threshold is None else float(threshold)
        return _line_spectrum(u0, thr, xi_max)
    raise InvalidParameterError(f"unknown spectrum method {method!r}")


def wu_residuals(u0: RealField, s: SpectrumData) -> list[tuple[float, float]]:
    """Residuals of ``|<phi_j, Pi u0>|^2 = -2 pi lambda_j`` and ``lambda_j I+ = -<phi_j, Pi u0>``.

    The pairing is recomputed from ``u0`` in the quadrature native to the
    engine that produced ``s``.
    """
    if s.count == 0:
        return []
    if s.method == "line":
        op = _LineOperator(u0, s.quadrature.nodes, s.quadrature.weights)
        pair = np.array([np.sum(s.quadrature.weights * v * np.conj(op.u_hat)) / (2 * np.pi)
                         for v in s.quadrature.values])
    else:
        piu = szego_project(u0)
        pair = np.array([phi.inner(piu) for phi in s.eigenfunctions])
    lam = s.eigenvalues
    return [(float(abs(abs(pj) ** 2 + 2 * np.pi * lj)), float(abs(lj * ij + pj)))
            for pj, lj, ij in zip(pair, lam, s.i_plus)]
