"""Soliton resolution: split ``u(t)`` into solitons, free radiation and a remainder.

For ``t -> +inf``

    u(t) = sum_j R_{p_j}(x - c_j t) + e^{t d_x|D|} u_inf^+ + r(t),   c_j = 1 / Im p_j,

with ``r(t) -> 0``.  :func:`remainder_report` evaluates the three pieces on a
list of times and records the norms of ``r``, together with the spectral
mass budget ``2 pi sum |lambda_j| + int |u~|^2 dlam/2pi = ||Pi u0||^2``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import explicit_evolution as ev
from . import reference_solver as rs
from .data import soliton_profile
from .errors import InvalidParameterError
from .field_grid import RealField, SpatialGrid, free_evolve, szego_project
from .scattering import LambdaGrid, ScatteringData, radiation_field, scattering_data
from .spectrum import SpectrumData, spectral_support

__all__ = [
    "soliton_sum",
    "radiation_term",
    "spectral_budget",
    "ResolutionReport",
    "remainder_report",
]


def soliton_sum(spec: SpectrumData, t: float, grid: SpatialGrid | None = None) -> RealField:
    """``sum_j R_{p_j}(x - c_j t)`` with ``c_j = 1 / Im p_j``."""
    if grid is None:
        if spec.count == 0:
            raise InvalidParameterError("a grid is needed when there are no bound states")
        grid = spec.eigenfunctions[0].grid
    vals = np.zeros(grid.point_count)
    for p in spec.p:
        vals += soliton_profile(grid.x - t / p.imag, p)
    return RealField(grid, vals)


def radiation_term(u_inf: RealField, t: float) -> RealField:
    """Free evolution ``e^{t d_x|D|} u_inf``."""
    return free_evolve(u_inf, t)


def spectral_budget(u0: RealField, spec: SpectrumData, sd: ScatteringData | None = None,
                    workers: int = 1) -> dict:
    """Terms of ``2 pi sum|lambda_j| + int |Pi u0~|^2 dlam / 2pi = ||Pi u0||^2``.

    Without ``sd`` the continuous part is integrated over a graded rule on
    the whole half line.
    """
    if sd is None:
        sd = scattering_data(u0, LambdaGrid.graded(spectral_support(u0)), keep_fields=False,
                             workers=workers, signs=(-1,))
    bound = float(2 * np.pi * np.sum(np.abs(spec.eigenvalues)))
    cont = float(sd.lambda_grid.integrate(np.abs(sd.dft_minus) ** 2).real / (2 * np.pi))
    norm_sq = szego_project(u0).norm() ** 2
    resid = abs(bound + cont - norm_sq)
    return {"bound": bound, "continuous": cont, "norm_sq": norm_sq, "residual": resid,
            "relative": resid / norm_sq if norm_sq else 0.0,
            "lambda_range": [sd.lambda_grid.lower, sd.lambda_grid.upper]}


@dataclass(frozen=True, eq=False)
class ResolutionReport:
    """Norms of the decomposition at each time, the budget and pass/fail flags."""

    times: np.ndarray
    l2_u: np.ndarray
    h1_u: np.ndarray
    l2_sol: np.ndarray
    l2_rad: np.ndarray
    l2_r: np.ndarray
    h1_r: np.ndarray
    budget: dict
    flags: dict
    backend: str = "stepper"
    remainders: tuple = field(default=(), repr=False)

    def decay_slope(self) -> float:
        """Least-squares slope of ``log ||r||`` against ``log t`` over positive times."""
        pos = (self.times > 0) & (self.l2_r > 0)
        if pos.sum() < 2:
            return 0.0
        return float(np.polyfit(np.log(self.times[pos]), np.log(self.l2_r[pos]), 1)[0])

    def to_dict(self) -> dict:
        cols = {k: getattr(self, k).tolist() for k in
                ("times", "l2_u", "h1_u", "l2_sol", "l2_rad", "l2_r", "h1_r")}
        return {**cols, "budget": self.budget, "flags": self.flags, "backend": self.backend,
                "decay_slope": self.decay_slope()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "L2_u", "L2_sol", "L2_rad", "L2_r", "H1_r"])
        for row in zip(self.times, self.l2_u, self.l2_sol, self.l2_rad, self.l2_r, self.h1_r):
            w.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def _trajectory(u0: RealField, t_list, backend: str, dt: float | None):
    if backend == "explicit":
        return [ev.field_at_time(u0, t) for t in t_list]
    if backend != "stepper":
        raise InvalidParameterError(f"unknown backend {backend!r}")
    if any(t < 0 for t in t_list):
        raise InvalidParameterError("the stepper backend covers nonnegative times only")
    step = dt if dt is not None else min(1e-3, rs.max_stable_dt(u0.grid))
    cfg = rs.StepperConfig(dt=step, t_end=max(t_list), snapshots=tuple(t_list))
    traj = rs.step_evolve(u0, cfg)
    return [traj.at(t) for t in t_list]


def remainder_report(u0: RealField, spec: SpectrumData, sd: ScatteringData | None, t_list,
                     backend: str = "stepper", u_inf: RealField | None = None,
                     dt: float | None = None, budget_tol: float = 0.02,
                     workers: int = 1) -> ResolutionReport:
    """Evaluate ``r(t) = u(t) - soliton_sum - radiation_term`` for ``t`` in ``t_list``.

    ``u_inf`` defaults to :func:`scattering.radiation_field` of ``u0``.  ``sd``
    feeds the spectral budget; pass scattering data on a graded grid (or
    ``None`` to have one computed) for a complete budget.
    """
    times = np.array(sorted(float(t) for t in t_list))
    if times.size == 0:
        raise InvalidParameterError("t_list is empty")
    if u_inf is None:
        u_inf = radiation_field(u0, +1, workers=workers)[0]
    fields = _trajectory(u0, times, backend, dt)
    cols = {k: [] for k in ("l2_u", "h1_u", "l2_sol", "l2_rad", "l2_r", "h1_r")}
    rem = []
    for t, u in zip(times, fields):
        sol = soliton_sum(spec, t, u0.grid)
        rad = radiation_term(u_inf, t)
        r = u - sol - rad
        rem.append(r)
        for key, val in (("l2_u", u.norm()), ("h1_u", u.h1_norm()), ("l2_sol", sol.norm()),
                         ("l2_rad", rad.norm()), ("l2_r", r.norm()), ("h1_r", r.h1_norm())):
            cols[key].append(val)
    budget = spectral_budget(u0, spec, sd, workers)
    arr = {k: np.array(v) for k, v in cols.items()}
    report = ResolutionReport(times, **arr, budget=budget, flags={}, backend=backend,
                              remainders=tuple(rem))
    flags = {"budget": budget["relative"] < budget_tol, "trend": report.decay_slope() <= 0}
    pos = np.nonzero(times > 0)[0]
    if pos.size >= 2:
        flags["halving"] = bool(arr["l2_r"][pos[-1]] < 0.5 * arr["l2_r"][pos[0]])
    report.flags.update(flags)
    return report
