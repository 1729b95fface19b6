"""Pseudospectral time stepper for ``u_t - d_x |D| u + d_x(u^2) = 0`` on the torus.

This is the independent oracle for the explicit formula.  In Fourier
variables the equation reads ``v' = i xi|xi| v - i xi (u^2)^``; the linear
part is integrated exactly (integrating factor) and the remainder with the
classical RK4 stages.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, InvalidParameterError
from .field_grid import RealField, SpatialGrid, szego_project
from .hardy_ops import lax_apply

__all__ = ["StepperConfig", "Trajectory", "MonitorTable", "step_evolve", "conserved_monitors",
           "max_stable_dt"]

BLOW_UP = 1e6
CFL_CONSTANT = math.pi


def _retained_modes(grid: SpatialGrid, dealias: bool) -> np.ndarray:
    k = np.abs(grid.mode_index)
    return k < grid.point_count / 3 if dealias else np.ones(grid.point_count, bool)


def max_stable_dt(grid: SpatialGrid, dealias: bool = True) -> float:
    """``C / max|xi|^2`` over the retained modes, with ``C = pi``."""
    xi_top = np.max(np.abs(grid.xi[_retained_modes(grid, dealias)]))
    return CFL_CONSTANT / xi_top ** 2


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping parameters.

    ``snapshots`` are the output times (``t_end`` alone by default).  When a
    ``grid`` is supplied the step-size bound is checked immediately;
    otherwise it is checked by :func:`step_evolve`.
    """

    dt: float = 1e-3
    t_end: float = 1.0
    snapshots: tuple = ()
    dealias: bool = True
    scheme: str = "ifrk4"
    grid: SpatialGrid | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError("dt must be positive")
        if self.scheme != "ifrk4":
            raise InvalidParameterError(f"unknown scheme {self.scheme!r}")
        snaps = tuple(float(s) for s in (self.snapshots or (self.t_end,)))
        if any(s * self.t_end < 0 or abs(s) > abs(self.t_end) + 1e-12 for s in snaps):
            raise InvalidParameterError("snapshot times must lie between 0 and t_end")
        object.__setattr__(self, "snapshots", tuple(sorted(snaps, key=abs)))
        if self.grid is not None:
            self.check(self.grid)

    def check(self, grid: SpatialGrid) -> None:
        limit = max_stable_dt(grid, self.dealias)
        if self.dt > limit:
            raise InvalidParameterError(f"dt={self.dt:g} exceeds the stability bound {limit:.3g}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots ``u(t_k)``; iterating yields ``(t, field)`` pairs."""

    times: tuple
    fields: tuple = field(repr=False)
    steps: int = 0

    def __iter__(self):
        return iter(zip(self.times, self.fields))

    def __len__(self):
        return len(self.times)

    def at(self, t: float) -> RealField:
        for s, f in self:
            if math.isclose(s, t, rel_tol=1e-12, abs_tol=1e-12):
                return f
        raise KeyError(t)


def step_evolve(u0: RealField, cfg: StepperConfig) -> Trajectory:
    """Integrate from ``0`` through every snapshot time of ``cfg``.

    Between consecutive output times the step is shrunk so that it divides
    the interval exactly.
    """
    g = u0.grid
    cfg.check(g)
    xi = g.xi
    mask = _retained_modes(g, cfg.dealias)
    lin = 1j * xi * np.abs(xi)

    def N(v):
        w = np.fft.ifft(v * mask).real
        return -1j * xi * np.fft.fft(w * w) * mask

    v = np.fft.fft(u0.values)
    t_now, steps = 0.0, 0
    times, fields = [], []
    if cfg.snapshots and cfg.snapshots[0] == 0:
        times.append(0.0)
        fields.append(u0)
    for target in cfg.snapshots:
        span = target - t_now
        n = int(math.ceil(abs(span) / cfg.dt - 1e-9))
        if n > 0:
            dt = span / n
            E = np.exp(lin * dt / 2)
            E2 = E * E
            for _ in range(n):
                k1 = N(v)
                k2 = N(E * (v + dt / 2 * k1))
                k3 = N(E * v + dt / 2 * k2)
                k4 = N(E2 * v + dt * E * k3)
                v = E2 * v + dt / 6 * (E2 * k1 + 2 * E * (k2 + k3) + k4)
                steps += 1
                bound = np.abs(v).sum() / g.point_count
                if not np.isfinite(bound) or bound > BLOW_UP:
                    if not np.isfinite(bound) or np.max(np.abs(np.fft.ifft(v))) > BLOW_UP:
                        raise BlowUpError(f"solution exceeded {BLOW_UP:g} near t={t_now + dt:g}")
                t_now += dt
            t_now = target
        if target != 0 or not times:
            times.append(float(target))
            fields.append(RealField(g, np.fft.ifft(v).real))
    return Trajectory(tuple(times), tuple(fields), steps)


@dataclass(frozen=True, eq=False)
class MonitorTable:
    """Per-snapshot mass, L^2 norm and ``||L_u Pi u||``."""

    times: np.ndarray
    mass: np.ndarray
    l2: np.ndarray
    lax: np.ndarray

    def rows(self):
        return list(zip(self.times.tolist(), self.mass.tolist(), self.l2.tolist(), self.lax.tolist()))

    def relative_drift(self) -> dict:
        def drift(a):
            ref = abs(a[0])
            return float(np.max(np.abs(a - a[0])) / ref) if ref > 0 else float(np.max(np.abs(a)))
        return {"mass": drift(self.mass), "l2": drift(self.l2), "lax": drift(self.lax)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "mass", "l2", "lax"])
        w.writerows(self.rows())
        return buf.getvalue()


def conserved_monitors(snapshots) -> MonitorTable:
    """Mass, L^2 norm and the higher quantity ``||L_{u(t)} Pi u(t)||`` for each snapshot."""
    ts, mass, l2, lax = [], [], [], []
    for t, u in snapshots:
        ts.append(t)
        mass.append(u.mass())
        l2.append(u.norm())
        lax.append(lax_apply(u, szego_project(u)).norm())
    return MonitorTable(np.array(ts), np.array(mass), np.array(l2), np.array(lax))
