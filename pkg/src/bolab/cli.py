"""Scenario runner: JSON configuration in, reports and field dumps out.

A configuration file holds one scenario object or ``{"scenarios": [...]}``.
Each scenario names a datum, a grid, a lambda grid and a list of times; the
runner computes the discrete spectrum, the scattering data, the resolution
report and any requested probes, then checks the results against the
scenario tolerances.  Artifacts go to ``<out>/<name>/``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import explicit_evolution as ev
from . import reference_solver as rs
from .data import box, gaussian, multi_soliton
from .errors import BolabError, ConfigParseError, GridDecayError
from .field_grid import RealField, field_from_json, field_from_text, field_to_text, make_grid
from .resolution import remainder_report
from .scattering import LambdaGrid, radiation_field, scattering_data
from .spectrum import discrete_spectrum, spectral_support

log = logging.getLogger("bolab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DECAY = 3
EXIT_TOLERANCE = 4
EXIT_NUMERICAL = 5

# Below this the soliton probe error is resolvent round-off, so no ordering in t is expected.
PROBE_FLOOR = 1e-6

DEFAULT_TOLERANCES = {
    "decay": 1e-2,
    "budget": 0.02,
    "modulus": 1e-3,
    "remainder_floor": 5e-3,
}


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment.

    ``datum`` may combine several pieces, which are added:
    ``solitons`` (list of ``[Re p, Im p]``) with an optional ``negative``
    flag, ``gaussian`` (``{"amplitude", "width", "center"}``), ``box``
    (``{"amplitude", "half_length"}``) and ``file`` (a path to a field in
    text or JSON format, which fixes the grid).
    """

    name: str
    datum: dict
    L: float = 64.0
    M: int = 2048
    lambda_min: float = 0.2
    lambda_max: float = 4.0
    lambda_count: int = 64
    t_list: tuple = (0.0, 2.0, 5.0, 10.0)
    backend: str = "stepper"
    dt: float | None = None
    spectrum_method: str = "line"
    budget_xi_max: float | None = None
    tolerances: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    experimental: bool = False
    seed: int = 0
    description: str = ""

    @classmethod
    def from_dict(cls, d) -> "Scenario":
        if not isinstance(d, dict):
            raise ConfigParseError("a scenario must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigParseError(f"unknown scenario keys: {sorted(extra)}")
        if "name" not in d or "datum" not in d:
            raise ConfigParseError("a scenario needs 'name' and 'datum'")
        try:
            kw = dict(d)
            kw["t_list"] = tuple(float(t) for t in kw.get("t_list", cls.t_list))
            for key in ("L", "lambda_min", "lambda_max"):
                if key in kw:
                    kw[key] = float(kw[key])
            for key in ("M", "lambda_count", "seed"):
                if key in kw:
                    kw[key] = int(kw[key])
            s = cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigParseError(f"scenario {d.get('name')!r}: {exc}") from exc
        s.validate()
        return s

    def validate(self) -> None:
        if not isinstance(self.name, str) or not self.name or "/" in self.name:
            raise ConfigParseError("scenario name must be a nonempty string without '/'")
        if not isinstance(self.datum, dict) or not self.datum:
            raise ConfigParseError(f"{self.name}: datum must be a nonempty object")
        bad = set(self.datum) - {"solitons", "negative", "gaussian", "box", "file"}
        if bad:
            raise ConfigParseError(f"{self.name}: unknown datum keys {sorted(bad)}")
        if self.backend not in ("stepper", "explicit"):
            raise ConfigParseError(f"{self.name}: backend must be 'stepper' or 'explicit'")
        if self.spectrum_method not in ("grid", "line"):
            raise ConfigParseError(f"{self.name}: spectrum_method must be 'grid' or 'line'")
        if not (self.L > 0 and self.M >= 8 and self.M % 2 == 0):
            raise ConfigParseError(f"{self.name}: need L > 0 and an even M >= 8")
        if not 0 < self.lambda_min < self.lambda_max or self.lambda_count < 2:
            raise ConfigParseError(f"{self.name}: bad lambda grid")
        if not self.t_list:
            raise ConfigParseError(f"{self.name}: t_list is empty")
        bad = set(self.tolerances) - set(DEFAULT_TOLERANCES) - {"h1_remainder", "halving", "probe"}
        if bad:
            raise ConfigParseError(f"{self.name}: unknown tolerances {sorted(bad)}")
        bad = set(self.probes) - {"soliton", "radiation"}
        if bad:
            raise ConfigParseError(f"{self.name}: unknown probes {sorted(bad)}")

    def tolerance(self, key: str):
        return self.tolerances.get(key, DEFAULT_TOLERANCES.get(key))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["t_list"] = list(self.t_list)
        return d


def builtin_scenarios() -> list[Scenario]:
    """The acceptance suite."""
    return [
        Scenario("single-soliton", {"solitons": [[0.0, 1.0]]},
                 tolerances={"h1_remainder": 5e-3},
                 probes={"soliton": {"j": 1, "z": [0.0, 1.0], "t_list": [10.0, 100.0]}},
                 description="R_i on the default grid: one bound state, no radiation"),
        Scenario("anti-soliton", {"solitons": [[0.0, 1.0]], "negative": True},
                 L=512.0, M=8192, t_list=(5.0, 10.0, 20.0, 40.0), dt=0.01,
                 spectrum_method="grid",
                 tolerances={"halving": True},
                 probes={"radiation": {"center": 1.0, "half_width": 0.6, "t_list": [200.0],
                                       "lambda": [0.4, 1.6, 25]}},
                 description="-R_i: no bound states, pure dispersive radiation"),
        Scenario("two-soliton", {"solitons": [[-8.0, 1.0], [0.0, 2.0]]},
                 t_list=(10.0, 20.0, 30.0), budget_xi_max=20.0,
                 description="R_i ahead of R_2i by eight: two separating bound states"),
        Scenario("gaussian-mixed", {"solitons": [[-8.0, 1.0]],
                                    "gaussian": {"amplitude": 0.3, "width": 2.0, "center": -8.0}},
                 t_list=(0.0, 5.0, 10.0, 20.0),
                 description="R_i ahead of a small Gaussian: solitons plus radiation"),
        Scenario("box-datum-experimental", {"box": {"amplitude": 1.0, "half_length": 2.0}},
                 t_list=(0.0, 2.0, 5.0), experimental=True, budget_xi_max=20.0,
                 description="discontinuous datum; outside the smooth setting"),
    ]


def load_config(path) -> list[Scenario]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    items = doc.get("scenarios") if isinstance(doc, dict) and "scenarios" in doc else [doc]
    if not isinstance(items, list) or not items:
        raise ConfigParseError(f"{path}: expected a scenario or a nonempty 'scenarios' list")
    base = Path(path).parent
    out = []
    for item in items:
        s = Scenario.from_dict(item)
        if "file" in s.datum and not Path(s.datum["file"]).is_absolute():
            s = dataclasses.replace(s, datum={**s.datum, "file": str(base / s.datum["file"])})
        out.append(s)
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise ConfigParseError(f"{path}: duplicate scenario names")
    return out


# -- pipeline -------------------------------------------------------------------

def build_datum(s: Scenario) -> RealField:
    d = s.datum
    try:
        if "file" in d:
            text = Path(d["file"]).read_text()
            u = field_from_json(text) if d["file"].endswith(".json") else field_from_text(text)
            if not isinstance(u, RealField):
                raise ConfigParseError("a datum file must hold a real field")
            grid = u.grid
        else:
            grid = make_grid(s.L, s.M)
            u = RealField(grid, np.zeros(grid.point_count))
        if "solitons" in d:
            params = [complex(re, im) for re, im in d["solitons"]]
            if any(p.imag <= 0 for p in params):
                raise ConfigParseError("soliton parameters need Im p > 0")
            sol = multi_soliton(grid, params)
            u = u - sol if d.get("negative") else u + sol
        if "gaussian" in d:
            u = u + gaussian(grid, **d["gaussian"])
        if "box" in d:
            u = u + box(grid, **d["box"])
    except (OSError, TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigParseError):
            raise
        raise ConfigParseError(f"{s.name}: bad datum: {exc}") from exc
    return u


def decay_fraction(u: RealField) -> float:
    """``||u||`` on the outer tenth of the box relative to ``||u||``."""
    outer = np.abs(u.grid.x) > 0.9 * u.grid.half_width
    total = u.norm()
    if total == 0:
        return 0.0
    return float(np.sqrt(u.grid.spacing * np.sum(u.values[outer] ** 2)) / total)


def check_decay(u: RealField, tol: float, name: str = "datum") -> float:
    frac = decay_fraction(u)
    if frac >= tol:
        raise GridDecayError(f"{name}: {frac:.3g} of the norm sits in the outer 10% of the box "
                             f"(limit {tol:g}); enlarge L")
    return frac


def _bump(center: float, half_width: float):
    def phi(lam):
        s = (np.asarray(lam) - center) / half_width
        out = np.zeros_like(s, dtype=float)
        inside = np.abs(s) < 1
        out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out
    return phi


def _check(name, value, limit, passed) -> dict:
    return {"name": name, "value": float(value), "limit": limit, "passed": bool(passed)}


@dataclass
class RunResult:
    scenario: Scenario
    status: int
    report: dict
    checks: list

    @property
    def failed(self) -> list:
        return [c["name"] for c in self.checks if not c["passed"]]


def _fields_dir(out: Path | None, s: Scenario) -> Path | None:
    if out is None:
        return None
    d = Path(out) / s.name / "fields"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _tag(t: float) -> str:
    return format(t, "g").replace("-", "m")


def run_scenario(s: Scenario, out=None, workers: int = 1, eps: float | None = None,
                 xi_max: float | None = None, xi_points: int | None = None,
                 probes: tuple | None = None, snapshots: tuple = (),
                 t_end: float | None = None) -> RunResult:
    """Run the full pipeline for ``s`` and write artifacts under ``out``.

    Returns the exit status together with the report.  Configuration and
    decay problems raise; tolerance failures are reported through the status.
    """
    log.info("scenario %s", s.name)
    u0 = build_datum(s)
    frac = decay_fraction(u0) if s.datum.keys() == {"box"} else \
        check_decay(u0, s.tolerance("decay"), s.name)
    fields = _fields_dir(out, s)

    spec = discrete_spectrum(u0, method=s.spectrum_method)
    log.info("  N = %d", spec.count)

    lg = LambdaGrid.uniform(s.lambda_min, s.lambda_max, s.lambda_count)
    sd = scattering_data(u0, lg, keep_fields=False, workers=workers)
    gap = float(np.max(np.abs(np.abs(sd.dft_minus) - np.abs(sd.dft_plus))))

    top = spectral_support(u0)
    if s.budget_xi_max is not None:
        top = min(top, s.budget_xi_max)
    sd_budget = scattering_data(u0, LambdaGrid.graded(top), keep_fields=False,
                                workers=workers, signs=(-1,))
    u_inf, _ = radiation_field(u0, +1, workers=workers)
    rep = remainder_report(u0, spec, sd_budget, s.t_list, backend=s.backend, u_inf=u_inf,
                           dt=s.dt, budget_tol=s.tolerance("budget"), workers=workers)
    log.info("  remainder L2 %s", np.array2string(rep.l2_r, precision=3))

    checks = [
        _check("budget", rep.budget["relative"], s.tolerance("budget"), rep.flags["budget"]),
        _check("modulus", gap, s.tolerance("modulus"), gap < s.tolerance("modulus")),
    ]
    floor = s.tolerance("remainder_floor")
    slope = rep.decay_slope()
    checks.append(_check("trend", slope, 0.0, slope <= 0 or np.max(rep.l2_r) < floor))
    if "h1_remainder" in s.tolerances:
        lim = s.tolerances["h1_remainder"]
        checks.append(_check("h1_remainder", np.max(rep.h1_r), lim, np.max(rep.h1_r) < lim))
    if s.tolerances.get("halving"):
        checks.append(_check("halving", rep.l2_r[-1] / rep.l2_r[0], 0.5,
                             rep.l2_r[-1] < 0.5 * rep.l2_r[0]))

    refine = None
    if xi_points is not None:
        refine = max(2, math.ceil(xi_points * math.pi / (ev._top_frequency(u0, xi_max) * s.L)))
    wanted = set(s.probes) if probes is None else set(probes)
    probe_out = {}
    if "soliton" in wanted and spec.count > 0:
        cfg = s.probes.get("soliton", {})
        z = complex(*cfg.get("z", [0.0, 1.0]))
        res = ev.soliton_limit_probe(u0, spec, cfg.get("j", 1), z, cfg.get("t_list", s.t_list),
                                     xi_max=xi_max, refine=refine)
        err = res.errors()
        probe_out["soliton"] = res
        lim = s.tolerances.get("probe", 5e-2)
        checks.append(_check("soliton_probe", err[-1], lim,
                             err[-1] < lim and err[-1] <= max(err[0], PROBE_FLOOR)))
    if "radiation" in wanted:
        cfg = s.probes.get("radiation", {})
        lo, hi, n = cfg.get("lambda", [0.4, 1.6, 25])
        phi = _bump(cfg.get("center", 1.0), cfg.get("half_width", 0.6))
        t_probe = [t for t in cfg.get("t_list", s.t_list) if t > 0]
        sd_probe = scattering_data(u0, LambdaGrid.uniform(lo, hi, int(n)), keep_fields=False,
                                   workers=workers, signs=(-1,))
        res = ev.radiation_limit_probe(u0, sd_probe, phi, t_probe, eps=eps, xi_max=xi_max,
                                       refine=refine)
        probe_out["radiation"] = res
        scale = np.sqrt(sd_probe.lambda_grid.integrate(phi(sd_probe.lambda_grid.nodes) ** 2))
        rel = res.errors()[-1] / max(abs(res.predicted[-1]), scale * u0.norm())
        lim = s.tolerances.get("probe", 0.1)
        checks.append(_check("radiation_probe", rel, lim, rel < lim))

    report = {
        "scenario": s.to_dict(),
        "decay_fraction": frac,
        "spectrum": spec.to_dict(),
        "scattering": {"lambda_min": s.lambda_min, "lambda_max": s.lambda_max,
                       "lambda_count": s.lambda_count, "modulus_gap": gap,
                       "max_defect": float(np.max(sd.defects))},
        "resolution": rep.to_dict(),
        "probes": {k: {"rows": [list(map(float, r)) for r in v.rows()]}
                   for k, v in probe_out.items()},
        "checks": checks,
    }
    failed = [c for c in checks if not c["passed"]]
    status = EXIT_TOLERANCE if failed else EXIT_OK
    report["status"] = "tolerance-failure" if failed else "ok"

    if out is not None:
        root = Path(out) / s.name
        (root / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        (root / "resolution.csv").write_text(rep.to_csv())
        np.savez(root / "scattering.npz", **{"lambda": lg.nodes, "dft_minus": sd.dft_minus,
                                            "dft_plus": sd.dft_plus})
        (fields / "u0.txt").write_text(field_to_text(u0))
        (fields / "u_inf.txt").write_text(field_to_text(u_inf))
        for t, r in zip(rep.times, rep.remainders):
            (fields / f"r_t{_tag(t)}.txt").write_text(field_to_text(r))
        for k, v in probe_out.items():
            lines = ["t,value_re,value_im,predicted_re,predicted_im"]
            lines += [",".join(format(float(c), ".12g") for c in row) for row in v.rows()]
            (root / f"probe_{k}.csv").write_text("\n".join(lines) + "\n")
        if snapshots or t_end is not None:
            _dump_snapshots(u0, s, fields, snapshots, t_end)
    return RunResult(s, status, report, checks)


def _dump_snapshots(u0: RealField, s: Scenario, fields: Path, snapshots, t_end) -> None:
    snaps = tuple(sorted(snapshots))
    end = t_end if t_end is not None else max(snaps)
    dt = s.dt if s.dt is not None else min(1e-3, rs.max_stable_dt(u0.grid))
    traj = rs.step_evolve(u0, rs.StepperConfig(dt=dt, t_end=end, snapshots=snaps or (end,)))
    for t, u in traj:
        (fields / f"u_t{_tag(t)}.txt").write_text(field_to_text(u))
    (fields.parent / "monitors.csv").write_text(rs.conserved_monitors(traj).to_csv())


# -- command line ---------------------------------------------------------------

def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bolab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list", help="show the built-in scenarios")
    ls.add_argument("--json", action="store_true", help="print the full configurations")

    run = sub.add_parser("run", help="run a configuration file or a built-in scenario name")
    run.add_argument("config", help="path to a JSON configuration, or a built-in name")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--workers", type=int, default=1, help="threads for lambda sweeps")
    run.add_argument("--strict", action="store_true",
                     help="stop at the first tolerance failure, experimental scenarios included")
    g = run.add_argument_group("scattering")
    g.add_argument("--lambda-min", type=float)
    g.add_argument("--lambda-max", type=float)
    g.add_argument("--lambda-count", type=int)
    g = run.add_argument_group("explicit evolution")
    g.add_argument("--t-list", type=_floats, help="comma-separated report times")
    g.add_argument("--eps", type=float, help="offset above the real axis for the radiation probe")
    g.add_argument("--xi-max", type=float, help="frequency cutoff of the resolvent grid")
    g.add_argument("--xi-points", type=int, help="minimum number of resolvent grid points")
    g.add_argument("--probe", choices=("soliton", "radiation"), action="append",
                   help="run only these probes (repeatable)")
    g = run.add_argument_group("time stepper")
    g.add_argument("--dt", type=float)
    g.add_argument("--t-end", type=float, help="horizon of the snapshot dump")
    g.add_argument("--snap", type=_floats, default=(), help="comma-separated snapshot times")
    return ap


def _resolve(target: str) -> list[Scenario]:
    builtins = {s.name: s for s in builtin_scenarios()}
    if not Path(target).exists() and target in builtins:
        return [builtins[target]]
    return load_config(target)


def _apply_overrides(s: Scenario, args) -> Scenario:
    kw = {}
    for attr in ("lambda_min", "lambda_max", "lambda_count", "t_list", "dt"):
        val = getattr(args, attr)
        if val is not None:
            kw[attr] = val
    if not kw:
        return s
    s = dataclasses.replace(s, **kw)
    s.validate()
    return s


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "list":
        for s in builtin_scenarios():
            if args.json:
                print(json.dumps(s.to_dict(), sort_keys=True))
            else:
                flag = "  [experimental]" if s.experimental else ""
                print(f"{s.name:24s} {s.description}{flag}")
        return EXIT_OK

    try:
        scenarios = [_apply_overrides(s, args) for s in _resolve(args.config)]
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    for s in scenarios:
        try:
            res = run_scenario(s, args.out, workers=args.workers, eps=args.eps,
                               xi_max=args.xi_max, xi_points=args.xi_points,
                               probes=tuple(args.probe) if args.probe else None,
                               snapshots=args.snap, t_end=args.t_end)
        except ConfigParseError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except GridDecayError as exc:
            print(f"grid decay error: {exc}", file=sys.stderr)
            return EXIT_DECAY
        except BolabError as exc:
            print(f"{s.name}: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        word = "ok" if res.status == EXIT_OK else "FAILED " + ",".join(res.failed)
        print(f"{s.name}: N={res.report['spectrum']['N']} {word}")
        if res.status != EXIT_OK:
            if s.experimental and not args.strict:
                continue
            status = EXIT_TOLERANCE
            if args.strict:
                break
    return status


if __name__ == "__main__":
    sys.exit(main())
