import json

import pytest

from bolab import cli
from bolab.data import gaussian
from bolab.errors import ConfigParseError, GridDecayError
from bolab.field_grid import field_to_text, make_grid

SMALL = {
    "name": "small-gaussian",
    "datum": {"gaussian": {"amplitude": 0.3, "width": 1.5}},
    "L": 32.0, "M": 512,
    "lambda_count": 8,
    "t_list": [0.0, 1.0],
    "budget_xi_max": 6.0,
}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def test_builtins():
    names = [s.name for s in cli.builtin_scenarios()]
    assert "anti-soliton" in names
    assert len(names) == len(set(names))
    flagged = {s.name: s.experimental for s in cli.builtin_scenarios()}
    assert flagged["box-datum-experimental"]
    assert not flagged["single-soliton"]


def test_list_command(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "two-soliton" in out and "[experimental]" in out
    assert cli.main(["list", "--json"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert json.loads(lines[0])["name"] == "single-soliton"


@pytest.mark.parametrize("doc", [
    "{not json",
    {"name": "x"},
    {"name": "x", "datum": {"solitons": [[0, 1]]}, "colour": 3},
    {"name": "x", "datum": {"wave": 1}},
    {"name": "x", "datum": {"solitons": [[0, 1]]}, "backend": "magic"},
    {"name": "x", "datum": {"solitons": [[0, 1]]}, "M": 7},
    {"scenarios": []},
])
def test_malformed_config(tmp_path, doc):
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    if not isinstance(doc, str):
        with pytest.raises(ConfigParseError):
            cli.load_config(write(tmp_path, doc))


def test_bad_soliton_parameter(tmp_path):
    doc = {"name": "x", "datum": {"solitons": [[0, -1]]}}
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG


def test_insufficient_decay(tmp_path):
    doc = {"name": "tight", "datum": {"solitons": [[0, 1]]}, "L": 2.0, "M": 64}
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path)]) == cli.EXIT_DECAY
    with pytest.raises(GridDecayError):
        cli.run_scenario(cli.Scenario.from_dict(doc))


def test_decay_fraction_of_default_soliton():
    s = cli.builtin_scenarios()[0]
    assert cli.decay_fraction(cli.build_datum(s)) < 2e-3


def test_small_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", write(tmp_path, SMALL), "--out", str(out), "--snap", "0.5"]) == 0
    root = out / "small-gaussian"
    report = json.loads((root / "report.json").read_text())
    assert report["status"] == "ok"
    # a positive Gaussian carries one weakly bound state
    assert report["spectrum"]["N"] == 1
    assert -1e-3 < report["spectrum"]["lambdas"][0] < 0
    assert all(c["passed"] for c in report["checks"])
    assert (root / "resolution.csv").read_text().startswith("t,L2_u,L2_sol,L2_rad,L2_r,H1_r")
    for name in ("u0.txt", "u_inf.txt", "r_t0.txt", "r_t1.txt", "u_t0.5.txt"):
        assert (root / "fields" / name).exists()
    assert (root / "monitors.csv").exists()
    assert (root / "scattering.npz").exists()


def test_reports_are_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL)
    cli.main(["run", cfg, "--out", str(tmp_path / "a")])
    cli.main(["run", cfg, "--out", str(tmp_path / "b"), "--workers", "2"])
    a = (tmp_path / "a" / "small-gaussian" / "report.json").read_bytes()
    b = (tmp_path / "b" / "small-gaussian" / "report.json").read_bytes()
    assert a == b


def test_overrides(tmp_path):
    cfg = write(tmp_path, SMALL)
    argv = ["run", cfg, "--out", str(tmp_path), "--t-list", "0,0.5", "--lambda-min", "0.5",
            "--lambda-count", "4", "--dt", "0.002"]
    assert cli.main(argv) == 0
    report = json.loads((tmp_path / "small-gaussian" / "report.json").read_text())
    assert report["resolution"]["times"] == [0.0, 0.5]
    assert report["scenario"]["dt"] == 0.002
    assert report["scattering"]["lambda_min"] == 0.5
    bad = ["run", cfg, "--out", str(tmp_path), "--lambda-min", "5"]
    assert cli.main(bad) == cli.EXIT_CONFIG


def test_tolerance_failure_and_strict(tmp_path):
    tight = {**SMALL, "name": "tight", "tolerances": {"budget": 1e-16}}
    cfg = write(tmp_path, tight)
    assert cli.main(["run", cfg, "--out", str(tmp_path)]) == cli.EXIT_TOLERANCE
    res = cli.run_scenario(cli.Scenario.from_dict(tight))
    assert res.failed == ["budget"] and res.status == cli.EXIT_TOLERANCE

    exp = {"scenarios": [{**tight, "experimental": True}, {**SMALL, "name": "after"}]}
    cfg = write(tmp_path, exp, "exp.json")
    assert cli.main(["run", cfg, "--out", str(tmp_path / "lenient")]) == 0
    assert (tmp_path / "lenient" / "after" / "report.json").exists()
    assert cli.main(["run", cfg, "--out", str(tmp_path / "strict"), "--strict"]) == cli.EXIT_TOLERANCE
    assert not (tmp_path / "strict" / "after").exists()


def test_datum_from_file(tmp_path):
    g = make_grid(32.0, 512)
    (tmp_path / "u0.txt").write_text(field_to_text(gaussian(g, 0.3, 1.5)))
    doc = {**SMALL, "name": "from-file", "datum": {"file": "u0.txt"}}
    s = cli.load_config(write(tmp_path, doc))[0]
    u = cli.build_datum(s)
    assert u.grid.point_count == 512
    assert (u - gaussian(g, 0.3, 1.5)).norm() < 1e-14


def test_probe_columns(tmp_path):
    doc = {**SMALL, "name": "probed", "datum": {"solitons": [[0, 1]]}, "L": 64.0, "M": 1024,
           "probes": {"soliton": {"z": [0, 1], "t_list": [1.0, 2.0]}}}
    res = cli.run_scenario(cli.Scenario.from_dict(doc), tmp_path)
    rows = (tmp_path / "probed" / "probe_soliton.csv").read_text().splitlines()
    assert rows[0] == "t,value_re,value_im,predicted_re,predicted_im"
    assert len(rows) == 3
    assert "soliton_probe" in [c["name"] for c in res.checks]


@pytest.mark.slow
def test_single_soliton_builtin(tmp_path):
    assert cli.main(["run", "single-soliton", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "single-soliton" / "report.json").read_text())
    assert report["spectrum"]["N"] == 1
