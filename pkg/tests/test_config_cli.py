"""Configuration parsing, sweep orchestration, report emission, and the CLI."""

import json
import math

import numpy as np
import pytest

import driftlab.cli as cli
import driftlab.runner as runner
from driftlab.config import build_model, parse_config, soliton_gamma
from driftlab.errors import ConfigError
from driftlab.reports import (BARRIER_COLUMNS, SWEEP_COLUMNS, barrier_table,
                              emit_csv, format_value, render_csv, render_json)


def _base_config(**overrides):
    data = {
        "schema_version": 1,
        "family": {"name": "sphere", "n": [2],
                   "density": {"name": "cosine", "eps": [0.1]}},
        "grids": [200],
        "checks": ["spectrum"],
    }
    data.update(overrides)
    return data


def test_parse_happy_path_defaults():
    config = parse_config(_base_config())
    assert config.family == "sphere"
    assert config.n == (2,)
    assert config.b == 1.01
    assert config.bins == 200
    assert config.l_max == 2
    assert config.workers == 1
    assert config.tolerances["bound_margin"] == 1e-6
    assert config.formats == ("csv",)


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(_base_config(surprise=1))
    bad_family = _base_config()
    bad_family["family"]["typo"] = True
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(bad_family)
    bad_density = _base_config()
    bad_density["family"]["density"] = {"name": "cosine", "eps": [0.1], "huh": 2}
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(bad_density)


def test_parse_rejects_bad_values():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(_base_config(schema_version=99))
    with pytest.raises(ConfigError, match="manifold family"):
        parse_config(_base_config(family={"name": "torus", "n": [2]}))
    with pytest.raises(ConfigError, match="non-empty"):
        parse_config(_base_config(family={"name": "sphere", "n": []}))
    with pytest.raises(ConfigError, match="non-empty"):
        parse_config(_base_config(checks=[]))
    with pytest.raises(ConfigError, match="unknown check"):
        parse_config(_base_config(checks=["spectrum", "vibes"]))
    with pytest.raises(ConfigError, match="n >= 2"):
        parse_config(_base_config(family={"name": "sphere", "n": [1]}))
    with pytest.raises(ConfigError, match="b must exceed"):
        parse_config(_base_config(b=0.99))
    with pytest.raises(ConfigError, match="tolerance"):
        parse_config(_base_config(tolerances={"bound_margin": -1.0}))
    with pytest.raises(ConfigError, match="unknown tolerance"):
        parse_config(_base_config(tolerances={"wat": 1.0}))
    with pytest.raises(ConfigError, match="soliton"):
        parse_config(_base_config(checks=["soliton"]))
    with pytest.raises(ConfigError, match="not 'length'"):
        parse_config(_base_config(family={"name": "sphere", "n": [2], "length": 2.0}))
    with pytest.raises(ConfigError, match="not 'radius'"):
        parse_config(_base_config(
            family={"name": "circle", "length": 6.0, "radius": 1.0}))


def test_tolerance_profiles():
    strict = parse_config(_base_config(), tolerance_profile="strict")
    assert strict.tolerances["bound_margin"] == 1e-9
    override = parse_config(_base_config(tolerances={"gradient": 0.05}))
    assert override.tolerances["gradient"] == 0.05


def test_instances_expand_and_sort():
    config = parse_config(_base_config(
        family={"name": "sphere", "n": [3, 2],
                "density": {"name": "cosine", "eps": [0.5, 0.1]}},
        grids=[100, 50]))
    keys = [i.key for i in config.instances()]
    assert len(keys) == 8
    assert keys == sorted(keys, key=lambda k: k) or keys[0].startswith("sphere:n=2")
    assert keys[0] == "sphere:n=2:density=cosine(0.1):N=50"


def test_build_models():
    config = parse_config(_base_config())
    inst = config.instances()[0]
    model = build_model(config, inst)
    assert model.n == 2 and abs(model.L - math.pi) < 1e-15

    circle_cfg = parse_config({
        "schema_version": 1,
        "family": {"name": "circle", "length": 6.0,
                   "density": {"name": "cosine", "eps": [0.2]}},
        "checks": ["spectrum"],
    })
    cmodel = build_model(circle_cfg, circle_cfg.instances()[0])
    assert cmodel.topology == "circle" and cmodel.L == 6.0

    stretched = parse_config({
        "schema_version": 1,
        "family": {"name": "stretched-sphere", "n": [2], "length": 2.5},
        "checks": ["spectrum"],
    })
    smodel = build_model(stretched, stretched.instances()[0])
    assert smodel.L == 2.5


def test_soliton_gamma_resolution():
    config = parse_config(_base_config(
        checks=["soliton"],
        soliton={"gamma": "einstein", "f": {"name": "zero"}}))
    assert soliton_gamma(config, 3) == 2.0
    fixed = parse_config(_base_config(
        checks=["soliton"], soliton={"gamma": 1.5, "f": {"name": "cosine", "eps": 0.1}}))
    assert soliton_gamma(fixed, 3) == 1.5


def test_run_spectrum_row():
    config = parse_config(_base_config(grids=[400]))
    report = runner.run(config)
    assert report.summary["instances"] == 1
    row = report.rows[0]
    assert abs(row["lambda1"] - 2.0015) < 1e-2
    assert row["verdict_spectrum"] is True
    assert report.all_passed


def test_run_failing_soliton_check_is_reported():
    config = parse_config(_base_config(
        checks=["soliton"],
        soliton={"gamma": 1.0, "f": {"name": "cosine", "eps": 0.1}},
        grids=[300]))
    report = runner.run(config)
    assert report.rows[0]["verdict_soliton"] is False
    assert not report.all_passed


def test_run_isolates_instance_failures(monkeypatch):
    config = parse_config(_base_config(
        family={"name": "sphere", "n": [2, 3],
                "density": {"name": "cosine", "eps": [0.1]}},
        grids=[200]))
    original = runner.run_instance

    def explode_on_n3(cfg, inst):
        if inst.n == 3:
            raise RuntimeError("boom")
        return original(cfg, inst)

    monkeypatch.setattr(runner, "run_instance", explode_on_n3)
    report = runner.run(config)
    assert report.summary["instances"] == 2
    assert report.summary["errors"] == 1
    good = [r for r in report.rows if not r.get("error")]
    assert len(good) == 1 and good[0]["n"] == 2


def test_run_concurrent_matches_serial():
    config = parse_config(_base_config(
        family={"name": "sphere", "n": [2, 3],
                "density": {"name": "cosine", "eps": [0.1, 0.3]}},
        grids=[200], checks=["spectrum", "bounds"]))
    serial = runner.run(config)
    concurrent = runner.run(parse_config(_base_config(
        family={"name": "sphere", "n": [2, 3],
                "density": {"name": "cosine", "eps": [0.1, 0.3]}},
        grids=[200], checks=["spectrum", "bounds"], workers=4)))
    assert render_csv(serial.rows, SWEEP_COLUMNS) == \
        render_csv(concurrent.rows, SWEEP_COLUMNS)


def test_case_barrier_selection():
    # each case label maps to the matching barrier family
    import dataclasses

    import driftlab as dl
    from driftlab.bounds import ling_case
    from driftlab.runner import _select_case_barrier
    from driftlab.spectral import assemble

    model = dl.sphere(2)
    grid = dl.Grid.uniform(model, 600)
    mode = dl.solve_eigen(assemble(model, grid, 0), 3).modes[1]
    nef = dl.normalize(mode, K=1.0, b=1.01)
    config = parse_config(_base_config())

    z_a = _select_case_barrier(config, nef, ling_case(0.0, nef.delta))
    assert z_a.a == 0.0 and z_a.mu == 1.0

    asym = dataclasses.replace(nef, a=0.5, K=0.6 * nef.lam)  # delta = 0.3
    case = ling_case(asym.a, asym.delta)
    assert case.label == "B-2-b1"
    z_b1 = _select_case_barrier(config, asym, case)
    assert z_b1.mu == pytest.approx(case.mu)

    tiny = dataclasses.replace(nef, a=1e-3)
    case2 = ling_case(tiny.a, tiny.delta)
    assert case2.label == "B-2-b2"
    z_b2 = _select_case_barrier(config, tiny, case2)
    assert z_b2.sigma == config.sigma
    assert z_b2.xi_coeff == pytest.approx(tiny.delta - config.sigma * tiny.c**2)


def test_csv_header_and_formatting():
    header = render_csv([], SWEEP_COLUMNS).splitlines()[0]
    assert header.startswith("instance,family,topology,n,L,density,N,b,bins,lambda1")
    assert format_value(math.pi) == "3.1415926535897931"
    assert format_value(True) == "true"
    assert format_value(None) == ""
    assert format_value(np.float64(0.1)) == "0.10000000000000001"
    assert format_value(7) == "7"
    # round-trip at 17 significant digits
    assert float(format_value(0.1 + 0.2)) == 0.1 + 0.2


def test_csv_render_deterministic():
    rows = [{"instance": "x", "lambda1": 1.0 / 3.0, "n": 2}]
    assert render_csv(rows, SWEEP_COLUMNS) == render_csv(rows, SWEEP_COLUMNS)


def test_json_round_trip():
    payload = {"schema_version": 1, "rows": [{"a": 0.1, "b": None, "c": [1, 2]}],
               "summary": {"passed": 1}}
    text = render_json(payload)
    assert json.loads(text) == payload


def test_barrier_table():
    rows = barrier_table(0.0, 1.01, 0.25, 1.0, points=1001)
    assert len(rows) == 1001
    assert rows[0]["t"] == -math.pi / 2.0
    assert rows[-1]["t"] == math.pi / 2.0
    assert abs(rows[0]["xi"]) < 1e-14
    assert abs(rows[0]["eta"] + 1.0) < 1e-14
    mid = rows[500]
    assert abs(mid["z"] - (1.0 + 0.25 * (1.0 - math.pi**2 / 4.0))) < 1e-12


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["sweep", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps(_base_config(surprise=1)))
    assert cli.main(["sweep", "--config", str(missing)]) == 2

    good = tmp_path / "good.json"
    good.write_text(json.dumps(_base_config(grids=[300])))
    code = cli.main(["spectrum", "--config", str(good), "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert code == 0
    assert "lambda1=2.0" in out
    assert (tmp_path / "o" / "report.csv").exists()

    # soliton-check without a soliton section is a usage error
    assert cli.main(["soliton-check", "--config", str(good)]) == 2

    failing = tmp_path / "failing.json"
    failing.write_text(json.dumps(_base_config(
        checks=["soliton"], grids=[300],
        soliton={"gamma": 1.0, "f": {"name": "cosine", "eps": 0.1}})))
    assert cli.main(["soliton-check", "--config", str(failing)]) == 1


def test_cli_grid_override(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_base_config(grids=[5000])))
    code = cli.main(["spectrum", "--config", str(good), "--grid", "200"])
    assert code == 0
    assert "N=200" in capsys.readouterr().out


def test_cli_emit_barriers(tmp_path, capsys):
    code = cli.main(["emit-barriers", "--out", str(tmp_path), "--points", "101",
                     "--delta", "0.25"])
    assert code == 0
    lines = (tmp_path / "barriers.csv").read_text().splitlines()
    assert lines[0] == ",".join(BARRIER_COLUMNS)
    assert len(lines) == 102


def test_emit_csv_writes_file(tmp_path):
    path = emit_csv([{"t": 0.0, "xi": 1.0}], tmp_path / "x.csv", ["t", "xi"])
    assert path.read_text() == "t,xi\n0,1\n"


def test_cli_help_paths():
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0
    with pytest.raises(SystemExit) as info:
        cli.main(["sweep", "--help"])
    assert info.value.code == 0
    with pytest.raises(SystemExit) as info:
        cli.main([])  # a subcommand is required
    assert info.value.code == 2
