import copy
import json
import shutil
import subprocess

import jsonschema
import numpy as np
import pytest

from schiffer import cli

SMALL = {
    "name": "small_circle",
    "surface": {"kind": "sphere"},
    "curves": [{"kind": "circle", "center": [0.0, 0.0], "radius": 1.0}],
    "basis_size": 6,
    "resolution": 24,
    "suites": ["adjoint", "index", "cohomology"],
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    names = set(cli.bundled_configs())
    assert len(names) >= 6 and {"torus_capped", "sphere_annulus_hm"} <= names
    assert all(n in out for n in names)


def test_bundled_configs_validate():
    for name, cfg in cli.bundled_configs().items():
        cli.validate_config(cfg)
        assert cfg["name"] == name


def test_missing_surface_exits_with_schema_code(tmp_path, capsys):
    cfg = copy.deepcopy(SMALL)
    del cfg["surface"]
    code = cli.main(["run", _write(tmp_path, cfg), "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_SCHEMA
    err = capsys.readouterr().err
    assert "surface" in err


def test_config_error_reports_pointer():
    cfg = copy.deepcopy(SMALL)
    cfg["curves"][0]["radius"] = "big"
    with pytest.raises(cli.ConfigError) as e:
        cli.validate_config(cfg)
    assert e.value.path.startswith("/curves/0")


def test_unreadable_config(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{ not json")
    assert cli.main(["verify", "--suite", "adjoint", "--config", str(p)]) == cli.EXIT_SCHEMA


def test_run_writes_deterministic_reports(tmp_path):
    src = _write(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", src, "--out", str(a)]) == cli.EXIT_OK
    assert cli.main(["run", src, "--out", str(b)]) == cli.EXIT_OK
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    report = json.loads((a / "report.json").read_text())
    jsonschema.validate(report, cli.load_schema("report"))
    assert report["exit_code"] == 0
    assert (a / "timings.json").exists()


def test_csv_round_trip(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", _write(tmp_path, SMALL), "--out", str(out)]) == cli.EXIT_OK
    csvs = sorted(out.glob("*.csv"))
    assert csvs
    text = csvs[0].read_text()
    assert text.splitlines()[0] == "index,sigma"
    data = np.loadtxt(csvs[0], delimiter=",", skiprows=1, ndmin=2)
    again = cli.export_csv(data[:, 1])
    assert again == text


def test_export_json_handles_non_finite():
    text = cli.export_json({"b": float("nan"), "a": 0.1, "c": [1j.imag, float("inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": 0.1, "b": None, "c": [1.0, None]}


def test_verify_single_suite(tmp_path, capsys):
    code = cli.main(["verify", "--suite", "adjoint", "--config", _write(tmp_path, SMALL)])
    assert code == cli.EXIT_OK
    assert "adjoint" in capsys.readouterr().out


def test_failing_tolerance_exit_code(tmp_path):
    code = cli.main(["verify", "--suite", "adjoint", "--config", _write(tmp_path, SMALL),
                     "--tolerance", "1e-300"])
    assert code == cli.EXIT_FAIL


def test_bundled_name_resolves():
    cfg = cli.read_config("sphere_circle")
    assert cfg["surface"]["kind"] == "sphere"


def test_thread_setting(monkeypatch):
    monkeypatch.setenv("SCHIFFER_THREADS", "1")
    cli._apply_threads()
    import os
    assert all(os.environ[v] == "1" for v in cli.THREAD_VARS)


@pytest.mark.skipif(shutil.which("schiffer") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["schiffer", "list-scenarios"], capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and "torus_capped" in res.stdout
