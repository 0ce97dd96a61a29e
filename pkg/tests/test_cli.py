import csv
import filecmp
import json
import math

import pytest

from dpa_lab.cli import main
from dpa_lab.errors import ConfigError, DpaError
from dpa_lab.figures import FIGURES, TABLES, run_figure, run_table
from dpa_lab.scenario import ScenarioConfig, format_number, render_csv, run_point

Z = math.sqrt(1.5)


def _read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def _stdout_rows(text):
    return list(csv.DictReader([line for line in text.splitlines() if not line.startswith("#")]))


def test_config_round_trip():
    cfg = ScenarioConfig(family="cc", z1=1.0, z2=0.5, phi=(0.0, 1.0), cutoff=30, format="json")
    assert ScenarioConfig.from_json(cfg.to_json()) == cfg
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"family": "cc", "zz": 1})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "cc", "r": 1.0},
        {"family": "cc", "z1": 1.0, "nbar_total": 2.0},
        {"family": "tt", "split": 0.5},
        {"family": "vac", "cutoff": 2},
        {"family": "cc", "quad_nodes": 7},
        {"family": "xx"},
        {"format": "xml"},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        ScenarioConfig(**kwargs)


def test_hash_ignores_output_location():
    a = ScenarioConfig(family="tmsv", r=0.5)
    assert a.config_hash() == a.replace(out="/elsewhere", workers=4).config_hash()
    assert a.config_hash() != a.replace(r=0.6).config_hash()


@pytest.mark.parametrize(
    "value, text",
    [(0.0, "0"), (1.0, "1"), (0.1, "0.1"), (1 / 3, "0.333333333333"), (2.5e-20, "2.5e-20"), (-0.0, "0"), (7, "7")],
)
def test_number_format(value, text):
    assert format_number(value) == text


def test_nan_never_written():
    with pytest.raises(DpaError):
        render_csv(["x"], [[float("nan")]], [])


def test_point_coherent_pi(capsys):
    argv = ["point", "--family", "cc", "--z1", str(Z), "--z2", str(Z), "--phi", str(math.pi), "--quantity", "npt_closed"]
    assert main(argv) == 0
    rows = _stdout_rows(capsys.readouterr().out)
    assert float(rows[0]["npt"]) == pytest.approx(1.0, abs=1e-12)


def test_point_vacuum_wln_json(capsys):
    assert main(["point", "--family", "vac", "--quantity", "wln", "--format", "json"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["quantity"] == "wln"
    value = record["rows"][0][record["columns"].index("wln")]
    assert value == pytest.approx(0.3551, abs=5e-3)
    assert record["convergence"] and record["timestamp"]


def test_point_thermal_zero(capsys):
    assert main(["point", "--family", "tt", "--nbar1", "0", "--nbar2", "0", "--quantity", "npt_numeric"]) == 0
    assert float(_stdout_rows(capsys.readouterr().out)[0]["npt"]) == pytest.approx(1.0, abs=1e-12)


def test_run_point_phase_list():
    rec = run_point(ScenarioConfig(family="tt", nbar1=1.0, nbar2=1.0, phi=(0.0, 1.0, 2.0)), "npt_closed")
    assert len(rec.rows) == 3
    assert all(r[-1] == pytest.approx((math.sqrt(5) - 1) / 3) for r in rec.rows)


def test_flags_override_config_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"family": "cc", "z1": 0.2, "z2": 0.2, "phi": 0.0}))
    assert main(["point", "--config", str(path), "--phi", str(math.pi)]) == 0
    assert float(_stdout_rows(capsys.readouterr().out)[0]["npt"]) == pytest.approx(1.0)
    # a budget on the command line replaces the explicit parameters of the file
    assert main(["point", "--config", str(path), "--nbar-total", "0"]) == 0
    assert float(_stdout_rows(capsys.readouterr().out)[0]["npt"]) == pytest.approx(1.0)


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_exit_code_config_error(capsys):
    assert main(["point", "--family", "cc", "--r", "1.0"]) == 2
    assert _error(capsys)["exit_code"] == 2
    assert main(["figure", "fig9"]) == 2
    assert _error(capsys)["error"] == "ConfigError"


def test_exit_code_bad_config_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text('{"family": "cc", "colour": 1}')
    assert main(["point", "--config", str(path)]) == 2
    path.write_text("not json")
    assert main(["point", "--config", str(path)]) == 2
    capsys.readouterr()


def test_exit_code_truncation(capsys):
    assert main(["point", "--family", "cc", "--z1", "3", "--z2", "0", "--cutoff", "12", "--quantity", "npt_numeric"]) == 4
    err = _error(capsys)
    assert err["required_cutoff"][0] > 12


def test_exit_code_convergence(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"family": "cc", "z1": 1.2, "z2": 1.2, "phi": math.pi, "tol_wln": 1e-15, "quad_nodes": 2}))
    assert main(["point", "--config", str(path), "--quantity", "wln"]) == 3
    assert len(_error(capsys)["estimates"]) == 2


def test_fig3_schema(tmp_path):
    run_figure("fig3", ScenarioConfig(out=str(tmp_path)))
    rows = _read_csv(tmp_path / "fig3.csv")
    assert list(rows[0]) == ["nbar_total", "npt_cc_phi0", "npt_cc_phi_pi2", "npt_cc_phi_pi", "npt_tt", "npt_ss", "npt_tms"]
    assert float(rows[0]["nbar_total"]) == 0
    assert all(float(v) == 1.0 for v in rows[0].values() if v != "0")


def test_fig5_schema(tmp_path):
    run_figure("fig5", ScenarioConfig(out=str(tmp_path)))
    rows = _read_csv(tmp_path / "fig5.csv")
    assert list(rows[0]) == ["phi", "p00", "p11", "p22", "p33", "p44"]
    last = rows[-1]
    assert float(last["phi"]) == pytest.approx(math.pi)
    assert all(abs(float(last[k])) < 1e-20 for k in ("p11", "p22", "p33", "p44"))


def test_fig6_file_count(tmp_path):
    files = run_figure("fig6", ScenarioConfig(out=str(tmp_path), resolution=21))
    grids = [f for f in files if f.endswith(".csv")]
    assert len(grids) == 16
    manifest = json.loads((tmp_path / "fig6_manifest.json").read_text())
    assert set(manifest) == {"figure", "files", "config", "versions", "convergence"}
    assert sorted(manifest["files"]) == sorted(grids)


def test_t1_rows(tmp_path):
    run_table("t1", ScenarioConfig(out=str(tmp_path)))
    rows = {r["state"]: r for r in _read_csv(tmp_path / "t1.csv")}
    assert rows["ss input"]["npt_closed"] == "0" and rows["ss input"]["verdict"] == "Separable"
    assert float(rows["tmsv input"]["npt_numeric"]) == pytest.approx(0.96403, abs=1e-5)
    assert float(rows["tmsv input"]["npt_numeric"]) == pytest.approx(2 * math.tanh(1) / (1 + math.tanh(1) ** 2), abs=1e-8)
    assert all(float(r["abs_diff"]) < 1e-8 for r in rows.values())


def test_t2_rows(tmp_path):
    run_table("t2", ScenarioConfig(out=str(tmp_path)))
    rows = {r["state"]: r for r in _read_csv(tmp_path / "t2.csv")}
    assert rows["tmsv output"]["discorrelation"] == "Yes"
    assert rows["tt output"]["discorrelation"] == "No"
    assert all(r["grid_points"] == r["grid_consistent"] for r in rows.values())


def test_unknown_ids():
    with pytest.raises(ConfigError):
        run_figure("fig1", ScenarioConfig())
    with pytest.raises(ConfigError):
        run_table("t3", ScenarioConfig())
    assert "fig7" in FIGURES and "t2" in TABLES


@pytest.mark.parametrize("target", ["t1", "t2", "fig5"])
def test_parallel_output_is_identical(tmp_path, target):
    runner = run_table if target.startswith("t") else run_figure
    a, b = tmp_path / "a", tmp_path / "b"
    files = runner(target, ScenarioConfig(out=str(a)))
    runner(target, ScenarioConfig(out=str(b), workers=4))
    match, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    assert not mismatch and not errors and len(match) == len(files)


def test_json_output_format(tmp_path):
    files = run_table("t1", ScenarioConfig(out=str(tmp_path), format="json"))
    data = json.loads((tmp_path / files[0]).read_text())
    assert data["columns"][0] == "state"
    assert files[0].endswith(".json")
