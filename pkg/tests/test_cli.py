import json
import subprocess
import sys

import pytest

from levyfield.cli import EXIT_ASSUMPTION, EXIT_CONFIG, EXIT_OK, config_hash, main

EX31 = {
    "kernel": {"family": "FractionalLevy", "params": {"H": 0.5, "alpha": 2.0}},
    "basis": {"kind": "Gaussian", "params": {"sigma": 1.0}},
    "experiment": {"mode": "rectangent", "gammas": [0.5, 0.75, 1.0, 1.5, 2.0],
                   "lambdas": [0.125, 0.0625, 0.03125, 0.015625], "reps": 200, "bootstrap": 10, "fine": 64},
    "grid": {"n1": 8, "n2": 8, "h1": 0.125, "h2": 0.125, "truncation_radius": 1.0},
    "fbs": {"H1": 0.0, "H2": 0.5, "points": [[1, 1], [2, 1], [1, 2]], "reps": 500},
    "output": {"formats": ["csv", "json"], "seed": 7},
}


def write_config(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_params_fractional_levy(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["params", "--config", write_config(tmp_path, EX31), "--out", str(out)]) == EXIT_OK
    doc = json.loads((out / "params.json").read_text())
    assert doc["region"]["region"] == "R22"
    assert doc["profile"]["gamma0"] == pytest.approx(1.0)
    assert [h for _, h in doc["H_table"]] == pytest.approx([0.5, 0.5, 0.5, 0.75, 1.0])
    assert doc["config_sha256"] == config_hash(json.loads(json.dumps(EX31)))
    assert "R22" in capsys.readouterr().out


def test_params_heat(tmp_path):
    cfg = {**EX31, "kernel": {"family": "FractionalHeat", "params": {"chi": -0.5}}}
    out = tmp_path / "o"
    assert main(["params", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == EXIT_OK
    assert json.loads((out / "params.json").read_text())["profile"]["gamma0"] == pytest.approx(0.5)


def test_params_reports_violations(tmp_path, capsys):
    cfg = {**EX31, "kernel": {"family": "Custom", "params": {
        "expression": "exp(-(t1**2 + t2**2))", "q": [2, 2], "chi": 0.75, "smooth": True}}}
    out = tmp_path / "o"
    assert main(["params", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == EXIT_ASSUMPTION
    assert "P < α" in capsys.readouterr().out
    assert json.loads((out / "params.json").read_text())["violations"]


@pytest.mark.parametrize("change", [
    lambda c: c["grid"].update(n1=0),
    lambda c: c.update(extra=1),
    lambda c: c["output"].pop("seed"),
    lambda c: c["kernel"].update(family="Nope"),
])
def test_config_errors(tmp_path, change):
    cfg = json.loads(json.dumps(EX31))
    change(cfg)
    assert main(["simulate", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_missing_config(tmp_path):
    assert main(["params", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_seed_override(tmp_path):
    out = tmp_path / "o"
    main(["fbs", "--config", write_config(tmp_path, EX31), "--out", str(out), "--seed", "99"])
    assert json.loads((out / "fbs.json").read_text())["seed"] == 99


def test_simulate_outputs(tmp_path):
    out = tmp_path / "o"
    cfg = json.loads(json.dumps(EX31))
    cfg["output"]["formats"] = ["csv", "json", "svg"]
    assert main(["simulate", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == EXIT_OK
    assert (out / "field.bin").stat().st_size == 81 * 8
    assert (out / "field.csv").read_text().startswith("# config_sha256=")
    assert (out / "field.svg").exists()


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.suffix in (".csv", ".json")}


def test_scan_byte_identical_across_threads(tmp_path):
    cfg = write_config(tmp_path, EX31)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scan", "--config", cfg, "--out", str(a), "--threads", "1"]) == EXIT_OK
    assert main(["scan", "--config", cfg, "--out", str(b), "--threads", "4"]) == EXIT_OK
    assert _outputs(a) == _outputs(b)
    assert "kink" in json.loads((a / "scan.json").read_text())


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "levyfield", "params", "--config", write_config(tmp_path, EX31),
                        "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert r.returncode == 0
    assert "gamma0 = 1" in r.stdout
