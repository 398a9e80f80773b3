import json
import subprocess
import sys
import time

import pytest

from sykvqt import cli
from sykvqt.engine import DEFAULT_BETAS, instance_seeds

FAST = ["--beta-grid", "1,10", "--max-iter", "300"]


@pytest.fixture(autouse=True)
def output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    return tmp_path


def test_defaults_from_example():
    cfg = cli.parse_config(["thermal", "--N", "6", "--mode", "dense", "--instances", "10", "--seed", "42"])
    assert cfg.beta_grid == DEFAULT_BETAS
    assert cfg.n_instances == 10
    assert cfg.instance_seeds == tuple(instance_seeds(42, 10))
    assert cfg.vqt.target_fidelity == 0.9


def test_sparse_default_k():
    assert cli.parse_config(["thermal", "--N", "6", "--mode", "sparse"]).k == 8.7


@pytest.mark.parametrize("argv", [
    ["thermal", "--N", "7"],
    ["thermal", "--N", "6", "--k", "4"],
    ["thermal", "--bogus"],
    ["thermal", "--target-fidelity", "2"],
    ["thermal", "--optimizer", "adam"],
    ["thermal", "--instances", "0"],
    ["thermal", "--beta-grid", "1,x"],
    ["thermal", "--beta-grid", "0,1"],
    ["thermal", "--shots", "0"],
    ["tfd", "--shots", "10"],
    ["tfd", "--N", "14"],
    ["replay"],
    [],
])
def test_invalid_configs_exit_1(argv, output_root):
    t0 = time.perf_counter()
    assert cli.main(argv) == cli.EXIT_CONFIG
    assert time.perf_counter() - t0 < 1.0
    assert not (output_root / "root").exists()


def test_config_file_and_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"N": 8, "seed": 3, "max_layers": 4}))
    cfg = cli.parse_config(["thermal", "--config", str(path), "--seed", "5"])
    assert (cfg.N, cfg.seed, cfg.max_layers) == (8, 5, 4)


def test_unknown_config_key(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"N": 8, "temperature": 3}))
    with pytest.raises(cli.ConfigError, match="temperature"):
        cli.parse_config(["thermal", "--config", str(path)])


def test_tampered_seeds_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 1, "n_instances": 2, "instance_seeds": [1, 2]}))
    with pytest.raises(cli.ConfigError):
        cli.parse_config(["thermal", "--config", str(path)])


@pytest.mark.parametrize("text, expected", [
    ("1,2,3", (1.0, 2.0, 3.0)),
    ("lin:1:3:3", (1.0, 2.0, 3.0)),
    ("geom:1:100:3", (1.0, 10.0, 100.0)),
])
def test_parse_grid(text, expected):
    assert cli.parse_grid(text) == pytest.approx(expected)


def test_thermal_run_and_replay(tmp_path):
    out = tmp_path / "run"
    code = cli.main(["thermal", "--N", "6", "--instances", "2", "--seed", "42", "--out", str(out), *FAST])
    assert code == cli.EXIT_OK
    for name in ("records.csv", "summary.csv", "timings.csv", "config.json", "plot/panel_energy.csv",
                 "plot/plot_thermal.py", "instances/instance_000.txt", "resources_layers.csv"):
        assert (out / name).exists(), name
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["instance_seeds"] == instance_seeds(42, 2)
    assert len((out / "summary.csv").read_text().splitlines()) == 3
    assert cli.main(["replay", "--config", str(out / "config.json")]) == cli.EXIT_OK
    for name in ("records.csv", "summary.csv"):
        assert (out / name).read_bytes() == (out / "replay" / name).read_bytes()


def test_replay_from_digest(tmp_path):
    out = tmp_path / "a"
    cli.main(["thermal", "--N", "6", "--seed", "7", "--out", str(out), *FAST])
    digest = out / "instances" / "instance_000.txt"
    cli.main(["thermal", "--N", "6", "--replay", str(digest), "--out", str(tmp_path / "b"), *FAST])
    assert (out / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_replay_conflicts(tmp_path):
    out = tmp_path / "a"
    cli.main(["thermal", "--N", "6", "--seed", "7", "--out", str(out), *FAST])
    digest = str(out / "instances" / "instance_000.txt")
    assert cli.main(["thermal", "--N", "6", "--replay", digest, "--seed", "3"]) == cli.EXIT_CONFIG
    assert cli.main(["thermal", "--N", "6", "--replay", digest, "--instances", "2"]) == cli.EXIT_CONFIG
    assert cli.main(["thermal", "--N", "8", "--replay", digest]) == cli.EXIT_CONFIG
    assert cli.main(["thermal", "--N", "6", "--replay", str(tmp_path / "missing.txt")]) == cli.EXIT_CONFIG


def test_partial_failure_exit_code(tmp_path):
    argv = ["thermal", "--N", "6", "--beta-grid", "35", "--max-layers", "1", "--target-fidelity", "1.0",
            "--max-iter", "50", "--out", str(tmp_path / "p")]
    assert cli.main(argv) == cli.EXIT_PARTIAL


def test_jsonl_format(tmp_path):
    cli.main(["thermal", "--N", "6", "--format", "jsonl", "--out", str(tmp_path / "j"), *FAST])
    lines = (tmp_path / "j" / "records.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["layers1"] >= 1


def test_default_output_root(output_root):
    cli.main(["thermal", "--N", "6", "--seed", "1", *FAST])
    assert (output_root / "root" / "thermal_N6_dense_seed1" / "records.csv").exists()


def test_tfd_subcommand(tmp_path):
    out = tmp_path / "t"
    code = cli.main(["tfd", "--N", "6", "--mu-grid", "0.5,1", "--beta-grid", "geom:1:4:3", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert len((out / "tfd_map.csv").read_text().splitlines()) == 7
    assert (out / "plot" / "tfd_heatmap.csv").exists()


def test_resources_subcommand(tmp_path):
    run = tmp_path / "run"
    cli.main(["thermal", "--N", "6", "--out", str(run), *FAST])
    out = tmp_path / "res"
    code = cli.main(["resources", "--N", "8", "--instances", "2", "--records", str(run / "records.csv"),
                     "--out", str(out)])
    assert code == cli.EXIT_OK
    rows = (out / "resources_static.csv").read_text().splitlines()
    assert rows[1].split(",")[5] == "70"
    assert (out / "resources_cnots.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sykvqt", "thermal", "--N", "5"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "N must be" in proc.stderr
