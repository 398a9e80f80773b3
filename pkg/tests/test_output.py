import csv
import json

import numpy as np
import pytest

from sykvqt import output
from sykvqt.engine import VqtConfig, run_ensemble
from sykvqt.syk import SykParams
from sykvqt.tfd import FidelityMap


@pytest.fixture(scope="module")
def ensemble():
    return run_ensemble(SykParams(6, seed=3), 2, VqtConfig(beta_grid=(1.0, 10.0), max_iter=300))


def test_csv_records_and_summary(tmp_path, ensemble):
    paths = output.write_results(ensemble.results, ensemble.summary, tmp_path)
    with paths["records"].open() as fh:
        rows = list(csv.DictReader(fh))
    for col in ("beta", "loss", "energy", "entropy", "purity", "fidelity", "layers1", "layers2", "cnots"):
        assert col in rows[0]
    assert "wall_time" not in rows[0]
    assert len(rows) == 4
    assert len(output.read_rows(paths["summary"])) == 2
    assert paths["timings"].exists()


def test_jsonl_mirrors_csv(tmp_path, ensemble):
    a = output.write_results(ensemble.results, ensemble.summary, tmp_path / "a", "csv")
    b = output.write_results(ensemble.results, ensemble.summary, tmp_path / "b", "jsonl")
    from_csv = output.read_records(a["records"])
    from_json = output.read_records(b["records"])
    assert [r.record() for r in from_csv] == [r.record() for r in from_json]
    first = json.loads(b["records"].read_text().splitlines()[0])
    assert first["beta"] == 1.0


def test_records_round_trip_exactly(tmp_path, ensemble):
    paths = output.write_results(ensemble.results, ensemble.summary, tmp_path)
    back = output.read_records(paths["records"])
    assert [r.record() for r in back] == [r.record() for r in ensemble.results]


def test_order_is_by_instance_then_beta(tmp_path, ensemble):
    shuffled = list(reversed(ensemble.results))
    a = output.write_results(ensemble.results, ensemble.summary, tmp_path / "a")
    b = output.write_results(shuffled, ensemble.summary, tmp_path / "b")
    assert a["records"].read_bytes() == b["records"].read_bytes()


def test_empty_results_rejected(tmp_path):
    with pytest.raises(ValueError):
        output.write_results([], [], tmp_path)
    with pytest.raises(ValueError):
        output.write_rows([{"a": 1}], tmp_path / "x", "xml")


def test_plot_panels(tmp_path, ensemble):
    paths = output.emit_plot_script(ensemble.summary, tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["panel_energy.csv", "panel_entropy.csv", "panel_free_energy.csv", "panel_purity.csv",
                     "plot_thermal.py"]
    energy = output.read_rows(tmp_path / "panel_energy.csv")
    e0 = np.mean([r.ground_energy for r in ensemble.results if r.beta == 1.0])
    assert energy[0]["ground_energy"] == pytest.approx(e0)
    row = output.read_rows(tmp_path / "panel_free_energy.csv")[1]
    assert row["band2_lo"] <= row["band1_lo"] <= row["exact_mean"] <= row["band1_hi"] <= row["band2_hi"]
    compile((tmp_path / "plot_thermal.py").read_text(), "plot_thermal.py", "exec")


def test_plot_missing_columns(tmp_path):
    with pytest.raises(ValueError):
        output.emit_plot_script([{"beta": 1.0}], tmp_path)


def test_tfd_heatmap(tmp_path):
    fmap = FidelityMap(np.array([0.5, 1.0]), np.array([1.0, 2.0, 3.0]), np.array([[0.5, 0.95, 0.7], [0.99, 0.8, 0.1]]))
    data, script = output.emit_tfd_plot(fmap, tmp_path)
    rows = output.read_rows(data)
    assert len(rows) == 6
    assert [r["in_region"] for r in rows] == [0, 1, 0, 1, 0, 0]
    compile(script.read_text(), script.name, "exec")
