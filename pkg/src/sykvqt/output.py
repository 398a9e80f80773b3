"""Record/summary writers, readers and plot-data emission."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import ThermalResult
from .tfd import FidelityMap

FORMATS = ("csv", "jsonl")
PANELS = ("free_energy", "energy", "entropy", "purity")
_VAR_KEY = {"free_energy": "loss", "energy": "energy", "entropy": "entropy", "purity": "purity"}


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _rows_to_text(rows: Sequence[dict], fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    buf = io.StringIO()
    if fmt == "jsonl":
        for row in rows:
            buf.write(json.dumps({k: _fmt(v) if not isinstance(v, float) else float(v) for k, v in row.items()}) + "\n")
        return buf.getvalue()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def write_rows(rows: Sequence[dict], path: Path, fmt: str = "csv") -> Path:
    if not rows:
        raise ValueError("nothing to write")
    path = Path(path).with_suffix("." + fmt)
    path.write_text(_rows_to_text(rows, fmt))
    return path


def write_results(results: Sequence[ThermalResult], summary: Sequence[dict], out_dir: Path,
                  fmt: str = "csv") -> dict[str, Path]:
    """records.<fmt> (one row per point, ordered by instance then beta),
    summary.<fmt> (one row per beta) and timings.csv (wall times, not reproducible)."""
    if not results:
        raise ValueError("no results to write")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: (r.instance, r.beta))
    paths = {
        "records": write_rows([r.record() for r in ordered], out_dir / "records", fmt),
        "summary": write_rows(list(summary), out_dir / "summary", fmt),
    }
    timings = [{"instance": r.instance, "beta": r.beta, "wall_time": r.wall_time, "iterations": r.iterations}
               for r in ordered]
    paths["timings"] = write_rows(timings, out_dir / "timings", "csv")
    return paths


_INT_FIELDS = {"instance", "seed", "N", "layers1", "layers2", "n_params1", "n_params2", "cnots", "iterations"}


def read_records(path: Path) -> list[ThermalResult]:
    path = Path(path)
    if path.suffix == ".jsonl":
        rows = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    else:
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        kwargs = {}
        for key, value in row.items():
            if key in _INT_FIELDS:
                kwargs[key] = int(value)
            elif key == "converged":
                kwargs[key] = value in (True, "True", "true", "1")
            elif key in ("mode", "error"):
                kwargs[key] = value or ""
            else:
                kwargs[key] = float(value)
        out.append(ThermalResult(**kwargs))
    return out


def read_rows(path: Path) -> list[dict]:
    path = Path(path)
    if path.suffix == ".jsonl":
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    with path.open() as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def panel_rows(summary: Sequence[dict]) -> dict[str, list[dict]]:
    """Four panels (F, <H>, S, P vs beta) with 1 and 2 sigma band columns."""
    panels = {}
    for panel in PANELS:
        rows = []
        for s in summary:
            try:
                mean, std = s[f"exact_{panel}_mean"], s[f"exact_{panel}_std"]
                var = _VAR_KEY[panel]
                row = {
                    "beta": s["beta"],
                    "exact_mean": mean,
                    "band1_lo": mean - std,
                    "band1_hi": mean + std,
                    "band2_lo": mean - 2 * std,
                    "band2_hi": mean + 2 * std,
                    "var_mean": s[f"var_{var}_mean"],
                    "var_std": s[f"var_{var}_std"],
                    "fidelity_mean": s["var_fidelity_mean"],
                }
            except KeyError as exc:
                raise ValueError(f"summary is missing column {exc}") from None
            if panel == "energy":
                row["ground_energy"] = s["ground_energy_mean"]
            rows.append(row)
        panels[panel] = rows
    return panels


_THERMAL_SCRIPT = '''"""Four-panel plot of the thermal-state summary written next to this file."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).parent
PANELS = {panels!r}


def load(name):
    with (HERE / f"panel_{{name}}.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    return {{k: [float(r[k]) for r in rows] for k in rows[0]}}


fig, axes = plt.subplots(1, 4, figsize=(16, 3.6))
for ax, (name, label) in zip(axes, PANELS.items()):
    d = load(name)
    ax.fill_between(d["beta"], d["band2_lo"], d["band2_hi"], color="gold", alpha=0.5, label="exact 2 sigma")
    ax.fill_between(d["beta"], d["band1_lo"], d["band1_hi"], color="limegreen", alpha=0.6, label="exact 1 sigma")
    ax.plot(d["beta"], d["exact_mean"], color="red", label="exact mean")
    ax.errorbar(d["beta"], d["var_mean"], yerr=d["var_std"], fmt="o", color="black", ms=3, label="variational")
    if "ground_energy" in d:
        ax.plot(d["beta"], d["ground_energy"], "k--", lw=1, label="ground energy")
    ax.set_xlabel("beta")
    ax.set_ylabel(label)
axes[0].legend(fontsize=7)
fig.tight_layout()
fig.savefig(HERE / "thermal_panels.pdf")
'''

_TFD_SCRIPT = '''"""Heatmap of the TFD fidelity map written next to this file."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).parent
with (HERE / "tfd_heatmap.csv").open() as fh:
    rows = list(csv.DictReader(fh))
mu = np.unique([float(r["mu"]) for r in rows])
beta = np.unique([float(r["beta"]) for r in rows])
fid = np.array([float(r["fidelity"]) for r in rows]).reshape(len(mu), len(beta))
fig, ax = plt.subplots(figsize=(5, 4))
mesh = ax.pcolormesh(beta, mu, fid, shading="nearest", vmin=0, vmax=1)
ax.contour(beta, mu, fid, levels=[{target}], colors="white")
ax.plot(1 / mu, mu, "r--", lw=1, label="T = mu")
ax.set_xscale("log")
ax.set_xlabel("beta")
ax.set_ylabel("mu")
ax.legend()
fig.colorbar(mesh, label="fidelity")
fig.tight_layout()
fig.savefig(HERE / "tfd_map.pdf")
'''


def emit_plot_script(summary: Sequence[dict], out_dir: Path) -> list[Path]:
    """Panel data files plus a matplotlib script (not executed)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [write_rows(rows, out_dir / f"panel_{name}", "csv") for name, rows in panel_rows(summary).items()]
    labels = {"free_energy": "F", "energy": "<H>", "entropy": "S", "purity": "P"}
    script = out_dir / "plot_thermal.py"
    script.write_text(_THERMAL_SCRIPT.format(panels=labels))
    return paths + [script]


def tfd_rows(fmap: FidelityMap) -> list[dict]:
    rows = []
    for a, mu in enumerate(fmap.mu_grid):
        for b, beta in enumerate(fmap.beta_grid):
            rows.append({"mu": float(mu), "beta": float(beta), "fidelity": float(fmap.fidelity[a, b]),
                         "in_region": int(fmap.region[a, b])})
    return rows


def emit_tfd_plot(fmap: FidelityMap, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = write_rows(tfd_rows(fmap), out_dir / "tfd_heatmap", "csv")
    script = out_dir / "plot_tfd.py"
    script.write_text(_TFD_SCRIPT.format(target=fmap.target))
    return [data, script]


def write_table(rows: Iterable[dict], path: Path) -> Path:
    return write_rows(list(rows), path, "csv")
