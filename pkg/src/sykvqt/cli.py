"""Command-line driver: thermal ensembles, TFD maps, resource tables, replay.

Exit codes: 0 success, 1 configuration error, 2 compute error,
3 partial failure (some points below the fidelity target or failed).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import output
from .pauli import cluster_commuting
from .engine import DEFAULT_BETAS, OPTIMIZERS, VqtConfig, instance_seeds, resource_report, run_ensemble
from .syk import SykInstance, SykParams, instance_digest, parse_digest, sample
from .tfd import B_CONVENTIONS, TfdParams, tfd_fidelity_map

log = logging.getLogger("sykvqt")

SUBCOMMANDS = ("thermal", "tfd", "resources", "replay")
OUTPUT_ROOT_ENV = "SYKVQT_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_PARTIAL = 0, 1, 2, 3
DEFAULT_MU_GRID = tuple(np.linspace(0.05, 2.0, 20).tolist())
DEFAULT_TFD_BETAS = tuple(np.geomspace(1.0, 35.0, 20).tolist())


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str = "thermal"
    N: int = 6
    J: float = 1.0
    mode: str = "dense"
    k: float = 8.7
    seed: int = 0
    n_instances: int = 1
    beta_grid: tuple[float, ...] = DEFAULT_BETAS
    target_fidelity: float = 0.9
    max_layers: int = 10
    optimizer: str = "lbfgsb"
    tol: float = 1e-8
    max_iter: int = 2000
    init_seed: int = 0
    escalation: str = "alternate"
    joint: bool = True
    restarts: int = 3
    shots: int | None = None
    workers: int = 1
    output_dir: str = ""
    format: str = "csv"
    replay: tuple[str, ...] = ()
    records: tuple[str, ...] = ()
    mu_grid: tuple[float, ...] = DEFAULT_MU_GRID
    tfd_beta_grid: tuple[float, ...] = DEFAULT_TFD_BETAS
    b_convention: str = "same"
    instance_seeds: tuple[int, ...] = field(default=())

    @property
    def syk(self) -> SykParams:
        return SykParams(self.N, self.J, self.mode, self.k, self.seed)

    @property
    def vqt(self) -> VqtConfig:
        return VqtConfig(self.beta_grid, self.target_fidelity, self.max_layers, self.optimizer, self.tol,
                         self.max_iter, self.init_seed, self.escalation, self.joint, self.restarts, self.shots)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


_FIELDS = {f.name for f in fields(RunConfig)}
_TUPLE_FIELDS = {"beta_grid", "replay", "records", "mu_grid", "tfd_beta_grid", "instance_seeds"}


def parse_grid(text: str) -> tuple[float, ...]:
    """``1,2,5`` or ``lin:start:stop:num`` or ``geom:start:stop:num``."""
    text = text.strip()
    try:
        if text.startswith(("lin:", "geom:")):
            kind, a, b, num = text.split(":")
            fn = np.linspace if kind == "lin" else np.geomspace
            return tuple(float(v) for v in fn(float(a), float(b), int(num)))
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, help="number of Majorana fermions (even)")
    p.add_argument("--J", type=float, help="coupling scale")
    p.add_argument("--mode", choices=("dense", "sparse"))
    p.add_argument("--k", type=float, help="sparse connectivity (default 8.7)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--instances", dest="n_instances", type=int)
    p.add_argument("--format", choices=output.FORMATS)
    p.add_argument("--out", dest="output_dir", help=f"output directory (default under ${OUTPUT_ROOT_ENV})")
    p.add_argument("--config", dest="config_file", help="JSON config file; flags override its values")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sykvqt", description="Variational thermal states of the SYK model.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    th = sub.add_parser("thermal", help="optimize thermal states over an instance ensemble")
    _add_model_flags(th)
    th.add_argument("--beta-grid", type=parse_grid)
    th.add_argument("--target-fidelity", type=float)
    th.add_argument("--max-layers", type=int)
    th.add_argument("--optimizer", choices=OPTIMIZERS)
    th.add_argument("--tol", type=float)
    th.add_argument("--max-iter", type=int)
    th.add_argument("--init-seed", type=int)
    th.add_argument("--escalation", choices=("alternate", "vqc1-first", "vqc2-first"))
    th.add_argument("--alternating", dest="joint", action="store_const", const=False,
                    help="optimize VQC1 and VQC2 angles alternately instead of jointly")
    th.add_argument("--restarts", type=int)
    th.add_argument("--shots", type=int, help="estimate the reported probabilities from this many samples")
    th.add_argument("--workers", type=int)
    th.add_argument("--replay", nargs="+", help="instance digest files to use instead of sampling")

    tf = sub.add_parser("tfd", help="TFD ground-state vs thermal-state fidelity map")
    _add_model_flags(tf)
    tf.add_argument("--mu-grid", type=parse_grid)
    tf.add_argument("--beta-grid", dest="tfd_beta_grid", type=parse_grid)
    tf.add_argument("--target-fidelity", type=float)
    tf.add_argument("--b-convention", choices=B_CONVENTIONS)

    rs = sub.add_parser("resources", help="parameter, layer and CNOT tables")
    _add_model_flags(rs)
    rs.add_argument("--records", nargs="+", help="records files from earlier thermal runs")

    rp = sub.add_parser("replay", help="re-run from an emitted config.json")
    rp.add_argument("--config", dest="config_file", required=True)
    rp.add_argument("--out", dest="output_dir")
    rp.add_argument("--workers", type=int)
    rp.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in _TUPLE_FIELDS & set(data):
        data[key] = tuple(data[key])
    return data


def _default_output_dir(cfg: RunConfig) -> str:
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    return str(Path(root) / f"{cfg.subcommand}_N{cfg.N}_{cfg.mode}_seed{cfg.seed}")


def _load_digests(paths: Sequence[str]) -> list[SykInstance]:
    out = []
    for path in paths:
        try:
            out.append(parse_digest(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read digest {path}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"invalid digest {path}: {exc}") from None
    return out


def validate(cfg: RunConfig) -> RunConfig:
    """Check every field and fill in derived values; raises ConfigError."""
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"subcommand must be one of {SUBCOMMANDS}")
    try:
        params = cfg.syk
        if cfg.subcommand == "thermal":
            cfg.vqt
        if cfg.subcommand == "tfd":
            TfdParams(params, mu_grid=cfg.mu_grid, beta_grid=cfg.tfd_beta_grid, b_convention=cfg.b_convention,
                      target_fidelity=cfg.target_fidelity)
            if any(not b > 0 for b in cfg.tfd_beta_grid):
                raise ValueError("beta grid must be positive")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.n_instances < 1:
        raise ConfigError("instances must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.format not in output.FORMATS:
        raise ConfigError(f"format must be one of {output.FORMATS}")
    if cfg.replay:
        insts = _load_digests(cfg.replay)
        seeds = tuple(i.params.seed for i in insts)
        for inst in insts:
            if (inst.params.N, inst.params.mode) != (cfg.N, cfg.mode):
                raise ConfigError("digest N/mode disagree with the configuration")
        if cfg.n_instances != len(insts):
            raise ConfigError(f"--instances {cfg.n_instances} conflicts with {len(insts)} replay digests")
    else:
        seeds = tuple(instance_seeds(cfg.seed, cfg.n_instances))
    if cfg.instance_seeds and tuple(cfg.instance_seeds) != seeds:
        raise ConfigError("instance_seeds do not match the master seed")
    for path in cfg.records:
        if not Path(path).is_file():
            raise ConfigError(f"records file {path} not found")
    cfg = replace(cfg, instance_seeds=seeds)
    if not cfg.output_dir:
        cfg = replace(cfg, output_dir=_default_output_dir(cfg))
    return cfg


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    ns = build_parser().parse_args(argv)
    values: dict = {}
    if getattr(ns, "config_file", None):
        values.update(_load_file(ns.config_file))
    if ns.subcommand == "replay":
        if "subcommand" not in values or values["subcommand"] == "replay":
            raise ConfigError("replay config must name the original subcommand")
    else:
        values["subcommand"] = ns.subcommand
    explicit = {k: v for k, v in vars(ns).items() if k in _FIELDS and k != "subcommand" and v is not None}
    if "replay" in explicit:
        explicit["replay"] = tuple(str(Path(p).resolve()) for p in explicit["replay"])
    if "records" in explicit:
        explicit["records"] = tuple(explicit["records"])
    mode = explicit.get("mode", values.get("mode", "dense"))
    if mode == "dense" and "k" in explicit:
        raise ConfigError("--k only applies to sparse mode")
    if explicit.get("replay") and "seed" in explicit:
        raise ConfigError("--seed conflicts with --replay (seeds come from the digests)")
    if explicit.get("replay") and "n_instances" not in explicit and "n_instances" not in values:
        explicit["n_instances"] = len(explicit["replay"])
    if ns.subcommand == "replay" and "output_dir" not in explicit:
        base = values.get("output_dir") or _default_output_dir(RunConfig(**values))
        explicit["output_dir"] = str(Path(base) / "replay")
    values.update(explicit)
    if "workers" not in values:
        values["workers"] = os.cpu_count() or 1
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return validate(cfg)


# --- subcommands ------------------------------------------------------------


def _instances(cfg: RunConfig) -> list[SykInstance]:
    if cfg.replay:
        return _load_digests(cfg.replay)
    return [sample(replace(cfg.syk, seed=s)) for s in cfg.instance_seeds]


def _write_config(cfg: RunConfig, out: Path) -> None:
    (out / "config.json").write_text(cfg.to_json())


def run_thermal(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    instances = _instances(cfg)
    ens = run_ensemble(cfg.syk, cfg.n_instances, cfg.vqt, workers=cfg.workers, instances=instances)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(cfg, out)
    (out / "instances").mkdir(exist_ok=True)
    for i, inst in enumerate(ens.instances):
        (out / "instances" / f"instance_{i:03d}.txt").write_text(instance_digest(inst))
    output.write_results(ens.results, ens.summary, out, cfg.format)
    output.emit_plot_script(ens.summary, out / "plot")
    report = resource_report(ens.results)
    for name, rows in report.items():
        output.write_table(rows, out / f"resources_{name}")
    n_bad = ens.n_failed
    n_nan = sum(1 for r in ens.results if np.isnan(r.fidelity))
    print(f"{len(ens.results) - n_bad}/{len(ens.results)} points reached fidelity {cfg.target_fidelity}; "
          f"outputs in {out}")
    if n_nan == len(ens.results):
        return EXIT_COMPUTE
    return EXIT_PARTIAL if n_bad else EXIT_OK


def run_tfd(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    params = TfdParams(cfg.syk, mu_grid=cfg.mu_grid, beta_grid=cfg.tfd_beta_grid, b_convention=cfg.b_convention,
                       target_fidelity=cfg.target_fidelity)
    inst = sample(cfg.syk)
    fmap = tfd_fidelity_map(params, inst)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(cfg, out)
    (out / "instance.txt").write_text(instance_digest(inst))
    output.write_rows(output.tfd_rows(fmap), out / "tfd_map", cfg.format)
    best = [{"mu": float(mu), "best_beta": float(b), "max_fidelity": float(f), "degeneracy": int(d)}
            for mu, b, f, d in zip(fmap.mu_grid, fmap.best_beta(), fmap.fidelity.max(axis=1), fmap.degeneracy)]
    output.write_rows(best, out / "tfd_best_beta", cfg.format)
    output.emit_tfd_plot(fmap, out / "plot")
    print(f"TFD map ({len(fmap.mu_grid)} x {len(fmap.beta_grid)}), {int(fmap.region.sum())} points above "
          f"{fmap.target}; outputs in {out}")
    return EXIT_OK


def run_resources(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    rows = []
    for i, inst in enumerate(_instances(cfg)):
        h = inst.hamiltonian
        clusters = cluster_commuting(h)
        cnots2 = sum(2 * c.cnot_count + sum(2 * (d.weight - 1) for d in c.diagonal_terms) for c in clusters)
        n = inst.params.n_qubits
        rows.append({"instance": i, "seed": inst.params.seed, "N": inst.params.N, "mode": inst.params.mode,
                     "vqc1_params_per_layer": 3 * n, "vqc2_params_per_layer": len(h),
                     "clusters": len(clusters), "vqc1_cnots_per_layer": 1 if n == 2 else n,
                     "vqc2_cnots_per_layer": cnots2})
    out.mkdir(parents=True, exist_ok=True)
    _write_config(cfg, out)
    output.write_table(rows, out / "resources_static")
    counts = np.array([r["vqc2_params_per_layer"] for r in rows], dtype=float)
    print(f"N={cfg.N} {cfg.mode}: VQC2 parameters per layer mean {counts.mean():.2f} over {len(rows)} instance(s)")
    if cfg.records:
        results = [r for path in cfg.records for r in output.read_records(Path(path))]
        for name, table in resource_report(results).items():
            output.write_table(table, out / f"resources_{name}")
    return EXIT_OK


RUNNERS = {"thermal": run_thermal, "tfd": run_tfd, "resources": run_resources}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.DEBUG if ("-v" in argv or "--verbose" in argv) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return RUNNERS[cfg.subcommand](cfg)
    except (OSError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        log.exception("run failed")
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
