"""Parameter-count and circuit-depth tables (trainable parameters per layer,
average layers per beta, CNOT totals).

Static counts come from sampled Hamiltonians; layer and CNOT averages need
records files from earlier thermal runs (e.g. scripts/run_ensembles.py).

    python3 scripts/resource_tables.py --instances 100
    python3 scripts/resource_tables.py --records runs/ensembles/*/records.csv
"""

import argparse
from pathlib import Path

import numpy as np

from sykvqt import output
from sykvqt.engine import instance_seeds, resource_report
from sykvqt.syk import SykParams, sample


def parameter_table(sizes, instances, seed):
    rows = []
    for mode in ("dense", "sparse"):
        for N in sizes:
            counts = np.array([len(sample(SykParams(N, mode=mode, seed=s)).hamiltonian)
                               for s in instance_seeds(seed, instances)])
            p = SykParams(N, mode=mode)
            rows.append({"mode": mode, "N": N, "vqc1_params_per_layer": 3 * (N // 2),
                         "vqc2_params_mean": counts.mean(), "vqc2_params_std": counts.std(ddof=1) if instances > 1 else 0.0,
                         "vqc2_params_formula": p.p * p.n_tuples})
    return rows


def main():
    ap = argparse.ArgumentParser(description="resource tables")
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--records", nargs="*", default=[])
    ap.add_argument("--out", default="runs/resources")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = parameter_table(args.sizes, args.instances, args.seed)
    output.write_table(table, out / "params_per_layer")
    print(f"{'mode':>6} {'N':>3} {'VQC1':>5} {'VQC2 mean':>10} {'std':>6} {'formula':>8}")
    for r in table:
        print(f"{r['mode']:>6} {r['N']:>3} {r['vqc1_params_per_layer']:>5} {r['vqc2_params_mean']:>10.2f} "
              f"{r['vqc2_params_std']:>6.2f} {r['vqc2_params_formula']:>8.2f}")
    if args.records:
        results = [r for path in args.records for r in output.read_records(Path(path))]
        for name, rows in resource_report(results).items():
            output.write_table(rows, out / name)
        print(f"layer and CNOT tables from {len(results)} records written to {out}")


if __name__ == "__main__":
    main()
