"""TFD fidelity map for one instance, with the T = mu line summary.

    python3 scripts/tfd_map.py --N 8 --seed 0 --out runs/tfd
"""

import argparse
from pathlib import Path

import numpy as np

from sykvqt import output
from sykvqt.engine import instance_seeds
from sykvqt.syk import SykParams, sample
from sykvqt.tfd import B_CONVENTIONS, TfdParams, tfd_fidelity_map


def main():
    ap = argparse.ArgumentParser(description="TFD ground state vs thermal state fidelity map")
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0, help="master seed; the first derived instance seed is used")
    ap.add_argument("--b-convention", choices=B_CONVENTIONS, default="same")
    ap.add_argument("--out", default="runs/tfd")
    args = ap.parse_args()
    inst = sample(SykParams(args.N, seed=instance_seeds(args.seed, 1)[0]))
    fmap = tfd_fidelity_map(TfdParams(inst.params, b_convention=args.b_convention), inst)
    out = Path(args.out)
    output.emit_tfd_plot(fmap, out)
    print(f"{'mu':>6} {'1/mu':>6} {'best beta':>9} {'max F':>7}")
    for mu, beta, f in zip(fmap.mu_grid, fmap.best_beta(), fmap.fidelity.max(axis=1)):
        print(f"{mu:6.3f} {1 / mu:6.2f} {beta:9.2f} {f:7.4f}")
    print(f"{int(fmap.region.sum())}/{fmap.region.size} grid points above {fmap.target}; data in {out}")


if __name__ == "__main__":
    main()
