"""Loss trace of a single optimization next to the exact free energy.

    python3 scripts/convergence_trace.py --N 8 --beta 10
"""

import argparse

import numpy as np

from sykvqt.engine import VqtConfig, optimize_at_beta
from sykvqt.syk import SykParams, sample


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--mode", default="dense", choices=["dense", "sparse"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--beta", type=float, default=10.0)
    ap.add_argument("--optimizer", default="lbfgsb")
    ap.add_argument("--out", help="optional .npy file for the trace")
    args = ap.parse_args()
    inst = sample(SykParams(args.N, mode=args.mode, seed=args.seed))
    res = optimize_at_beta(inst, args.beta, VqtConfig(optimizer=args.optimizer))
    gap = res.loss_trace - res.exact_free_energy
    for i in np.unique(np.geomspace(1, len(gap), 12).astype(int)) - 1:
        print(f"eval {i + 1:6d}  loss - F_exact = {gap[i]:.3e}")
    print(f"layers ({res.layers1}, {res.layers2}), fidelity {res.fidelity:.4f}, {res.iterations} iterations")
    if args.out:
        np.save(args.out, res.loss_trace)


if __name__ == "__main__":
    main()
