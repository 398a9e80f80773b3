"""Thermal-state ensembles for the dense and sparse models over a range of N.

Writes one CLI-style run directory per (mode, N) under --out, each with
records, summary, panel data and a plotting script.

    python3 scripts/run_ensembles.py --sizes 6 8 --instances 10 --out runs/ensembles
"""

import argparse
import sys
from pathlib import Path

from sykvqt import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--modes", nargs="+", default=["dense", "sparse"], choices=["dense", "sparse"])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="runs/ensembles")
    args = ap.parse_args()
    worst = 0
    for mode in args.modes:
        for N in args.sizes:
            out = Path(args.out) / f"{mode}_N{N}"
            code = cli.main(["thermal", "--N", str(N), "--mode", mode, "--instances", str(args.instances),
                             "--seed", str(args.seed), "--workers", str(args.workers), "--out", str(out)])
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
