#!/usr/bin/env python3
"""Run every experiment family against the shipped lattice and calibration.

Writes CSV tables, fit JSONs, and SVG plots under out/ (or a directory given
as the first argument). Expect a few minutes at the default 8000 shots.
"""
import sys
import time
from pathlib import Path

from nisq_lab.cli import main

EXPERIMENTS = [
    ["t1", "--qubit", "0", "--plot"],
    ["t2-ramsey", "--qubit", "0", "--plot"],
    ["t2-echo", "--qubit", "0", "--plot"],
    ["cnot-chain"],
    ["ccnot-survey"],
    ["qft-perfect"],
    ["qpe-sweep", "--plot"],
]


def run(out_root: Path, seed: int = 7) -> int:
    for argv in EXPERIMENTS:
        out = out_root / argv[0]
        args = argv + ["--seed", str(seed), "--out", str(out)]
        print(f"\n=== nisq-lab {' '.join(args)}")
        start = time.time()
        code = main(args)
        print(f"=== done in {time.time() - start:.1f}s (exit {code})")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    sys.exit(run(root))
