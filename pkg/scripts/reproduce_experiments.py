#!/usr/bin/env python3
"""Reproduce the desk-scale experiments: a min-support sweep plus the
worked pattern-replay example. Writes CSVs and the final tree dump into
results/ at the repository root.

Usage: python3 scripts/reproduce_experiments.py [--real-clock]

The default simulated clock makes every output deterministic; pass
--real-clock to measure wall time instead (slower, machine-dependent).
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
RESULTS = ROOT / "results"
GOLDEN = ROOT / "tests" / "data" / "golden_patterns.txt"


def run(args, **kwargs):
    print("+", " ".join(args))
    return subprocess.run(args, check=True, **kwargs)


def main():
    clock = "real" if "--real-clock" in sys.argv[1:] else "simulated"
    RESULTS.mkdir(exist_ok=True)

    run(
        [
            sys.executable, "-m", "tiltstream", "sweep",
            "--sigmas", "0.002,0.004,0.006,0.008",
            "--window-ms", "5000",
            "--shake-n", "10",
            "--fading-support", "2",
            "--rate", "200",
            "--universe", "100",
            "--max-tx-len", "5",
            "--max-batches", "30",
            "--clock", clock,
            "--seed", "7",
            "--out", str(RESULTS / f"sweep_{clock}.csv"),
        ]
    )

    completed = run(
        [
            sys.executable, "-m", "tiltstream", "run",
            "--replay-patterns", str(GOLDEN),
            "--shake-n", "3",
            "--fading-support", "2",
            "--flat-windows",
            "--dump-tree",
            "--out", str(RESULTS / "worked_example.csv"),
        ],
        capture_output=True,
        text=True,
    )
    (RESULTS / "worked_example_tree.txt").write_text(completed.stdout)
    print(f"results in {RESULTS}/")


if __name__ == "__main__":
    main()
