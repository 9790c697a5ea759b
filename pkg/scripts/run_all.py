"""Run every named experiment with its default config and print the verdicts.

    python scripts/run_all.py [--out results] [--workers 4]
"""

import argparse
import sys
import time
from pathlib import Path

from lowrank_aqc.cli import main
from lowrank_aqc.config import EXPERIMENTS


def run(out: Path, workers: int) -> int:
    worst = 0
    for name in EXPERIMENTS:
        t0 = time.perf_counter()
        code = main([name, "--out", str(out / name), "--workers", str(workers)])
        print(f"== {name}: exit {code} ({time.perf_counter() - t0:.1f}s)\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    sys.exit(run(a.out, a.workers))
