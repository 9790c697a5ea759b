"""Where does the witness verdict become true?  Scan eps and tau for GUS with
the linear schedule and print the witness integral against its target.

    python scripts/robust_epsilon_scan.py [N]
"""

import sys

import numpy as np

from lowrank_aqc import build, gus_instance
from lowrank_aqc.schedules import Linear
from lowrank_aqc.witness import run_witness

if __name__ == "__main__":
    N = int(sys.argv[1]) if len(sys.argv) > 1 else 10**6
    rs = build(*gus_instance(N, 1)[:3])
    print(f"N = {N}, delta = {rs.delta:.3e}, target = {1 - 2 * 6 ** 0.5 / 5 - 2 * rs.delta:.3e}")
    print(f"{'eps':>8} {'tau':>9} {'I':>11} {'verdict':>7} {'overlap':>9}")
    for eps in (1e-5, 1e-4, 1e-3, 1e-2, 1e-1):
        for tau in np.geomspace(10, 1e4, 7):
            r = run_witness(rs, Linear(), float(tau), eps)
            print(f"{eps:8.0e} {tau:9.1f} {r.I:11.4e} {str(r.verdict):>7} {r.overlap:9.6f}")
