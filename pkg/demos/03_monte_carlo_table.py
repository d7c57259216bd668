"""
A Monte Carlo table
===================

Repeat synthesize, corrupt and fit many times, then compare the mean squared
error of each estimate with its asymptotic variance. Replicate ``r`` uses
seed ``base_seed + r``, so the table is reproducible and independent of the
number of worker processes.
"""

import sys

from chirp2d import ChirpComponent, ChirpModel, McConfig, NoiseSpec, run_mc
from chirp2d.model import MA_KERNEL

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 50
model = ChirpModel([ChirpComponent(2.0, 3.0, 1.5, 0.5, 2.5, 0.75)])

for label, kernel in (("iid noise", {(0, 0): 1.0}), ("moving-average noise", MA_KERNEL)):
    cfg = McConfig(model, NoiseSpec(0.5, kernel), M=25, N=25, replicates=replicates)
    rep = run_mc(cfg)
    print(f"\n{label}, M=N=25, sigma=0.5, {replicates} replicates ({rep.wall_time:.1f} s)")
    print(f"{'':>6} {'':>5}" + "".join(f"{p:>11}" for p in ("alpha", "beta", "gamma", "delta")))
    for method in cfg.methods:
        cell = rep.cell(method)
        for stat in ("bias", "mse", "avar"):
            row = getattr(cell, stat)[2:]
            print(f"{method:>6} {stat:>5}" + "".join(f"{v:11.2e}" for v in row))

# the same table as CSV, laid out row by row: True, Avg, Bias, MSE, AVar
print()
print(rep.to_csv())
