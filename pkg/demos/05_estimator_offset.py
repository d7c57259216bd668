"""
How far apart are the two estimators?
=====================================

The periodogram maximiser and the least squares estimator are asymptotically
equivalent, but on finite grids the periodogram peak sits slightly away from
the truth even without noise. This script measures that offset on noiseless
data and shows how it scales with the grid size.
"""

import numpy as np

from chirp2d import ChirpComponent, grid_init, refine_alse, refine_lse, synthesize

truth = ChirpComponent(2.0, 3.0, 1.5, 0.5, 2.5, 0.75)

print(f"{'M':>4} {'alpha offset':>13} {'x M':>8} {'gamma offset':>13} {'x M':>8} {'LSE max error':>14}")
for M in (25, 50, 100, 200):
    y = synthesize(truth, M, M)
    start = grid_init(y)
    alse = refine_alse(y, start).component
    lse = refine_lse(y, start).component
    da, dg = alse.alpha - truth.alpha, alse.gamma - truth.gamma
    lse_err = np.max(np.abs(np.array(lse.nonlinear) - truth.nonlinear))
    print(f"{M:>4} {da:13.2e} {da * M:8.3f} {dg:13.2e} {dg * M:8.3f} {lse_err:14.1e}")

# the offset shrinks irregularly as M grows, but at these sizes it is still far
# above the noise-driven spread of alpha (about 5e-5 at M=100 with sigma=0.1),
# so it dominates the difference between the two estimators
