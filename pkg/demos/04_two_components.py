"""
Peeling off two chirps
======================

With several components the fit is sequential: find the strongest chirp,
subtract its fitted signal, and search the residual for the next one. The
stronger component (larger ``A^2 + B^2``) comes out first.
"""

import numpy as np

from chirp2d import ChirpComponent, ChirpModel, NoiseSpec, generate_noise, sequential_fit, synthesize

model = ChirpModel(
    [
        ChirpComponent(5.0, 4.0, 2.1, 0.1, 1.25, 0.25),
        ChirpComponent(3.0, 2.0, 1.5, 0.5, 1.75, 0.75),
    ]
)
M = N = 50
y = synthesize(model, M, N) + generate_noise(NoiseSpec(0.1, seed=0), M, N)

# ask for one step more than there are components: the last step should find little
for method in ("alse", "lse"):
    fits = sequential_fit(y, 3, method)
    print(f"\n{method}")
    residual = y.copy()
    for k, fit in enumerate(fits, 1):
        c = fit.component
        residual -= synthesize(c, M, N)
        print(f"  step {k}: energy {c.energy:8.4f}  alpha={c.alpha:.4f} beta={c.beta:.4f} "
              f"gamma={c.gamma:.4f} delta={c.delta:.4f}  residual energy {np.sum(residual**2):9.3f}")

print("\ntrue energies", [round(c.energy, 1) for c in model])
