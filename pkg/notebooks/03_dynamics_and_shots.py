# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Free evolution and finite statistics

# %%
import math

import numpy as np

from tomokit import dynamics, forward, inverse, states
from tomokit.fock import fidelity

coh = states.realize(states.Coherent(1), 32)
x = forward.uniform_grid(-10, 10, 1024)

# %% [markdown]
# Under the oscillator Hamiltonian a marginal at time t is the initial
# marginal at rotated parameters. The coherent amplitude turns clockwise,
# so the q-marginal mean follows sqrt 2 cos t.

# %%
for t in (0.0, 0.5, math.pi / 2, math.pi):
    w = dynamics.evolved_marginal(coh, (1, 0), x, t)
    mean = np.trapezoid(x * w.w, x)
    check = dynamics.parameter_rotation_check(coh, 1, 0, x, t)
    print(f"t={t:.3f}: <q>={mean:+.6f}  sqrt2 cos t={math.sqrt(2) * math.cos(t):+.6f}  rotation check {check:.1e}")

cat = states.realize(states.EvenCat(1, 1), 32)
print("fidelity after one period:", fidelity(cat, dynamics.evolve(cat, 2 * math.pi)))

# %% [markdown]
# ## Sampling
#
# Draw 10^5 homodyne outcomes per angle, bin them, and feed the histograms
# to the symplectic inversion. Homogeneity turns one histogram per angle
# into every radius along that ray.

# %%
shots = 100_000
polar = forward.PolarGrid(6, 48, 48)
rays = forward.polar_rays(coh, polar)
hists = [forward.sample_counts(r, shots, seed=100 + j) for j, r in enumerate(rays)]
print(f"mean of the phi=0 histogram: {hists[0].mean():.5f} (sqrt 2 = {math.sqrt(2):.5f})")
measured = [forward.histogram_to_slice(h, r) for h, r in zip(hists, rays)]
_, rep = inverse.reconstruct_symplectic(forward.expand_rays(measured, polar), 32, reference=coh)
print(f"fidelity from binned data: {rep.fidelity:.4f}, min eigenvalue before repair {rep.min_eig:.3f}")
