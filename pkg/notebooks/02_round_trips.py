# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Reconstruction round trips
#
# Synthesize noiseless tomograms, invert them with the linear kernels and
# compare with the input state. Each scheme has a knob that matters:
# the polar radius for symplectic data, the taper for homodyne data, and
# the angular sampling for photon counting.

# %%
from tomokit import forward, inverse, states

DIM = 32
cat = states.realize(states.EvenCat(1, 1), DIM)

# %% [markdown]
# ## Symplectic scheme
#
# The kernel integrates the characteristic function over a disk. The cat's
# characteristic function has side lobes near |k| = 2 sqrt 2 |alpha| which a
# disk of radius 6 clips; radius 8 holds them.

# %%
for radius in (4, 6, 8):
    tomo = forward.synthesize_symplectic(cat, forward.PolarGrid(radius, 48, 48))
    _, rep = inverse.reconstruct_symplectic(tomo, DIM, reference=cat)
    print(f"R={radius}: fidelity {rep.fidelity:.5f}  raw trace error {rep.trace_err:.1e}")

# %% [markdown]
# ## Homodyne scheme
#
# The exponential taper e^{-eps r} blurs the estimate by a first-order
# amount in eps. Combining the estimates at eps and eps/2 cancels that term.

# %%
small = states.realize(states.Fock(1), 16)
tomo = forward.synthesize_homodyne(small, 64)
for eps in (0.1, 0.05):
    _, plain = inverse.reconstruct_homodyne(tomo, 16, eps, reference=small, check_convergence=False)
    _, extra = inverse.reconstruct_homodyne(tomo, 16, eps, reference=small, check_convergence=False, extrapolate=True)
    print(f"eps={eps:<6} plain F={plain.fidelity:.4f}  extrapolated F={extra.fidelity:.4f}")

# %% [markdown]
# ## Photon-number scheme
#
# Orderings s in (-1, 0] are allowed. For s < 0 the kernel weights high
# photon numbers by a growing power, and 40 angles alias the angular
# harmonics; 64 angles resolve them.

# %%
photon = {n: forward.synthesize_photon(cat, forward.PolarGrid(5, 40, n, "laguerre")) for n in (40, 64)}
for s, n_theta in ((0.0, 40), (-0.2, 40), (-0.2, 64)):
    tomo = photon[n_theta]
    _, rep = inverse.reconstruct_photon(tomo, s, DIM, reference=cat)
    print(f"s={s:5}  angles={n_theta}: fidelity {rep.fidelity:.6f}")

try:
    inverse.check_ordering(-1.5)
except Exception as exc:
    print("s=-1.5:", type(exc).__name__, exc)
