# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Forward model: marginals of a cat state
#
# Build the even cat state with amplitude 1+i in a 32-level Fock space and
# look at its quadrature marginals from three directions. The FFT pipeline
# is checked against the closed form, then against Wigner-function
# projections.

# %%
import math

import numpy as np

from tomokit import forward, states

rho = states.realize(states.EvenCat(1, 1), 32)
x = forward.uniform_grid(-10, 10, 1024)

for mu, nu in [(1, 0), (0, 1), (0.6, 0.8)]:
    w = forward.symplectic_marginal(rho, forward.QuadratureSpec(mu, nu), x)
    dev = np.abs(w.w - states.cat_marginal(1, 1, x, mu, nu)).max()
    print(f"mu={mu:4} nu={nu:4}  total={w.total():.8f}  max |fft - closed form| = {dev:.1e}")

# %% [markdown]
# Interference fringes show up along p: the two coherent components sit at
# p = +-sqrt 2, and their overlap term oscillates in q.

# %%
w_p = forward.symplectic_marginal(rho, forward.QuadratureSpec(0, 1), x)
peaks = x[1:-1][(w_p.w[1:-1] > w_p.w[:-2]) & (w_p.w[1:-1] > w_p.w[2:]) & (w_p.w[1:-1] > 0.05)]
print("p-marginal peaks:", np.round(peaks, 3))

w_q = forward.symplectic_marginal(rho, forward.QuadratureSpec(1, 0), x)
print("q-marginal at 0 vs closed form:", w_q.w[512], states.cat_marginal(1, 1, 0.0, 1, 0))

# %% [markdown]
# ## Scaling the direction
#
# Multiplying (mu, nu, x) by the same factor divides the density by it.

# %%
for lam in (0.5, 2.0, 3.0):
    xs = forward.uniform_grid(-8, 8, 512)
    a = forward.symplectic_marginal(rho, forward.QuadratureSpec(0.6 * lam, 0.8 * lam), lam * xs).w
    b = forward.symplectic_marginal(rho, forward.QuadratureSpec(0.6, 0.8), xs).w / lam
    print(f"lambda={lam}: max deviation {np.abs(a - b).max():.1e}")

# %% [markdown]
# ## Wigner function and its projections

# %%
wg = forward.wigner(rho)
print("W(0,0) =", wg.at(0, 0), " integral =", round(wg.total(), 8))
xr = forward.uniform_grid(-6, 6, 240)
for phi in (0.0, math.pi / 4, math.pi / 2):
    proj = forward.radon_projection(wg, phi, xr)
    hom = forward.homodyne_marginal(rho, phi, xr).w
    print(f"phi={phi:.3f}: |projection - homodyne| = {np.abs(proj - hom).max():.1e}")

# %% [markdown]
# ## Photon counting after a displacement
#
# The zero-count probability after displacing by alpha is the overlap with
# the coherent state at -alpha.

# %%
from tomokit.fock import coherent_ket

for alpha in (0, 0.5, 0.5 + 0.5j, -1 + 1j):
    e = forward.photon_marginal(rho, alpha)
    ket = coherent_ket(-alpha, 32)
    print(f"alpha={alpha!s:>9}: P(0)={e.probs[0]:.6f}  <-a|rho|-a>={np.vdot(ket, rho @ ket).real:.6f}")
