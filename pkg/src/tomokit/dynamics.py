"""Free harmonic-oscillator evolution of states and their marginals.

With ``H = (p^2 + q^2)/2`` the evolution is a rotation of phase space:
``rho(t) = exp(-i n t) rho exp(i n t)``. In the Heisenberg picture
``mu q + nu p`` becomes ``mu' q + nu' p`` with

    mu' = mu cos t - nu sin t,    nu' = mu sin t + nu cos t,

so the evolved marginal at ``(mu, nu)`` is the initial marginal at
``(mu', nu')``; :func:`parameter_rotation_check` measures exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forward import QuadratureSpec, symplectic_marginal


@dataclass(frozen=True)
class EvolutionSpec:
    t: float
    hamiltonian: str = "harmonic"

    def __post_init__(self):
        if self.hamiltonian != "harmonic":
            raise ValueError(f"only the harmonic oscillator is supported, got {self.hamiltonian!r}")
        if not math.isfinite(self.t):
            raise ValueError("time must be finite")


def _as_spec(spec):
    return spec if isinstance(spec, EvolutionSpec) else EvolutionSpec(float(spec))


def evolve(rho, spec):
    """``rho(t) = exp(-i n t) rho exp(i n t)``; ``spec`` may be a bare time."""
    t = _as_spec(spec).t
    rho = np.asarray(rho, dtype=complex)
    phase = np.exp(-1j * t * np.arange(rho.shape[0]))
    return phase[:, None] * rho * phase.conj()[None, :]


def rotated_parameters(mu, nu, t):
    """Direction whose initial marginal equals the marginal at ``(mu, nu)`` after time ``t``."""
    c, s = math.cos(t), math.sin(t)
    return mu * c - nu * s, mu * s + nu * c


def evolved_marginal(rho, quad, x_grid, t):
    if not isinstance(quad, QuadratureSpec):
        quad = QuadratureSpec(*quad)
    return symplectic_marginal(evolve(rho, t), quad, x_grid)


def parameter_rotation_check(rho, mu, nu, x_grid, t):
    """Sup-norm gap between the evolved marginal and the rotated-parameter marginal."""
    moved = evolved_marginal(rho, QuadratureSpec(mu, nu), x_grid, t)
    still = symplectic_marginal(rho, QuadratureSpec(*rotated_parameters(mu, nu, t)), x_grid)
    return float(np.max(np.abs(moved.w - still.w)))
