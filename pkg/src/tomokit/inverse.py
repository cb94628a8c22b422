"""Linear reconstruction of density matrices from tomograms.

Three schemes share one pattern: every measured record is paired with an
operator-valued kernel and the weighted kernels are summed over the
measurement grid.

* symplectic: ``K(x, mu, nu) = e^{-ix} D((i mu - nu)/sqrt 2) / (2 pi)``
  integrated over a polar disk in the ``(mu, nu)`` plane;
* homodyne: the radial part of the same integral done analytically with an
  ``e^{-eps r}`` taper, giving the scalar kernel ``1/(eps - i u)^2`` applied
  on the eigenbasis of the rotated quadrature;
* photon counting: ``K_s(n, alpha) = 2/(1-s) t^n T(-alpha, -s)`` with
  ``t = (s+1)/(s-1)`` and the displaced power ``T``, summed over an
  ``alpha`` disk.

Every reconstruction Hermitizes and renormalises the raw sum; the PSD
property is diagnosed (``min_eig``) but never enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._parallel import blocks, ordered_map
from .errors import (
    CutoffOverflowError,
    DegenerateDirectionError,
    InsufficientCoverageError,
    NoRealSolutionError,
    UnboundedKernelError,
)
from .fock import (
    RECONSTRUCTED,
    _DisplacementLayout,
    _check_dim,
    _laguerre_table,
    density_diagnostics,
    displacement_matrix,
    fidelity,
    hermitize,
    normal_ordered_exp,
    quadrature_matrices,
)
from .forward import PolarGrid, SymplecticParams, photon_safety_radius

COVERAGE_TOL = 0.05
DEFAULT_EPSILON = 0.05
BLOCK = 256


@dataclass
class KernelMatrix:
    elements: np.ndarray
    params: dict

    @property
    def dim(self):
        return self.elements.shape[0]


@dataclass
class ReconstructionReport:
    """Diagnostics of the raw (pre-repair) estimate plus grid metadata."""

    trace_err: float
    herm_resid: float
    min_eig: float
    grid: dict
    fidelity: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "trace_err": self.trace_err,
            "herm_resid": self.herm_resid,
            "min_eig": self.min_eig,
            "grid": self.grid,
        }
        if self.fidelity is not None:
            out["fidelity"] = self.fidelity
        out.update(self.extra)
        return out


def _weighted_sum(coeffs, make_stack, dim, threads=None):
    # sum_k coeffs[k] * stack[k] over fixed blocks; block order fixes the rounding
    parts = blocks(coeffs.size, BLOCK)

    def one(sl):
        return np.tensordot(coeffs[sl], make_stack(sl), axes=(0, 0))

    out = np.zeros((dim, dim), dtype=complex)
    for part in ordered_map(one, parts, threads):
        out += part
    return out


def _finish(raw, grid, reference=None, extra=None):
    diag = density_diagnostics(raw)
    rho = hermitize(raw)
    tr = float(np.trace(rho).real)
    if diag["trace_err"] > COVERAGE_TOL or tr <= 0:
        raise InsufficientCoverageError(
            f"raw estimate has trace {tr:.4f}; the measurement grid does not cover the state"
        )
    rho = rho / tr
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    report = ReconstructionReport(diag["trace_err"], diag["herm_resid"], min_eig, grid, extra=extra or {})
    if reference is not None:
        report.fidelity = fidelity(reference, rho, tol=RECONSTRUCTED, check_psd=False)
        # linear overlap Tr(rho_ref rho); can exceed 1 when rho is not PSD
        report.extra["overlap"] = float(np.real(np.vdot(np.asarray(reference).conj().T, rho)))
    return rho, report


# ---------------------------------------------------------------- symplectic


def symplectic_kernel(x, mu, nu, dim):
    """``K = e^{-ix} D(alpha) / (2 pi)`` with ``alpha = (i mu - nu)/sqrt 2``."""
    alpha = (1j * mu - nu) / math.sqrt(2.0)
    mat = np.exp(-1j * x) * displacement_matrix(alpha, dim) / (2 * np.pi)
    return KernelMatrix(mat, {"x": x, "mu": mu, "nu": nu})


def symplectic_kernel_normal_ordered(x, mu, nu, dim):
    """Same kernel from ``e^{-|alpha|^2/2} e^{alpha a^dag} e^{-alpha^* a}``."""
    alpha = (1j * mu - nu) / math.sqrt(2.0)
    mat = normal_ordered_exp(alpha, -np.conj(alpha), dim) * math.exp(-abs(alpha) ** 2 / 2)
    return KernelMatrix(np.exp(-1j * x) * mat / (2 * np.pi), {"x": x, "mu": mu, "nu": nu})


def _polar_from_grid(grid):
    try:
        return PolarGrid(float(grid["radius"]), int(grid["n_r"]), int(grid["n_theta"]), grid.get("rule", "legendre"))
    except (KeyError, TypeError):
        raise InsufficientCoverageError("tomogram carries no polar-grid metadata") from None


def _check_nodes(polar, mu, nu):
    radii, thetas, weights = polar.nodes()
    if radii.size != mu.size:
        raise InsufficientCoverageError(
            f"{mu.size} slices for a {polar.n_r}x{polar.n_theta} polar grid"
        )
    err = np.max(np.hypot(mu - radii * np.cos(thetas), nu - radii * np.sin(thetas)))
    if err > 1e-9:
        raise InsufficientCoverageError("slice directions do not sit on the polar grid nodes")
    return weights


def integrate_symplectic(tomogram, dim, polar=None, threads=None):
    """Raw kernel sum ``sum_k weight_k int dx w_k(x) K(x, mu_k, nu_k)``.

    Linear in the marginals; no Hermitization or renormalisation.
    """
    dim = _check_dim(dim)
    polar = polar or _polar_from_grid(tomogram.grid)
    mu, nu = tomogram.mu, tomogram.nu
    weights = _check_nodes(polar, mu, nu)
    moments = np.array(
        [np.trapezoid(s.w * np.exp(-1j * s.centered_x), s.centered_x) for s in tomogram.slices]
    )
    alphas = (1j * mu - nu) / math.sqrt(2.0)
    coeffs = weights * moments / (2 * np.pi)
    return _weighted_sum(coeffs, lambda sl: displacement_matrix(alphas[sl], dim), dim, threads)


def reconstruct_symplectic(tomogram, dim, polar=None, reference=None, threads=None):
    """Density matrix from marginals on a polar ``(mu, nu)`` grid."""
    polar = polar or _polar_from_grid(tomogram.grid)
    raw = integrate_symplectic(tomogram, dim, polar, threads)
    return _finish(raw, {"scheme": "symplectic", "dim": dim} | polar.as_dict(), reference)


# ------------------------------------------------------------------ homodyne


def pattern_scalar(u, epsilon):
    """``(1/2 pi) int_0^inf r e^{i r u - eps r} dr = 1 / (2 pi (eps - i u)^2)``."""
    if not epsilon > 0:
        raise ValueError(f"regularizer must be positive, got {epsilon}")
    return 1.0 / (2 * np.pi * (epsilon - 1j * np.asarray(u)) ** 2)


@lru_cache(maxsize=8)
def _position_eigensystem(work_dim):
    q, _ = quadrature_matrices(work_dim)
    lam, vec = np.linalg.eigh(q.real)
    return lam, vec


def homodyne_work_dim(dim, r_max):
    """Basis size in which ``exp(-i r q)``, ``r <= r_max``, is exact on ``dim`` states."""
    return max(2 * dim, int(math.ceil((r_max / math.sqrt(2.0) + math.sqrt(dim) + 4.0) ** 2)))


def homodyne_kernel(x_phi, phi, dim, epsilon=DEFAULT_EPSILON, work_dim=None):
    """``K_phi(x) = (1/2 pi) int_0^inf dr r e^{i r (x - X_phi) - eps r}`` on ``dim`` states.

    ``X_phi = q cos phi + p sin phi`` is diagonalised in ``work_dim`` states and
    the scalar kernel is applied to each eigenvalue.
    """
    dim = _check_dim(dim)
    if dim < 2:
        raise ValueError("homodyne kernel needs dim >= 2")
    work_dim = work_dim or 4 * dim + 64
    lam, vec = _position_eigensystem(work_dim)
    g = pattern_scalar(x_phi - lam, epsilon)
    vd = vec[:dim]
    rot = np.exp(1j * phi * np.arange(dim))
    mat = (vd * g) @ vd.T
    return KernelMatrix(rot[:, None] * mat * rot.conj()[None, :], {"x": x_phi, "phi": phi, "epsilon": epsilon})


def _angle_weights(phis):
    phis = np.asarray(phis, dtype=float)
    n = phis.size
    expected = 2 * np.pi * np.arange(n) / n
    offset = phis[0]
    if n < 4 or np.max(np.abs(np.mod(phis - offset - expected + np.pi, 2 * np.pi) - np.pi)) > 1e-9:
        raise InsufficientCoverageError("homodyne angles must be uniform on [0, 2 pi) with at least 4 of them")
    return 2 * np.pi / n


def _radial_transforms(tomogram, r):
    # wt[j, k] = int dx w_j(x) e^{i r_k x}
    out = np.empty((len(tomogram), r.size), dtype=complex)
    for j, s in enumerate(tomogram.slices):
        x = s.centered_x
        out[j] = np.trapezoid(s.w[None, :] * np.exp(1j * r[:, None] * x[None, :]), x, axis=1)
    return out


def homodyne_bandwidth(tomogram, floor=1e-10):
    """Radius beyond which every slice's Fourier transform stays below ``floor``."""
    dx = min(s.dx for s in tomogram.slices)
    probe = np.linspace(0.0, math.pi / dx, 1024)
    mags = np.abs(_radial_transforms(tomogram, probe)).max(axis=0)
    live = np.flatnonzero(mags > floor)
    return float(probe[min(live[-1] + 1, probe.size - 1)]) if live.size else float(probe[1])


def integrate_homodyne(tomogram, dim, epsilon=DEFAULT_EPSILON, r_max=None, n_r=128, work_dim=None, threads=None):
    """Raw kernel sum ``sum_phi dphi int dx w(x, phi) K_phi(x)``.

    The ``x`` integral against the scalar kernel is done in the frequency
    domain, ``(1/2 pi) int_0^{r_max} r e^{-eps r} w~(r) e^{-i r lambda} dr``,
    which equals ``int dx w(x) / (2 pi (eps - i (x - lambda))^2)`` when
    ``r_max`` covers the bandwidth of ``w``. A finite ``r_max`` also acts as
    the usual noise cutoff for sampled data.
    """
    dim = _check_dim(dim)
    if not epsilon > 0:
        raise ValueError(f"regularizer must be positive, got {epsilon}")
    phis = np.array([math.atan2(s.nu, s.mu) for s in tomogram.slices])
    if np.any(np.abs(np.hypot(tomogram.mu, tomogram.nu) - 1.0) > 1e-9):
        raise InsufficientCoverageError("homodyne slices must have unit-length directions")
    dphi = _angle_weights(phis)
    r_max = r_max or homodyne_bandwidth(tomogram)
    work_dim = work_dim or homodyne_work_dim(dim, r_max)
    t, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * r_max * (t + 1.0)
    radial = 0.5 * r_max * wt * r * np.exp(-epsilon * r) / (2 * np.pi)
    spectra = _radial_transforms(tomogram, r) * radial[None, :]
    lam, vec = _position_eigensystem(work_dim)
    vd = vec[:dim]
    phase = np.exp(-1j * np.outer(r, lam))
    n = np.arange(dim)

    def one(j):
        h = spectra[j] @ phase
        rot = np.exp(1j * phis[j] * n)
        return rot[:, None] * ((vd * h) @ vd.T) * rot.conj()[None, :]

    out = np.zeros((dim, dim), dtype=complex)
    for part in ordered_map(one, range(len(tomogram)), threads):
        out += part
    return dphi * out, {"r_max": r_max, "n_r": n_r, "work_dim": work_dim}


def reconstruct_homodyne(
    tomogram,
    dim,
    epsilon=DEFAULT_EPSILON,
    reference=None,
    r_max=None,
    check_convergence=True,
    extrapolate=False,
    threads=None,
):
    """Density matrix from rotated-quadrature marginals.

    The ``e^{-eps r}`` taper biases the estimate by ``O(eps)`` (a phase-space
    blur of width ``eps``). ``extrapolate=True`` returns
    ``2 rho(eps/2) - rho(eps)``, which cancels the linear term and stays
    linear in the data.

    With ``check_convergence`` the estimate is repeated at ``epsilon / 2``;
    the report carries the fidelity between the two (and against
    ``reference`` for both, when given).
    """
    r_max = r_max or homodyne_bandwidth(tomogram)
    cache = {}

    def raw_at(eps):
        if eps not in cache:
            cache[eps], meta = integrate_homodyne(tomogram, dim, eps, r_max, threads=threads)
            cache["meta"] = meta
        return cache[eps]

    def estimate(eps):
        return 2 * raw_at(eps / 2) - raw_at(eps) if extrapolate else raw_at(eps)

    raw = estimate(epsilon)
    grid = {"scheme": "homodyne", "dim": dim, "n_phi": len(tomogram), "epsilon": epsilon, "extrapolate": extrapolate}
    grid |= cache["meta"]
    rho, report = _finish(raw, grid, reference)
    if check_convergence:
        rho2, rep2 = _finish(estimate(epsilon / 2), grid, reference)
        report.extra["epsilon_half_agreement"] = fidelity(rho, rho2, tol=RECONSTRUCTED, check_psd=False)
        if reference is not None:
            report.extra["fidelity_epsilon_half"] = rep2.fidelity
    return rho, report


# -------------------------------------------------------------- photon count


def check_ordering(s):
    """Accept ``s`` in ``(-1, 0]``, where the kernel is bounded."""
    s = float(s)
    if not -1.0 < s <= 0.0:
        raise UnboundedKernelError(
            f"ordering parameter s={s} outside (-1, 0]; the kernel is unbounded there "
            "(s=-1 is available only as the Q function)"
        )
    return s


def _displaced_power_stack(alpha, r, dim):
    # D(-alpha) r^n D(alpha) = e^{(r-1)|alpha|^2} r^n exp(b a^dag) exp(g a),
    # b = (r-1) alpha / r, g = (r-1) alpha^*; entries are associated Laguerre
    # polynomials at y = -b g, evaluated in log magnitude
    lay = _DisplacementLayout(dim)
    alpha = np.asarray(alpha, dtype=complex).ravel()
    x = np.abs(alpha) ** 2
    y = -((r - 1) ** 2) * x / r
    lag = _laguerre_table(y, dim)[:, lay.diff, lay.lo]
    m = np.arange(dim)[:, None] * np.ones((1, dim))
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.log(np.abs(alpha))[:, None, None]
        coef_log = np.where(lay.lower, math.log(abs((r - 1) / r)), math.log(abs(r - 1)))
        powlog = np.where(lay.diff == 0, 0.0, lay.diff * (coef_log + la))
        loglag = np.log(np.abs(lag))
    logmag = (r - 1) * x[:, None, None] + m * math.log(abs(r)) + lay.logpref + powlog + loglag
    theta = np.angle(alpha)[:, None, None]
    lower_shift = 0.0 if (r - 1) / r > 0 else math.pi
    upper_shift = 0.0 if r > 1 else math.pi
    ang = np.where(lay.lower, lay.diff * (theta + lower_shift), lay.diff * (upper_shift - theta))
    sign = np.sign(lag) * np.where((r < 0) & (m % 2 == 1), -1.0, 1.0)
    return sign * np.exp(logmag) * np.exp(1j * ang)


def displaced_power(alpha, r, dim):
    """Matrix of ``D(-alpha) r^{a^dag a} D(alpha)`` on ``dim`` states (``r`` real, nonzero)."""
    dim = _check_dim(dim)
    arr = np.asarray(alpha, dtype=complex)
    return _displaced_power_stack(arr, float(r), dim).reshape(arr.shape + (dim, dim))


def _ordering_constants(s):
    t = (s + 1) / (s - 1)
    r = -(1 - s) / (1 + s)
    return t, r


def photon_kernel(n, alpha, s, dim):
    """``K_s(n, alpha) = 2/(1-s) ((s+1)/(s-1))^n T(-alpha, -s)`` on ``dim`` states.

    ``T(-alpha, -s) = 2/(1+s) D(-alpha) (-(1-s)/(1+s))^{a^dag a} D(alpha)``.
    """
    s = check_ordering(s)
    dim = _check_dim(dim)
    if n < 0 or int(n) != n:
        raise ValueError(f"photon count must be a nonnegative integer, got {n}")
    if abs(alpha) > photon_safety_radius(dim):
        raise CutoffOverflowError(f"|alpha| = {abs(alpha):.3g} beyond the safety radius at dim={dim}")
    t, r = _ordering_constants(s)
    mat = (2 / (1 - s)) * t**n * (2 / (1 + s)) * displaced_power(alpha, r, dim)
    return KernelMatrix(mat, {"n": int(n), "alpha": complex(alpha), "s": s})


@lru_cache(maxsize=64)
def photon_kernel_bound(s, dim, n_scan=801, margin=1.05):
    """Upper bound on ``|<m|K_s(n, alpha)|k>|`` for ``|alpha|`` within the safety radius.

    Entries depend on ``|alpha|`` only up to a phase and ``|t^n| <= 1``, so a
    radial scan of ``T`` bounds every kernel; ``margin`` covers the gaps.
    """
    s = check_ordering(s)
    _, r = _ordering_constants(s)
    radii = np.linspace(0.0, photon_safety_radius(dim), n_scan)
    peak = float(np.abs(displaced_power(radii, r, dim)).max())
    return margin * (2 / (1 - s)) * (2 / (1 + s)) * peak


def integrate_photon(ptomo, s, dim, polar=None, threads=None):
    """Raw kernel sum ``sum_alpha (weight/pi) sum_n w(n, alpha) K_s(n, alpha)``."""
    s = check_ordering(s)
    dim = _check_dim(dim)
    polar = polar or _polar_from_grid(ptomo.grid)
    alphas = ptomo.alphas
    weights = _check_nodes(polar, alphas.real, alphas.imag)
    t, r = _ordering_constants(s)
    c = np.array([(2 / (1 - s)) * np.dot(t ** np.arange(e.probs.size), e.probs) for e in ptomo.entries])
    coeffs = weights * c * (2 / (1 + s)) / np.pi
    return _weighted_sum(coeffs, lambda sl: displaced_power(alphas[sl], r, dim), dim, threads)


def reconstruct_photon(ptomo, s, dim, polar=None, reference=None, threads=None):
    """Density matrix from displaced photon-number distributions."""
    polar = polar or _polar_from_grid(ptomo.grid)
    raw = integrate_photon(ptomo, s, dim, polar, threads)
    grid = {"scheme": "photon", "dim": dim, "s": float(s)} | polar.as_dict()
    return _finish(raw, grid, reference)


# ------------------------------------------------------ parameter inversion


def _branches(mu, nu, tol):
    prod = 2 * mu * nu
    if abs(prod) > 1 + tol:
        raise NoRealSolutionError(
            f"mu nu = {mu * nu:.6g}; no rotation-and-scaling gives |mu nu| > 1/2"
        )
    base = math.asin(max(-1.0, min(1.0, prod))) / 2
    candidates = sorted(
        math.fmod(c + 4 * math.pi, 2 * math.pi)
        for c in (base, math.pi / 2 - base, base + math.pi, 3 * math.pi / 2 - base)
    )
    found = []
    for phi in candidates:
        if found and abs(phi - found[-1].phi) < 1e-12:
            continue
        c, sn = math.cos(phi), math.sin(phi)
        lam = mu / c if abs(c) > abs(sn) * 1e-12 and abs(mu) > 0 else (sn / nu if nu != 0 else float("nan"))
        if not lam > 0 or not math.isfinite(lam):
            continue
        if abs(lam * c - mu) <= tol * max(1.0, abs(mu)) and abs(sn / lam - nu) <= tol * max(1.0, abs(nu)):
            found.append(SymplecticParams(lam, phi))
    return found


def decompose_symplectic(mu, nu, all_branches=False, tol=1e-12):
    """``(lam, phi)`` with ``mu = lam cos phi`` and ``nu = sin phi / lam``.

    The principal branch is the solution with the smallest ``phi`` in
    ``[0, 2 pi)``; for ``nu = 0`` that is ``phi = 0``, ``lam = mu`` (or
    ``phi = pi``, ``lam = -mu``). ``all_branches`` returns every solution.
    """
    mu, nu = float(mu), float(nu)
    if mu == 0 and nu == 0:
        raise DegenerateDirectionError("mu = nu = 0")
    found = _branches(mu, nu, tol)
    if not found:
        raise NoRealSolutionError(f"no (lambda, phi) maps to (mu, nu) = ({mu}, {nu})")
    return found if all_branches else found[0]
