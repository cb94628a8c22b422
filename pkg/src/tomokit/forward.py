"""Measurable distributions synthesised from a density matrix.

The quadrature marginal ``w(x, mu, nu)`` of ``X = mu q + nu p`` is obtained
as the inverse Fourier transform of ``k -> Tr[rho exp(i k X)]`` sampled on
the k-grid reciprocal to the requested x-grid. Two independent routes exist
for cross-checking: :func:`group_transform_marginal` applies the rotation and
squeeze operators to ``rho`` and reads off the position distribution, and
:func:`marginal_by_wavefunction` uses oscillator eigenfunctions directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.fft import next_fast_len
from scipy.linalg import expm
from scipy.special import roots_laguerre

from ._parallel import blocks, ordered_map
from .errors import (
    CutoffOverflowError,
    DegenerateDirectionError,
    EmptyDistributionError,
    GridTooCoarseError,
    GridTooNarrowError,
)
from .fock import (
    characteristic_value,
    displacement_block,
    displacement_matrix,
    hermite_functions,
    ladder_matrices,
    quadrature_matrices,
)

log = logging.getLogger(__name__)

CHAR_CUTOFF = 1e-12
NEG_CLIP = 1e-12
NEG_ERROR = 1e-9
IMAG_RESIDUE = 1e-9
NORM_TOL = 1e-4


def uniform_grid(lo, hi, n):
    """``n`` points ``lo + j (hi - lo)/n``; ``hi`` itself is excluded.

    With an even ``n`` on a symmetric interval the origin is a grid point.
    """
    return lo + np.arange(n) * ((hi - lo) / n)


DEFAULT_X = (-10.0, 10.0, 1024)
DEFAULT_WIGNER = (-6.0, 6.0, 256)


@dataclass(frozen=True)
class QuadratureSpec:
    """``X = mu q + nu p + delta``; marginals are reported in ``x = X - delta``."""

    mu: float
    nu: float
    delta: float = 0.0

    def __post_init__(self):
        if self.mu**2 + self.nu**2 <= 0:
            raise DegenerateDirectionError("quadrature direction mu = nu = 0")

    @property
    def norm(self):
        return math.hypot(self.mu, self.nu)


@dataclass(frozen=True)
class SymplecticParams:
    """Rotation by ``phi`` composed with a scaling ``lam`` of ``q`` (``1/lam`` of ``p``)."""

    lam: float
    phi: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    def to_quadrature(self):
        return QuadratureSpec(self.lam * math.cos(self.phi), math.sin(self.phi) / self.lam)


@dataclass(frozen=True)
class SqueezerParams:
    """Squeezing ``s`` before a homodyne detector with local-oscillator phase ``phi``."""

    s: float
    phi: float


def squeezer_map(params):
    """``(s, phi) -> (mu, nu) = (e^{-s} cos phi, e^{s} sin phi)``, ``delta = 0``."""
    return QuadratureSpec(
        math.exp(-params.s) * math.cos(params.phi),
        math.exp(params.s) * math.sin(params.phi),
    )


@dataclass
class MarginalSlice:
    mu: float
    nu: float
    x: np.ndarray
    w: np.ndarray
    delta: float = 0.0

    @property
    def centered_x(self):
        return self.x - self.delta

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    def total(self):
        return float(np.trapezoid(self.w, self.x))


@dataclass
class Tomogram:
    slices: list
    label: str = ""
    grid: dict = field(default_factory=dict)

    @property
    def mu(self):
        return np.array([s.mu for s in self.slices])

    @property
    def nu(self):
        return np.array([s.nu for s in self.slices])

    def __len__(self):
        return len(self.slices)


@dataclass
class PhotonEntry:
    alpha: complex
    probs: np.ndarray
    leak: float = 0.0


@dataclass
class PhotonTomogram:
    entries: list
    n_cutoff: int
    label: str = ""
    grid: dict = field(default_factory=dict)

    @property
    def alphas(self):
        return np.array([e.alpha for e in self.entries], dtype=complex)

    def __len__(self):
        return len(self.entries)


@dataclass
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray  # values[i, j] = W(q[i], p[j])

    def total(self):
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.q))

    def at(self, q, p):
        i = int(np.argmin(np.abs(self.q - q)))
        j = int(np.argmin(np.abs(self.p - p)))
        return float(self.values[i, j])


@dataclass(frozen=True)
class PolarGrid:
    """Radial nodes on ``[0, radius]`` times uniform angles on ``[0, 2 pi)``.

    ``rule="legendre"`` places Gauss-Legendre nodes in the radius.
    ``rule="laguerre"`` places Gauss-Laguerre nodes in the squared radius,
    scaled so the outermost node sits at ``radius``; it integrates
    Gaussian-times-polynomial integrands (photon-counting kernels) with far
    fewer nodes.
    """

    radius: float
    n_r: int
    n_theta: int
    rule: str = "legendre"

    def __post_init__(self):
        if not self.radius > 0 or self.n_r < 1 or self.n_theta < 1:
            raise ValueError(f"bad polar grid {self}")
        if self.rule not in ("legendre", "laguerre"):
            raise ValueError(f"unknown radial rule {self.rule!r}")
        if self.rule == "laguerre" and self.n_r > 150:
            raise ValueError("the Laguerre radial rule supports at most 150 nodes")

    def radial(self):
        """Radii and weights for ``int_0^radius f(r) r dr``."""
        if self.rule == "legendre":
            t, wt = np.polynomial.legendre.leggauss(self.n_r)
            r = 0.5 * self.radius * (t + 1.0)
            return r, 0.5 * self.radius * wt * r
        g, wg = roots_laguerre(self.n_r)
        scale = g[-1] / self.radius**2
        # r dr = du / 2 with u = r^2
        return np.sqrt(g / scale), 0.5 * np.exp(np.log(wg) + g) / scale

    def nodes(self):
        """Flattened ``(radii, thetas, area_weights)``, angle-major order."""
        r, wr = self.radial()
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        radii = np.tile(r, self.n_theta)
        thetas = np.repeat(theta, self.n_r)
        weights = np.tile(wr, self.n_theta) * (2.0 * np.pi / self.n_theta)
        return radii, thetas, weights

    def as_dict(self):
        return {"kind": "polar", "radius": self.radius, "n_r": self.n_r, "n_theta": self.n_theta, "rule": self.rule}


def _check_uniform(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 4:
        raise ValueError("x-grid must be a 1-D array with at least 4 points")
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9, atol=0) or dx[0] <= 0:
        raise ValueError("x-grid must be uniform and increasing")
    return x, float(dx[0])


def _fourier_density(samples, k, dk, x0, n):
    # w_j = dk/(2 pi) sum_m f(k_m) exp(-i k_m x_j) with x_j = x0 + j dx
    shift = n // 2
    g = samples * np.exp(-1j * k * x0)
    j = np.arange(n)
    return (dk / (2 * np.pi)) * np.exp(2j * np.pi * shift * j / n) * np.fft.fft(g)


def _clean_density(values, what):
    imag = float(np.max(np.abs(values.imag)))
    if imag > IMAG_RESIDUE:
        raise GridTooNarrowError(f"{what}: imaginary residue {imag:.3g} exceeds {IMAG_RESIDUE}")
    w = values.real
    low = float(w.min())
    if low < -NEG_ERROR:
        raise GridTooNarrowError(f"{what}: negative density {low:.3g}; the grid is inadequate")
    if low < -NEG_CLIP:
        log.info("%s: clipped negative ringing down to %.3g", what, low)
    return np.clip(w, 0.0, None)


def quadrature_moments(rho, mu, nu):
    """Mean and variance of ``mu q + nu p`` (exact for ``rho`` on ``dim`` levels)."""
    dim = rho.shape[0]
    q, p = quadrature_matrices(dim + 1)
    xop = mu * q + nu * p
    big = np.zeros((dim + 1, dim + 1), dtype=complex)
    big[:dim, :dim] = rho
    trace = float(np.trace(rho).real) or 1.0
    mean = float(np.trace(big @ xop).real) / trace
    second = float(np.trace(big @ xop @ xop).real) / trace
    return mean, max(second - mean * mean, 0.0)


PAD_SIGMAS = 14.0
MAX_PAD_FACTOR = 64


def _padded_layout(x0, dx, n, mean, var):
    # extend the requested grid so the FFT period holds the whole distribution
    spread = PAD_SIGMAS * math.sqrt(var) + 1e-3
    lo = min(x0, mean - spread)
    hi = max(x0 + (n - 1) * dx, mean + spread)
    before = int(math.ceil((x0 - lo) / dx))
    total = before + max(n, int(math.ceil((hi - x0) / dx)) + 1)
    total = min(next_fast_len(total), MAX_PAD_FACTOR * n)
    before = min(before, total - n)
    return before, total


def symplectic_marginal(rho, quad, x_grid=None):
    """Marginal distribution of ``X = mu q + nu p + delta`` on ``x_grid``.

    ``x_grid`` holds values of ``X``; the density is the ``delta = 0``
    marginal translated by ``delta``. The grid spacing fixes the k-cutoff
    ``pi/dx`` and must make the characteristic function negligible there.
    Internally the transform runs on the grid extended (same spacing) to
    cover the distribution, so tails outside ``x_grid`` cannot alias back;
    the requested window itself must still hold all but 1e-4 of the mass.
    """
    if not isinstance(quad, QuadratureSpec):
        quad = QuadratureSpec(*quad)
    x = uniform_grid(*DEFAULT_X) if x_grid is None else x_grid
    x, dx = _check_uniform(x)
    n = x.size
    mean, var = quadrature_moments(rho, quad.mu, quad.nu)
    x0 = x[0] - quad.delta
    before, total = _padded_layout(x0, dx, n, mean, var)
    dk = 2.0 * np.pi / (total * dx)
    k = (np.arange(total) - total // 2) * dk
    f = characteristic_value(rho, k, quad.mu, quad.nu)
    edge = max(abs(f[0]), abs(f[-1]))
    if edge > CHAR_CUTOFF:
        raise GridTooNarrowError(
            f"characteristic function is {edge:.3g} at the k-cutoff {k[-1]:.4g}; refine the x-grid"
        )
    dens = _fourier_density(f, k, dk, x0 - before * dx, total)[before : before + n]
    w = _clean_density(dens, "symplectic marginal")
    mass = float(np.trapezoid(w, x))
    trace = float(np.trace(rho).real)
    if abs(mass - trace) > NORM_TOL:
        raise GridTooNarrowError(
            f"marginal integrates to {mass:.6f} on [{x[0]:.4g}, {x[-1]:.4g}]; widen the x-grid"
        )
    return MarginalSlice(quad.mu, quad.nu, x.copy(), w, quad.delta)


def homodyne_marginal(rho, phi, x_grid=None):
    """Distribution of ``q cos(phi) + p sin(phi)``."""
    return symplectic_marginal(rho, QuadratureSpec(math.cos(phi), math.sin(phi)), x_grid)


def _position_density(rho, x):
    h = hermite_functions(rho.shape[0], x)
    return np.einsum("mx,mx->x", h, rho @ h).real


def marginal_by_wavefunction(rho, quad, x_grid):
    """Cross-check route: rotate ``rho`` exactly in the Fock basis, then read
    the position density of the rotated state, dilated by ``|(mu, nu)|``."""
    if not isinstance(quad, QuadratureSpec):
        quad = QuadratureSpec(*quad)
    r = quad.norm
    phi = math.atan2(quad.nu, quad.mu)
    phase = np.exp(-1j * phi * np.arange(rho.shape[0]))
    rotated = phase[:, None] * rho * phase.conj()[None, :]
    x = (np.asarray(x_grid, dtype=float) - quad.delta) / r
    return _position_density(rotated, x) / r


def _squeeze_generator(dim):
    # (qp + pq)/2 = i (a^dag^2 - a^2)/2
    a, ad = ladder_matrices(dim)
    return 0.5j * (ad @ ad - a @ a)


def representation_operator(params, dim, convention="resolved"):
    """Unitary ``G`` (on ``dim`` Fock states) whose action turns the position
    distribution into the marginal of the transformed quadrature.

    ``convention="resolved"``:
    ``G = exp[-i phi (n + 1/2)] exp[-i ln(lam) (qp + pq)/2]``, for which
    ``<x|G rho G^dag|x> = w(x, lam cos phi, sin(phi)/lam)``.

    ``convention="printed"``: the published operator with ``lam`` itself in
    the squeeze exponent and ``+i phi`` in the rotation; it does not produce
    the ``(lam cos phi, sin(phi)/lam)`` marginal and is kept for comparison.
    """
    n = np.arange(dim)
    if convention == "resolved":
        rot = np.exp(-1j * params.phi * (n + 0.5))
        squeeze_angle = -math.log(params.lam)
    elif convention == "printed":
        rot = np.exp(1j * params.phi * (n + 0.5))
        squeeze_angle = params.lam
    else:
        raise ValueError(f"unknown convention {convention!r}")
    squeeze = expm(1j * squeeze_angle * _squeeze_generator(dim))
    return rot[:, None] * squeeze


def default_work_dim(dim, lam):
    stretch = max(lam, 1.0 / lam)
    return int(math.ceil(dim * stretch * stretch)) + 64


def group_transform_marginal(rho, params, x_grid=None, work_dim=None, convention="resolved"):
    """Marginal from the group action: ``w(x) = <x|G rho G^dag|x>``.

    ``rho`` is embedded in ``work_dim`` Fock states before the squeeze is
    applied; if more than 1e-6 of the transformed state reaches the top
    quarter of that space a :class:`CutoffOverflowError` is raised.
    """
    x = uniform_grid(*DEFAULT_X) if x_grid is None else np.asarray(x_grid, dtype=float)
    dim = rho.shape[0]
    work = work_dim or default_work_dim(dim, params.lam)
    if work < dim:
        raise ValueError("work_dim must be at least the state dimension")
    big = np.zeros((work, work), dtype=complex)
    big[:dim, :dim] = rho
    g = representation_operator(params, work, convention)
    moved = g @ big @ g.conj().T
    band = work - work // 4
    spill = float(np.abs(np.trace(moved[band:, band:])))
    if spill > 1e-6:
        raise CutoffOverflowError(
            f"transformed state puts {spill:.3g} of its norm above level {band}; raise work_dim"
        )
    w = _position_density(moved, x)
    quad = params.to_quadrature() if convention == "resolved" else None
    mu, nu = (quad.mu, quad.nu) if quad else (float("nan"), float("nan"))
    return MarginalSlice(mu, nu, x.copy(), np.clip(w, 0.0, None))


def photon_safety_radius(dim):
    return math.sqrt(dim) + 4.0


def _photon_probs(rho, disp):
    # diag(D rho D^dag) for a stack of D matrices
    return np.einsum("kni,ij,knj->kn", disp, rho, disp.conj()).real


def photon_marginal(rho, alpha):
    """``w(n, alpha) = <n|D(alpha) rho D(alpha)^dag|n>`` for ``n < dim``.

    The probability that escapes the cutoff is reported as ``leak``.
    """
    dim = rho.shape[0]
    alpha = complex(alpha)
    if abs(alpha) > photon_safety_radius(dim):
        raise CutoffOverflowError(
            f"|alpha| = {abs(alpha):.3g} exceeds the safety radius {photon_safety_radius(dim):.3g} at dim={dim}"
        )
    probs = _photon_probs(rho, displacement_matrix(alpha, dim)[None])[0]
    leak = max(0.0, float(np.trace(rho).real) - float(probs.sum()))
    return PhotonEntry(alpha, np.clip(probs, 0.0, None), leak)


def husimi_q(rho, alpha):
    """``Q = <-alpha|rho|-alpha>``, the zero-count probability after displacing by ``alpha``."""
    return float(photon_marginal(rho, alpha).probs[0])


def wigner(rho, q=None, p=None):
    """Wigner function by a 2-D inverse Fourier transform of ``Tr[rho exp(i(u q + v p))]``.

    Nyquist rule: the characteristic function must be below 1e-10 on the
    boundary of the reciprocal grid (``|u|, |v| = pi/dq, pi/dp``);
    otherwise the grid is too coarse for the state.
    """
    q = uniform_grid(*DEFAULT_WIGNER) if q is None else q
    p = uniform_grid(*DEFAULT_WIGNER) if p is None else p
    q, dq = _check_uniform(q)
    p, dp = _check_uniform(p)
    nq, npts = q.size, p.size
    du = 2 * np.pi / (nq * dq)
    dv = 2 * np.pi / (npts * dp)
    u = (np.arange(nq) - nq // 2) * du
    v = (np.arange(npts) - npts // 2) * dv
    chi = characteristic_value(rho, 1.0, u[:, None], v[None, :])
    edge = max(np.abs(chi[0]).max(), np.abs(chi[:, 0]).max(), np.abs(chi[-1]).max(), np.abs(chi[:, -1]).max())
    if edge > 1e-10:
        raise GridTooCoarseError(
            f"characteristic function is {edge:.3g} at the reciprocal-grid edge; use a finer phase-space grid"
        )
    g = chi * np.exp(-1j * (u[:, None] * q[0] + v[None, :] * p[0]))
    spec = np.fft.fft2(g)
    jq = np.exp(2j * np.pi * (nq // 2) * np.arange(nq) / nq)
    jp = np.exp(2j * np.pi * (npts // 2) * np.arange(npts) / npts)
    values = (du * dv / (4 * np.pi**2)) * (jq[:, None] * spec * jp[None, :])
    imag = float(np.abs(values.imag).max())
    if imag > IMAG_RESIDUE:
        raise GridTooCoarseError(f"Wigner grid: imaginary residue {imag:.3g}")
    grid = WignerGrid(q.copy(), p.copy(), values.real)
    total = grid.total()
    if abs(total - float(np.trace(rho).real)) > NORM_TOL:
        raise GridTooNarrowError(f"Wigner function integrates to {total:.6f}; widen the phase-space window")
    return grid


def radon_projection(wgrid, phi, x):
    """``int W(x cos phi - t sin phi, x sin phi + t cos phi) dt`` by bicubic
    interpolation of a Wigner grid; ``t`` runs over the grid's ``p`` axis and
    points outside the grid count as zero."""
    spline = RectBivariateSpline(wgrid.q, wgrid.p, wgrid.values, kx=3, ky=3)
    x = np.asarray(x, dtype=float)
    t = wgrid.p
    qq = x[:, None] * math.cos(phi) - t[None, :] * math.sin(phi)
    pp = x[:, None] * math.sin(phi) + t[None, :] * math.cos(phi)
    inside = (
        (qq >= wgrid.q[0]) & (qq <= wgrid.q[-1]) & (pp >= wgrid.p[0]) & (pp <= wgrid.p[-1])
    )
    vals = np.where(inside, spline.ev(qq, pp), 0.0)
    return np.trapezoid(vals, t, axis=1)


@dataclass
class SampleHistogram:
    values: np.ndarray  # bin centres (x) or photon numbers (n)
    counts: np.ndarray
    shots: int
    seed: int
    kind: str  # "quadrature" or "photon"

    def mean(self):
        return float(np.dot(self.values, self.counts) / self.shots)


def sample_counts(dist, shots, seed=0):
    """Histogram of ``shots`` draws from a marginal slice or photon entry.

    Inverse-CDF sampling on the discretised distribution; the same seed gives
    the same counts.
    """
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if isinstance(dist, MarginalSlice):
        masses = np.clip(dist.w, 0.0, None) * dist.dx
        values, kind = dist.x.copy(), "quadrature"
    elif isinstance(dist, PhotonEntry):
        masses = np.clip(dist.probs, 0.0, None)
        values, kind = np.arange(masses.size, dtype=float), "photon"
    else:
        raise TypeError(f"cannot sample from {type(dist).__name__}")
    total = float(masses.sum())
    if not np.isfinite(total) or total <= 0:
        raise EmptyDistributionError("distribution has no probability mass")
    cdf = np.cumsum(masses) / total
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    counts = np.bincount(np.minimum(idx, masses.size - 1), minlength=masses.size)
    return SampleHistogram(values, counts, shots, int(seed), kind)


def histogram_to_slice(hist, template):
    """Empirical density on the template slice's grid."""
    w = hist.counts / (hist.shots * template.dx)
    return MarginalSlice(template.mu, template.nu, template.x.copy(), w, template.delta)


def histogram_to_entry(hist, alpha):
    return PhotonEntry(complex(alpha), hist.counts / hist.shots, 0.0)


SYMPLECTIC_X_BASE = (-8.0, 8.0, 256)


def expand_rays(rays, polar, label=""):
    """Symplectic tomogram on ``polar`` from one unit-direction slice per angle.

    ``rays[j]`` is the marginal at ``(mu, nu) = (cos theta_j, sin theta_j)``
    (a homodyne slice). Homogeneity, ``w(r u, r mu, r nu) = w(u, mu, nu)/r``,
    fills in every radius on the ray; works for measured histograms as well
    as exact marginals.
    """
    if len(rays) != polar.n_theta:
        raise ValueError(f"need {polar.n_theta} rays, got {len(rays)}")
    radii, thetas, _ = polar.nodes()
    base = rays[0].centered_x
    slices = []
    for i, (r, th) in enumerate(zip(radii, thetas)):
        ray = rays[i // polar.n_r]
        if abs(ray.mu - math.cos(th)) > 1e-9 or abs(ray.nu - math.sin(th)) > 1e-9:
            raise ValueError(f"ray {i // polar.n_r} is not at angle {th:.6f}")
        slices.append(MarginalSlice(r * ray.mu, r * ray.nu, r * ray.centered_x, ray.w / r))
    grid = polar.as_dict() | {
        "x_base": [float(base[0]), float(base[-1] + (base[1] - base[0])), int(base.size)],
        "x_scaling": "radius",
    }
    return Tomogram(slices, label, grid)


def polar_rays(rho, polar, x_base=None, threads=None):
    """Unit-direction marginals at the angles of ``polar``."""
    xb = uniform_grid(*SYMPLECTIC_X_BASE) if x_base is None else np.asarray(x_base, dtype=float)
    angles = 2.0 * np.pi * np.arange(polar.n_theta) / polar.n_theta

    def unit(th):
        return symplectic_marginal(rho, QuadratureSpec(math.cos(th), math.sin(th)), xb)

    return ordered_map(unit, angles, threads)


def synthesize_symplectic(rho, polar, x_base=None, label="", threads=None):
    """Slices at every node of a polar ``(mu, nu)`` grid.

    Each slice uses ``radius * x_base`` as its grid, so every slice resolves
    its marginal equally well; one transform per angle covers the whole ray
    (see :func:`expand_rays`).
    """
    return expand_rays(polar_rays(rho, polar, x_base, threads), polar, label)


def synthesize_homodyne(rho, n_phi=64, x_grid=None, label="", threads=None):
    """Slices at ``phi_j = 2 pi j / n_phi``."""
    x = uniform_grid(*DEFAULT_X) if x_grid is None else np.asarray(x_grid, dtype=float)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    slices = ordered_map(lambda ph: homodyne_marginal(rho, ph, x), phis, threads)
    grid = {"kind": "homodyne", "n_phi": int(n_phi), "x": [float(x[0]), float(x[-1] + (x[1] - x[0])), int(x.size)]}
    return Tomogram(slices, label, grid)


LEAK_TOL = 1e-12


def photon_count_limit(dim, radius):
    """Largest count worth recording for states on ``dim`` levels displaced by ``|alpha| <= radius``."""
    return int(math.ceil((radius + math.sqrt(dim) + 7.0) ** 2))


def synthesize_photon(rho, polar, label="", n_counts=None, threads=None):
    """Photon-number distributions at every node ``alpha = r e^{i theta}``.

    Counts are recorded beyond ``dim``: a displaced state populates high
    Fock levels, and the reconstruction series needs them. Unless
    ``n_counts`` is given, the record stops once every entry's leak is
    below ``LEAK_TOL``.
    """
    dim = rho.shape[0]
    radii, thetas, _ = polar.nodes()
    if radii.max() > photon_safety_radius(dim):
        raise CutoffOverflowError(
            f"alpha-disk radius {polar.radius} exceeds the safety radius {photon_safety_radius(dim):.3g} at dim={dim}"
        )
    alphas = radii * np.exp(1j * thetas)
    rows = n_counts or photon_count_limit(dim, float(radii.max()))
    chunks = [np.arange(alphas.size)[sl] for sl in blocks(alphas.size, 128)]

    def block(idx):
        return _photon_probs(rho, displacement_block(alphas[idx], rows, dim))

    probs = np.concatenate(ordered_map(block, chunks, threads))
    trace = float(np.trace(rho).real)
    if n_counts is None:
        leak = trace - np.cumsum(probs, axis=1)
        ok = np.flatnonzero(np.max(leak, axis=0) <= LEAK_TOL)
        rows = int(ok[0]) + 1 if ok.size else rows
        probs = probs[:, :rows]
    entries = [
        PhotonEntry(complex(a), np.clip(pr, 0.0, None), max(0.0, trace - float(pr.sum())))
        for a, pr in zip(alphas, probs)
    ]
    return PhotonTomogram(entries, rows, label, polar.as_dict())
