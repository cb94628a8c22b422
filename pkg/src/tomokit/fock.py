"""Truncated Fock-space linear algebra.

Conventions (hbar = 1 everywhere):

* ``a|n> = sqrt(n)|n-1>``
* ``q = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``, ``[q, p] = i``
* ``D(alpha) = exp(alpha a^dag - alpha^* a)``; the coherent state ``|alpha>``
  has ``<q> = sqrt(2) Re(alpha)`` and ``<p> = sqrt(2) Im(alpha)``.

Density matrices are plain ``(dim, dim)`` complex numpy arrays. Displacement
matrix elements come from the associated-Laguerre closed form, so the block
``<m|D(alpha)|n>`` with ``m, n < dim`` is exact (not the exponential of a
truncated generator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidStateError,
    NotPSDError,
)

DEFAULT_DIM = 32
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class Tolerances:
    tol_herm: float = 1e-10
    tol_trace: float = 1e-10
    tol_psd: float = 1e-8
    tol_num: float = 1e-9

    def __post_init__(self):
        for name in ("tol_herm", "tol_trace", "tol_psd", "tol_num"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


ANALYTIC = Tolerances()
RECONSTRUCTED = Tolerances(tol_herm=1e-6, tol_trace=1e-6)


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise InvalidDimensionError(f"Fock cutoff must be a positive integer, got {dim!r}")
    return int(dim)


def guard_band(dim):
    """Rows/columns near the cutoff that truncated products may corrupt."""
    return math.ceil(_check_dim(dim) / 4)


def ladder_matrices(dim):
    """Annihilation and creation operators on ``|0>..|dim-1>``."""
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def number_matrix(dim):
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadrature_matrices(dim):
    """Position and momentum matrices ``(q, p)``.

    A shift ``delta`` of the generic quadrature ``mu q + nu p + delta`` is a
    scalar offset on the measured value, never a matrix.
    """
    a, ad = ladder_matrices(dim)
    q = (a + ad) / np.sqrt(2.0)
    p = (a - ad) / (1j * np.sqrt(2.0))
    return q, p


def displacement_cutoff(dim):
    """``|alpha|^2`` beyond which every ``<m|D(alpha)|n>`` (m, n < dim) is
    below ~1e-30 and is set to exactly zero."""
    return (2.0 * math.sqrt(dim) + 12.0) ** 2


def _laguerre_table(x, n_orders, n_degrees=None):
    # table[k, a, n] = L_n^{(a)}(x_k), ascending three-term recurrence in n
    n_degrees = n_orders if n_degrees is None else n_degrees
    a = np.arange(n_orders, dtype=float)[None, :]
    xk = x[:, None]
    table = np.empty((x.shape[0], n_orders, n_degrees))
    table[:, :, 0] = 1.0
    if n_degrees > 1:
        table[:, :, 1] = 1.0 + a - xk
    for n in range(1, n_degrees - 1):
        table[:, :, n + 1] = (
            (2 * n + 1 + a - xk) * table[:, :, n] - (n + a) * table[:, :, n - 1]
        ) / (n + 1)
    return table


class _DisplacementLayout:
    """Index bookkeeping shared by every displacement evaluation at one shape."""

    _cache: dict = {}

    def __new__(cls, rows, cols=None):
        cols = rows if cols is None else cols
        key = (rows, cols)
        if key not in cls._cache:
            self = super().__new__(cls)
            m, n = np.indices((rows, cols))
            self.rows, self.cols = rows, cols
            self.lo = np.minimum(m, n)
            self.diff = np.abs(m - n)
            self.lower = m >= n
            logfact = gammaln(np.arange(max(rows, cols)) + 1.0)
            self.logpref = 0.5 * (logfact[self.lo] - logfact[np.maximum(m, n)])
            # (-alpha^*)^d above the diagonal contributes (-1)^d
            self.sign = np.where(self.lower, 1.0, (-1.0) ** self.diff)
            cls._cache[key] = self
        return cls._cache[key]


def _displacement_stack(alpha, rows, cols=None):
    lay = _DisplacementLayout(rows, cols)
    alpha = np.asarray(alpha, dtype=complex).ravel()
    x = np.abs(alpha) ** 2
    out = np.zeros((alpha.size, lay.rows, lay.cols), dtype=complex)
    keep = x <= displacement_cutoff(max(lay.rows, lay.cols))
    if not keep.any():
        return out
    al = alpha[keep]
    xk = x[keep]
    lag = _laguerre_table(xk, max(lay.rows, lay.cols), min(lay.rows, lay.cols))[:, lay.diff, lay.lo]
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(np.abs(al))
        powlog = np.where(lay.diff[None] == 0, 0.0, lay.diff[None] * logr[:, None, None])
    mag = np.exp(powlog - 0.5 * xk[:, None, None] + lay.logpref[None])
    theta = np.angle(al)[:, None, None]
    phase = np.exp(1j * np.where(lay.lower[None], 1.0, -1.0) * lay.diff[None] * theta)
    out[keep] = lay.sign[None] * mag * phase * lag
    return out


def displacement_block(alpha, rows, cols):
    """``<m|D(alpha)|n>`` for ``m < rows``, ``n < cols``; ``alpha`` scalar or array."""
    rows, cols = _check_dim(rows), _check_dim(cols)
    arr = np.asarray(alpha, dtype=complex)
    return _displacement_stack(arr, rows, cols).reshape(arr.shape + (rows, cols))


@lru_cache(maxsize=32)
def unitarity_radius(dim, tol=None):
    """Largest ``|alpha|`` for which the truncated ``D(alpha)`` is unitary to ``tol``
    on the inner ``dim - guard_band(dim)`` block.

    Matrix elements depend on ``|alpha|`` only through a phase, so a bisection
    on the real axis covers every direction.
    """
    dim = _check_dim(dim)
    tol = ANALYTIC.tol_num if tol is None else tol
    k = dim - guard_band(dim)

    def residual(r):
        d = displacement_matrix(r, dim)
        return float(np.abs((d.conj().T @ d)[:k, :k] - np.eye(k)).max())

    lo, hi = 0.0, math.sqrt(dim)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if residual(mid) <= tol else (lo, mid)
    return lo


def displacement_matrix(alpha, dim):
    """Matrix ``<m|D(alpha)|n>`` for ``m, n < dim``.

    ``alpha`` may be a scalar (returns ``(dim, dim)``) or an array (returns
    ``alpha.shape + (dim, dim)``). The block is exact; unitarity of the
    truncated matrix holds only away from the cutoff, on the inner
    ``dim - guard_band(dim)`` block, for ``|alpha|`` up to
    :func:`unitarity_radius`.
    """
    dim = _check_dim(dim)
    arr = np.asarray(alpha, dtype=complex)
    stack = _displacement_stack(arr, dim)
    return stack.reshape(arr.shape + (dim, dim))


def _chunks(n_items, per_item):
    step = max(1, _CHUNK_ELEMENTS // per_item)
    for start in range(0, n_items, step):
        yield slice(start, min(start + step, n_items))


def characteristic_function(rho, xi):
    """``Tr[rho D(xi)]`` for an array of displacement amplitudes."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    xi = np.asarray(xi, dtype=complex)
    flat = xi.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    live = np.flatnonzero(np.abs(flat) ** 2 <= displacement_cutoff(dim))
    rho_t = rho.T
    for sl in _chunks(live.size, dim * dim):
        idx = live[sl]
        stack = _displacement_stack(flat[idx], dim)
        out[idx] = np.einsum("knm,nm->k", stack, rho_t)
    return out.reshape(xi.shape)


def quadrature_displacement(k, mu, nu):
    """Amplitude ``alpha`` with ``exp(i k (mu q + nu p)) = D(alpha)``."""
    return np.asarray(k) * (1j * mu - nu) / np.sqrt(2.0)


def characteristic_value(rho, k, mu, nu):
    """``Tr[rho exp(i k (mu q + nu p))]``; ``k`` may be an array."""
    return characteristic_function(rho, quadrature_displacement(k, mu, nu))


def normal_ordered_exp(beta, gamma, dim):
    """Matrix of ``exp(beta a^dag) exp(gamma a)`` on the first ``dim`` states.

    Element ``(m, n)`` is the finite sum over ``j <= min(m, n)`` of
    ``sqrt(m! n!)/j! * beta^(m-j)/(m-j)! * gamma^(n-j)/(n-j)!``.
    """
    dim = _check_dim(dim)
    logfact = gammaln(np.arange(dim) + 1.0)
    out = np.zeros((dim, dim), dtype=complex)
    bpow = beta ** np.arange(dim)
    gpow = gamma ** np.arange(dim)
    for j in range(dim):
        m = np.arange(j, dim)
        left = bpow[m - j] * np.exp(0.5 * logfact[m] - logfact[m - j])
        right = gpow[m - j] * np.exp(0.5 * logfact[m] - logfact[m - j])
        out[j:, j:] += np.outer(left, right) * np.exp(-logfact[j])
    return out


def coherent_ket(alpha, dim):
    """Truncated Fock amplitudes ``alpha^n e^{-|alpha|^2/2} / sqrt(n!)``."""
    dim = _check_dim(dim)
    n = np.arange(dim)
    alpha = complex(alpha)
    if alpha == 0:
        ket = np.zeros(dim, dtype=complex)
        ket[0] = 1.0
        return ket
    logmag = n * np.log(abs(alpha)) - 0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1.0)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def hermite_functions(nmax, x):
    """Normalised oscillator eigenfunctions ``psi_n(x)``, shape ``(nmax, len(x))``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, nmax):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def hermitize(mat):
    return 0.5 * (mat + mat.conj().T)


def density_diagnostics(rho):
    """Residuals of the density-matrix invariants, without repairing anything."""
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    trace = complex(np.trace(rho))
    min_eig = float(np.linalg.eigvalsh(hermitize(rho))[0])
    return {
        "trace_err": abs(trace - 1.0),
        "herm_resid": herm,
        "min_eig": min_eig,
    }


def validate_density(rho, tol=ANALYTIC):
    """Raise :class:`InvalidStateError` unless ``rho`` is a density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    diag = density_diagnostics(rho)
    if diag["herm_resid"] > tol.tol_herm:
        raise InvalidStateError(f"not Hermitian: residual {diag['herm_resid']:.3g}")
    if diag["trace_err"] > tol.tol_trace:
        raise InvalidStateError(f"trace differs from 1 by {diag['trace_err']:.3g}")
    if diag["min_eig"] < -tol.tol_psd:
        raise NotPSDError(f"negative eigenvalue {diag['min_eig']:.3g}")
    return diag


def _pure_vector(evals, evecs, tol):
    if evals[-1] >= 1.0 - tol and np.sum(np.abs(evals[:-1])) <= tol:
        return evecs[:, -1]
    return None


def psd_part(rho):
    """Hermitian part with negative eigenvalues removed, renormalised to unit trace."""
    evals, evecs = np.linalg.eigh(hermitize(np.asarray(rho, dtype=complex)))
    evals = np.clip(evals, 0.0, None)
    if evals.sum() <= 0:
        raise InvalidStateError("matrix has no positive part")
    return (evecs * (evals / evals.sum())) @ evecs.conj().T


def fidelity(rho1, rho2, *, tol=ANALYTIC, check_psd=True):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2``.

    If either argument is pure the value is ``<psi|rho_other|psi>``. With
    ``check_psd=False`` non-positive inputs (typical of linear
    reconstructions) are replaced by :func:`psd_part` first, so junk with
    negative weight cannot inflate the overlap.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise DimensionMismatchError(f"shapes differ: {rho1.shape} vs {rho2.shape}")
    h1, h2 = hermitize(rho1), hermitize(rho2)
    if check_psd:
        for name, h in (("rho1", h1), ("rho2", h2)):
            low = float(np.linalg.eigvalsh(h)[0])
            if low < -tol.tol_psd:
                raise NotPSDError(f"{name} has negative eigenvalue {low:.3g}")
    else:
        h1, h2 = psd_part(h1), psd_part(h2)
    e1, v1 = np.linalg.eigh(h1)
    e2, v2 = np.linalg.eigh(h2)

    pure_tol = max(tol.tol_psd, 1e-9)
    for vals, vecs, other in ((e1, v1, h2), (e2, v2, h1)):
        psi = _pure_vector(vals, vecs, pure_tol)
        if psi is not None:
            f = float(np.real(psi.conj() @ other @ psi))
            return min(max(f, 0.0), 1.0)

    # Tr sqrt(sqrt(r1) r2 sqrt(r1)) is the nuclear norm of sqrt(r1) sqrt(r2);
    # singular values avoid square roots of rounding-level eigenvalues
    root1 = (v1 * np.sqrt(np.clip(e1, 0.0, None))) @ v1.conj().T
    root2 = (v2 * np.sqrt(np.clip(e2, 0.0, None))) @ v2.conj().T
    f = float(np.sum(np.linalg.svd(root1 @ root2, compute_uv=False)) ** 2)
    return min(max(f, 0.0), 1.0)


def ket_to_density(ket):
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())
