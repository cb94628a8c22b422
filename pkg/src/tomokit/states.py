"""Exact states and closed-form marginal distributions.

The closed forms here are the ground truth the numerical pipelines are tested
against. All of them use the package convention ``q = (a + a^dag)/sqrt(2)``.

The printed cat-state marginal is written for quadratures normalised as
``(a + a^dag)/2``; :func:`cat_marginal` evaluates that expression with the
direction rescaled by ``sqrt(2)``, which is the exact change of units.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateDirectionError, InsufficientCutoffError
from .fock import coherent_ket, displacement_matrix, ket_to_density

NORM_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Fock:
    n: int

    def __str__(self):
        return f"fock:n={self.n}"


@dataclass(frozen=True)
class Coherent:
    alpha0: complex

    def __str__(self):
        a = complex(self.alpha0)
        return f"coherent:re={_fmt(a.real)},im={_fmt(a.imag)}"


@dataclass(frozen=True)
class EvenCat:
    """``(|a+ib> + |a-ib>)`` normalised; ``a``, ``b`` real."""

    a: float
    b: float

    def __str__(self):
        return f"cat:a={_fmt(self.a)},b={_fmt(self.b)}"


@dataclass(frozen=True)
class Squeezed:
    """``D(alpha0) S(squeeze)|0>`` with ``S(r) = exp[r (a^2 - a^dag^2)/2]``.

    Positive ``squeeze`` narrows the ``q`` distribution by ``e^{-r}``.
    """

    alpha0: complex
    squeeze: float

    def __str__(self):
        a = complex(self.alpha0)
        return f"squeezed:re={_fmt(a.real)},im={_fmt(a.imag)},s={_fmt(self.squeeze)}"


StateSpec = Fock | Coherent | EvenCat | Squeezed


def _fmt(v):
    return repr(float(v))


_FIELDS = {
    "fock": ("n",),
    "coherent": ("re", "im"),
    "cat": ("a", "b"),
    "squeezed": ("re", "im", "s"),
}


def parse_state(text):
    """Parse the textual form, e.g. ``cat:a=1,b=1`` or ``fock:n=2``.

    Omitted ``im`` defaults to 0; every other field is required.
    """
    m = re.fullmatch(r"\s*([a-z]+)\s*:\s*(.*?)\s*", text)
    if not m or m.group(1) not in _FIELDS:
        raise ValueError(f"unknown state spec {text!r}; expected one of {sorted(_FIELDS)}")
    kind, body = m.groups()
    values = {}
    for part in filter(None, (s.strip() for s in body.split(","))):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _FIELDS[kind]:
            raise ValueError(f"bad field {part!r} in state spec {text!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise ValueError(f"field {key!r} in {text!r} is not a number") from None
    if kind in ("coherent", "squeezed"):
        values.setdefault("im", 0.0)
    missing = [k for k in _FIELDS[kind] if k not in values]
    if missing:
        raise ValueError(f"state spec {text!r} is missing {', '.join(missing)}")
    if kind == "fock":
        n = values["n"]
        if n < 0 or n != int(n):
            raise ValueError(f"Fock index must be a nonnegative integer, got {n}")
        return Fock(int(n))
    if kind == "coherent":
        return Coherent(complex(values["re"], values["im"]))
    if kind == "cat":
        return EvenCat(values["a"], values["b"])
    return Squeezed(complex(values["re"], values["im"]), values["s"])


def cat_normalizer(a, b):
    """``2[1 + cos(2ab) exp(-2 b^2)]``, the squared norm of ``|a+ib> + |a-ib>``."""
    value = 2.0 * (1.0 + math.cos(2 * a * b) * math.exp(-2 * b * b))
    assert value > 0.0
    return value


def _squeezed_vacuum(r, dim):
    ket = np.zeros(dim, dtype=complex)
    k = np.arange((dim + 1) // 2)
    if r == 0:
        ket[0] = 1.0
        return ket
    t = math.tanh(abs(r))
    logmag = 0.5 * gammaln(2 * k + 1.0) - gammaln(k + 1.0) + k * math.log(t / 2)
    sign = (-1.0) ** k if r > 0 else np.ones_like(k, dtype=float)
    ket[2 * k] = sign * np.exp(logmag) / math.sqrt(math.cosh(r))
    return ket


def state_ket(spec, dim):
    """Truncated (unnormalised) Fock amplitudes of a pure state."""
    if isinstance(spec, Fock):
        ket = np.zeros(dim, dtype=complex)
        if spec.n < dim:
            ket[spec.n] = 1.0
        return ket
    if isinstance(spec, Coherent):
        return coherent_ket(spec.alpha0, dim)
    if isinstance(spec, EvenCat):
        plus = coherent_ket(complex(spec.a, spec.b), dim)
        minus = coherent_ket(complex(spec.a, -spec.b), dim)
        return (plus + minus) / math.sqrt(cat_normalizer(spec.a, spec.b))
    if isinstance(spec, Squeezed):
        work = 2 * dim + 40
        vac = _squeezed_vacuum(spec.squeeze, work)
        disp = displacement_matrix(spec.alpha0, work)[:dim]
        return disp @ vac
    raise TypeError(f"not a state spec: {spec!r}")


def realize(spec, dim):
    """Density matrix of ``spec`` on ``dim`` Fock states, renormalised.

    Raises :class:`InsufficientCutoffError` if the truncation discards more
    than ``1e-8`` of the norm.
    """
    ket = state_ket(spec, dim)
    norm = float(np.vdot(ket, ket).real)
    if norm < 1.0 - NORM_TOLERANCE:
        raise InsufficientCutoffError(
            f"{spec} keeps only {norm:.12f} of its norm at dim={dim}; raise the cutoff"
        )
    return ket_to_density(ket / math.sqrt(norm))


def _direction_norm(mu, nu):
    s = np.asarray(mu, dtype=float) ** 2 + np.asarray(nu, dtype=float) ** 2
    if np.any(s <= 0):
        raise DegenerateDirectionError("quadrature direction mu = nu = 0 has no marginal")
    return s


def cat_marginal(a, b, x, mu, nu):
    """Closed-form quadrature marginal ``w(x, mu, nu)`` of :class:`EvenCat`."""
    s = _direction_norm(mu, nu)
    x = np.asarray(x, dtype=float)
    # closed form lives in (a + a^dag)/2 units
    m, n = math.sqrt(2.0) * mu, math.sqrt(2.0) * nu
    s2 = 2.0 * s
    base = -2.0 * ((x - m * a) ** 2 + b * b * n * n) / s2
    hyp = 4.0 * n * b * (x - m * a) / s2
    osc = np.cos(2.0 * b * (2.0 * m * x - a * (m * m - n * n)) / s2)
    bracket = 0.5 * (np.exp(base + hyp) + np.exp(base - hyp)) + np.exp(base) * osc
    pref = math.sqrt(2.0 / math.pi) / np.sqrt(s2) / (1.0 + math.cos(2 * a * b) * math.exp(-2 * b * b))
    return pref * bracket


def cat_photon_distribution(a, b, n, alpha):
    """Photon-number distribution of the displaced cat ``D(alpha)|cat>``.

    Uses the cat normaliser ``2[1 + cos(2ab) e^{-2b^2}]`` and keeps the
    interference phase ``exp(-2 i b Re(alpha))`` picked up by the two
    displaced components.
    """
    n = np.asarray(n)
    alpha = complex(alpha)
    g1 = alpha + a + 1j * b
    g2 = alpha + a - 1j * b
    lf = gammaln(n + 1.0)

    def diag_term(g):
        if g == 0:
            return np.where(n == 0, 1.0, 0.0)
        return np.exp(-abs(g) ** 2 + 2 * n * math.log(abs(g)) - lf)

    prod = g1 * np.conj(g2)
    if prod == 0:
        cross = np.where(n == 0, 1.0, 0.0) * math.exp(-0.5 * (abs(g1) ** 2 + abs(g2) ** 2))
        cross = cross * math.cos(-2 * b * alpha.real)
    else:
        logc = n * np.log(prod) - lf - 0.5 * (abs(g1) ** 2 + abs(g2) ** 2) - 2j * b * alpha.real
        cross = np.real(np.exp(logc))
    total = diag_term(g1) + diag_term(g2) + 2.0 * cross
    return np.clip(total / cat_normalizer(a, b), 0.0, None)


def _rotated_amplitude(alpha0, t):
    return complex(alpha0) * np.exp(-1j * t)


def evolved_coherent_marginal(alpha0, x, mu, nu, t, form="gaussian"):
    """Marginal of a harmonic oscillator started in ``|alpha0>``, at time ``t``.

    ``form="gaussian"`` is the re-derived normal density with mean
    ``sqrt(2)(mu Re alpha(t) + nu Im alpha(t))``, ``alpha(t) = alpha0 e^{-it}``,
    and variance ``(mu^2 + nu^2)/2``.

    ``form="resolved"`` is the two-exponential layout of the published
    expression with its first linear term read as
    ``Im(alpha0) cos t - Re(alpha0) sin t``; it needs ``nu != 0`` and agrees
    with the Gaussian form identically.

    ``form="printed"`` evaluates the expression exactly as published (first
    linear term ``Re(alpha0) cos t - Im(alpha0) sin t``); kept to document
    that it disagrees with the dynamics except on special cases.
    """
    s = _direction_norm(mu, nu)
    x = np.asarray(x, dtype=float)
    alpha0 = complex(alpha0)
    if form == "gaussian":
        at = _rotated_amplitude(alpha0, t)
        mean = math.sqrt(2.0) * (mu * at.real + nu * at.imag)
        return np.exp(-((x - mean) ** 2) / s) / np.sqrt(math.pi * s)
    if form not in ("resolved", "printed"):
        raise ValueError(f"unknown form {form!r}")
    if nu == 0:
        raise DegenerateDirectionError("the two-exponential layout divides by nu")
    re, im = alpha0.real, alpha0.imag
    c, sn = math.cos(t), math.sin(t)
    lin = im * c - re * sn if form == "resolved" else re * c - im * sn
    first = -2 * abs(alpha0) ** 2 - x**2 / nu**2 + 2 * math.sqrt(2.0) * (x / nu) * lin
    inner = (
        (mu / nu) * x
        + math.sqrt(2.0) * re * (mu * sn + nu * c)
        + math.sqrt(2.0) * im * (nu * sn - mu * c)
    )
    return np.exp(first + inner**2 / s) / np.sqrt(math.pi * s)
