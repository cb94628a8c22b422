import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gammaln

from tomokit.errors import DegenerateDirectionError, InsufficientCutoffError
from tomokit.fock import validate_density
from tomokit.forward import QuadratureSpec, photon_marginal, symplectic_marginal, uniform_grid
from tomokit.states import (
    Coherent,
    EvenCat,
    Fock,
    Squeezed,
    cat_marginal,
    cat_normalizer,
    cat_photon_distribution,
    evolved_coherent_marginal,
    parse_state,
    realize,
)


def coherent_amplitudes(alpha, n):
    # alpha^n e^{-|alpha|^2/2} / sqrt(n!), straight from the definition
    n = np.arange(n)
    return np.array([alpha**k for k in n]) * math.exp(-abs(alpha) ** 2 / 2) / np.exp(0.5 * gammaln(n + 1))


class TestParse:
    @pytest.mark.parametrize(
        "text, spec",
        [
            ("fock:n=2", Fock(2)),
            ("coherent:re=1,im=0", Coherent(1 + 0j)),
            ("coherent:re=0.5", Coherent(0.5 + 0j)),
            ("cat:a=1,b=1", EvenCat(1.0, 1.0)),
            ("squeezed:re=1,im=0,s=0.5", Squeezed(1 + 0j, 0.5)),
        ],
    )
    def test_forms(self, text, spec):
        assert parse_state(text) == spec

    @pytest.mark.parametrize("text", ["cat:a=", "cat:a=1", "fock:n=1.5", "fock:n=-1", "boson:n=1", "cat:a=1,c=2", ""])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_state(text)

    @pytest.mark.parametrize("spec", [Fock(3), Coherent(0.5 - 0.25j), EvenCat(1.5, -0.5), Squeezed(1j, 0.3)])
    def test_text_round_trip(self, spec):
        assert parse_state(str(spec)) == spec


class TestRealize:
    def test_vacuum(self):
        assert np.array_equal(realize(Fock(0), 4), np.diag([1, 0, 0, 0]).astype(complex))

    def test_cat_with_b_zero_is_coherent(self):
        assert np.allclose(realize(EvenCat(1, 0), 32), realize(Coherent(1), 32), atol=1e-15)

    def test_cat_amplitudes_match_direct_expansion(self):
        rho = realize(EvenCat(1, 1), 32)
        ket = coherent_amplitudes(1 + 1j, 32) + coherent_amplitudes(1 - 1j, 32)
        ket /= np.linalg.norm(ket)
        assert np.allclose(rho, np.outer(ket, ket.conj()), atol=1e-14)
        # (1+i)^n + (1-i)^n vanishes for n = 2 mod 4
        assert np.allclose(np.diag(rho)[2::4], 0, atol=1e-30)

    @pytest.mark.parametrize("spec", [Fock(5), Coherent(1 - 1j), EvenCat(1, 1), Squeezed(0.5, 0.4)])
    def test_valid_pure_density(self, spec):
        rho = realize(spec, 32)
        validate_density(rho)
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)

    def test_insufficient_cutoff(self):
        with pytest.raises(InsufficientCutoffError, match="keeps only"):
            realize(Coherent(3), 8)
        with pytest.raises(InsufficientCutoffError):
            realize(Fock(4), 4)

    def test_squeezed_variance(self):
        from tomokit.fock import quadrature_matrices

        r = 0.4
        rho = realize(Squeezed(0, r), 48)
        q, p = quadrature_matrices(48)
        assert np.trace(rho @ q @ q).real == pytest.approx(0.5 * math.exp(-2 * r), abs=1e-10)
        assert np.trace(rho @ p @ p).real == pytest.approx(0.5 * math.exp(2 * r), abs=1e-10)

    def test_normalizer_positive(self):
        assert cat_normalizer(1, 0) == 4.0
        assert cat_normalizer(math.pi / 4, 1e-9) > 0


class TestCatMarginal:
    def test_b_zero_is_gaussian(self):
        x = np.linspace(-4, 6, 51)
        for mu, nu in ((1, 0), (0.6, 0.8), (2, 0.5)):
            s = mu * mu + nu * nu
            gauss = math.sqrt(2 / math.pi) / math.sqrt(2 * s) * np.exp(-2 * (x - math.sqrt(2) * mu * 1.3) ** 2 / (2 * s))
            # our closed form is in hbar = 1 quadrature units: mean sqrt(2) mu a, variance s/2
            assert np.allclose(cat_marginal(1.3, 0.0, x, mu, nu), gauss, atol=1e-14)

    def test_matches_pipeline_at_origin(self):
        rho = realize(EvenCat(1, 1), 32)
        x = uniform_grid(-10, 10, 1024)
        w = symplectic_marginal(rho, QuadratureSpec(1, 0), x)
        i = np.argmin(np.abs(x))
        assert x[i] == 0.0
        assert w.w[i] == pytest.approx(cat_marginal(1, 1, 0.0, 1, 0), abs=1e-6)

    @given(
        a=st.floats(-1.5, 1.5),
        b=st.floats(-1.5, 1.5),
        mu=st.floats(-2, 2),
        nu=st.floats(-2, 2),
        lam=st.floats(0.2, 4),
        x=st.floats(-5, 5),
    )
    def test_homogeneity(self, a, b, mu, nu, lam, x):
        if mu * mu + nu * nu < 1e-2:
            return
        lhs = cat_marginal(a, b, lam * x, lam * mu, lam * nu)
        rhs = cat_marginal(a, b, x, mu, nu) / lam
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)

    @given(a=st.floats(-1.5, 1.5), b=st.floats(-1.5, 1.5), theta=st.floats(0, 2 * math.pi), r=st.floats(0.3, 3))
    def test_nonnegative_and_normalized(self, a, b, theta, r):
        mu, nu = r * math.cos(theta), r * math.sin(theta)
        span = 8 * r * (1 + abs(a) + abs(b))
        x = np.linspace(-span, span, 4001)
        w = cat_marginal(a, b, x, mu, nu)
        assert w.min() >= 0
        assert np.trapezoid(w, x) == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_direction(self):
        with pytest.raises(DegenerateDirectionError):
            cat_marginal(1, 1, 0.0, 0.0, 0.0)


class TestCatPhotons:
    def test_b_zero_vacuum_reference_is_poisson(self):
        n = np.arange(20)
        a = 1.2
        poisson = np.exp(-a * a + 2 * n * math.log(a) - gammaln(n + 1))
        assert np.allclose(cat_photon_distribution(a, 0.0, n, 0), poisson, atol=1e-15)

    def test_zero_count_matches_density_diagonal(self):
        rho = realize(EvenCat(1, 1), 32)
        assert cat_photon_distribution(1, 1, 0, 0) == pytest.approx(rho[0, 0].real, abs=1e-14)

    @pytest.mark.parametrize("alpha", [0, 0.5, 0.5 + 0.5j, -0.7 + 0.2j])
    def test_matches_displaced_projection(self, alpha):
        rho = realize(EvenCat(1, 1), 32)
        n = np.arange(32)
        assert np.allclose(cat_photon_distribution(1, 1, n, alpha), photon_marginal(rho, alpha).probs, atol=1e-8)

    def test_sums_to_one(self):
        n = np.arange(60)
        assert cat_photon_distribution(1, 1, n, 0.3 - 0.4j).sum() == pytest.approx(1.0, abs=1e-12)


class TestEvolvedCoherent:
    def test_vacuum_is_stationary(self):
        x = np.linspace(-5, 5, 41)
        for t in (0.0, 0.9, 4.0):
            s = 1.0**2 + 0.5**2
            expect = np.exp(-x * x / s) / np.sqrt(math.pi * s)
            for form in ("gaussian", "resolved", "printed"):
                assert np.allclose(evolved_coherent_marginal(0, x, 1.0, 0.5, t, form), expect, atol=1e-14)

    def test_start_is_centered_at_root_two(self):
        x = np.linspace(-6, 9, 1501)
        w = evolved_coherent_marginal(1, x, 1, 0, 0.0)
        assert integrate.trapezoid(x * w, x) == pytest.approx(math.sqrt(2), abs=1e-10)

    @given(re=st.floats(-2, 2), im=st.floats(-2, 2), t=st.floats(0, 7), nu=st.floats(0.2, 2), mu=st.floats(-2, 2))
    def test_resolved_equals_gaussian(self, re, im, t, nu, mu):
        x = np.linspace(-6, 6, 25)
        a0 = complex(re, im)
        assert np.allclose(
            evolved_coherent_marginal(a0, x, mu, nu, t, "resolved"),
            evolved_coherent_marginal(a0, x, mu, nu, t, "gaussian"),
            atol=1e-12,
        )

    def test_printed_form_differs_from_dynamics(self):
        x = np.linspace(-6, 6, 121)
        printed = evolved_coherent_marginal(1.0, x, 1.0, 0.5, 0.8, "printed")
        exact = evolved_coherent_marginal(1.0, x, 1.0, 0.5, 0.8, "gaussian")
        assert np.abs(printed - exact).max() > 1e-2

    def test_degenerate(self):
        with pytest.raises(DegenerateDirectionError):
            evolved_coherent_marginal(1, 0.0, 0, 0, 1.0)
