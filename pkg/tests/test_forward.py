import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density
from tomokit.errors import (
    CutoffOverflowError,
    DegenerateDirectionError,
    EmptyDistributionError,
    GridTooCoarseError,
    GridTooNarrowError,
)
from tomokit.fock import coherent_ket
from tomokit.forward import (
    MarginalSlice,
    PhotonEntry,
    PolarGrid,
    QuadratureSpec,
    SqueezerParams,
    SymplecticParams,
    group_transform_marginal,
    histogram_to_slice,
    homodyne_marginal,
    husimi_q,
    marginal_by_wavefunction,
    photon_marginal,
    radon_projection,
    sample_counts,
    squeezer_map,
    symplectic_marginal,
    synthesize_homodyne,
    synthesize_photon,
    synthesize_symplectic,
    uniform_grid,
    wigner,
)
from tomokit.inverse import decompose_symplectic
from tomokit.states import Coherent, EvenCat, Fock, cat_marginal, realize

X = uniform_grid(-10, 10, 1024)
VAC = realize(Fock(0), 16)


def at(slice_, x0):
    i = int(np.argmin(np.abs(slice_.x - x0)))
    assert abs(slice_.x[i] - x0) < 1e-12
    return slice_.w[i]


class TestSymplecticMarginal:
    def test_vacuum_origin(self):
        assert at(symplectic_marginal(VAC, QuadratureSpec(1, 0), X), 0.0) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)

    def test_vacuum_scaled_direction(self):
        w = symplectic_marginal(VAC, QuadratureSpec(2, 0), X)
        assert at(w, 0.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-12)

    @pytest.mark.parametrize("mu, nu", [(1, 0), (0, 1), (0.6, 0.8), (2, 0.5), (-1.3, 0.4)])
    def test_cat_matches_closed_form(self, mu, nu):
        rho = realize(EvenCat(1, 1), 32)
        w = symplectic_marginal(rho, QuadratureSpec(mu, nu), X)
        assert np.abs(w.w - cat_marginal(1, 1, X, mu, nu)).max() < 1e-6

    def test_matches_wavefunction_route(self):
        rho = random_density(np.random.default_rng(4), 24, support=8, rank=3)
        for mu, nu in ((1, 0), (0.3, -1.1), (2.0, 0.7)):
            w = symplectic_marginal(rho, QuadratureSpec(mu, nu), X)
            assert np.abs(w.w - marginal_by_wavefunction(rho, QuadratureSpec(mu, nu), X)).max() < 1e-9

    def test_delta_is_a_translation(self):
        rho = realize(Coherent(0.5 + 0.5j), 24)
        dx = X[1] - X[0]
        shifted = symplectic_marginal(rho, QuadratureSpec(0.8, 0.3, 7 * dx), X)
        plain = symplectic_marginal(rho, QuadratureSpec(0.8, 0.3), X)
        assert np.abs(shifted.w[7:] - plain.w[:-7]).max() < 1e-14
        assert np.array_equal(shifted.centered_x, X - 7 * dx)

    def test_grid_too_narrow(self):
        with pytest.raises(GridTooNarrowError):
            symplectic_marginal(realize(Coherent(2), 32), QuadratureSpec(1, 0), uniform_grid(-1, 1, 256))

    def test_grid_too_coarse(self):
        # dx = 2.5 puts the k-cutoff where the characteristic function is still large
        with pytest.raises(GridTooNarrowError, match="refine"):
            symplectic_marginal(VAC, QuadratureSpec(1, 0), uniform_grid(-10, 10, 8))

    def test_degenerate(self):
        with pytest.raises(DegenerateDirectionError):
            QuadratureSpec(0, 0)

    @given(seed=st.integers(0, 2**16), theta=st.floats(0, 2 * math.pi), r=st.floats(0.3, 2.5))
    def test_normalized_and_nonnegative(self, seed, theta, r):
        rho = random_density(np.random.default_rng(seed), 16)
        w = symplectic_marginal(rho, QuadratureSpec(r * math.cos(theta), r * math.sin(theta)), max(r, 1) * X)
        assert w.w.min() >= 0
        assert w.total() == pytest.approx(1.0, abs=1e-4)

    @given(seed=st.integers(0, 2**16), theta=st.floats(0, 2 * math.pi), lam=st.sampled_from([0.5, 2.0, 3.0]))
    def test_homogeneity(self, seed, theta, lam):
        rho = random_density(np.random.default_rng(seed), 16)
        mu, nu = math.cos(theta), math.sin(theta)
        base = symplectic_marginal(rho, QuadratureSpec(mu, nu), X)
        scaled = symplectic_marginal(rho, QuadratureSpec(lam * mu, lam * nu), lam * X)
        assert np.abs(scaled.w - base.w / lam).max() < 1e-6


class TestHomodyne:
    def test_fock1_is_phase_independent(self):
        rho = realize(Fock(1), 16)
        expect = 2 * X**2 * np.exp(-(X**2)) / math.sqrt(math.pi)
        for phi in (0.0, 0.9, 2.4, 5.0):
            assert np.abs(homodyne_marginal(rho, phi, X).w - expect).max() < 1e-10

    def test_phi_zero_is_position(self):
        rho = realize(EvenCat(1, 1), 32)
        assert np.array_equal(homodyne_marginal(rho, 0.0, X).w, symplectic_marginal(rho, QuadratureSpec(1, 0), X).w)

    def test_coherent_quarter_turn_is_centered(self):
        w = homodyne_marginal(realize(Coherent(1), 32), math.pi / 2, X)
        mean = np.trapezoid(X * w.w, X)
        assert abs(mean) < 1e-10
        assert np.abs(w.w - np.exp(-(X**2)) / math.sqrt(math.pi)).max() < 1e-10


class TestGroupTransform:
    def test_identity(self):
        rho = realize(EvenCat(1, 1), 24)
        w = group_transform_marginal(rho, SymplecticParams(1.0, 0.0), X)
        assert np.abs(w.w - symplectic_marginal(rho, QuadratureSpec(1, 0), X).w).max() < 1e-9

    def test_fock1_quarter_turn(self):
        rho = realize(Fock(1), 16)
        w = group_transform_marginal(rho, SymplecticParams(1.0, math.pi / 2), X)
        assert np.abs(w.w - 2 * X**2 * np.exp(-(X**2)) / math.sqrt(math.pi)).max() < 1e-9

    @pytest.mark.parametrize("lam, phi", [(2.0, 0.7), (0.5, 0.0), (0.5, 1.2), (1.0, 0.7), (2.0, math.pi / 2)])
    def test_route_equivalence(self, lam, phi):
        rho = realize(Coherent(1), 24)
        g = group_transform_marginal(rho, SymplecticParams(lam, phi), X)
        s = symplectic_marginal(rho, QuadratureSpec(lam * math.cos(phi), math.sin(phi) / lam), X)
        assert np.abs(g.w - s.w).max() < 1e-6

    def test_literal_generator_fails_route_equivalence(self):
        rho = realize(Coherent(1), 24)
        lam, phi = 0.5, 0.7
        s = symplectic_marginal(rho, QuadratureSpec(lam * math.cos(phi), math.sin(phi) / lam), X)
        g = group_transform_marginal(rho, SymplecticParams(lam, phi), X, convention="printed")
        assert np.abs(g.w - s.w).max() > 1e-2
        # with lam = 2 in the exponent the squeeze runs off any reasonable cutoff
        with pytest.raises(CutoffOverflowError):
            group_transform_marginal(rho, SymplecticParams(2.0, phi), X, convention="printed")

    def test_overflow(self):
        rho = realize(Coherent(1), 24)
        with pytest.raises(CutoffOverflowError):
            group_transform_marginal(rho, SymplecticParams(6.0, 0.0), X, work_dim=40)


class TestSqueezerMap:
    def test_zero_squeeze_is_homodyne(self):
        q = squeezer_map(SqueezerParams(0.0, 0.8))
        assert (q.mu, q.nu, q.delta) == pytest.approx((math.cos(0.8), math.sin(0.8), 0.0))

    def test_ln2(self):
        q = squeezer_map(SqueezerParams(math.log(2), 0.0))
        assert (q.mu, q.nu) == pytest.approx((0.5, 0.0))

    @given(s=st.floats(-1.5, 1.5), phi=st.floats(0.01, math.pi / 2 - 0.01))
    def test_round_trip_through_decomposition(self, s, phi):
        q = squeezer_map(SqueezerParams(s, phi))
        params = decompose_symplectic(q.mu, q.nu)
        back = params.to_quadrature()
        assert back.mu == pytest.approx(q.mu, abs=1e-12)
        assert back.nu == pytest.approx(q.nu, abs=1e-12)
        # one branch is exactly lam = e^{-s}, phi = phi
        branches = decompose_symplectic(q.mu, q.nu, all_branches=True)
        assert any(abs(b.lam - math.exp(-s)) < 1e-9 and abs(b.phi - phi) < 1e-9 for b in branches)


class TestPhoton:
    def test_vacuum_undisplaced(self):
        e = photon_marginal(realize(Fock(0), 12), 0)
        assert np.allclose(e.probs, np.eye(12)[0])

    def test_vacuum_displaced_is_poisson(self):
        n = np.arange(40)
        e = photon_marginal(realize(Fock(0), 40), 1.0)
        poisson = np.exp(-1.0) / np.array([math.factorial(k) for k in n], dtype=float)
        assert np.allclose(e.probs, poisson, atol=1e-14)
        assert e.leak < 1e-12

    def test_cat_matches_closed_form(self):
        from tomokit.states import cat_photon_distribution

        rho = realize(EvenCat(1, 1), 32)
        e = photon_marginal(rho, 0.5)
        assert np.abs(e.probs - cat_photon_distribution(1, 1, np.arange(32), 0.5)).max() < 1e-8

    def test_safety_radius(self):
        with pytest.raises(CutoffOverflowError):
            photon_marginal(realize(Fock(0), 16), 9.0)

    @given(seed=st.integers(0, 2**16), re=st.floats(-2, 2), im=st.floats(-2, 2))
    def test_probabilities_sum_to_trace_minus_leak(self, seed, re, im):
        rho = random_density(np.random.default_rng(seed), 32, support=6)
        e = photon_marginal(rho, complex(re, im))
        assert e.probs.min() >= 0
        assert e.probs.sum() + e.leak == pytest.approx(1.0, abs=1e-10)

    def test_synthesized_tomogram_records_high_counts(self):
        rho = realize(Fock(1), 16)
        tomo = synthesize_photon(rho, PolarGrid(4, 6, 6, "laguerre"))
        assert tomo.n_cutoff > 16
        assert max(e.leak for e in tomo.entries) <= 1e-12
        direct = photon_marginal(rho, tomo.entries[7].alpha).probs
        assert np.allclose(tomo.entries[7].probs[:16], direct, atol=1e-14)


class TestHusimi:
    def test_vacuum(self):
        assert husimi_q(VAC, 0) == pytest.approx(1.0)
        assert husimi_q(VAC, 1) == pytest.approx(math.exp(-1))

    def test_coherent_sign_convention(self):
        assert husimi_q(realize(Coherent(1), 32), -1) == pytest.approx(1.0, abs=1e-12)

    @given(seed=st.integers(0, 2**16), re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5))
    def test_equals_coherent_expectation(self, seed, re, im):
        rho = random_density(np.random.default_rng(seed), 32, support=5)
        ket = coherent_ket(-complex(re, im), 32)
        assert husimi_q(rho, complex(re, im)) == pytest.approx(np.vdot(ket, rho @ ket).real, abs=1e-10)


class TestWigner:
    def test_vacuum_origin(self):
        assert wigner(VAC).at(0, 0) == pytest.approx(1 / math.pi, abs=1e-10)

    def test_fock1_origin_negative(self):
        w = wigner(realize(Fock(1), 16))
        assert w.at(0, 0) == pytest.approx(-1 / math.pi, abs=1e-10)
        assert w.total() == pytest.approx(1.0, abs=1e-4)

    def test_coherent_closed_form(self):
        g = uniform_grid(-6, 6, 128)
        w = wigner(realize(Coherent(0.5 - 0.3j), 32), g, g)
        q0, p0 = math.sqrt(2) * 0.5, -math.sqrt(2) * 0.3
        expect = np.exp(-((g[:, None] - q0) ** 2) - (g[None, :] - p0) ** 2) / math.pi
        assert np.abs(w.values - expect).max() < 1e-10

    @pytest.mark.parametrize("state", [Fock(1), EvenCat(1, 1)])
    def test_radon_projection(self, state):
        rho = realize(state, 32)
        w = wigner(rho)
        x = uniform_grid(-6, 6, 240)
        for phi in (0.0, 0.5, math.pi / 2, 2.2):
            assert np.abs(radon_projection(w, phi, x) - homodyne_marginal(rho, phi, x).w).max() < 1e-5

    def test_too_coarse(self):
        g = uniform_grid(-6, 6, 16)
        with pytest.raises(GridTooCoarseError):
            wigner(realize(Coherent(2), 32), g, g)


class TestSampling:
    def test_vacuum_mean_clt(self):
        w = symplectic_marginal(VAC, QuadratureSpec(1, 0), X)
        h = sample_counts(w, 100_000, seed=11)
        assert abs(h.mean()) < 3 * (1 / math.sqrt(2)) / math.sqrt(100_000)

    def test_seed_reproducible(self):
        w = symplectic_marginal(VAC, QuadratureSpec(1, 0), X)
        a, b = sample_counts(w, 5000, 3), sample_counts(w, 5000, 3)
        assert np.array_equal(a.counts, b.counts)
        assert not np.array_equal(a.counts, sample_counts(w, 5000, 4).counts)

    def test_poisson_photon_counts(self):
        e = photon_marginal(realize(Fock(0), 40), 1.0)
        h = sample_counts(e, 10_000, seed=2)
        assert h.kind == "photon"
        assert abs(h.mean() - 1.0) < 3 / math.sqrt(10_000)

    def test_empty(self):
        with pytest.raises(EmptyDistributionError):
            sample_counts(PhotonEntry(0j, np.zeros(4)), 10)
        with pytest.raises(ValueError):
            sample_counts(PhotonEntry(0j, np.ones(4)), 0)

    def test_histogram_density_is_normalized(self):
        w = symplectic_marginal(VAC, QuadratureSpec(1, 0), X)
        s = histogram_to_slice(sample_counts(w, 1000, 0), w)
        assert isinstance(s, MarginalSlice)
        assert s.w.sum() * s.dx == pytest.approx(1.0)


class TestSynthesis:
    def test_symplectic_slices_follow_homogeneity(self):
        rho = realize(Coherent(0.5), 16)
        polar = PolarGrid(4, 3, 4)
        tomo = synthesize_symplectic(rho, polar)
        assert len(tomo) == 12
        for s in tomo.slices[::5]:
            direct = symplectic_marginal(rho, QuadratureSpec(s.mu, s.nu), s.x)
            assert np.abs(direct.w - s.w).max() < 1e-10

    def test_thread_count_does_not_change_output(self):
        rho = realize(EvenCat(1, 1), 32)
        a = synthesize_homodyne(rho, 8, threads=1)
        b = synthesize_homodyne(rho, 8, threads=4)
        assert all(np.array_equal(s.w, t.w) for s, t in zip(a.slices, b.slices))

    def test_polar_rules_integrate_gaussian(self):
        # int_0^R e^{-r^2} r dr = (1 - e^{-R^2}) / 2
        for rule in ("legendre", "laguerre"):
            r, w = PolarGrid(6, 40, 1, rule).radial()
            assert np.dot(w, np.exp(-r * r)) == pytest.approx(0.5 * (1 - math.exp(-36)), abs=1e-10)

    def test_polar_validation(self):
        with pytest.raises(ValueError):
            PolarGrid(0, 4, 4)
        with pytest.raises(ValueError):
            PolarGrid(5, 4, 4, "simpson")
