import math

import numpy as np
import pytest

from squeezecert.bounds import bernstein_pvalue_gamma_c, gamma_c_extrema
from squeezecert.errors import (
    BlockingError,
    DomainError,
    NullViolation,
    SizeError,
    ValidationError,
)
from squeezecert.estimators import gamma_prime_blocks, gamma_tilde
from squeezecert.lowerbound import r_max, rho_moments
from squeezecert.model import TangentPoint, batch_from_csv_text
from squeezecert.simulator import (
    AXIS_X,
    AXIS_Y,
    AXIS_Z,
    StateMixture,
    SymmetricState,
    binomial_halfwidth,
    css_state,
    default_gamma_grid,
    empirical_tail,
    empirical_tail_blocks,
    empirical_tail_linear,
    exact_gamma_c,
    exact_gamma_linear,
    exact_moments,
    exact_wineland,
    gamma_c_mean_samples,
    gamma_prime_samples,
    gamma_tilde_samples,
    measure_distribution,
    min_variance_perp_axis,
    nonsqueezed_mixture,
    one_axis_twist,
    sample_batch,
    spin_operators,
    statistic_sigma_per_round,
)


def twisted(n, theta):
    return one_axis_twist(css_state(n, AXIS_X), theta)


class TestSpinOperators:
    def test_single_spin_jz(self):
        _, _, jz = spin_operators(1)
        assert np.allclose(np.diag(jz), [-0.5, 0.5])

    def test_two_spin_jz_eigenvalues(self):
        _, _, jz = spin_operators(2)
        assert np.allclose(np.sort(np.linalg.eigvalsh(jz)), [-1.0, 0.0, 1.0])

    @pytest.mark.parametrize("n", [1, 2, 5, 8, 17, 32])
    def test_commutation_relations(self, n):
        jx, jy, jz = spin_operators(n)
        assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-10
        assert np.abs(jy @ jz - jz @ jy - 1j * jx).max() < 1e-10
        assert np.abs(jz @ jx - jx @ jz - 1j * jy).max() < 1e-10

    def test_size_limit(self):
        with pytest.raises(SizeError):
            spin_operators(65)
        spin_operators(65, n_max=80)


class TestCssState:
    def test_plus_z_is_top_basis_vector(self):
        state = css_state(6, AXIS_Z)
        expected = np.zeros(7)
        expected[-1] = 1.0
        assert np.allclose(state.amplitudes, expected)

    def test_x_css_measured_along_z_is_binomial(self):
        dist = measure_distribution(css_state(4, AXIS_X), AXIS_Z)
        assert np.allclose(dist.probabilities, np.array([1, 4, 6, 4, 1]) / 16.0, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 7, 16, 33, 64])
    def test_css_sits_at_the_classical_limit(self, n):
        state = css_state(n, AXIS_X)
        assert exact_wineland(state, AXIS_X, AXIS_Z) == pytest.approx(1.0, abs=1e-10)
        assert exact_wineland(state, AXIS_X, AXIS_Y) == pytest.approx(1.0, abs=1e-10)

    def test_tilted_axis_mean_spin(self):
        axis = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
        state = css_state(8, axis)
        mean, _ = exact_moments(state, axis)
        assert mean == pytest.approx(1.0, abs=1e-12)


class TestOneAxisTwist:
    def test_zero_angle_is_identity(self):
        state = css_state(5, AXIS_X)
        assert np.allclose(one_axis_twist(state, 0.0).amplitudes, state.amplitudes)

    def test_norm_preserved(self):
        rng = np.random.default_rng(9)
        state = css_state(11, AXIS_X)
        for theta in rng.uniform(0, 2 * math.pi, 10):
            twisted_state = one_axis_twist(state, float(theta))
            assert np.abs(np.abs(twisted_state.amplitudes) - np.abs(state.amplitudes)).max() < 1e-12

    def test_twisting_squeezes_below_classical_limit(self):
        chi = twisted(10, 0.1 * math.pi)
        axis, _ = min_variance_perp_axis(chi, AXIS_X)
        assert exact_wineland(chi, AXIS_X, axis) < 1.0
        # the mean spin stays along x, so any axis in the orthogonal plane
        # has zero mean
        mean_perp, _ = exact_moments(chi, axis)
        assert abs(mean_perp) < 1e-12


class TestMeasureDistribution:
    def test_deterministic_top_state(self):
        dist = measure_distribution(css_state(5, AXIS_Z), AXIS_Z)
        assert dist.probabilities[-1] == pytest.approx(1.0)
        assert dist.mean() == pytest.approx(1.0)

    def test_polarized_pair_second_moment_is_exactly_one(self):
        up = css_state(6, AXIS_Z)
        down = css_state(6, (0.0, 0.0, -1.0))
        mix = StateMixture(((0.5, up), (0.5, down)))
        dist = measure_distribution(mix, AXIS_Z)
        assert dist.moment(2) == 1.0
        assert dist.mean() == 0.0

    @pytest.mark.parametrize("n", [2, 9, 32])
    def test_distribution_moments_match_matrix_elements(self, n):
        rng = np.random.default_rng(n)
        state = twisted(n, float(rng.uniform(0.05, 0.4)))
        for _ in range(5):
            axis = rng.normal(size=3)
            dist = measure_distribution(state, axis)
            mean, second = exact_moments(state, axis)
            assert dist.mean() == pytest.approx(mean, abs=1e-10)
            assert dist.moment(2) == pytest.approx(second, abs=1e-10)

    def test_mixture_moments_are_weighted(self):
        a = css_state(4, AXIS_Z)
        b = css_state(4, AXIS_X)
        mix = StateMixture(((0.25, a), (0.75, b)))
        mean, _ = exact_moments(mix, AXIS_Z)
        assert mean == pytest.approx(0.25 * 1.0 + 0.75 * 0.0, abs=1e-12)

    def test_probabilities_sum_to_one(self):
        dist = measure_distribution(twisted(20, 0.2), (0.3, -0.5, 0.8))
        assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-10)


class TestMinVariancePerpAxis:
    def test_axis_is_orthogonal_and_optimal(self):
        chi = twisted(8, 0.25)
        axis, var_min = min_variance_perp_axis(chi, AXIS_X)
        assert abs(np.dot(axis, AXIS_X)) < 1e-12
        # closed-form minimum beats a dense angular scan
        u = np.array(AXIS_Y, float)
        v = np.array(AXIS_Z, float)
        for phi in np.linspace(0, math.pi, 721):
            cand = math.cos(phi) * u + math.sin(phi) * v
            _, m2 = exact_moments(chi, cand)
            m1, _ = exact_moments(chi, cand)
            assert var_min <= (m2 - m1 * m1) + 1e-12


class TestSampleBatch:
    def test_deterministic_state_constant_outcomes(self):
        batch = sample_batch(css_state(4, AXIS_X), (AXIS_X, AXIS_X), rounds=50, seed=1)
        assert np.all(batch.q_par == 1.0)
        assert np.all(batch.q_perp == 1.0)

    def test_css_mean_along_own_axis(self):
        batch = sample_batch(css_state(4, AXIS_X), (AXIS_X, AXIS_Z), rounds=200, seed=2)
        assert np.all(batch.q_par == 1.0)

    def test_same_seed_bit_identical(self):
        state = twisted(6, 0.2)
        a = sample_batch(state, rounds=300, seed=42)
        b = sample_batch(state, rounds=300, seed=42)
        assert np.array_equal(a.q_perp, b.q_perp)
        assert np.array_equal(a.q_par, b.q_par)
        c = sample_batch(state, rounds=300, seed=43)
        assert not np.array_equal(a.q_perp, c.q_perp)

    def test_outcomes_live_on_the_lattice(self):
        batch = sample_batch(twisted(5, 0.3), rounds=100, seed=3)
        lattice = (2 * np.arange(6) - 5) / 5
        assert set(np.round(batch.q_perp, 12)) <= set(np.round(lattice, 12))

    def test_csv_export_round_trip(self):
        batch = sample_batch(twisted(5, 0.3), rounds=64, seed=4)
        restored = batch_from_csv_text(batch.to_csv_text(), 5)
        assert np.array_equal(restored.q_perp, batch.q_perp)
        assert np.array_equal(restored.q_par, batch.q_par)

    def test_mixture_monte_carlo_matches_closed_form(self):
        chi = twisted(8, 0.25)
        axis, _ = min_variance_perp_axis(chi, AXIS_X)
        mix = nonsqueezed_mixture(chi, 0.5, perp_axis=axis)
        chi_q_par, _ = exact_moments(chi, AXIS_X)
        _, chi_q_perp_sq = exact_moments(chi, axis)
        expect_mean, expect_var = rho_moments(0.5, chi_q_par, chi_q_perp_sq, 8)
        draws = 20_000
        batch = sample_batch(mix, (AXIS_X, axis), rounds=draws, seed=5)
        # exact sampling moments give the standard errors
        dist_par = measure_distribution(mix, AXIS_X)
        se_mean = math.sqrt(dist_par.variance() / draws)
        assert np.mean(batch.q_par) == pytest.approx(expect_mean, abs=4 * se_mean)
        dist_perp = measure_distribution(mix, axis)
        m2, m4 = dist_perp.moment(2), dist_perp.moment(4)
        se_var = math.sqrt(max(m4 - m2 * m2, 0.0) / draws)
        assert np.var(batch.q_perp, ddof=1) == pytest.approx(expect_var, abs=4 * se_var)


class TestMixtureClosesTheLowerBoundLoop:
    @pytest.mark.parametrize("n,theta", [(4, 0.3), (12, 0.2), (24, 0.08), (32, 0.06)])
    def test_mixture_at_r_max_sits_on_the_boundary(self, n, theta):
        chi = twisted(n, theta)
        axis, _ = min_variance_perp_axis(chi, AXIS_X)
        xi2_chi = exact_wineland(chi, AXIS_X, axis)
        assert xi2_chi < 1.0
        q_par, _ = exact_moments(chi, AXIS_X)
        weight = float(r_max(xi2_chi, q_par * q_par, n))
        mix = nonsqueezed_mixture(chi, weight, perp_axis=axis)
        assert exact_wineland(mix, AXIS_X, axis) == pytest.approx(1.0, abs=1e-9)


class TestStatisticSamples:
    def test_deterministic_state_gives_exact_constant(self):
        state = css_state(4, AXIS_X)
        samples = gamma_c_mean_samples(
            state, TangentPoint(0, 1), 40, trials=10, seed=1, axes=(AXIS_X, AXIS_X)
        )
        # every outcome is q = 1 on both axes: statistic is 4 - 2 + 1 = 3
        assert np.all(samples == pytest.approx(3.0))

    def test_worker_count_does_not_change_results(self):
        state = css_state(6, AXIS_X)
        kwargs = dict(m_total=64, trials=500, seed=11)
        a = gamma_c_mean_samples(state, TangentPoint(0, 1), workers=1, **kwargs)
        b = gamma_c_mean_samples(state, TangentPoint(0, 1), workers=4, **kwargs)
        assert np.array_equal(a, b)

    def test_worker_count_invariant_across_many_chunks(self, monkeypatch):
        # shrink the chunk target so the thread pool really splits the work
        import squeezecert.simulator as sim

        state = css_state(6, AXIS_X)
        kwargs = dict(m_total=64, trials=500, seed=11)
        single = gamma_c_mean_samples(state, TangentPoint(0, 1), workers=1, **kwargs)
        monkeypatch.setattr(sim, "_CHUNK_TARGET", 32 * 40)
        chunked_serial = gamma_c_mean_samples(state, TangentPoint(0, 1), workers=1, **kwargs)
        chunked_pool = gamma_c_mean_samples(state, TangentPoint(0, 1), workers=4, **kwargs)
        assert np.array_equal(single, chunked_serial)
        assert np.array_equal(single, chunked_pool)

    def test_plug_in_witness_sampler_unbiased(self):
        # 100k simulated experiments: the sampler mean must sit within
        # 4 standard errors of the exact linear witness
        state = twisted(6, 0.25)
        exact = exact_gamma_linear(state, AXIS_X, AXIS_Z)
        samples = gamma_tilde_samples(state, 16, trials=100_000, seed=17)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert samples.mean() == pytest.approx(exact, abs=4 * se)

    def test_block_witness_sampler_unbiased(self):
        state = twisted(6, 0.25)
        exact = exact_gamma_linear(state, AXIS_X, AXIS_Z)
        samples = gamma_prime_samples(state, 16, trials=100_000, seed=18)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert samples.mean() == pytest.approx(exact, abs=4 * se)

    def test_tangent_witness_sampler_unbiased(self):
        state = twisted(6, 0.25)
        c = TangentPoint(0.1, 0.8)
        exact = exact_gamma_c(state, c, AXIS_X, AXIS_Z)
        samples = gamma_c_mean_samples(state, c, 16, trials=100_000, seed=19)
        se = samples.std(ddof=1) / math.sqrt(samples.size)
        assert samples.mean() == pytest.approx(exact, abs=4 * se)

    def test_samplers_agree_with_scalar_estimators(self):
        # one trial of the vectorized sampler on a deterministic state
        # reproduces the scalar estimators on an equivalent batch
        state = css_state(4, AXIS_X)
        batch = sample_batch(state, (AXIS_X, AXIS_X), rounds=8, seed=0)
        assert gamma_tilde(batch) == pytest.approx(
            float(gamma_tilde_samples(state, 16, 1, 0, axes=(AXIS_X, AXIS_X))[0])
        )
        assert gamma_prime_blocks(batch) == pytest.approx(
            float(gamma_prime_samples(state, 16, 1, 0, axes=(AXIS_X, AXIS_X))[0])
        )

    def test_block_sampler_needs_divisible_m(self):
        with pytest.raises(BlockingError):
            gamma_prime_samples(css_state(4, AXIS_X), 18, trials=5, seed=0)


class TestEmpiricalTail:
    def test_impossible_threshold_has_zero_frequency(self):
        state = css_state(4, AXIS_X)
        c = TangentPoint(0, 1)
        gamma0 = gamma_c_extrema(4, c).gamma0
        freq, hw = empirical_tail(state, c, gamma0 - 0.5, 40, trials=2000, seed=3)
        assert freq == 0.0
        assert 0.0 < hw < 0.01

    def test_boundary_state_near_half_at_tiny_threshold(self):
        # CSS has exact witness 0 at c = (0, 1); for a tiny threshold the
        # mean statistic falls below it roughly half the time
        freq, hw = empirical_tail(
            css_state(4, AXIS_X), TangentPoint(0, 1), -1e-6, 2000, trials=4000, seed=5
        )
        assert freq == pytest.approx(0.5, abs=0.1)

    def test_frequency_bounded_by_analytic_pvalue(self):
        state = css_state(4, AXIS_X)
        c = TangentPoint(0, 1)
        for gamma in (-0.05, -0.1, -0.3):
            freq, hw = empirical_tail(state, c, gamma, 200, trials=20_000, seed=7)
            bound = bernstein_pvalue_gamma_c(gamma, 200, 4, c)
            assert freq <= bound + 3 * hw

    def test_squeezed_state_rejected_as_null(self):
        chi = twisted(10, 0.1 * math.pi)
        axis, _ = min_variance_perp_axis(chi, AXIS_X)
        c = TangentPoint(0.0, 0.9)
        assert exact_gamma_c(chi, c, AXIS_X, axis) < 0
        with pytest.raises(NullViolation):
            empirical_tail(chi, c, -0.1, 40, trials=10, seed=1, axes=(AXIS_X, axis))

    def test_null_check_can_be_disabled(self):
        chi = twisted(10, 0.1 * math.pi)
        axis, _ = min_variance_perp_axis(chi, AXIS_X)
        freq, _ = empirical_tail(
            chi, TangentPoint(0.0, 0.9), -0.1, 40, trials=100, seed=1,
            axes=(AXIS_X, axis), check_null=False,
        )
        assert 0.0 <= freq <= 1.0

    def test_seed_reproducibility(self):
        state = css_state(4, AXIS_X)
        c = TangentPoint(0, 1)
        a = empirical_tail(state, c, -0.2, 100, trials=3000, seed=9)
        b = empirical_tail(state, c, -0.2, 100, trials=3000, seed=9)
        assert a == b

    def test_linear_and_block_variants_sound(self):
        state = css_state(4, AXIS_X)
        freq, hw = empirical_tail_linear(state, -0.3, 200, trials=10_000, seed=13)
        from squeezecert.bounds import mcdiarmid_pvalue

        assert freq <= mcdiarmid_pvalue(-0.3, 4, 100, 100) + 3 * hw
        freq, hw = empirical_tail_blocks(state, -0.3, 200, trials=10_000, seed=13)
        from squeezecert.bounds import bernstein_prime_pvalue

        assert freq <= bernstein_prime_pvalue(-0.3, 200, 4) + 3 * hw

    def test_threshold_must_be_negative(self):
        with pytest.raises(DomainError):
            empirical_tail(css_state(4, AXIS_X), TangentPoint(0, 1), 0.0, 40, 10, 0)


class TestBinomialHalfwidth:
    def test_normal_regime(self):
        hw = binomial_halfwidth(5000, 10_000)
        assert hw == pytest.approx(2.5758293 * math.sqrt(0.25 / 10_000), rel=1e-6)

    def test_rare_counts_use_exact_interval(self):
        hw_zero = binomial_halfwidth(0, 10_000)
        assert 0.0 < hw_zero < 1e-3
        hw_few = binomial_halfwidth(3, 10_000)
        assert hw_few > math.sqrt(3e-4 * (1 - 3e-4) / 10_000)  # wider than naive normal

    def test_counts_validated(self):
        with pytest.raises(ValidationError):
            binomial_halfwidth(11, 10)


class TestDefaultGammaGrid:
    def test_grid_is_negative_and_within_range(self):
        state = css_state(4, AXIS_X)
        c = TangentPoint(0, 1)
        grid = default_gamma_grid(state, c, 20)
        assert len(grid) == 5
        gamma0 = gamma_c_extrema(4, c).gamma0
        assert all(gamma0 <= g < 0 for g in grid)

    def test_sigma_matches_monte_carlo(self):
        state = css_state(6, AXIS_X)
        c = TangentPoint(0, 1)
        sigma = statistic_sigma_per_round(state, c)
        samples = gamma_c_mean_samples(state, c, 2, trials=40_000, seed=23)
        assert samples.std(ddof=1) == pytest.approx(sigma, rel=0.05)


class TestStateValidation:
    def test_norm_enforced(self):
        with pytest.raises(ValidationError):
            SymmetricState(2, np.array([1.0, 1.0, 0.0]))

    def test_mixture_weights_must_sum_to_one(self):
        state = css_state(2, AXIS_Z)
        with pytest.raises(ValidationError):
            StateMixture(((0.5, state), (0.4, state)))

    def test_mixture_sizes_must_match(self):
        with pytest.raises(ValidationError):
            StateMixture(((0.5, css_state(2, AXIS_Z)), (0.5, css_state(3, AXIS_Z))))
