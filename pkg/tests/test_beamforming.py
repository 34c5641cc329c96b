import math

import numpy as np
import pytest

from ris_lab.beamforming import (
    AMPLITUDE_MIN,
    BeamformResult,
    LinkBudget,
    ReflectionMatrix,
    algorithm1,
    antenna_selection_precoder,
    continuous_phase_set,
    exhaustive_oracle,
    lemma1_lower_bound,
    make_phase_set,
    mrt_precoder,
    rayleigh_snr_moments,
    reflection_amplitude,
    snr_due,
    snr_lower_bound_realization,
    snr_rue,
    snr_upper_ideal,
)
from ris_lab.channel import RicianParams, correlation_sqrt, upa_correlation
from ris_lab.rng import substream


def rayleigh_pair(n, m, rng):
    f = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
    G = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2)
    return f, G


class TestReflectionAmplitude:
    def test_peak(self):
        assert reflection_amplitude(0.93 * math.pi) == pytest.approx(1.0, abs=1e-12)

    def test_trough(self):
        assert reflection_amplitude(-0.07 * math.pi) == pytest.approx(0.2, abs=1e-12)

    def test_at_minus_pi(self):
        # the varactor fit gives slightly less than unity at -pi
        assert reflection_amplitude(-math.pi) == pytest.approx(0.9846425, rel=1e-6)

    def test_range(self):
        theta = np.linspace(-math.pi, math.pi, 500)
        amp = reflection_amplitude(theta)
        assert np.all(amp >= 0.2 - 1e-12)
        assert np.all(amp <= 1.0 + 1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            reflection_amplitude(3.5)
        with pytest.raises(ValueError):
            reflection_amplitude(-4.0)


class TestPhaseSet:
    def test_one_bit(self):
        ps = make_phase_set(1)
        assert np.allclose(ps.phases, [-math.pi, 0.0])

    def test_two_bits(self):
        ps = make_phase_set(2)
        assert np.allclose(ps.phases, [-math.pi, -math.pi / 2, 0.0, math.pi / 2])

    def test_three_bits(self):
        ps = make_phase_set(3)
        assert len(ps) == 8
        assert ps.phases[0] == pytest.approx(-math.pi)
        assert np.allclose(np.diff(ps.phases), math.pi / 4)

    @pytest.mark.parametrize("b", [1, 2, 3, 4, 5, 6])
    def test_always_contains_minus_pi_and_zero(self, b):
        ps = make_phase_set(b)
        assert np.any(np.isclose(ps.phases, -math.pi))
        assert np.any(np.isclose(ps.phases, 0.0))

    def test_rejects_non_positive_bits(self):
        with pytest.raises(ValueError):
            make_phase_set(0)

    def test_continuous_flag(self):
        assert continuous_phase_set().continuous
        assert not make_phase_set(1).continuous


class TestReflectionMatrix:
    def test_amplitudes_follow_phases(self):
        phases = np.array([0.0, 0.93 * math.pi, -0.07 * math.pi])
        r = ReflectionMatrix.from_phases(phases)
        assert np.allclose(r.amplitudes, reflection_amplitude(phases))

    def test_rejects_decoupled_amplitudes(self):
        with pytest.raises(ValueError):
            ReflectionMatrix(phases=np.array([0.0]), amplitudes=np.array([1.0]))

    def test_apply_matches_manual(self):
        rng = np.random.default_rng(0)
        f, G = rayleigh_pair(5, 2, rng)
        r = ReflectionMatrix.from_phases(rng.uniform(-math.pi, math.pi, 5))
        manual = np.conj(f) @ (np.diag(r.coefficients) @ G)
        assert np.allclose(r.apply(f, G), manual, atol=1e-12)


class TestAlgorithm1:
    def test_single_element_one_bit_prefers_minus_pi(self):
        # A(-pi) ~ 0.985 beats A(0) ~ 0.2007 for a single element
        f = np.array([0.7 + 0.2j])
        G = np.array([[0.3 - 0.9j]])
        res = algorithm1(f, G, make_phase_set(1))
        assert res.reflection.phases[0] == pytest.approx(-math.pi)

    def test_zero_channels(self):
        res = algorithm1(np.zeros(3), np.zeros((3, 2)), make_phase_set(1))
        assert res.snr == 0.0
        assert np.allclose(res.reflection.phases, -math.pi)

    def test_trace_non_decreasing_all_modes(self):
        rng = np.random.default_rng(1)
        for ps in (make_phase_set(1), make_phase_set(2), make_phase_set(3),
                   continuous_phase_set()):
            for _ in range(20):
                f, G = rayleigh_pair(16, 2, rng)
                res = algorithm1(f, G, ps)
                assert np.all(np.diff(res.trace) >= -1e-12)

    def test_amplitude_floor(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            f, G = rayleigh_pair(12, 3, rng)
            res = algorithm1(f, G, make_phase_set(1))
            g_sel = G[:, res.selected_antenna]
            floor = AMPLITUDE_MIN**2 * float(np.sum((np.abs(f) * np.abs(g_sel)) ** 2))
            assert res.trace[-1] ** 2 >= floor - 1e-12

    def test_candidate_evaluation_count(self):
        rng = np.random.default_rng(3)
        for b in (1, 2, 3):
            f, G = rayleigh_pair(10, 2, rng)
            res = algorithm1(f, G, make_phase_set(b))
            assert res.evaluations == 10 * 2**b

    def test_selected_antenna_is_largest_column(self):
        rng = np.random.default_rng(4)
        f, G = rayleigh_pair(8, 4, rng)
        res = algorithm1(f, G, make_phase_set(1))
        assert res.selected_antenna == int(np.argmax(np.linalg.norm(G, axis=0)))

    def test_continuous_matches_per_element_alignment(self):
        rng = np.random.default_rng(5)
        f, G = rayleigh_pair(6, 2, rng)
        res = algorithm1(f, G, continuous_phase_set())
        m = res.selected_antenna
        a_phase = -np.angle(f) + np.angle(G[:, m])
        expected = (-a_phase + math.pi) % (2 * math.pi) - math.pi
        assert np.allclose(res.reflection.phases, expected)

    def test_snr_is_full_norm(self):
        rng = np.random.default_rng(6)
        f, G = rayleigh_pair(6, 3, rng)
        res = algorithm1(f, G, make_phase_set(2))
        assert res.snr == pytest.approx(
            float(np.sum(np.abs(res.reflection.apply(f, G)) ** 2)), rel=1e-12
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            algorithm1(np.ones(3), np.ones((4, 2)), make_phase_set(1))


class TestExhaustiveOracle:
    def test_single_element_matches_greedy(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            f, G = rayleigh_pair(1, 2, rng)
            res = algorithm1(f, G, make_phase_set(2))
            _, best = exhaustive_oracle(f, G, make_phase_set(2))
            assert best == pytest.approx(res.snr, rel=1e-12)

    def test_dominates_greedy(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            f, G = rayleigh_pair(8, 2, rng)
            res = algorithm1(f, G, make_phase_set(1))
            _, best = exhaustive_oracle(f, G, make_phase_set(1))
            assert best >= res.snr - 1e-12

    def test_known_adversarial_instance(self):
        # two-element instance where the greedy pass is strictly suboptimal
        rng = np.random.default_rng(5)
        f = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / math.sqrt(2)
        G = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
        res = algorithm1(f, G, make_phase_set(1))
        _, best = exhaustive_oracle(f, G, make_phase_set(1))
        assert best > res.snr * 1.3

    def test_refuses_large_search_space(self):
        with pytest.raises(ValueError):
            exhaustive_oracle(np.ones(21), np.ones((21, 1)), make_phase_set(1))

    def test_refuses_continuous(self):
        with pytest.raises(ValueError):
            exhaustive_oracle(np.ones(2), np.ones((2, 1)), continuous_phase_set())


class TestPrecoders:
    def test_selection_single_antenna(self):
        assert np.allclose(antenna_selection_precoder(np.ones((3, 1))), [1.0])

    def test_selection_argmax(self):
        G = np.array([[2.0, 3.0], [0.0, 0.0]], dtype=complex)
        assert np.allclose(antenna_selection_precoder(G), [0.0, 1.0])

    def test_selection_tie_lowest_index(self):
        G = np.ones((2, 2), dtype=complex)
        assert np.allclose(antenna_selection_precoder(G), [1.0, 0.0])

    def test_mrt_identity(self):
        assert np.allclose(mrt_precoder([1.0, 0.0]), [1.0, 0.0])

    def test_mrt_normalizes(self):
        assert np.allclose(mrt_precoder([3.0, 4.0j]), [0.6, 0.8j])

    def test_mrt_achieves_norm(self):
        rng = np.random.default_rng(9)
        v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert abs(np.vdot(v, mrt_precoder(v))) == pytest.approx(
            np.linalg.norm(v), rel=1e-12
        )

    def test_mrt_rejects_zero(self):
        with pytest.raises(ValueError):
            mrt_precoder(np.zeros(3))


class TestSnr:
    budget = LinkBudget(tx_power=2.0, noise=0.5)

    def test_rue_amplitude_scaling(self):
        rng = np.random.default_rng(10)
        f, G = rayleigh_pair(6, 2, rng)
        w = mrt_precoder(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        low = ReflectionMatrix.from_phases(np.full(6, -0.07 * math.pi))
        high = ReflectionMatrix.from_phases(np.full(6, 0.93 * math.pi))
        ratio = snr_rue(f, low, G, w, self.budget) / snr_rue(f, high, G, w, self.budget)
        assert ratio == pytest.approx(0.04, rel=1e-9)

    def test_rue_single_term(self):
        f = np.array([0.5 + 0.5j])
        G = np.array([[1.0 - 2.0j]])
        w = np.array([1.0 + 0.0j])
        theta = 0.4
        r = ReflectionMatrix.from_phases(np.array([theta]))
        expected = (
            self.budget.tx_power
            * abs(f[0]) ** 2
            * abs(G[0, 0]) ** 2
            * reflection_amplitude(theta) ** 2
            / self.budget.noise
        )
        assert snr_rue(f, r, G, w, self.budget) == pytest.approx(expected, rel=1e-12)

    def test_rue_matches_expansion_route(self):
        # second route: explicit sum over per-element phasors and antennas
        rng = np.random.default_rng(11)
        f, G = rayleigh_pair(8, 3, rng)
        phases = rng.uniform(-math.pi, math.pi, 8)
        r = ReflectionMatrix.from_phases(phases)
        w = mrt_precoder(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        amp = reflection_amplitude(phases)
        per_antenna = np.array(
            [
                np.sum(
                    np.abs(f)
                    * np.abs(G[:, m])
                    * amp
                    * np.exp(1j * (phases - np.angle(f) + np.angle(G[:, m])))
                )
                for m in range(3)
            ]
        )
        expansion = (
            self.budget.tx_power
            * self.budget.symbol_energy_rue
            * abs(per_antenna @ w) ** 2
            / self.budget.noise
        )
        assert snr_rue(f, r, G, w, self.budget) == pytest.approx(expansion, rel=1e-10)

    def test_due_mrt(self):
        h = np.array([1.0, 1.0], dtype=complex)
        w = mrt_precoder(h)
        assert snr_due(h, w, self.budget) == pytest.approx(
            2.0 * self.budget.tx_power / self.budget.noise, rel=1e-12
        )

    def test_due_orthogonal(self):
        h = np.array([1.0, 0.0], dtype=complex)
        w = np.array([0.0, 1.0], dtype=complex)
        assert snr_due(h, w, self.budget) == pytest.approx(0.0, abs=1e-15)

    def test_due_mrt_dominates(self):
        rng = np.random.default_rng(12)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        mrt_val = snr_due(h, mrt_precoder(h), self.budget)
        onehot = np.zeros(4, dtype=complex)
        onehot[int(np.argmax(np.abs(h)))] = 1.0
        sel_val = snr_due(h, onehot, self.budget)
        assert mrt_val >= sel_val - 1e-12
        for _ in range(100):
            w = mrt_precoder(rng.standard_normal(4) + 1j * rng.standard_normal(4))
            assert mrt_val >= snr_due(h, w, self.budget) - 1e-12

    def test_rejects_non_unit_precoder(self):
        with pytest.raises(ValueError):
            snr_due(np.ones(2), np.ones(2), self.budget)


class TestSnrBounds:
    budget = LinkBudget()

    def test_upper_single(self):
        f = np.array([1.0 + 1.0j])
        G = np.array([[2.0j]])
        expected = abs(f[0]) ** 2 * abs(G[0, 0]) ** 2
        assert snr_upper_ideal(f, G, self.budget) == pytest.approx(expected, rel=1e-12)

    def test_upper_all_ones(self):
        n, m = 5, 3
        val = snr_upper_ideal(np.ones(n), np.ones((n, m)), self.budget)
        assert val == pytest.approx(m * n**2, rel=1e-12)

    def test_upper_dominates_any_reflection(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            f, G = rayleigh_pair(8, 2, rng)
            upper = snr_upper_ideal(f, G, self.budget)
            res = algorithm1(f, G, make_phase_set(2))
            w = mrt_precoder(res.reflection.apply(f, G).conj())
            assert upper >= snr_rue(f, res.reflection, G, w, self.budget) - 1e-9

    def test_lower_bound_single_antenna_collapse(self):
        rng = np.random.default_rng(14)
        f, G = rayleigh_pair(6, 1, rng)
        expected = 0.04 * float(np.sum(np.abs(f) * np.abs(G[:, 0])) ** 2)
        assert snr_lower_bound_realization(f, G, 0, self.budget) == pytest.approx(
            expected, rel=1e-12
        )

    def test_lower_below_upper(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            f, G = rayleigh_pair(8, 2, rng)
            assert snr_lower_bound_realization(f, G, 0, self.budget) <= snr_upper_ideal(
                f, G, self.budget
            )

    def test_invalid_antenna(self):
        with pytest.raises(ValueError):
            snr_lower_bound_realization(np.ones(4), np.ones((4, 2)), 2, self.budget)


class TestMoments:
    budget = LinkBudget()

    def test_minimal_case(self):
        mean, _ = rayleigh_snr_moments(1, 1, self.budget)
        assert mean == pytest.approx(0.04, rel=1e-12)

    def test_single_antenna_formula(self):
        n = 32
        mean, _ = rayleigh_snr_moments(n, 1, self.budget)
        expected = n * 0.04 * (1 + math.pi**2 / 16 * (n - 1))
        assert mean == pytest.approx(expected, rel=1e-12)

    def test_monte_carlo_agreement(self):
        n, m, trials = 64, 2, 20000
        rng = substream(77)
        vals = np.empty(trials)
        for i in range(trials):
            f = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
            G = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2)
            vals[i] = snr_lower_bound_realization(f, G, 0, self.budget)
        mean, var = rayleigh_snr_moments(n, m, self.budget)
        assert float(vals.mean()) == pytest.approx(mean, rel=0.03)
        assert float(vals.var(ddof=1)) == pytest.approx(var, rel=0.10)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            rayleigh_snr_moments(0, 1, self.budget)


class TestLemma1Bound:
    budget = LinkBudget()

    def _params(self, n, kappa, correlated, pathloss=1.0):
        corr = correlation_sqrt(upa_correlation(n, 0.05, 0.1)) if correlated else None
        los = np.exp(1j * np.linspace(0.0, 2.0, n)).reshape(n, 1)
        return RicianParams(
            kappa=kappa, los=los, correlation_sqrt=corr, pathloss_linear=pathloss
        )

    def test_rayleigh_identity_closed_form(self):
        n = 16
        g = RicianParams(0.0, np.ones((n, 1)), None, 1.0)
        f = RicianParams(0.0, np.ones((n, 1)), None, 1.0)
        bound = lemma1_lower_bound(g, f, self.budget, m0=0)
        assert bound == pytest.approx(0.04 * (n * math.pi / 4.0) ** 2, rel=1e-12)

    def test_single_element_product(self):
        from ris_lab.numerics import mean_abs_noncentral

        g = self._params(1, 2.0, False)
        f = self._params(1, 0.5, False)
        mu_g = mean_abs_noncentral(math.sqrt(2.0 / 3.0), 1.0 / 3.0)
        mu_f = mean_abs_noncentral(math.sqrt(0.5 / 1.5), 1.0 / 1.5)
        assert lemma1_lower_bound(g, f, self.budget) == pytest.approx(
            0.04 * (mu_g * mu_f) ** 2, rel=1e-9
        )

    def test_monte_carlo_respects_bound(self):
        from ris_lab.channel import sample_rician

        n, m = 16, 2
        g_params = self._params(n, 1.0, True)
        g_params.los = np.exp(1j * np.linspace(0, 3, n * m)).reshape(n, m)
        f_params = self._params(n, 1.0, True)
        bound = lemma1_lower_bound(g_params, f_params, self.budget, m0=0)
        rng = substream(88)
        vals = [
            snr_lower_bound_realization(
                sample_rician(f_params, n, 1, rng).ravel(),
                sample_rician(g_params, n, m, rng),
                0,
                self.budget,
            )
            for _ in range(3000)
        ]
        assert float(np.mean(vals)) >= bound
