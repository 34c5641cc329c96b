import math

import numpy as np
import pytest

from ris_lab.beamforming import LinkBudget, reflection_amplitude
from ris_lab.channel import Scenario
from ris_lab.modulation import (
    SymbolSet,
    UrueLink,
    build_symbol_set,
    demodulate,
    host_min_angle,
    matched_filter,
    modulated_reflection,
    passive_reflection,
    simulate_ser,
    theoretical_ser,
    urue_receive,
    wedge_decide,
)
from ris_lab.rng import substream


class TestSymbolSet:
    def test_bpsk_host_two_bit(self):
        ss = build_symbol_set("bpsk", 2)
        assert np.allclose(ss.angles, [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
        assert ss.spacing == pytest.approx(math.pi / 4)

    def test_qpsk_host_two_bit(self):
        ss = build_symbol_set("qpsk", 2)
        assert np.allclose(ss.angles, [0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8])

    def test_bpsk_host_one_bit(self):
        ss = build_symbol_set("bpsk", 1)
        assert np.allclose(ss.angles, [0.0, math.pi / 2])
        assert ss.spacing == pytest.approx(math.pi / 2)

    def test_qam_host_min_angle(self):
        angle16 = host_min_angle("16qam")
        assert 0.0 < angle16 < math.pi / 2
        ss = build_symbol_set("16qam", 1)
        assert ss.spacing == pytest.approx(angle16 / 2)

    def test_arc_fits_inside_host_gap(self):
        for host in ("bpsk", "qpsk", "16qam"):
            for mo in (1, 2, 3):
                ss = build_symbol_set(host, mo)
                assert ss.angles[-1] - ss.angles[0] < host_min_angle(host)

    def test_unknown_host(self):
        with pytest.raises(ValueError):
            build_symbol_set("8apsk", 2)

    def test_rejects_zero_exponent(self):
        with pytest.raises(ValueError):
            build_symbol_set("bpsk", 0)

    def test_rejects_non_uniform_angles(self):
        with pytest.raises(ValueError):
            SymbolSet(
                order_exponent=1,
                angles=np.array([0.0, 0.4]),
                spacing=0.3,
                host_constellation=np.array([1.0, -1.0]),
            )

    def test_composite_points_distinct(self):
        ss = build_symbol_set("qpsk", 3)
        pts = (ss.amplitudes * np.exp(1j * ss.angles))[:, None] * ss.host_constellation
        pts = pts.ravel()
        dist = np.abs(pts[:, None] - pts[None, :])
        np.fill_diagonal(dist, np.inf)
        assert dist.min() > 1e-9

    def test_index_of(self):
        ss = build_symbol_set("bpsk", 2)
        assert ss.index_of(math.pi / 2) == 2
        with pytest.raises(ValueError):
            ss.index_of(0.1)


class TestUrueLink:
    def test_valid(self):
        link = UrueLink(omega=0.0, repetitions=12, snr_loss=0.1)
        assert link.repetitions == 12

    def test_invalid(self):
        with pytest.raises(ValueError):
            UrueLink(omega=0.0, repetitions=0, snr_loss=0.1)
        with pytest.raises(ValueError):
            UrueLink(omega=0.0, repetitions=1, snr_loss=0.0)


class TestModulatedReflection:
    def test_uniform_low_amplitude(self):
        r = modulated_reflection(0.0, 4)
        assert np.allclose(r.phases, 0.0)
        assert np.allclose(r.amplitudes, 0.2006795, rtol=1e-6)

    def test_peak_amplitude(self):
        r = modulated_reflection(0.93 * math.pi, 3)
        assert np.allclose(r.amplitudes, 1.0)

    def test_passive_state(self):
        r = passive_reflection(5)
        assert np.allclose(r.phases, -math.pi)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            modulated_reflection(4.0, 2)


class TestReceive:
    budget = LinkBudget(tx_power=2.0, noise=0.3)

    def _links(self, rng, n=6, m=2):
        f = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
        G = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2)
        h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        return f, G, h / np.linalg.norm(h)

    def test_noiseless_value(self):
        rng = substream(1)
        f, G, w = self._links(rng)
        quiet = LinkBudget(tx_power=2.0, noise=1e-30)
        x = np.array([1.0 + 0j])
        y = urue_receive(f, G, w, 0.5, x, quiet, substream(2))
        c = np.conj(f) @ G @ w
        expected = math.sqrt(2.0) * c * reflection_amplitude(0.5) * np.exp(1j * 0.5)
        assert np.allclose(y, expected, rtol=1e-9)

    def test_amplitude_ratio(self):
        rng = substream(3)
        f, G, w = self._links(rng)
        quiet = LinkBudget(tx_power=1.0, noise=1e-30)
        x = np.array([1.0 + 0j])
        y_low = urue_receive(f, G, w, -0.07 * math.pi, x, quiet, substream(4))
        y_high = urue_receive(f, G, w, 0.93 * math.pi, x, quiet, substream(4))
        assert abs(y_low[0]) / abs(y_high[0]) == pytest.approx(0.2, rel=1e-9)

    def test_noise_variance(self):
        rng = substream(5)
        f, G, w = self._links(rng)
        x = np.ones(100000, dtype=complex)
        y = urue_receive(f, G, w, 0.0, x, self.budget, substream(6))
        c = np.conj(f) @ G @ w
        sig = math.sqrt(self.budget.tx_power) * c * reflection_amplitude(0.0)
        noise = y - sig
        assert float(np.mean(np.abs(noise) ** 2)) == pytest.approx(
            self.budget.noise, rel=0.02
        )


class TestDemodulate:
    budget = LinkBudget(tx_power=1.0, noise=1.0)

    def test_noiseless_exact_recovery_all_symbols(self):
        for host, mo in (("bpsk", 2), ("qpsk", 2), ("bpsk", 1)):
            ss = build_symbol_set(host, mo)
            rng = substream(7)
            c = complex(rng.standard_normal() + 1j * rng.standard_normal())
            x = ss.host_constellation[rng.integers(0, len(ss.host_constellation), 8)]
            for omega in ss.angles:
                gain = reflection_amplitude(omega) * np.exp(1j * omega)
                y = c * gain * x  # tx_power = 1, no noise
                assert demodulate(y, c, ss, x, self.budget) == pytest.approx(omega)

    def test_zero_effective_channel(self):
        ss = build_symbol_set("bpsk", 2)
        with pytest.raises(ValueError):
            matched_filter(np.ones(2), 0.0, np.ones(2), self.budget)

    def test_boundary_tie_lower_index(self):
        ss = build_symbol_set("bpsk", 2)
        # phase exactly on the wedge boundary between symbols 0 and 1
        boundary = ss.spacing / 2.0
        assert wedge_decide(boundary, ss) == 0

    def test_outside_arc_fails(self):
        ss = build_symbol_set("bpsk", 2)
        assert wedge_decide(-math.pi / 2, ss) == -1
        x = np.array([1.0 + 0j])
        y = np.array([np.exp(-1j * math.pi / 2)])
        assert math.isnan(demodulate(y, 1.0 + 0j, ss, x, self.budget))

    def test_batch_matches_scalar(self):
        ss = build_symbol_set("qpsk", 2)
        rng = substream(8)
        angles = rng.uniform(-math.pi, math.pi, 500)
        batch = wedge_decide(angles, ss)
        singles = np.array([wedge_decide(float(a), ss) for a in angles])
        assert np.array_equal(batch, singles)


class TestTheoreticalSer:
    def test_zero_snr_limit(self):
        ss = build_symbol_set("bpsk", 2)
        expected = 1.0 - ss.spacing / (2.0 * math.pi)
        assert theoretical_ser(ss, 16, 1, 0.0) == pytest.approx(expected, rel=1e-10)

    def test_huge_element_count_vanishes(self):
        ss = build_symbol_set("bpsk", 2)
        assert theoretical_ser(ss, 10**9, 1, 1.0) < 1e-3

    def test_in_unit_interval_and_monotone(self):
        ss = build_symbol_set("bpsk", 2)
        ns = [8, 16, 32, 64]
        es = [0.5, 1.0, 2.0, 4.0]
        reps = [1, 2, 4]
        vals_n = [theoretical_ser(ss, n, 1, 1.0) for n in ns]
        vals_e = [theoretical_ser(ss, 16, 1, e) for e in es]
        vals_r = [theoretical_ser(ss, 16, r, 1.0) for r in reps]
        for vals in (vals_n, vals_e, vals_r):
            assert all(0.0 < v < 1.0 for v in vals)
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_depends_on_product_only(self):
        ss = build_symbol_set("bpsk", 2)
        assert theoretical_ser(ss, 16, 4, 1.0) == pytest.approx(
            theoretical_ser(ss, 64, 1, 1.0), rel=1e-12
        )

    def test_rejects_negative_snr(self):
        ss = build_symbol_set("bpsk", 2)
        with pytest.raises(ValueError):
            theoretical_ser(ss, 16, 1, -1.0)


class TestSimulateSer:
    scenario = Scenario()

    def test_matches_theory(self):
        ss = build_symbol_set("bpsk", 2)
        es = 10 ** 0.3
        sim, lo, hi = simulate_ser(self.scenario, ss, 16, 1, es, 30000, seed=21)
        theory = theoretical_ser(ss, 16, 1, es)
        assert abs(sim - theory) / theory < 0.10
        assert lo <= sim <= hi

    def test_high_snr_vanishes(self):
        ss = build_symbol_set("bpsk", 2)
        sim, _, _ = simulate_ser(self.scenario, ss, 16, 1, 1e6, 5000, seed=22)
        assert sim < 1e-3

    def test_monotone_in_elements(self):
        ss = build_symbol_set("bpsk", 2)
        s16, _, _ = simulate_ser(self.scenario, ss, 16, 1, 2.0, 20000, seed=23)
        s32, _, _ = simulate_ser(self.scenario, ss, 32, 1, 2.0, 20000, seed=24)
        assert s32 < s16

    def test_repetition_snr_product_equivalence(self):
        ss = build_symbol_set("bpsk", 2)
        a, lo_a, hi_a = simulate_ser(self.scenario, ss, 16, 4, 1.0, 30000, seed=25)
        b, lo_b, hi_b = simulate_ser(self.scenario, ss, 16, 1, 4.0, 30000, seed=26)
        assert lo_a <= hi_b and lo_b <= hi_a  # overlapping intervals

    def test_deterministic(self):
        ss = build_symbol_set("bpsk", 2)
        r1 = simulate_ser(self.scenario, ss, 16, 1, 1.0, 5000, seed=27)
        r2 = simulate_ser(self.scenario, ss, 16, 1, 1.0, 5000, seed=27)
        assert r1 == r2
