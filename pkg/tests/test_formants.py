import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmonium.audio import AudioBuffer
from harmonium.formants import (BurgError, FormantConfig, VowelSegment,
                                analysis_instants, burg, polynomial_roots,
                                prepare_for_analysis, roots_to_formants,
                                track_formants)
from harmonium.synth import TokenSpec, VowelSpec, make_vowel_spec, synthesize_token

from conftest import render_single_vowel


def ar_process(coeffs, n, seed=0, burn=500):
    """Simulate x[t] = sum_k coeffs[k] x[t-k-1] + e[t]."""
    rng = np.random.default_rng(seed)
    order = len(coeffs)
    e = rng.standard_normal(n + burn)
    x = np.zeros(n + burn)
    for t in range(order, n + burn):
        x[t] = sum(c * x[t - k - 1] for k, c in enumerate(coeffs)) + e[t]
    return x[burn:]


class TestBurg:
    def test_ar1_coefficient_recovered(self):
        x = ar_process([0.9], 8000, seed=1)
        a, power = burg(x, 1)
        assert a[0] == pytest.approx(0.9, abs=0.02)
        assert power == pytest.approx(1.0, rel=0.05)

    def test_ar2_resonance_recovered(self):
        # poles at radius 0.97, angle for 500 Hz at 16 kHz
        rate = 16000.0
        radius, freq = 0.97, 500.0
        theta = 2 * math.pi * freq / rate
        a1 = 2 * radius * math.cos(theta)
        a2 = -radius * radius
        x = ar_process([a1, a2], 16000, seed=2)
        a, _ = burg(x, 2)
        roots = polynomial_roots(np.concatenate([[1.0], -a]))
        top = max(roots, key=lambda r: r.imag)
        est = math.atan2(top.imag, top.real) * rate / (2 * math.pi)
        assert est == pytest.approx(freq, abs=5.0)
        assert abs(top) == pytest.approx(radius, abs=0.01)

    def test_residual_power_non_increasing_in_order(self):
        x = ar_process([0.6, -0.3, 0.1], 4000, seed=3)
        powers = [burg(x, order)[1] for order in range(1, 17)]
        assert all(b <= a + 1e-12 for a, b in zip(powers, powers[1:]))
        assert all(p >= 0 for p in powers)

    def test_minimum_phase(self):
        rng = np.random.default_rng(4)
        for seed in range(10):
            x = rng.standard_normal(512)
            a, _ = burg(x, 10)
            roots = polynomial_roots(np.concatenate([[1.0], -a]))
            assert np.all(np.abs(roots) < 1.0 + 1e-9)

    def test_all_zero_frame_rejected(self):
        with pytest.raises(BurgError, match="zero"):
            burg(np.zeros(64), 4)

    def test_order_too_high_rejected(self):
        with pytest.raises(BurgError):
            burg(np.ones(8), 8)

    def test_order_below_one_rejected(self):
        with pytest.raises(BurgError):
            burg(np.ones(8), 0)

    @given(seed=st.integers(0, 2**32 - 1), order=st.integers(1, 12))
    @settings(max_examples=40, deadline=None)
    def test_stability_on_random_frames(self, seed, order):
        x = np.random.default_rng(seed).standard_normal(256)
        a, power = burg(x, order)
        assert power >= 0.0
        roots = polynomial_roots(np.concatenate([[1.0], -a]))
        assert np.all(np.abs(roots) <= 1.0 + 1e-9)


class TestPolynomialRoots:
    def test_known_quadratic(self):
        roots = sorted(polynomial_roots([1.0, -3.0, 2.0]), key=lambda r: r.real)
        assert roots[0] == pytest.approx(1.0)
        assert roots[1] == pytest.approx(2.0)

    def test_complex_pair_is_exact_conjugate(self):
        roots = polynomial_roots([1.0, 0.0, 1.0])  # z^2 + 1
        assert sorted(r.imag for r in roots) == pytest.approx([-1.0, 1.0])
        a, b = roots
        assert a == b.conjugate()

    @given(coeffs=st.lists(st.floats(-3, 3), min_size=2, max_size=9),
           lead=st.floats(0.5, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_reconstruction_from_roots(self, coeffs, lead):
        c = np.array([lead] + coeffs)
        roots = polynomial_roots(c)
        rebuilt = c[0] * np.poly(roots)
        assert np.allclose(rebuilt.real, c, atol=1e-6 * max(1.0, np.abs(c).max()))
        # complex parts must cancel exactly after conjugate pairing
        assert np.max(np.abs(rebuilt.imag)) < 1e-8 * max(1.0, np.abs(c).max())

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            polynomial_roots([1.0])
        with pytest.raises(ValueError):
            polynomial_roots([0.0, 1.0, 2.0])


class TestRootsToFormants:
    def test_frequency_and_bandwidth_formulas(self):
        rate = 16000.0
        freq, mag = 1200.0, 0.95
        theta = 2 * math.pi * freq / rate
        root = mag * complex(math.cos(theta), math.sin(theta))
        out = roots_to_formants([root, root.conjugate()], rate, 400.0)
        assert len(out) == 1
        f, b = out[0]
        assert f == pytest.approx(freq, abs=1e-9)
        assert b == pytest.approx(-math.log(0.95) * 16000 / math.pi, abs=1e-9)
        assert b == pytest.approx(261.2, abs=0.05)

    def test_negative_imag_and_real_roots_ignored(self):
        out = roots_to_formants([complex(0.9, 0.0), complex(0.5, -0.5)],
                                16000.0, 400.0)
        assert out == ()

    def test_band_edges_and_bandwidth_cap(self):
        rate = 11000.0
        def root_at(freq, mag=0.98):
            th = 2 * math.pi * freq / rate
            return mag * complex(math.cos(th), math.sin(th))
        # 50 Hz edges excluded
        assert roots_to_formants([root_at(49.0)], rate, 400.0) == ()
        assert roots_to_formants([root_at(rate / 2 - 49.0)], rate, 400.0) == ()
        # wide bandwidth excluded
        broad = root_at(1000.0, mag=math.exp(-math.pi * 500.0 / rate))
        assert roots_to_formants([broad], rate, 400.0) == ()

    def test_ascending_and_capped_count(self):
        rate = 11000.0
        freqs = [3000, 500, 2500, 1500, 4000, 1000, 2000]
        roots = [0.95 * complex(math.cos(2 * math.pi * f / rate),
                                math.sin(2 * math.pi * f / rate)) for f in freqs]
        out = roots_to_formants(roots, rate, 400.0, max_count=5)
        assert len(out) == 5
        got = [f for f, _ in out]
        assert got == sorted(got)
        assert got == pytest.approx([500, 1000, 1500, 2000, 2500], abs=1e-6)


class TestConfig:
    def test_derived_values(self, formant_config):
        assert formant_config.analysis_rate == 11000
        assert formant_config.lpc_order == 10

    def test_instants_at_five_to_ninety_five_percent(self):
        seg = VowelSegment("i", 1.0, 2.0)
        t = analysis_instants(seg, 10)
        assert t[0] == pytest.approx(1.05)
        assert t[-1] == pytest.approx(1.95)
        assert np.allclose(np.diff(t), 0.1)


class TestTrackFormants:
    @pytest.mark.parametrize("label,f0", [("i", 120.0), ("a", 120.0),
                                          ("E", 100.0), ("u", 140.0),
                                          ("O", 110.0), ("o", 125.0)])
    def test_steady_vowel_round_trip(self, label, f0, formant_config):
        from harmonium.synth import CANONICAL_TARGETS

        buffer, _, entry = render_single_vowel(label, f0=f0, seed=11)
        truth = entry["vowels"][0]
        seg = VowelSegment(label, truth["start"], truth["end"])
        track = track_formants(buffer, seg, formant_config)
        assert track.reliable
        targets = CANONICAL_TARGETS[label]
        for measured, target in zip(
                (track.mean_f1, track.mean_f2, track.mean_f3), targets):
            assert abs(measured - target) <= max(0.05 * target, 35.0)

    def test_glide_mean_is_midpoint(self, formant_config):
        # F1 sweeping 400 -> 600 Hz; ten-point mean should sit near 500.
        start = VowelSpec(label="e", f0=120.0, duration=0.25,
                          targets=((400.0, 80.0), (2000.0, 90.0), (2600.0, 140.0),
                                   (3400.0, 250.0), (4500.0, 350.0)),
                          end_targets=((600.0, 80.0), (2000.0, 90.0),
                                       (2600.0, 140.0), (3400.0, 250.0),
                                       (4500.0, 350.0)))
        spec = TokenSpec("glide", (start,))
        buffer, _, entry = synthesize_token(spec, np.random.default_rng(5))
        truth = entry["vowels"][0]
        track = track_formants(buffer, VowelSegment("e", truth["start"],
                                                    truth["end"]), formant_config)
        assert track.reliable
        assert track.mean_f1 == pytest.approx(500.0, abs=30.0)

    def test_silence_is_unreliable(self, formant_config):
        buffer = AudioBuffer(np.zeros(16000), 16000)
        track = track_formants(buffer, VowelSegment("i", 0.1, 0.3), formant_config)
        assert not track.reliable
        assert track.n_valid_frames == 0
        assert math.isnan(track.mean_f1)

    def test_amplitude_scale_invariance(self, formant_config):
        buffer, _, entry = render_single_vowel("E", seed=13)
        truth = entry["vowels"][0]
        seg = VowelSegment("E", truth["start"], truth["end"])
        base = track_formants(buffer, seg, formant_config)
        scaled = track_formants(
            AudioBuffer(buffer.samples * 0.125, buffer.sample_rate),
            seg, formant_config)
        assert scaled.mean_f1 == pytest.approx(base.mean_f1, abs=1e-6)
        assert scaled.mean_f2 == pytest.approx(base.mean_f2, abs=1e-6)
        assert scaled.n_valid_frames == base.n_valid_frames

    def test_prepared_buffer_matches_direct(self, formant_config):
        buffer, _, entry = render_single_vowel("o", seed=17)
        truth = entry["vowels"][0]
        seg = VowelSegment("o", truth["start"], truth["end"])
        direct = track_formants(buffer, seg, formant_config)
        prepared = prepare_for_analysis(buffer, formant_config)
        via = track_formants(buffer, seg, formant_config, prepared=prepared)
        assert via == direct

    def test_segment_outside_buffer_rejected(self, formant_config):
        buffer = AudioBuffer(np.zeros(1600), 16000)  # 0.1 s
        with pytest.raises(ValueError, match="outside"):
            track_formants(buffer, VowelSegment("i", 0.05, 0.2), formant_config)

    def test_too_short_segment_rejected(self, formant_config):
        buffer = AudioBuffer(np.zeros(16000), 16000)
        with pytest.raises(ValueError, match="ms"):
            track_formants(buffer, VowelSegment("i", 0.1, 0.12), formant_config)
