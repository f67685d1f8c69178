import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechforge.audio import Waveform
from speechforge.lpc import (
    chunk_training_sequences,
    levinson_durbin,
    lpc_analysis,
    lpc_synthesis,
    mel_to_lpc,
    mu_law_decode,
    mu_law_encode,
    spectral_flatness,
)
from speechforge.spectral import mel_spectrogram

from conftest import SR, make_noise


def dense_toeplitz_solve(r, order):
    """Independent oracle: build the Toeplitz system and solve densely."""
    idx = np.abs(np.subtract.outer(np.arange(order), np.arange(order)))
    return np.linalg.solve(np.asarray(r)[idx], np.asarray(r)[1 : order + 1])


def random_autocorr(rng, order, n_bins=64):
    """Positive-definite sequence: inverse FFT of a positive power spectrum."""
    power = rng.uniform(0.1, 1.0, n_bins)
    return np.fft.irfft(power)[: order + 1]


def coeffs_from_reflections(ks):
    """Step-up recursion: stable direct-form coefficients from |k| < 1."""
    a = np.zeros(0)
    for k in ks:
        a = np.concatenate([a - k * a[::-1], [k]])
    return a


class TestLevinsonDurbin:
    def test_white_noise(self):
        coeffs, err = levinson_durbin(np.array([1.0, 0.0, 0.0]), 2)
        assert np.allclose(coeffs, [0.0, 0.0])
        assert err == pytest.approx(1.0)

    def test_two_by_two_oracle(self):
        coeffs, err = levinson_durbin(np.array([1.0, 0.5, 0.25]), 2)
        assert np.allclose(coeffs, dense_toeplitz_solve([1.0, 0.5, 0.25], 2))
        assert np.allclose(coeffs, [0.5, 0.0])
        assert err == pytest.approx(0.75)

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            order = int(rng.integers(1, 17))
            r = random_autocorr(rng, order)
            coeffs, err = levinson_durbin(r, order)
            assert np.max(np.abs(coeffs - dense_toeplitz_solve(r, order))) < 1e-8
            assert err >= 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError, match="positive"):
            levinson_durbin(np.array([0.0, 0.0]), 1)
        with pytest.raises(ValueError, match="lags"):
            levinson_durbin(np.array([1.0, 0.5]), 2)
        # |k| >= 1 from a non-positive-definite sequence
        with pytest.raises(ValueError, match="singular"):
            levinson_durbin(np.array([1.0, 1.0, 1.0]), 2)


class TestSpectralFlatness:
    def test_flat(self):
        assert spectral_flatness([1.0, 1.0, 1.0, 1.0]) == pytest.approx(1.0)

    def test_near_delta(self):
        assert spectral_flatness([1.0, 1e-12, 1e-12, 1e-12]) < 0.01

    def test_formula_value(self):
        # 64^(1/4) / 3.75
        assert spectral_flatness([1.0, 2.0, 4.0, 8.0]) == pytest.approx(0.75425, abs=1e-5)

    def test_errors(self):
        with pytest.raises(ValueError):
            spectral_flatness([0.0, 0.0])
        with pytest.raises(ValueError):
            spectral_flatness([1.0, -1.0])

    @given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=64))
    def test_range_property(self, power):
        assert 0.0 <= spectral_flatness(power) <= 1.0 + 1e-12


class TestMelToLpc:
    def test_flat_spectrum(self, fbank):
        mel_frame = np.log(fbank.weights @ np.full(fbank.n_bins, 0.5))
        frame = mel_to_lpc(mel_frame, fbank)
        assert frame.coeffs.shape == (16,)
        assert np.max(np.abs(frame.coeffs)) < 1e-3
        assert frame.flatness > 0.99

    def test_ar2_recovery(self, fbank):
        # forward-synthesize the power spectrum of a known AR(2) process
        r_pole, theta = 0.9, np.pi / 4
        a_true = np.array([2 * r_pole * np.cos(theta), -(r_pole**2)])
        omega = 2 * np.pi * np.arange(fbank.n_bins) / fbank.fft_size
        denom = np.abs(1 - a_true[0] * np.exp(-1j * omega) - a_true[1] * np.exp(-2j * omega))
        mel_frame = np.log(np.maximum(fbank.weights @ (1.0 / denom), 1e-10))
        frame = mel_to_lpc(mel_frame, fbank, order=2)
        assert np.abs(frame.coeffs - a_true).max() / np.abs(a_true).min() < 0.10

    def test_order_16_default(self, fbank):
        rng = np.random.default_rng(2)
        frame = mel_to_lpc(rng.normal(-1.0, 1.0, 80), fbank)
        assert frame.coeffs.shape == (16,)
        assert 0.0 <= frame.flatness <= 1.0
        assert frame.pred_error >= 0.0

    def test_dimension_mismatch(self, fbank):
        with pytest.raises(ValueError):
            mel_to_lpc(np.zeros(40), fbank)


class TestMuLaw:
    def test_zero_fixed_point(self):
        assert mu_law_encode(0.0) == 128
        assert mu_law_decode(128) == 0.0

    def test_range_extremes(self):
        assert mu_law_encode(1.0) == 255
        assert mu_law_encode(-1.0) == 0
        assert mu_law_decode(255) == pytest.approx(1.0)
        assert mu_law_decode(0) == pytest.approx(-1.0)

    def test_round_trip_within_step_table(self):
        levels = mu_law_decode(np.arange(256))
        steps = np.diff(levels)
        rng = np.random.default_rng(0)
        x = rng.uniform(-1.0, 1.0, 10_000)
        codes = mu_law_encode(x)
        err = np.abs(mu_law_decode(codes) - x)
        step_bound = np.maximum(
            steps[np.clip(codes, 1, 255) - 1], steps[np.clip(codes, 0, 254)]
        )
        assert np.all(err <= step_bound)

    def test_codes_monotone(self):
        x = np.linspace(-1.0, 1.0, 4001)
        codes = mu_law_encode(x)
        assert np.all(np.diff(codes.astype(int)) >= 0)

    @given(st.floats(min_value=-2.0, max_value=2.0, allow_nan=False))
    def test_clamping_and_bounds(self, x):
        code = mu_law_encode(x)
        assert 0 <= code <= 255


class TestLpcFilters:
    def test_zero_coeffs_identity(self):
        s = np.array([0.3, -0.1, 0.7])
        e = lpc_analysis(s, [np.zeros(4)], frame_len=3)
        assert np.array_equal(e, s)

    def test_hand_computed_analysis(self):
        e = lpc_analysis(np.array([1.0, 1.0, 1.0]), [np.array([0.5])], frame_len=3)
        assert np.allclose(e, [1.0, 0.5, 0.5])

    def test_hand_computed_synthesis(self):
        s = lpc_synthesis(np.array([1.0, 0.0, 0.0]), [np.array([0.5])], frame_len=3)
        assert np.allclose(s, [1.0, 0.5, 0.25])

    def test_zero_excitation(self):
        s = lpc_synthesis(np.zeros(8), [np.array([0.9, -0.2])], frame_len=8)
        assert np.all(s == 0.0)

    def test_exact_round_trips(self):
        # PCM-grid signals, as the audio path produces; stable filters via
        # reflection coefficients |k| < 1
        grid = lambda x: np.rint(x * 32768.0) / 32768.0
        rng = np.random.default_rng(1)
        signal = grid(rng.normal(size=600) * 0.3)
        frames = [coeffs_from_reflections(rng.uniform(-0.6, 0.6, 8)) for _ in range(3)]
        e = lpc_analysis(signal, frames, frame_len=200)
        assert np.array_equal(lpc_synthesis(e, frames, frame_len=200), signal)
        e2 = grid(rng.normal(size=600) * 0.3)
        s2 = lpc_synthesis(e2, frames, frame_len=200)
        assert np.array_equal(lpc_analysis(s2, frames, frame_len=200), e2)

    def test_coverage_mismatch(self):
        with pytest.raises(ValueError, match="cover"):
            lpc_analysis(np.zeros(100), [np.zeros(2)], frame_len=50)


class TestChunking:
    def _prepared(self, n_samples, fbank, params):
        w = make_noise(duration=n_samples / SR, seed=5)
        mel = mel_spectrogram(w, params, fbank)
        return w, mel

    def test_two_chunks_with_remainder(self, params, fbank):
        w, mel = self._prepared(4000, fbank, params)
        chunks = chunk_training_sequences(w, mel)
        assert len(chunks) == 2

    def test_exactly_one_chunk(self, params, fbank):
        w, mel = self._prepared(1600, fbank, params)
        chunks = chunk_training_sequences(w, mel)
        assert len(chunks) == 1
        assert chunks[0].samples.size == 1600
        assert chunks[0].excitation.size == 1600
        assert len(chunks[0].lpc) == 1600 // params.hop_len

    def test_chunk_boundaries(self, params, fbank):
        w, mel = self._prepared(3200, fbank, params)
        chunks = chunk_training_sequences(w, mel)
        for i, chunk in enumerate(chunks):
            assert np.array_equal(chunk.samples, w.samples[1600 * i : 1600 * (i + 1)])

    def test_short_waveform_empty(self, params, fbank):
        w, mel = self._prepared(1599, fbank, params)
        assert chunk_training_sequences(w, mel) == []

    def test_hop_must_divide(self, params, fbank):
        w, mel = self._prepared(3200, fbank, params)
        with pytest.raises(ValueError, match="divide"):
            chunk_training_sequences(w, mel, chunk=1500)

    def test_excitation_is_mu_law_of_residual(self, params, fbank):
        w, mel = self._prepared(1600, fbank, params)
        chunks = chunk_training_sequences(w, mel)
        frames = chunks[0].lpc
        residual = lpc_analysis(w.samples[:1600], frames, params.hop_len)
        assert np.array_equal(chunks[0].excitation, mu_law_encode(residual))
