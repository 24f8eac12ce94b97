import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal, assert_array_less
from scipy.fft import dct, idct
from scipy.signal import get_window

from src.dsp.dsp_dataclasses import AudioSignal, FeatureMap, MfccConfig
from src.dsp.mfcc import (
    LOG_FLOOR,
    extract_mfcc,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    power_spectrogram,
    standardize_map,
)
from src.utils.error_handling import DegenerateFilterError, InvalidConfigError

try:
    import librosa

    HAS_LIBROSA = True
except ImportError:
    HAS_LIBROSA = False


def _tone(seconds: float, freq_hz: float = 440.0, rate: int = 22050) -> AudioSignal:
    time = np.arange(int(seconds * rate)) / rate
    return AudioSignal(samples=0.5 * np.sin(2 * np.pi * freq_hz * time), sample_rate_hz=rate)


class TestPowerSpectrogram(unittest.TestCase):
    def setUp(self):
        self.cfg = MfccConfig(sample_rate_hz=8000, n_fft=64, hop=16, n_mels=8, n_mfcc=8)
        rng = np.random.default_rng(3)
        self.signal = AudioSignal(samples=rng.uniform(-1, 1, 300), sample_rate_hz=8000)

    def test_matches_naive_dft(self):
        """The FFT path agrees with a direct DFT of each windowed frame."""
        n_fft, hop = self.cfg.n_fft, self.cfg.hop
        padded = np.pad(self.signal.samples, (n_fft // 2, n_fft // 2), mode="reflect")
        window = get_window("hann", n_fft, fftbins=True)
        n = np.arange(n_fft)
        k = np.arange(n_fft // 2 + 1)
        basis = np.exp(-2j * np.pi * np.outer(k, n) / n_fft)

        spectrogram = power_spectrogram(self.signal, self.cfg)
        self.assertEqual(spectrogram.shape, (n_fft // 2 + 1, 1 + 300 // hop))
        for frame in range(spectrogram.shape[1]):
            segment = padded[frame * hop : frame * hop + n_fft] * window
            expected = np.abs(basis @ segment) ** 2
            assert_allclose(spectrogram[:, frame], expected, rtol=1e-6, atol=1e-9)

    def test_matches_naive_dft_full_window(self):
        """At n_fft = 2048 the FFT path matches a direct DFT of each frame."""
        cfg = MfccConfig()
        rng = np.random.default_rng(5)
        signal = AudioSignal(samples=rng.uniform(-1, 1, 4096))
        padded = np.pad(signal.samples, (1024, 1024), mode="reflect")
        window = get_window("hann", 2048, fftbins=True)
        basis = np.exp(-2j * np.pi * np.outer(np.arange(1025), np.arange(2048)) / 2048)

        spectrogram = power_spectrogram(signal, cfg)
        for frame in (0, 4, spectrogram.shape[1] - 1):
            expected = np.abs(basis @ (padded[frame * 512 : frame * 512 + 2048] * window)) ** 2
            with self.subTest(frame=frame):
                assert_allclose(spectrogram[:, frame], expected, rtol=1e-6, atol=1e-6 * expected.max())

    def test_zero_signal(self):
        spectrogram = power_spectrogram(AudioSignal(samples=np.zeros(22050)), MfccConfig())
        self.assertEqual(spectrogram.shape, (1025, 44))
        assert_array_equal(spectrogram, 0.0)

    def test_scaling_is_quadratic(self):
        """power_spectrogram(c * x) = c^2 * power_spectrogram(x)."""
        scaled = AudioSignal(samples=2.5 * self.signal.samples, sample_rate_hz=8000)
        assert_allclose(
            power_spectrogram(scaled, self.cfg),
            6.25 * power_spectrogram(self.signal, self.cfg),
            rtol=1e-9,
            atol=1e-12,
        )

    def test_cosine_peaks_at_its_bin(self):
        """A cosine at k * sr / n_fft puts every column's maximum at row k."""
        k = 128
        # 22049 samples make the reflect padding continue the cosine smoothly at both ends.
        n = np.arange(22049)
        signal = AudioSignal(samples=0.5 * np.cos(2 * np.pi * k * n / 2048))
        spectrogram = power_spectrogram(signal, MfccConfig())
        assert_array_equal(spectrogram.argmax(axis=0), k)

    def test_periodic_hann(self):
        """The analysis window is the periodic Hann window."""
        window = get_window("hann", 8, fftbins=True)
        assert_allclose(window, 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(8) / 8), atol=1e-15)


class TestMelFilterbank(unittest.TestCase):
    def test_shape_and_coverage(self):
        """Default filterbank is (128, 1025), non-negative, every filter non-empty."""
        weights = mel_filterbank(MfccConfig())
        self.assertEqual(weights.shape, (128, 1025))
        self.assertTrue(np.all(weights >= 0.0))
        self.assertTrue(np.all(weights.max(axis=1) > 0.0))

    def test_degenerate_filters(self):
        """Too many mel bands for the FFT size is an error."""
        with self.assertRaises(DegenerateFilterError):
            mel_filterbank(MfccConfig(n_fft=64, hop=16, n_mels=128, n_mfcc=64))

    def test_slaney_scale(self):
        """The mel scale is linear below 1 kHz and inverts cleanly."""
        self.assertAlmostEqual(float(hz_to_mel(1000.0)), 15.0)
        self.assertAlmostEqual(float(hz_to_mel(200.0)), 3.0)
        freqs = np.array([0.0, 300.0, 1000.0, 4000.0, 11025.0])
        assert_allclose(mel_to_hz(hz_to_mel(freqs)), freqs, rtol=1e-12, atol=1e-9)

    def test_invalid_config(self):
        """Invalid framing settings are rejected."""
        with self.assertRaises(InvalidConfigError):
            mel_filterbank(MfccConfig(hop=4096))
        with self.assertRaises(InvalidConfigError):
            mel_filterbank(MfccConfig(n_mfcc=200))

    def test_peaks_strictly_increasing(self):
        """Row maxima sit at increasing bins, within one bin of each centre frequency."""
        cfg = MfccConfig()
        weights = mel_filterbank(cfg)
        peaks = weights.argmax(axis=1)
        self.assertTrue(np.all(np.diff(peaks) > 0))

        def to_mel(f):
            return 3.0 * f / 200.0 if f < 1000.0 else 15.0 + 27.0 * np.log(f / 1000.0) / np.log(6.4)

        def to_hz(m):
            return 200.0 * m / 3.0 if m < 15.0 else 1000.0 * np.exp((m - 15.0) * np.log(6.4) / 27.0)

        mels = np.linspace(to_mel(0.0), to_mel(11025.0), cfg.n_mels + 2)[1:-1]
        centres = np.array([to_hz(m) for m in mels])
        bin_width = 22050 / 2048
        assert_array_less(np.abs(peaks * bin_width - centres), bin_width + 1e-9)

    def test_all_ones_spectrum_response(self):
        self.assertGreater(float((mel_filterbank(MfccConfig()) @ np.ones(1025)).sum()), 0.0)

    @unittest.skipUnless(HAS_LIBROSA, "librosa not installed")
    def test_matches_librosa(self):
        """Cross-check against librosa's Slaney-normalised filterbank."""
        reference = librosa.filters.mel(sr=22050, n_fft=2048, n_mels=128, htk=False, norm="slaney")
        assert_allclose(mel_filterbank(MfccConfig()), reference, rtol=1e-4, atol=1e-9)


class TestExtractMfcc(unittest.TestCase):
    def test_one_second_shape(self):
        """One second at 22050 Hz gives a (64, 44) float32 map."""
        feature_map = extract_mfcc(_tone(1.0))
        self.assertEqual((feature_map.p, feature_map.t), (64, 44))
        self.assertEqual(feature_map.values.dtype, np.float32)

    def test_five_seconds_shape(self):
        """Five seconds give 216 frames."""
        self.assertEqual(extract_mfcc(_tone(5.0)).t, 216)

    def test_deterministic(self):
        """Two extractions of the same signal are bitwise identical."""
        signal = _tone(1.5, freq_hz=220.0)
        assert_array_equal(extract_mfcc(signal).values, extract_mfcc(signal).values)

    def test_gain_shifts_only_c0(self):
        """Scaling the signal by c adds 2 ln(c) * sqrt(128) to c0 and leaves the rest."""
        rng = np.random.default_rng(9)
        signal = AudioSignal(samples=rng.uniform(-0.25, 0.25, 22050))
        louder = AudioSignal(samples=3.0 * signal.samples)
        base, scaled = extract_mfcc(signal).values, extract_mfcc(louder).values
        assert_allclose(scaled[0] - base[0], 2.0 * np.log(3.0) * np.sqrt(128), atol=1e-3)
        assert_allclose(scaled[1:], base[1:], atol=1e-4)

    def test_silent_gap_columns_identical(self):
        """tone | silence | tone: frames wholly inside the silence all equal the silence column."""
        tone = _tone(1.0).samples
        signal = AudioSignal(samples=np.concatenate([tone, np.zeros(44100), tone]))
        values = extract_mfcc(signal).values
        silence_column = extract_mfcc(AudioSignal(samples=np.zeros(22050))).values[:, 0]
        # Frame j spans samples [512 j - 1024, 512 j + 1024); silence covers [22050, 66150).
        silent = values[:, 46:128]
        assert_allclose(silent, np.repeat(silence_column[:, np.newaxis], 82, axis=1), atol=1e-6)
        self.assertFalse(np.allclose(values[:, 20], silence_column))

    def test_silence_hits_log_floor(self):
        """Silence maps to the floored log energy: only c0 is non-zero."""
        silence = AudioSignal(samples=np.zeros(22050), sample_rate_hz=22050)
        values = extract_mfcc(silence).values
        self.assertTrue(np.all(np.isfinite(values)))
        assert_allclose(values[0], np.sqrt(128) * np.log(LOG_FLOOR), rtol=1e-5)
        assert_allclose(values[1:], 0.0, atol=1e-3)

    def test_dct_round_trip(self):
        """The orthonormal DCT-II used for the cepstrum inverts to within 1e-9."""
        rng = np.random.default_rng(0)
        log_mel = rng.normal(size=(128, 20))
        restored = idct(dct(log_mel, type=2, axis=0, norm="ortho"), type=2, axis=0, norm="ortho")
        assert_allclose(restored, log_mel, atol=1e-9)


class TestStandardizeMap(unittest.TestCase):
    def test_zero_mean_unit_variance(self):
        """Standardised maps have mean 0 and variance 1."""
        rng = np.random.default_rng(1)
        feature_map = FeatureMap(values=rng.normal(5.0, 3.0, size=(64, 50)))
        values = standardize_map(feature_map).values.astype(np.float64)
        self.assertAlmostEqual(values.mean(), 0.0, places=5)
        self.assertAlmostEqual(values.std(), 1.0, places=5)

    def test_constant_map(self):
        """A constant map standardises to zeros."""
        feature_map = FeatureMap(values=np.full((4, 40), 7.0))
        assert_array_equal(standardize_map(feature_map).values, 0.0)


if __name__ == "__main__":
    unittest.main()
