# src/dsp/mfcc.py

import numpy as np
from scipy.fft import dct
from scipy.signal import get_window

from src.dsp.dsp_dataclasses import AudioSignal, FeatureMap, MfccConfig
from src.utils.error_handling import DegenerateFilterError, SignalTooShortError

LOG_FLOOR = 1e-10

# Slaney mel scale: linear below 1 kHz, logarithmic above.
# Swap hz_to_mel/mel_to_hz for 2595 * log10(1 + f / 700) to get the HTK variant.
_F_SP = 200.0 / 3.0
_MIN_LOG_HZ = 1000.0
_MIN_LOG_MEL = _MIN_LOG_HZ / _F_SP
_LOGSTEP = np.log(6.4) / 27.0


def hz_to_mel(frequencies_hz) -> np.ndarray:
    frequencies_hz = np.asarray(frequencies_hz, dtype=np.float64)
    mels = frequencies_hz / _F_SP
    log_region = frequencies_hz >= _MIN_LOG_HZ
    mels = np.where(
        log_region,
        _MIN_LOG_MEL + np.log(np.maximum(frequencies_hz, _MIN_LOG_HZ) / _MIN_LOG_HZ) / _LOGSTEP,
        mels,
    )
    return mels


def mel_to_hz(mels) -> np.ndarray:
    mels = np.asarray(mels, dtype=np.float64)
    freqs = _F_SP * mels
    log_region = mels >= _MIN_LOG_MEL
    return np.where(log_region, _MIN_LOG_HZ * np.exp(_LOGSTEP * (mels - _MIN_LOG_MEL)), freqs)


def frame_count(n_samples: int, cfg: MfccConfig) -> int:
    """
    Number of analysis frames for a signal of `n_samples` samples.

    Centered framing reflect-pads n_fft/2 samples on both sides, giving
    1 + n // hop frames. Uncentered framing needs at least n_fft samples.
    """
    if n_samples < 1:
        raise SignalTooShortError(f"Signal must have at least one sample, got {n_samples}")
    if cfg.centered:
        return 1 + n_samples // cfg.hop
    if n_samples < cfg.n_fft:
        raise SignalTooShortError(
            f"Uncentered framing needs at least n_fft={cfg.n_fft} samples, got {n_samples}"
        )
    return 1 + (n_samples - cfg.n_fft) // cfg.hop


def _frames(signal: AudioSignal, cfg: MfccConfig) -> np.ndarray:
    n_frames = frame_count(signal.n_samples, cfg)
    samples = signal.samples
    if cfg.centered:
        half = cfg.n_fft // 2
        samples = np.pad(samples, (half, half), mode="reflect")
    windows = np.lib.stride_tricks.sliding_window_view(samples, cfg.n_fft)
    return windows[:: cfg.hop][:n_frames]


def power_spectrogram(signal: AudioSignal, cfg: MfccConfig) -> np.ndarray:
    """
    Squared-magnitude STFT with a periodic Hann window.

    Returns:
        np.ndarray: (n_fft/2 + 1, t) float64 matrix, non-negative frequencies only.
    """
    frames = _frames(signal, cfg)
    window = get_window("hann", cfg.n_fft, fftbins=True)
    spectrum = np.fft.rfft(frames * window, n=cfg.n_fft, axis=1)
    return np.ascontiguousarray((spectrum.real**2 + spectrum.imag**2).T)


def mel_filterbank(cfg: MfccConfig) -> np.ndarray:
    """
    Triangular mel filters with Slaney area normalisation.

    Filter peaks are equally spaced on the mel scale between fmin and fmax; each
    filter is scaled by 2 / (its band width in Hz).

    Returns:
        np.ndarray: (n_mels, n_fft/2 + 1) non-negative matrix.

    Raises:
        DegenerateFilterError: If some filter covers no FFT bin.
    """
    cfg.validate()
    fft_freqs = np.linspace(0.0, cfg.sample_rate_hz / 2.0, cfg.n_bins)
    mel_points = np.linspace(
        hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.effective_fmax_hz), cfg.n_mels + 2
    )
    hz_points = mel_to_hz(mel_points)
    widths = np.diff(hz_points)
    ramps = hz_points[:, np.newaxis] - fft_freqs[np.newaxis, :]

    lower = -ramps[:-2] / widths[:-1, np.newaxis]
    upper = ramps[2:] / widths[1:, np.newaxis]
    weights = np.maximum(0.0, np.minimum(lower, upper))
    weights *= (2.0 / (hz_points[2:] - hz_points[:-2]))[:, np.newaxis]

    empty = np.flatnonzero(weights.max(axis=1) <= 0.0)
    if empty.size:
        raise DegenerateFilterError(
            f"{empty.size} of {cfg.n_mels} mel filters cover no FFT bin "
            f"(first empty filter: {int(empty[0])}); lower n_mels or raise n_fft"
        )
    return weights


def extract_mfcc(signal: AudioSignal, cfg: MfccConfig | None = None) -> FeatureMap:
    """
    Computes the (n_mfcc, t) MFCC feature map of a whole utterance.

    Mel energies are floored at 1e-10 before the natural log, then an
    orthonormal DCT-II along the mel axis keeps the first n_mfcc coefficients.
    No liftering, no deltas.
    """
    cfg = (cfg or MfccConfig()).validate()
    mel_energies = mel_filterbank(cfg) @ power_spectrogram(signal, cfg)
    log_mel = np.log(np.maximum(mel_energies, LOG_FLOOR))
    cepstra = dct(log_mel, type=2, axis=0, norm="ortho")[: cfg.n_mfcc]
    return FeatureMap(values=cepstra)


def standardize_map(feature_map: FeatureMap) -> FeatureMap:
    """Zero-mean, unit-variance rescaling over the whole map; constant maps become zero."""
    values = feature_map.values.astype(np.float64)
    std = values.std()
    centered = values - values.mean()
    if std > 0.0:
        centered /= std
    return FeatureMap(values=centered)
