# src/dsp/wav_io.py

import logging
from pathlib import Path

import numpy as np
import soundfile as sf

from src.dsp.dsp_dataclasses import TARGET_SAMPLE_RATE_HZ, AudioSignal
from src.utils.error_handling import UnsupportedEncodingError, WavFormatError

PCM16_SCALE = 32768.0


def resample_linear(samples: np.ndarray, src_rate_hz: int, dst_rate_hz: int) -> np.ndarray:
    """
    Resamples by linear interpolation between neighbouring input samples.

    Output sample j sits at input position j * src_rate / dst_rate; positions past
    the last input sample hold the last value. The output length is
    round(n * dst_rate / src_rate), rounding halves up.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if src_rate_hz == dst_rate_hz:
        return samples.copy()
    n_out = max(1, int(np.floor(samples.shape[0] * dst_rate_hz / src_rate_hz + 0.5)))
    positions = np.arange(n_out, dtype=np.float64) * (src_rate_hz / dst_rate_hz)
    return np.interp(positions, np.arange(samples.shape[0], dtype=np.float64), samples)


def load_wav(path: str | Path, target_rate_hz: int = TARGET_SAMPLE_RATE_HZ) -> AudioSignal:
    """
    Reads a PCM 16-bit RIFF/WAVE file as a mono signal at `target_rate_hz`.

    Stereo files are averaged to mono and samples are scaled by 1/32768.

    Raises:
        FileNotFoundError: If the file does not exist.
        WavFormatError: If the header is malformed or the file is not RIFF/WAVE.
        UnsupportedEncodingError: For compressed, float or >2-channel files.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"WAV file not found: {path}")

    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise WavFormatError(f"Malformed WAV header in {path}: {str(e)}")

    if info.format != "WAV":
        raise WavFormatError(f"{path} is not a RIFF/WAVE file (format {info.format})")
    if info.subtype != "PCM_16":
        raise UnsupportedEncodingError(
            f"{path} uses encoding {info.subtype}; only PCM_16 is supported"
        )
    if info.channels not in (1, 2):
        raise UnsupportedEncodingError(
            f"{path} has {info.channels} channels; only mono and stereo are supported"
        )

    try:
        data, file_rate = sf.read(str(path), dtype="int16", always_2d=True)
    except RuntimeError as e:
        raise WavFormatError(f"Could not decode {path}: {str(e)}")
    if data.shape[0] == 0:
        raise WavFormatError(f"{path} contains no samples")

    samples = data.astype(np.float64).mean(axis=1) / PCM16_SCALE
    if file_rate != target_rate_hz:
        logging.debug(f"Resampling {path} from {file_rate} Hz to {target_rate_hz} Hz")
        samples = resample_linear(samples, file_rate, target_rate_hz)
    return AudioSignal(samples=samples, sample_rate_hz=target_rate_hz)


def save_wav(signal: AudioSignal, path: str | Path) -> None:
    """Writes a mono PCM 16-bit WAV file, the inverse of load_wav's scaling."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.clip(np.round(signal.samples * PCM16_SCALE), -32768, 32767).astype(np.int16)
    sf.write(str(path), pcm, signal.sample_rate_hz, format="WAV", subtype="PCM_16")
