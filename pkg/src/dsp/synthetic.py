# src/dsp/synthetic.py

from dataclasses import dataclass, field

import numpy as np

from src.dsp.dsp_dataclasses import TARGET_SAMPLE_RATE_HZ, AudioSignal

CONTINUOUS_LABEL = 0
PAUSED_LABEL = 1


@dataclass
class SyntheticUtterance:
    """
    One generated utterance of the synthetic screening corpus.

    Attributes:
        id (str): Utterance identifier.
        label (int): 0 for continuous speech-proxy, 1 for speech-proxy with long pauses.
        signal (AudioSignal): The audio.
        pause_spans (list[tuple[int, int]]): Inserted pauses as [start, end) sample indices.
    """

    id: str
    label: int
    signal: AudioSignal
    pause_spans: list[tuple[int, int]] = field(default_factory=list)


def _voiced_tone(rng: np.random.Generator, n_samples: int, sample_rate_hz: int) -> np.ndarray:
    # Harmonic tone with drifting pitch and a syllable-rate envelope that never
    # drops to silence.
    time = np.arange(n_samples) / sample_rate_hz
    f0 = rng.uniform(110.0, 220.0)
    drift = 1.0 + 0.08 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * time + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * f0 * np.cumsum(drift) / sample_rate_hz
    tone = sum(np.sin(k * phase) / k for k in range(1, 6))
    envelope = 0.7 + 0.3 * np.sin(2 * np.pi * rng.uniform(3.0, 5.0) * time)
    return 0.3 * envelope * tone / np.max(np.abs(tone))


def synth_utterance(
    rng: np.random.Generator,
    utterance_id: str,
    label: int,
    duration_s: float = 4.0,
    sample_rate_hz: int = TARGET_SAMPLE_RATE_HZ,
    n_pauses: tuple[int, int] = (2, 3),
    pause_s: tuple[float, float] = (0.4, 0.8),
) -> SyntheticUtterance:
    """
    Generates one utterance. Class 1 utterances get long pauses that are either
    digital silence or a faint noise burst (a filled-pause stand-in).
    """
    n_samples = int(duration_s * sample_rate_hz)
    samples = _voiced_tone(rng, n_samples, sample_rate_hz)
    pause_spans: list[tuple[int, int]] = []

    if label == PAUSED_LABEL:
        count = int(rng.integers(n_pauses[0], n_pauses[1] + 1))
        slot = n_samples // count
        for k in range(count):
            length = int(rng.uniform(*pause_s) * sample_rate_hz)
            length = min(length, slot - 1)
            start = k * slot + int(rng.integers(0, slot - length))
            end = start + length
            if rng.random() < 0.5:
                samples[start:end] = 0.0
            else:
                samples[start:end] = 0.01 * rng.standard_normal(length)
            pause_spans.append((start, end))

    return SyntheticUtterance(
        id=utterance_id,
        label=label,
        signal=AudioSignal(samples=np.clip(samples, -1.0, 1.0), sample_rate_hz=sample_rate_hz),
        pause_spans=pause_spans,
    )


def synth_corpus(
    n_samples: int, seed: int, duration_s: float = 4.0, prefix: str = "synth"
) -> list[SyntheticUtterance]:
    """Balanced corpus: even indices are class 0, odd indices class 1."""
    rng = np.random.default_rng(seed)
    return [
        synth_utterance(rng, f"{prefix}_{i:04d}", i % 2, duration_s=duration_s)
        for i in range(n_samples)
    ]


def span_to_frames(span: tuple[int, int], hop: int) -> tuple[int, int]:
    """
    Frames whose (centered) analysis point falls inside a [start, end) sample span,
    as a [start_frame, end_frame) pair.
    """
    start, end = span
    return -(-start // hop), -(-end // hop)
