from dataclasses import asdict, dataclass, field

import numpy as np

from src.utils.error_handling import DspError, InvalidConfigError

TARGET_SAMPLE_RATE_HZ = 22050


@dataclass
class AudioSignal:
    """
    A mono audio signal.

    Attributes:
        samples (np.ndarray): 1-D float64 amplitudes in [-1, 1].
        sample_rate_hz (int): The sample rate in Hz.
    """

    samples: np.ndarray
    sample_rate_hz: int = TARGET_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise DspError(
                f"AudioSignal must be mono, got array of shape {self.samples.shape}"
            )
        if self.sample_rate_hz <= 0:
            raise DspError(f"Sample rate must be positive: {self.sample_rate_hz}")
        if not np.all(np.isfinite(self.samples)):
            raise DspError("AudioSignal contains non-finite samples")

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass
class MfccConfig:
    """
    Framing and filterbank settings of the MFCC front end.

    The defaults reproduce the reference tool defaults: 22050 Hz audio, a
    2048-sample window advanced by 512 samples, 128 Slaney mel filters and
    64 kept coefficients. `fmax_hz=None` means sample_rate / 2.
    """

    sample_rate_hz: int = TARGET_SAMPLE_RATE_HZ
    n_fft: int = 2048
    hop: int = 512
    n_mels: int = 128
    n_mfcc: int = 64
    fmin_hz: float = 0.0
    fmax_hz: float | None = None
    centered: bool = True

    @property
    def effective_fmax_hz(self) -> float:
        if self.fmax_hz is None:
            return self.sample_rate_hz / 2.0
        return float(self.fmax_hz)

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def validate(self) -> "MfccConfig":
        if self.sample_rate_hz <= 0:
            raise InvalidConfigError(f"sample_rate_hz must be positive: {self.sample_rate_hz}")
        if self.n_fft <= 0 or self.hop <= 0:
            raise InvalidConfigError("n_fft and hop must be positive")
        if self.hop > self.n_fft:
            raise InvalidConfigError(f"hop ({self.hop}) must not exceed n_fft ({self.n_fft})")
        if self.n_mfcc < 1 or self.n_mfcc > self.n_mels:
            raise InvalidConfigError(
                f"n_mfcc ({self.n_mfcc}) must be in [1, n_mels={self.n_mels}]"
            )
        fmax = self.effective_fmax_hz
        if not 0.0 <= self.fmin_hz < fmax <= self.sample_rate_hz / 2.0:
            raise InvalidConfigError(
                f"Need 0 <= fmin < fmax <= sample_rate/2, got fmin={self.fmin_hz}, fmax={fmax}"
            )
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MfccConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"Unknown MfccConfig keys: {sorted(unknown)}")
        return cls(**data).validate()


@dataclass
class FeatureMap:
    """
    A (p, t) MFCC matrix: row = coefficient index, column = time frame.
    Values are stored as float32, the precision of the on-disk format.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise DspError(f"FeatureMap must be a (p, t) matrix with t >= 1, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DspError("FeatureMap contains non-finite values")

    @property
    def p(self) -> int:
        return int(self.values.shape[0])

    @property
    def t(self) -> int:
        return int(self.values.shape[1])
