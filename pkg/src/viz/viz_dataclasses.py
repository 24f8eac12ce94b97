from dataclasses import dataclass, field

import numpy as np

from src.utils.error_handling import ArgumentError

DARK_RGB = (32, 32, 64)
YELLOW_RGB = (240, 200, 32)
BAR_HEIGHT_PX = 16
OTSU_BINS = 256


@dataclass
class Heatmap:
    """
    Binary temporal impact map at feature-map frame resolution.

    Attributes:
        bits (np.ndarray): uint8 vector of length t; 1 marks a high-impact frame.
        class_index (int): Head row that was thresholded (1 = AD).
        threshold (float): Otsu threshold in the units of the head row.
    """

    bits: np.ndarray
    class_index: int = 1
    threshold: float = 0.0

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ArgumentError(f"Heatmap bits must be a vector, got shape {self.bits.shape}")
        if np.any(self.bits > 1):
            raise ArgumentError("Heatmap bits must be 0 or 1")

    @property
    def t(self) -> int:
        return int(self.bits.shape[0])


@dataclass
class BitRun:
    bit: int
    start_frame: int
    end_frame: int
    start_sec: float = field(default=0.0)
    end_sec: float = field(default=0.0)

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame

    def to_dict(self) -> dict:
        return {
            "bit": self.bit,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "start_sec": self.start_sec,
            "end_sec": self.end_sec,
        }
