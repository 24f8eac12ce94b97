# src/model/padding_drift.py

from dataclasses import dataclass, field

import numpy as np

from src.dsp.dsp_dataclasses import FeatureMap
from src.model.fcn_model import FcnModel, forward
from src.utils.error_handling import ArgumentError


@dataclass
class PaddingDriftReport:
    """
    How much zero-padding moves the output probabilities.

    Attributes:
        pad_fraction (float): Padding added, as a fraction of each map's length.
        masked_gap (bool): Whether the masked time average was used.
        drifts (list[float]): Per-sample max |probs(padded) - probs(original)|.
        label_flips (int): Samples whose label changed under padding.
    """

    pad_fraction: float
    masked_gap: bool
    drifts: list[float] = field(default_factory=list)
    label_flips: int = 0

    @property
    def mean_drift(self) -> float:
        return float(np.mean(self.drifts)) if self.drifts else 0.0

    @property
    def max_drift(self) -> float:
        return float(np.max(self.drifts)) if self.drifts else 0.0

    def to_dict(self) -> dict:
        return {
            "pad_fraction": self.pad_fraction,
            "masked_gap": self.masked_gap,
            "n_samples": len(self.drifts),
            "mean_drift": self.mean_drift,
            "max_drift": self.max_drift,
            "label_flips": self.label_flips,
            "drifts": self.drifts,
        }


def zero_pad(feature_map: FeatureMap, extra_frames: int) -> FeatureMap:
    return FeatureMap(values=np.pad(feature_map.values, ((0, 0), (0, extra_frames))))


def padding_drift_report(
    model: FcnModel,
    maps: list[FeatureMap],
    pad_fraction: float = 0.25,
    masked_gap: bool = False,
) -> PaddingDriftReport:
    """
    Measures the probability drift caused by trailing zero-padding of
    ceil(pad_fraction * t) frames, in infer mode. This is a measurement, not a
    pass/fail check.

    Raises:
        ArgumentError: If pad_fraction is negative.
    """
    if pad_fraction < 0:
        raise ArgumentError(f"pad_fraction must be >= 0, got {pad_fraction}")
    report = PaddingDriftReport(pad_fraction=pad_fraction, masked_gap=masked_gap)
    for feature_map in maps:
        extra = int(np.ceil(pad_fraction * feature_map.t))
        original = forward(model, feature_map, masked_gap=masked_gap)
        padded = forward(
            model, zero_pad(feature_map, extra), masked_gap=masked_gap, valid_len=feature_map.t
        )
        report.drifts.append(float(np.max(np.abs(padded.probs - original.probs))))
        report.label_flips += int(padded.label != original.label)
    return report
