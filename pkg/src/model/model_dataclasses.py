from dataclasses import dataclass, field

import numpy as np

from src.utils.error_handling import InvalidConfigError

BLOCK_KINDS = ("standard", "depthwise_separable")
NON_AD = 0
AD = 1
CLASS_NAMES = ("non-AD", "AD")


@dataclass(frozen=True)
class BlockSpec:
    kind: str
    stride: int
    filters: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "stride": self.stride, "filters": self.filters}


MOBILENET_V1_BLOCKS: tuple[BlockSpec, ...] = (
    BlockSpec("standard", 2, 32),
    BlockSpec("depthwise_separable", 1, 64),
    BlockSpec("depthwise_separable", 2, 128),
    BlockSpec("depthwise_separable", 1, 128),
    BlockSpec("depthwise_separable", 2, 256),
    BlockSpec("depthwise_separable", 1, 256),
    BlockSpec("depthwise_separable", 2, 512),
    *(BlockSpec("depthwise_separable", 1, 512) for _ in range(5)),
    BlockSpec("depthwise_separable", 2, 1024),
    BlockSpec("depthwise_separable", 1, 1024),
)

REFERENCE_FINAL_FILTERS = 1024
REQUIRED_TOTAL_STRIDE = 32


@dataclass
class BackboneConfig:
    """
    MobileNet-style backbone description.

    Attributes:
        width_multiplier (float): alpha in (0, 1]; scales every block's filters.
        blocks (list[BlockSpec]): Block table; the first block must be "standard".
        input_channels (int): Channels of the network input (3, replicated MFCC map).
    """

    width_multiplier: float = 0.25
    blocks: list[BlockSpec] = field(default_factory=lambda: list(MOBILENET_V1_BLOCKS))
    input_channels: int = 3

    def channels(self, filters: int) -> int:
        return max(1, int(round(filters * self.width_multiplier)))

    @property
    def total_stride(self) -> int:
        return int(np.prod([block.stride for block in self.blocks]))

    @property
    def final_channels(self) -> int:
        return self.channels(self.blocks[-1].filters)

    def validate(self) -> "BackboneConfig":
        if not 0.0 < self.width_multiplier <= 1.0:
            raise InvalidConfigError(
                f"width_multiplier must be in (0, 1], got {self.width_multiplier}"
            )
        if not self.blocks:
            raise InvalidConfigError("Backbone block table is empty")
        for block in self.blocks:
            if block.kind not in BLOCK_KINDS:
                raise InvalidConfigError(f"Unknown block kind '{block.kind}'")
            if block.stride < 1 or block.filters < 1:
                raise InvalidConfigError(f"Invalid block {block}")
        if self.blocks[0].kind != "standard":
            raise InvalidConfigError("The first backbone block must be a standard convolution")
        if self.total_stride != REQUIRED_TOTAL_STRIDE:
            raise InvalidConfigError(
                f"Backbone stride product must be {REQUIRED_TOTAL_STRIDE}, got {self.total_stride}"
            )
        if self.final_channels != self.channels(REFERENCE_FINAL_FILTERS):
            raise InvalidConfigError(
                f"Final channel count {self.final_channels} must equal "
                f"round({REFERENCE_FINAL_FILTERS} * alpha) = {self.channels(REFERENCE_FINAL_FILTERS)}"
            )
        if self.input_channels < 1:
            raise InvalidConfigError(f"input_channels must be >= 1, got {self.input_channels}")
        return self

    def to_dict(self) -> dict:
        return {
            "width_multiplier": self.width_multiplier,
            "blocks": [block.to_dict() for block in self.blocks],
            "input_channels": self.input_channels,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackboneConfig":
        unknown = set(data) - {"width_multiplier", "blocks", "input_channels"}
        if unknown:
            raise InvalidConfigError(f"Unknown BackboneConfig keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "blocks" in kwargs:
            try:
                kwargs["blocks"] = [BlockSpec(**block) for block in kwargs["blocks"]]
            except TypeError as e:
                raise InvalidConfigError(f"Invalid block entry: {str(e)}")
        return cls(**kwargs).validate()


@dataclass
class TimeActivations:
    """
    Per-timestep class evidence tapped before the final time pooling.

    Attributes:
        values (np.ndarray): (t', 2) matrix; column 0 is non-AD, column 1 is AD.
        source_t (int): Frame count t of the feature map the values came from.
    """

    values: np.ndarray
    source_t: int

    @property
    def t_prime(self) -> int:
        return int(self.values.shape[0])

    def class_row(self, class_index: int) -> np.ndarray:
        return self.values[:, class_index]


@dataclass
class Prediction:
    """
    Attributes:
        probs (np.ndarray): Length-2 probabilities (non-AD, AD) summing to 1.
        label (int): argmax of probs, ties to 0 (non-AD).
        time_activations (TimeActivations | None): Present for single-model predictions.
    """

    probs: np.ndarray
    label: int
    time_activations: TimeActivations | None = None


def label_from_probs(probs: np.ndarray) -> int:
    """argmax with ties broken toward non-AD."""
    return AD if probs[AD] > probs[NON_AD] else NON_AD
