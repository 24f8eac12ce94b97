# src/trainer/augmentation.py

import numpy as np

from src.dsp.dsp_dataclasses import FeatureMap


def mask_length(t: int, rng: np.random.Generator, mask_len_range: tuple[int, int]) -> int:
    low, high = mask_len_range
    if t > high:
        return int(rng.integers(low, high + 1))
    # Short maps get a fixed half-length mask.
    return max(1, t // 2)


def random_mask_augment(
    feature_map: FeatureMap,
    rng: np.random.Generator,
    mask_len_range: tuple[int, int] = (200, 400),
) -> FeatureMap:
    """
    Zeroes one contiguous span of columns.

    The span length is uniform in `mask_len_range` (inclusive) and its start is
    uniform over the positions where it fits; maps with t <= the range maximum
    get a span of t // 2. Columns outside the span are untouched.
    """
    t = feature_map.t
    length = mask_length(t, rng, mask_len_range)
    start = int(rng.integers(0, t - length + 1))
    values = feature_map.values.copy()
    values[:, start : start + length] = 0.0
    return FeatureMap(values=values)
