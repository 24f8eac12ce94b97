# src/viz/otsu.py

import numpy as np

from src.utils.error_handling import ArgumentError
from src.viz.viz_dataclasses import OTSU_BINS

# Relative slack when comparing between-class variances across cut points.
VARIANCE_TIE_TOLERANCE = 1e-12


def _histogram_bins(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.zeros(values.shape, dtype=np.int64), low, high
    normalized = (values - low) / (high - low)
    bins = np.minimum(np.floor(normalized * OTSU_BINS), OTSU_BINS - 1).astype(np.int64)
    return bins, low, high


def _best_cut(values: np.ndarray, bins: np.ndarray) -> int:
    """Lowest bin index k maximising the between-class variance of {bin < k} vs {bin >= k}."""
    counts = np.bincount(bins, minlength=OTSU_BINS).astype(np.float64)
    sums = np.bincount(bins, weights=values, minlength=OTSU_BINS)
    total_count, total_sum = counts.sum(), sums.sum()

    below_count = np.cumsum(counts)[:-1]
    below_sum = np.cumsum(sums)[:-1]
    above_count = total_count - below_count
    above_sum = total_sum - below_sum

    variance = np.zeros(OTSU_BINS - 1, dtype=np.float64)
    both = (below_count > 0) & (above_count > 0)
    mean_below = below_sum[both] / below_count[both]
    mean_above = above_sum[both] / above_count[both]
    variance[both] = (
        below_count[both] * above_count[both] * (mean_below - mean_above) ** 2 / total_count**2
    )

    best = variance.max()
    candidates = np.flatnonzero(variance >= best - VARIANCE_TIE_TOLERANCE * best)
    # variance[j] describes the cut k = j + 1
    return int(candidates[0]) + 1


def otsu_split(values: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Otsu's method over a 256-bin histogram of the min-max normalised values.

    The class means use the values themselves rather than bin centres, so the
    chosen partition is the one maximising the exact between-class variance
    among cuts the histogram can express. Ties go to the lowest cut.

    Args:
        values (np.ndarray): Non-empty real vector.

    Returns:
        tuple[float, np.ndarray]: Threshold in the input's units and uint8 bits
            (1 for values at or above the threshold). A constant vector gives a
            threshold equal to its value and all-zero bits.

    Raises:
        ArgumentError: If `values` is empty or not finite.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ArgumentError("Otsu thresholding needs at least one value")
    if not np.all(np.isfinite(values)):
        raise ArgumentError("Otsu thresholding needs finite values")

    bins, low, high = _histogram_bins(values)
    if high == low:
        return low, np.zeros(values.shape, dtype=np.uint8)

    normalized = (values - low) / (high - low)
    cut = _best_cut(normalized, bins)
    threshold = low + cut / OTSU_BINS * (high - low)
    return threshold, (bins >= cut).astype(np.uint8)


def otsu_threshold(values: np.ndarray) -> float:
    return otsu_split(values)[0]


def otsu_bits(values: np.ndarray) -> np.ndarray:
    return otsu_split(values)[1]
