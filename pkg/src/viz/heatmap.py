# src/viz/heatmap.py

import numpy as np

from src.model.model_dataclasses import AD, TimeActivations
from src.utils.error_handling import ArgumentError
from src.viz.otsu import otsu_split
from src.viz.viz_dataclasses import BitRun, Heatmap


def nearest_neighbor_indices(t_prime: int, t: int) -> np.ndarray:
    """Source index min(t'-1, floor((i + 0.5) * t' / t)) for every output index i."""
    i = np.arange(t, dtype=np.int64)
    return np.minimum(t_prime - 1, ((2 * i + 1) * t_prime) // (2 * t))


def upsample_nearest(vector: np.ndarray, t: int) -> np.ndarray:
    vector = np.asarray(vector)
    if t < 1:
        raise ArgumentError(f"Target length must be >= 1, got {t}")
    return vector[nearest_neighbor_indices(vector.shape[0], t)]


def heatmap(acts: TimeActivations, class_index: int = AD) -> Heatmap:
    """
    Thresholds one head row with Otsu's method and stretches the bits back to
    the feature map's frame count.
    """
    if class_index not in (0, 1):
        raise ArgumentError(f"class_index must be 0 or 1, got {class_index}")
    if acts.source_t < 1 or acts.t_prime < 1:
        raise ArgumentError("Time activations need source_t >= 1 and at least one step")
    threshold, bits = otsu_split(acts.class_row(class_index))
    return Heatmap(
        bits=upsample_nearest(bits, acts.source_t),
        class_index=class_index,
        threshold=float(threshold),
    )


def bit_runs(hm: Heatmap, hop: int, sample_rate_hz: int) -> list[BitRun]:
    """Maximal runs of equal bits; end_frame is exclusive and seconds are frame * hop / sr."""
    runs: list[BitRun] = []
    if hm.t == 0:
        return runs
    change_points = np.flatnonzero(np.diff(hm.bits)) + 1
    starts = np.concatenate(([0], change_points))
    ends = np.concatenate((change_points, [hm.t]))
    for start, end in zip(starts, ends):
        runs.append(
            BitRun(
                bit=int(hm.bits[start]),
                start_frame=int(start),
                end_frame=int(end),
                start_sec=float(start) * hop / sample_rate_hz,
                end_sec=float(end) * hop / sample_rate_hz,
            )
        )
    return runs
