# src/trainer/ensembles.py

from typing import Sequence

import numpy as np

from src.model.model_dataclasses import Prediction, label_from_probs
from src.utils.error_handling import ArgumentError, ShapeError

PROBABILITY_SUM_TOLERANCE = 1e-6


def _stack(predictions: Sequence[Prediction]) -> np.ndarray:
    if not predictions:
        raise ArgumentError("An ensemble needs at least one prediction")
    lengths = {np.asarray(p.probs).shape for p in predictions}
    if len(lengths) != 1:
        raise ShapeError(f"Ensemble members disagree on probability shape: {sorted(lengths)}")
    stacked = np.array([np.asarray(p.probs, dtype=np.float64) for p in predictions])
    sums = stacked.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PROBABILITY_SUM_TOLERANCE):
        raise ArgumentError(f"Ensemble members must be probability vectors, sums were {sums}")
    # Sorting per class makes the reduction independent of member order.
    return np.sort(stacked, axis=0)


def _combine(total: np.ndarray) -> Prediction:
    probs = total / total.sum()
    return Prediction(probs=probs, label=label_from_probs(probs))


def ensemble_average(predictions: Sequence[Prediction]) -> Prediction:
    """Per-class mean of the members' probabilities (the M1+2 rule)."""
    stacked = _stack(predictions)
    return _combine(stacked.sum(axis=0) / stacked.shape[0])


def ensemble_sum(predictions: Sequence[Prediction]) -> Prediction:
    """
    Per-class sum of the members' probabilities (the M1+2+3 rule), renormalised
    to sum to 1 for reporting; the argmax is that of the raw sum.
    """
    stacked = _stack(predictions)
    return _combine(stacked.sum(axis=0))


def ensemble(predictions: Sequence[Prediction]) -> Prediction:
    """Single prediction, M1+2 average for two members, M1+2+3 sum for three."""
    if len(predictions) == 1:
        return predictions[0]
    if len(predictions) == 2:
        return ensemble_average(predictions)
    if len(predictions) == 3:
        return ensemble_sum(predictions)
    raise ArgumentError(f"Ensembles combine 1 to 3 models, got {len(predictions)}")
