# src/trainer/splitting.py

import logging
import warnings

import numpy as np

from src.trainer.trainer_dataclasses import DatasetManifest
from src.utils.error_handling import ArgumentError


def split_two_fold(manifest: DatasetManifest, seed: int) -> tuple[DatasetManifest, DatasetManifest]:
    """
    Splits a manifest into two halves whose sizes differ by at most one.

    Each class is permuted with the seeded generator and the concatenated
    per-class orders are dealt alternately to fold A and fold B, so both folds
    see each class in near-equal numbers. Entries keep their manifest order
    inside each fold.

    Raises:
        ArgumentError: If the manifest has fewer than two entries.
    """
    n = len(manifest)
    if n < 2:
        raise ArgumentError(f"Two-fold split needs at least 2 entries, got {n}")

    rng = np.random.default_rng(seed)
    labels = np.array(manifest.labels)
    classes = np.unique(labels)
    if classes.size < 2:
        message = (
            f"Manifest has a single class ({int(classes[0])}); falling back to an "
            "unstratified split"
        )
        warnings.warn(message)
        logging.warning(message)
        order = rng.permutation(n)
    else:
        order = np.concatenate(
            [rng.permutation(np.flatnonzero(labels == label)) for label in classes]
        )

    in_fold_a = np.zeros(n, dtype=bool)
    in_fold_a[order[0::2]] = True
    fold_a = DatasetManifest([entry for i, entry in enumerate(manifest.entries) if in_fold_a[i]])
    fold_b = DatasetManifest(
        [entry for i, entry in enumerate(manifest.entries) if not in_fold_a[i]]
    )
    logging.info(f"Two-fold split (seed {seed}): {len(fold_a)} / {len(fold_b)} entries")
    return fold_a, fold_b
