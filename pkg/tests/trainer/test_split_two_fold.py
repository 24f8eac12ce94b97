import unittest
import warnings
from pathlib import Path

from src.trainer.splitting import split_two_fold
from src.trainer.trainer_dataclasses import DatasetManifest, ManifestEntry
from src.utils.error_handling import ArgumentError


def _manifest(labels: list[int]) -> DatasetManifest:
    return DatasetManifest(
        [
            ManifestEntry(id=f"s{i:03d}", path=Path(f"s{i:03d}.mfcm"), label=label)
            for i, label in enumerate(labels)
        ]
    )


class TestSplitTwoFold(unittest.TestCase):
    def test_balanced_108(self):
        """108 balanced entries split 54/54 with 27 per class in each fold."""
        fold_a, fold_b = split_two_fold(_manifest([0, 1] * 54), seed=0)
        self.assertEqual((len(fold_a), len(fold_b)), (54, 54))
        for fold in (fold_a, fold_b):
            self.assertEqual(sum(fold.labels), 27)

    def test_partition(self):
        """The folds are disjoint and cover the manifest, for several sizes and seeds."""
        for n in (2, 3, 7, 20, 31):
            for seed in (0, 1, 2):
                with self.subTest(n=n, seed=seed):
                    manifest = _manifest([i % 2 for i in range(n)])
                    fold_a, fold_b = split_two_fold(manifest, seed)
                    self.assertFalse(set(fold_a.ids) & set(fold_b.ids))
                    self.assertEqual(set(fold_a.ids) | set(fold_b.ids), set(manifest.ids))
                    self.assertLessEqual(abs(len(fold_a) - len(fold_b)), 1)

    def test_three_entries(self):
        """Three entries split into sizes 2 and 1."""
        fold_a, fold_b = split_two_fold(_manifest([0, 1, 0]), seed=4)
        self.assertEqual(sorted([len(fold_a), len(fold_b)]), [1, 2])

    def test_deterministic(self):
        """The same seed gives the same folds."""
        manifest = _manifest([0, 1] * 10)
        first = split_two_fold(manifest, seed=8)
        second = split_two_fold(manifest, seed=8)
        self.assertEqual(first[0].ids, second[0].ids)
        self.assertEqual(first[1].ids, second[1].ids)

    def test_single_class_warns(self):
        """A single-class manifest warns and still splits."""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            with self.assertLogs(level="WARNING"):
                fold_a, fold_b = split_two_fold(_manifest([1] * 6), seed=0)
        self.assertTrue(caught)
        self.assertEqual((len(fold_a), len(fold_b)), (3, 3))

    def test_too_small(self):
        """At least two entries are needed."""
        with self.assertRaises(ArgumentError):
            split_two_fold(_manifest([0]), seed=0)


if __name__ == "__main__":
    unittest.main()
