import os
import unittest

import numpy as np

from src.model.fcn_model import FcnModel
from src.model.model_dataclasses import BackboneConfig
from src.model.padding_drift import padding_drift_report, zero_pad
from tests.model.toy_backbone import random_map, toy_backbone

RUN_SLOW = os.environ.get("FCN_RUN_SLOW") == "1"


class TestPaddingDrift(unittest.TestCase):
    def setUp(self):
        self.model = FcnModel.initialize(toy_backbone(), seed=5)
        rng = np.random.default_rng(6)
        self.maps = [random_map(rng, t) for t in (40, 64, 96, 128)]

    def test_zero_pad(self):
        """zero_pad appends zero columns."""
        padded = zero_pad(self.maps[0], 10)
        self.assertEqual(padded.t, 50)
        self.assertTrue(np.all(padded.values[:, 40:] == 0.0))

    def test_masked_report_has_no_drift(self):
        """With masked pooling, padding to a multiple of 32 does not drift."""
        report = padding_drift_report(
            self.model, [self.maps[1], self.maps[3]], pad_fraction=0.5, masked_gap=True
        )
        self.assertEqual(len(report.drifts), 2)
        self.assertLessEqual(report.max_drift, 1e-6)
        self.assertEqual(report.label_flips, 0)

    def test_masked_report_with_standardized_input(self):
        """Standardised inputs keep the masked report at zero drift."""
        model = FcnModel.initialize(toy_backbone(), seed=5, standardize_input=True)
        shifted = [random_map(np.random.default_rng(8), 64)]
        shifted[0].values += 3.0
        report = padding_drift_report(model, shifted, pad_fraction=0.5, masked_gap=True)
        self.assertLessEqual(report.max_drift, 1e-6)

    def test_unmasked_report(self):
        """The unmasked report measures one non-negative drift per sample."""
        report = padding_drift_report(self.model, self.maps)
        self.assertEqual(len(report.drifts), 4)
        self.assertTrue(all(drift >= 0.0 for drift in report.drifts))
        self.assertLessEqual(report.mean_drift, report.max_drift)
        self.assertEqual(report.to_dict()["n_samples"], 4)


@unittest.skipUnless(RUN_SLOW, "Set FCN_RUN_SLOW=1 to run the padding drift measurement")
class TestPaddingDriftMeasurement(unittest.TestCase):
    def test_twenty_samples_quarter_padding(self):
        """Unmasked drift over 20 samples padded by 25%, reported rather than thresholded."""
        model = FcnModel.initialize(BackboneConfig(), seed=0)
        rng = np.random.default_rng(20)
        maps = [random_map(rng, int(t), p=64) for t in rng.integers(200, 600, size=20)]
        unmasked = padding_drift_report(model, maps, pad_fraction=0.25)
        masked = padding_drift_report(model, maps, pad_fraction=0.25, masked_gap=True)
        print(f"\nunmasked padding drift: {unmasked.to_dict()}")
        print(f"masked padding drift: {masked.to_dict()}")
        self.assertEqual(len(unmasked.drifts), 20)


if __name__ == "__main__":
    unittest.main()
