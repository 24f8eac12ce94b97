import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
from numpy.testing import assert_array_equal

from src.dsp.dsp_dataclasses import FeatureMap
from src.model.fcn_model import FcnModel
from src.nncore.nncore_dataclasses import OptimizerConfig
from src.trainer.trainer_dataclasses import Sample, TrainConfig
from src.trainer.training import Trainer, train
from src.utils.error_handling import ArgumentError, TrainingDivergedError
from tests.model.toy_backbone import toy_backbone


def _separable_samples(n: int, seed: int, t: int = 64) -> list[Sample]:
    """AD maps are shifted up and non-AD maps down."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        offset = 2.0 if label == 1 else -2.0
        values = rng.normal(size=(16, t)) + offset
        samples.append(Sample(id=f"s{i:02d}", feature_map=FeatureMap(values=values), label=label))
    return samples


def _config(**overrides) -> TrainConfig:
    settings = {
        "batch_size": 4,
        "max_epochs": 4,
        "optimizer": OptimizerConfig(learning_rate=3e-3),
        "seed": 0,
        "selection": "min_train_loss",
        "min_selection_epoch": 1,
    }
    settings.update(overrides)
    return TrainConfig(**settings)


class TestTrainer(unittest.TestCase):
    def setUp(self):
        self.train_samples = _separable_samples(12, seed=1)
        self.val_samples = _separable_samples(6, seed=2)

    def test_zero_learning_rate_freezes_parameters(self):
        """lr = 0 leaves every trainable value unchanged."""
        model = FcnModel.initialize(toy_backbone(), seed=3)
        before = {name: param.data.copy() for name, param in model.parameters.items()}
        cfg = _config(optimizer=OptimizerConfig(learning_rate=0.0), max_epochs=2)
        result = train(self.train_samples, None, cfg, model=model)
        for name, param in result.model.parameters.items():
            assert_array_equal(param.data, before[name])

    def test_min_train_loss_selection(self):
        """The selected epoch is the first with the lowest training loss."""
        result = train(self.train_samples, None, _config(), backbone=toy_backbone())
        losses = [record.train_loss for record in result.history]
        self.assertEqual(len(result.history), 4)
        self.assertEqual(result.best_epoch, int(np.argmin(losses)) + 1)
        self.assertEqual(result.best_value, min(losses))
        self.assertIsNone(result.history[0].val_accuracy)

    def test_max_val_accuracy_restores_snapshot(self):
        """The restored model scores the recorded best validation accuracy."""
        cfg = _config(selection="max_val_accuracy")
        result = train(self.train_samples, self.val_samples, cfg, backbone=toy_backbone())
        accuracies = [record.val_accuracy for record in result.history]
        self.assertEqual(result.best_epoch, int(np.argmax(accuracies)) + 1)
        self.assertEqual(result.best_value, max(accuracies))
        trainer = Trainer(result.model, cfg)
        self.assertEqual(trainer.evaluate(self.val_samples), result.best_value)

    def test_min_selection_epoch_capped_by_max_epochs(self):
        """With fewer epochs than the warm-up, only the last epoch is eligible."""
        cfg = _config(selection="max_val_accuracy", max_epochs=2, min_selection_epoch=50)
        result = train(self.train_samples, self.val_samples, cfg, backbone=toy_backbone())
        self.assertEqual(result.best_epoch, 2)

    def test_val_selection_needs_validation(self):
        """max_val_accuracy without validation samples is rejected."""
        with self.assertRaises(ArgumentError):
            train(self.train_samples, None, _config(selection="max_val_accuracy"), backbone=toy_backbone())

    def test_deterministic(self):
        """The same seed gives the same history and weights."""
        first = train(self.train_samples, None, _config(augment_mask=True, mask_len_range=(8, 16)), backbone=toy_backbone())
        second = train(self.train_samples, None, _config(augment_mask=True, mask_len_range=(8, 16)), backbone=toy_backbone())
        self.assertEqual(
            [record.train_loss for record in first.history],
            [record.train_loss for record in second.history],
        )
        for name, values in first.model.state_dict().items():
            assert_array_equal(values, second.model.state_dict()[name])

    def test_loss_decreases(self):
        """Training on separable maps lowers the loss below the first epoch's."""
        result = train(self.train_samples, None, _config(max_epochs=20), backbone=toy_backbone())
        self.assertLess(result.best_value, result.history[0].train_loss)

    def test_separable_set_reaches_ninety_percent(self):
        """On a separable toy set, train accuracy reaches 0.9 within 200 epochs."""
        samples = _separable_samples(16, seed=11)
        result = train(samples, None, _config(batch_size=8, max_epochs=200), backbone=toy_backbone())
        reached = [record.epoch for record in result.history if record.train_accuracy >= 0.9]
        self.assertTrue(reached, f"best train accuracy {max(r.train_accuracy for r in result.history)}")

    def test_non_finite_loss_diverges(self):
        """A non-finite batch loss stops training with the epoch and batch."""
        nan_loss = mock.MagicMock()
        nan_loss.item.return_value = float("nan")
        with mock.patch("src.trainer.training.cross_entropy", return_value=nan_loss):
            with self.assertRaises(TrainingDivergedError) as context:
                train(self.train_samples, None, _config(), backbone=toy_backbone())
        self.assertEqual((context.exception.epoch, context.exception.batch), (1, 0))
        nan_loss.backward.assert_not_called()

    def test_log_file(self):
        """The per-epoch log records the selected epoch."""
        with tempfile.TemporaryDirectory() as temp_dir:
            log_path = Path(temp_dir) / "training.log"
            train(self.train_samples, None, _config(max_epochs=2), backbone=toy_backbone(), log_file=log_path)
            content = log_path.read_text()
        self.assertIn("epoch 2", content)
        self.assertIn("selected_epoch", content)

    def test_empty_training_set(self):
        """Training needs samples."""
        with self.assertRaises(ArgumentError):
            train([], None, _config(), backbone=toy_backbone())


if __name__ == "__main__":
    unittest.main()
