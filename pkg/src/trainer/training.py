# src/trainer/training.py

import logging
from pathlib import Path

import numpy as np

from src.model.fcn_model import FcnModel, forward, pad_batch
from src.model.model_dataclasses import BackboneConfig
from src.nncore.ops import cross_entropy
from src.nncore.optim import RMSProp
from src.trainer.augmentation import random_mask_augment
from src.trainer.trainer_dataclasses import EpochRecord, Sample, TrainConfig, TrainResult
from src.utils.error_handling import ArgumentError, TrainingDivergedError
from src.utils.file_logger import initialize_log_file, log_config, log_epoch, log_variable


class Trainer:
    """
    Mini-batch RMSProp training with epoch snapshot selection.

    Every epoch reshuffles the training samples with a generator seeded by
    seed + epoch (the same generator draws the augmentation masks), pads each
    mini-batch to its longest map and takes one optimiser step per batch. The
    last, possibly smaller, batch is kept. Whenever the selection criterion
    improves, the parameters and batch-norm statistics are snapshotted.

    Attributes:
        cfg (TrainConfig): Training settings.
        model (FcnModel): The model being trained, mutated in place.
        log_file (Path | None): Plain-text per-epoch log.
    """

    def __init__(
        self, model: FcnModel, cfg: TrainConfig, log_file: str | Path | None = None
    ) -> None:
        self.cfg = cfg.validate()
        self.model = model
        self.optimizer = RMSProp(model.parameter_list(), cfg.optimizer)
        self.log_file = Path(log_file) if log_file else None
        if self.log_file:
            initialize_log_file(self.log_file, title="Training log")
            log_config(self.log_file, "train_config", cfg.to_dict())

    def _prepare(self, samples: list[Sample]) -> list[Sample]:
        return [
            Sample(id=s.id, feature_map=self.model.preprocess(s.feature_map), label=s.label)
            for s in samples
        ]

    def run_epoch(self, samples: list[Sample], epoch: int) -> tuple[float, float]:
        """
        One pass over the training samples.

        Returns:
            tuple[float, float]: Mean loss and running accuracy of the train-mode passes.

        Raises:
            TrainingDivergedError: If a batch loss is not finite.
        """
        rng = np.random.default_rng(self.cfg.seed + epoch)
        order = rng.permutation(len(samples))
        total_loss = 0.0
        correct = 0

        for batch_index, start in enumerate(range(0, len(samples), self.cfg.batch_size)):
            batch_samples = [samples[i] for i in order[start : start + self.cfg.batch_size]]
            maps = [s.feature_map for s in batch_samples]
            if self.cfg.augment_mask:
                maps = [random_mask_augment(m, rng, self.cfg.mask_len_range) for m in maps]
            labels = np.array([s.label for s in batch_samples], dtype=np.int64)
            batch, valid_lens = pad_batch(maps, self.model.config.input_channels)

            self.optimizer.zero_grad()
            probs, _ = self.model.forward_batch(
                batch, valid_lens, mode="train", masked_gap=self.cfg.masked_gap
            )
            loss = cross_entropy(probs, labels)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                raise TrainingDivergedError(
                    f"Non-finite loss {loss_value} at epoch {epoch}, batch {batch_index}",
                    epoch=epoch,
                    batch=batch_index,
                )
            loss.backward()
            self.optimizer.step()

            total_loss += loss_value * len(batch_samples)
            predicted = (probs.data[:, 1] > probs.data[:, 0]).astype(np.int64)
            correct += int(np.sum(predicted == labels))

        return total_loss / len(samples), correct / len(samples)

    def evaluate(self, samples: list[Sample]) -> float:
        """Accuracy with each sample scored alone (batch of one, infer mode)."""
        correct = sum(
            int(forward(self.model, s.feature_map, masked_gap=self.cfg.masked_gap).label == s.label)
            for s in samples
        )
        return correct / len(samples)

    def fit(
        self, train_samples: list[Sample], val_samples: list[Sample] | None = None
    ) -> TrainResult:
        """
        Trains for cfg.max_epochs and restores the selected snapshot.

        max_val_accuracy keeps the first epoch (at or after min_selection_epoch)
        with the highest validation accuracy; min_train_loss keeps the first epoch
        with the lowest training loss.

        Raises:
            ArgumentError: If there are no training samples, or validation samples are
                missing under max_val_accuracy.
        """
        if not train_samples:
            raise ArgumentError("Training needs at least one sample")
        selecting_on_val = self.cfg.selection == "max_val_accuracy"
        if selecting_on_val and not val_samples:
            raise ArgumentError("selection=max_val_accuracy needs validation samples")

        # Unprocessed maps are kept as-is; evaluate() preprocesses through forward().
        prepared = self._prepare(train_samples)
        first_eligible = min(self.cfg.min_selection_epoch, self.cfg.max_epochs)
        history: list[EpochRecord] = []
        best_value: float | None = None
        best_epoch = 0
        snapshot: dict[str, np.ndarray] | None = None

        for epoch in range(1, self.cfg.max_epochs + 1):
            train_loss, train_accuracy = self.run_epoch(prepared, epoch)
            val_accuracy = self.evaluate(val_samples) if val_samples else None
            record = EpochRecord(epoch, train_loss, train_accuracy, val_accuracy)
            history.append(record)
            logging.debug(
                f"Epoch {epoch}: loss={train_loss:.6f} train_acc={train_accuracy:.4f} "
                f"val_acc={val_accuracy}"
            )
            if self.log_file:
                log_epoch(
                    self.log_file,
                    epoch,
                    {
                        "train_loss": train_loss,
                        "train_acc": train_accuracy,
                        "val_acc": val_accuracy,
                    },
                )

            if selecting_on_val:
                if epoch < first_eligible:
                    continue
                improved = best_value is None or val_accuracy > best_value
                value = val_accuracy
            else:
                improved = best_value is None or train_loss < best_value
                value = train_loss
            if improved:
                best_value, best_epoch = value, epoch
                snapshot = self.model.state_dict()
                logging.info(f"New best {self.cfg.selection} = {value:.6f} at epoch {epoch}")

        self.model.load_state_dict(snapshot)
        if self.log_file:
            log_variable(self.log_file, "selected_epoch", best_epoch)
        return TrainResult(
            model=self.model,
            history=history,
            best_epoch=best_epoch,
            criterion=self.cfg.selection,
            best_value=float(best_value),
        )


def train(
    fold_train: list[Sample],
    fold_val: list[Sample] | None,
    cfg: TrainConfig,
    backbone: BackboneConfig | None = None,
    model: FcnModel | None = None,
    log_file: str | Path | None = None,
) -> TrainResult:
    """
    Trains a model on `fold_train`, selecting the epoch by cfg.selection.

    A fresh model is initialised from `backbone` with cfg.seed unless `model` is given.
    """
    if model is None:
        model = FcnModel.initialize(
            backbone or BackboneConfig(), seed=cfg.seed, standardize_input=cfg.standardize_input
        )
    logging.info(
        f"Training on {len(fold_train)} samples "
        f"({len(fold_val) if fold_val else 0} validation) for {cfg.max_epochs} epochs"
    )
    return Trainer(model, cfg, log_file=log_file).fit(fold_train, fold_val)
