# src/trainer/history.py

import csv
import json
from pathlib import Path

from src.trainer.trainer_dataclasses import EpochRecord, TrainResult

HISTORY_HEADER = ["epoch", "train_loss", "train_acc", "val_acc"]


def write_history(history: list[EpochRecord], csv_path: str | Path) -> Path:
    """One row per epoch; val_acc is blank when no validation set was used."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for record in history:
            writer.writerow(
                [
                    record.epoch,
                    repr(record.train_loss),
                    repr(record.train_accuracy),
                    "" if record.val_accuracy is None else repr(record.val_accuracy),
                ]
            )
    return csv_path


def read_history(csv_path: str | Path) -> list[EpochRecord]:
    with Path(csv_path).open("r", newline="") as file:
        return [
            EpochRecord(
                epoch=int(row["epoch"]),
                train_loss=float(row["train_loss"]),
                train_accuracy=float(row["train_acc"]),
                val_accuracy=float(row["val_acc"]) if row["val_acc"] else None,
            )
            for row in csv.DictReader(file)
        ]


def write_summary(result: TrainResult, strategy: str, json_path: str | Path) -> Path:
    json_path = Path(json_path)
    summary = {
        "strategy": strategy,
        "criterion": result.criterion,
        "best_epoch": result.best_epoch,
        "best_value": result.best_value,
        "epochs_run": len(result.history),
    }
    with json_path.open("w") as file:
        json.dump(summary, file, indent=2, sort_keys=True)
    return json_path
