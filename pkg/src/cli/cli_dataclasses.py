import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.model.model_dataclasses import Prediction, label_from_probs
from src.utils.error_handling import CliError

STRATEGIES = ("m1", "m2", "m3")


@dataclass
class InputItem:
    """
    One file named on the command line, directly, through a directory or through a manifest.

    Attributes:
        id (str): Sample id (manifest id, or the file stem).
        path (Path): A .wav or .mfcm file.
        label (int | None): Known label, when the input came from a manifest.
        fold (str | None): Known fold, when the input came from a manifest.
    """

    id: str
    path: Path
    label: int | None = None
    fold: str | None = None


@dataclass
class PredictionRecord:
    """One line of a predictions JSONL file."""

    id: str
    probs: list[float]
    label: int

    @classmethod
    def from_prediction(cls, sample_id: str, prediction: Prediction) -> "PredictionRecord":
        return cls(
            id=sample_id,
            probs=[float(p) for p in prediction.probs],
            label=int(prediction.label),
        )

    def to_prediction(self) -> Prediction:
        probs = np.asarray(self.probs, dtype=np.float64)
        return Prediction(probs=probs, label=label_from_probs(probs))

    def to_json_line(self) -> str:
        return json.dumps({"id": self.id, "probs": self.probs, "label": self.label})

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionRecord":
        try:
            return cls(
                id=str(data["id"]),
                probs=[float(p) for p in data["probs"]],
                label=int(data["label"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CliError(f"Malformed prediction record {data}: {str(e)}", "BAD_PREDICTIONS")


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    """
    Raises:
        CliError: If the file is missing, empty or holds a malformed or duplicate record.
    """
    path = Path(path)
    if not path.is_file():
        raise CliError(f"Prediction file not found: {path}", "BAD_PREDICTIONS")
    records = []
    with path.open("r") as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise CliError(f"{path}:{line_number}: invalid JSON: {str(e)}", "BAD_PREDICTIONS")
            records.append(PredictionRecord.from_dict(data))
    if not records:
        raise CliError(f"Prediction file {path} is empty", "BAD_PREDICTIONS")
    ids = [record.id for record in records]
    if len(set(ids)) != len(ids):
        raise CliError(f"Prediction file {path} repeats ids", "BAD_PREDICTIONS")
    return records


def write_predictions(records: list[PredictionRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as file:
        for record in records:
            file.write(record.to_json_line() + "\n")
    return path
