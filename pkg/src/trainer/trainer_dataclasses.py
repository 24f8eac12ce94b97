from dataclasses import asdict, dataclass, field
from pathlib import Path

from src.dsp.dsp_dataclasses import FeatureMap
from src.model.fcn_model import FcnModel
from src.nncore.nncore_dataclasses import OptimizerConfig
from src.utils.error_handling import InvalidConfigError, ManifestError

SELECTION_RULES = ("max_val_accuracy", "min_train_loss")
FOLD_NAMES = ("A", "B")


@dataclass
class ManifestEntry:
    id: str
    path: Path
    label: int
    fold: str | None = None


@dataclass
class DatasetManifest:
    """
    Labelled feature-map files.

    Attributes:
        entries (list[ManifestEntry]): Rows with unique ids and binary labels.
    """

    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.id in seen:
                raise ManifestError(f"Duplicate manifest id: {entry.id}")
            seen.add(entry.id)
            if entry.label not in (0, 1):
                raise ManifestError(f"Label of '{entry.id}' must be 0 or 1, got {entry.label}")
            if entry.fold is not None and entry.fold not in FOLD_NAMES:
                raise ManifestError(
                    f"Fold of '{entry.id}' must be one of {FOLD_NAMES} or blank, got '{entry.fold}'"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> list[str]:
        return [entry.id for entry in self.entries]

    @property
    def labels(self) -> list[int]:
        return [entry.label for entry in self.entries]

    def by_id(self) -> dict[str, ManifestEntry]:
        return {entry.id: entry for entry in self.entries}

    def has_folds(self) -> bool:
        return bool(self.entries) and all(entry.fold is not None for entry in self.entries)

    def fold(self, name: str) -> "DatasetManifest":
        return DatasetManifest([entry for entry in self.entries if entry.fold == name])


@dataclass
class Sample:
    """A loaded feature map with its label."""

    id: str
    feature_map: FeatureMap
    label: int


@dataclass
class TrainConfig:
    """
    Training settings. Defaults follow the reference setup: batches of 8,
    up to 1000 epochs, RMSProp at lr 1e-5, validation-accuracy selection.

    Attributes:
        min_selection_epoch (int): Epochs before this one are not eligible for
            max_val_accuracy selection (the model has not converged yet).
        masked_gap (bool): Exclude padding from the time average during training.
        standardize_input (bool): Standardise each map before the network.
    """

    batch_size: int = 8
    max_epochs: int = 1000
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    selection: str = "max_val_accuracy"
    augment_mask: bool = False
    mask_len_range: tuple[int, int] = (200, 400)
    min_selection_epoch: int = 50
    masked_gap: bool = False
    standardize_input: bool = False

    def validate(self) -> "TrainConfig":
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise InvalidConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.selection not in SELECTION_RULES:
            raise InvalidConfigError(
                f"selection must be one of {SELECTION_RULES}, got '{self.selection}'"
            )
        low, high = self.mask_len_range
        if not 0 < low <= high:
            raise InvalidConfigError(f"mask_len_range must satisfy 0 < low <= high, got {low, high}")
        self.optimizer.validate()
        return self

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mask_len_range"] = list(self.mask_len_range)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"Unknown TrainConfig keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "optimizer" in kwargs and isinstance(kwargs["optimizer"], dict):
            kwargs["optimizer"] = OptimizerConfig.from_dict(kwargs["optimizer"])
        if "mask_len_range" in kwargs:
            kwargs["mask_len_range"] = tuple(kwargs["mask_len_range"])
        return cls(**kwargs).validate()


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_accuracy: float | None = None


@dataclass
class TrainResult:
    """
    Attributes:
        model (FcnModel): The model restored to the selected epoch.
        history (list[EpochRecord]): One record per epoch run.
        best_epoch (int): The selected epoch (1-based).
        criterion (str): The selection rule used.
        best_value (float): The criterion value at best_epoch.
    """

    model: FcnModel
    history: list[EpochRecord]
    best_epoch: int
    criterion: str
    best_value: float


@dataclass
class ConfusionCounts:
    """Binary confusion counts with AD (label 1) as the positive class."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self) -> "ConfusionCounts":
        """The same counts seen with the other class as positive."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    degenerate: bool = False


@dataclass
class MetricsReport:
    """
    Per-class metrics, one row per class treated as positive.

    Attributes:
        rows (dict[int, ClassMetrics]): Keyed by class index (0 non-AD, 1 AD).
        counts (ConfusionCounts): The AD-positive confusion counts.
    """

    rows: dict[int, ClassMetrics]
    counts: ConfusionCounts

    @property
    def accuracy(self) -> float:
        return self.rows[1].accuracy
