# src/trainer/manifest.py

import csv
import logging
from pathlib import Path

from src.dsp.feature_map_io import load_feature_map
from src.trainer.trainer_dataclasses import DatasetManifest, ManifestEntry, Sample
from src.utils.error_handling import FeatureMapFormatError, ManifestError

MANIFEST_HEADER = ["id", "path", "label", "fold"]


def load_manifest(csv_path: str | Path) -> DatasetManifest:
    """
    Reads a `id,path,label,fold` CSV. Relative paths resolve against the CSV's
    directory; a blank fold means unassigned.

    Raises:
        ManifestError: On a wrong header, a bad label or a duplicate id.
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise ManifestError(f"Manifest not found: {csv_path}")
    entries = []
    with csv_path.open("r", newline="") as file:
        reader = csv.DictReader(file)
        if reader.fieldnames is None or [name.strip() for name in reader.fieldnames] != MANIFEST_HEADER:
            raise ManifestError(
                f"{csv_path}: header must be {','.join(MANIFEST_HEADER)}, got {reader.fieldnames}"
            )
        for line_number, row in enumerate(reader, start=2):
            try:
                label = int(row["label"])
            except (TypeError, ValueError):
                raise ManifestError(f"{csv_path}:{line_number}: invalid label '{row['label']}'")
            path = Path(row["path"])
            if not path.is_absolute():
                path = csv_path.parent / path
            fold = (row.get("fold") or "").strip() or None
            entries.append(ManifestEntry(id=row["id"], path=path, label=label, fold=fold))
    manifest = DatasetManifest(entries)
    logging.info(f"Loaded manifest {csv_path} with {len(manifest)} entries")
    return manifest


def save_manifest(manifest: DatasetManifest, csv_path: str | Path) -> Path:
    """Writes the manifest with paths relative to the CSV's directory where possible."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for entry in manifest.entries:
            path = Path(entry.path)
            try:
                path = path.resolve().relative_to(csv_path.parent.resolve())
            except ValueError:
                pass
            writer.writerow([entry.id, path.as_posix(), entry.label, entry.fold or ""])
    return csv_path


def load_samples(manifest: DatasetManifest) -> list[Sample]:
    """Loads every entry's .mfcm file, in manifest order."""
    samples = []
    for entry in manifest.entries:
        try:
            feature_map = load_feature_map(entry.path)
        except (OSError, FeatureMapFormatError) as e:
            raise ManifestError(f"Could not load feature map for '{entry.id}': {str(e)}")
        samples.append(Sample(id=entry.id, feature_map=feature_map, label=entry.label))
    return samples
