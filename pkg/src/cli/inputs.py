# src/cli/inputs.py

import logging
from pathlib import Path

from src.cli.cli_dataclasses import InputItem
from src.dsp.dsp_dataclasses import FeatureMap, MfccConfig
from src.dsp.feature_map_io import FEATURE_MAP_SUFFIX, load_feature_map
from src.dsp.mfcc import extract_mfcc
from src.dsp.wav_io import load_wav
from src.trainer.manifest import load_manifest
from src.utils.error_handling import CliError

WAV_SUFFIX = ".wav"
MANIFEST_SUFFIX = ".csv"


def collect_inputs(path: str | Path, suffixes: tuple[str, ...]) -> list[InputItem]:
    """
    Expands --in into input items: a single file, the matching files of a
    directory (sorted by name, not recursive), or the rows of a manifest CSV.

    Raises:
        CliError: If the path does not exist or nothing matches.
    """
    path = Path(path)
    if not path.exists():
        raise CliError(f"Input path does not exist: {path}", "NO_INPUT_FILES")

    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in suffixes)
        items = [InputItem(id=p.stem, path=p) for p in files]
    elif path.suffix.lower() == MANIFEST_SUFFIX:
        manifest = load_manifest(path)
        items = [
            InputItem(id=entry.id, path=Path(entry.path), label=entry.label, fold=entry.fold)
            for entry in manifest.entries
        ]
    elif path.suffix.lower() in suffixes:
        items = [InputItem(id=path.stem, path=path)]
    else:
        raise CliError(
            f"Unsupported input {path}; expected one of {', '.join(suffixes)} or a manifest",
            "NO_INPUT_FILES",
        )

    if not items:
        raise CliError(f"No input files found in {path}", "NO_INPUT_FILES")
    ids = [item.id for item in items]
    if len(set(ids)) != len(ids):
        raise CliError(f"Input ids are not unique under {path}", "DUPLICATE_IDS")
    logging.info(f"Collected {len(items)} input files from {path}")
    return items


def feature_map_for(item: InputItem, mfcc_config: MfccConfig) -> FeatureMap:
    """Loads an .mfcm file as is, or decodes a WAV and extracts its MFCC map."""
    if item.path.suffix.lower() == FEATURE_MAP_SUFFIX:
        return load_feature_map(item.path)
    signal = load_wav(item.path, target_rate_hz=mfcc_config.sample_rate_hz)
    return extract_mfcc(signal, mfcc_config)
