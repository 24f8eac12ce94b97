# src/model/model_store.py

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from src.dsp.dsp_dataclasses import MfccConfig
from src.model.fcn_model import FcnModel
from src.model.model_dataclasses import BackboneConfig
from src.nncore.weight_file import load_weights, save_weights
from src.utils.error_handling import (
    InvalidConfigError,
    ModelSchemaError,
    WeightFileError,
)

SIDECAR_VERSION = 1


@dataclass
class StoredModel:
    """A model together with the feature settings it was trained on."""

    model: FcnModel
    mfcc_config: MfccConfig


def sidecar_path(weights_path: str | Path) -> Path:
    return Path(weights_path).with_suffix(".json")


def save_model(model: FcnModel, mfcc_config: MfccConfig, weights_path: str | Path) -> Path:
    """
    Writes the FCNW weight file and its JSON sidecar (backbone + MFCC settings),
    so the model can be rebuilt end to end from audio.
    """
    weights_path = Path(weights_path)
    save_weights(model.state_dict(), weights_path)
    sidecar = {
        "version": SIDECAR_VERSION,
        "backbone": model.config.to_dict(),
        "mfcc": mfcc_config.to_dict(),
        "standardize_input": model.standardize_input,
    }
    with sidecar_path(weights_path).open("w") as file:
        json.dump(sidecar, file, indent=2, sort_keys=True)
    logging.info(f"Model saved: {weights_path}")
    return weights_path


def load_model(weights_path: str | Path) -> StoredModel:
    """
    Rebuilds a model from its weight file and sidecar.

    Raises:
        ModelSchemaError: If the sidecar is missing or invalid, or the weights do not
            match the architecture it describes (the message names the tensor).
    """
    weights_path = Path(weights_path)
    config_path = sidecar_path(weights_path)
    try:
        with config_path.open("r") as file:
            sidecar = json.load(file)
    except FileNotFoundError:
        raise ModelSchemaError(f"Model sidecar not found: {config_path}")
    except json.JSONDecodeError as e:
        raise ModelSchemaError(f"Model sidecar {config_path} is not valid JSON: {str(e)}")

    try:
        if sidecar.get("version") != SIDECAR_VERSION:
            raise ModelSchemaError(
                f"Unsupported sidecar version {sidecar.get('version')} in {config_path}"
            )
        backbone = BackboneConfig.from_dict(sidecar["backbone"])
        mfcc_config = MfccConfig.from_dict(sidecar["mfcc"])
        standardize_input = bool(sidecar.get("standardize_input", False))
    except (KeyError, TypeError, InvalidConfigError) as e:
        raise ModelSchemaError(f"Invalid model sidecar {config_path}: {str(e)}")

    try:
        tensors = load_weights(weights_path)
    except WeightFileError as e:
        logging.error(f"Error loading weights: {str(e)}")
        raise

    model = FcnModel.initialize(backbone, seed=0, standardize_input=standardize_input)
    model.load_state_dict(tensors)
    logging.info(f"Model loaded: {weights_path}")
    return StoredModel(model=model, mfcc_config=mfcc_config)
