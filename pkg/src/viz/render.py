# src/viz/render.py

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from src.dsp.dsp_dataclasses import FeatureMap, MfccConfig
from src.utils.error_handling import RenderError
from src.viz.heatmap import bit_runs
from src.viz.viz_dataclasses import BAR_HEIGHT_PX, DARK_RGB, YELLOW_RGB, Heatmap

PPM_SUFFIX = ".ppm"


def grayscale_map(feature_map: FeatureMap) -> np.ndarray:
    """uint8 (p, t) image of the map, min-max scaled per image; constant maps render black."""
    values = feature_map.values.astype(np.float64)
    low, high = values.min(), values.max()
    if high == low:
        return np.zeros(values.shape, dtype=np.uint8)
    return np.round((values - low) / (high - low) * 255.0).astype(np.uint8)


def compose_image(feature_map: FeatureMap, hm: Heatmap) -> np.ndarray:
    """(p + 16, t, 3) RGB array: coefficient 0 on the top row, impact bar underneath."""
    if feature_map.t != hm.t:
        raise RenderError(f"Heatmap length {hm.t} does not match feature map length {feature_map.t}")
    gray = grayscale_map(feature_map)
    top = np.repeat(gray[:, :, None], 3, axis=2)
    palette = np.array([DARK_RGB, YELLOW_RGB], dtype=np.uint8)
    bar = np.broadcast_to(palette[hm.bits], (BAR_HEIGHT_PX, hm.t, 3))
    return np.ascontiguousarray(np.concatenate([top, bar], axis=0))


def heatmap_sidecar(hm: Heatmap, mfcc_config: MfccConfig) -> dict:
    return {
        "class_index": hm.class_index,
        "threshold": hm.threshold,
        "runs": [
            run.to_dict() for run in bit_runs(hm, mfcc_config.hop, mfcc_config.sample_rate_hz)
        ],
    }


def render(
    feature_map: FeatureMap,
    hm: Heatmap,
    out_path: str | Path,
    mfcc_config: MfccConfig | None = None,
) -> tuple[Path, Path]:
    """
    Writes a binary PPM (P6) of the feature map above its impact bar, plus a
    JSON sidecar with the threshold and the bit runs.

    Args:
        feature_map (FeatureMap): Map the heatmap was computed for.
        hm (Heatmap): Bits of the same length as the map.
        out_path (str | Path): Image path; the sidecar takes the same stem with `.json`.
        mfcc_config (MfccConfig | None): Supplies hop and sample rate for run times.

    Returns:
        tuple[Path, Path]: Image and sidecar paths.

    Raises:
        RenderError: On a length mismatch or a write failure.
    """
    mfcc_config = mfcc_config or MfccConfig()
    out_path = Path(out_path)
    image = compose_image(feature_map, hm)
    sidecar_path = out_path.with_suffix(".json")
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(image).save(out_path, format="PPM")
        with sidecar_path.open("w") as file:
            json.dump(heatmap_sidecar(hm, mfcc_config), file, indent=2, sort_keys=True)
    except OSError as e:
        raise RenderError(f"Could not write heatmap to {out_path}: {str(e)}")
    logging.debug(f"Rendered heatmap {out_path} ({image.shape[1]}x{image.shape[0]})")
    return out_path, sidecar_path
