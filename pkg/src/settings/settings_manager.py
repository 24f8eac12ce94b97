from typing import Any

import yaml

from src.dsp.dsp_dataclasses import MfccConfig
from src.model.model_dataclasses import BackboneConfig
from src.trainer.trainer_dataclasses import TrainConfig
from src.utils.error_handling import InvalidConfigError

CONFIG_SECTIONS = ("mfcc", "train", "backbone")


class SettingsManager:
    """
    A class for managing pipeline settings stored in a YAML or JSON file.

    The file has up to three sections, "mfcc", "train" (with a nested "optimizer")
    and "backbone", whose keys are the field names of MfccConfig, TrainConfig and
    BackboneConfig. Values can be accessed using dot notation (e.g., "mfcc.n_fft").
    Missing sections fall back to the dataclass defaults; command-line flags are
    applied on top with set().

    Attributes:
        settings_file (str | None): The path to the settings file, or None for defaults only.
        settings (dict): The loaded settings dictionary.

    Methods:
        load_settings(): Loads and checks the settings file.
        save_settings(): Writes the current settings dictionary back to the file.
        get(key: str): Retrieves the value associated with the specified key using dot notation.
        set(key: str, value: Any, persist: bool): Sets a value, optionally saving the file.
        mfcc_config(), train_config(), backbone_config(): Typed, validated configs.
    """

    def __init__(self, settings_file: str | None = None) -> None:
        self.settings_file = settings_file
        self.settings = self.load_settings()

    def load_settings(self) -> dict:
        if self.settings_file is None:
            return {}
        try:
            with open(self.settings_file, "r") as file:
                settings = yaml.safe_load(file)
        except yaml.YAMLError as e:
            raise InvalidConfigError(f"Could not parse config file {self.settings_file}: {str(e)}")
        if settings is None:
            return {}
        if not isinstance(settings, dict):
            raise InvalidConfigError(f"Config file {self.settings_file} must hold a mapping")
        unknown = set(settings) - set(CONFIG_SECTIONS)
        if unknown:
            raise InvalidConfigError(f"Unknown config sections: {sorted(unknown)}")
        return settings

    def save_settings(self) -> None:
        with open(self.settings_file, "w") as file:
            yaml.dump(self.settings, file)

    def get(self, key: str) -> Any:
        keys = key.split(".")
        value = self.settings
        for k in keys:
            value = value.get(k)
            if value is None:
                break
        return value

    def set(self, key: str, value: Any, persist: bool = False) -> None:
        keys = key.split(".")
        settings = self.settings
        for k in keys[:-1]:
            if k not in settings:
                settings[k] = {}
            settings = settings[k]
        settings[keys[-1]] = value
        if persist and self.settings_file:
            self.save_settings()

    def _section(self, name: str) -> dict:
        section = self.settings.get(name) or {}
        if not isinstance(section, dict):
            raise InvalidConfigError(f"Config section '{name}' must be a mapping")
        return section

    def mfcc_config(self) -> MfccConfig:
        return MfccConfig.from_dict(self._section("mfcc"))

    def train_config(self) -> TrainConfig:
        return TrainConfig.from_dict(self._section("train"))

    def backbone_config(self) -> BackboneConfig:
        return BackboneConfig.from_dict(self._section("backbone"))
