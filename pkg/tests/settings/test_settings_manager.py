import tempfile
import unittest
from pathlib import Path

import yaml

from src.dsp.dsp_dataclasses import MfccConfig
from src.settings.settings_manager import SettingsManager
from src.utils.error_handling import InvalidConfigError

DEFAULT_CONFIG = Path(__file__).resolve().parents[2] / "config" / "default.yaml"


class TestSettingsManager(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.root = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def _write(self, content: dict | str) -> str:
        path = self.root / "config.yaml"
        path.write_text(content if isinstance(content, str) else yaml.safe_dump(content))
        return str(path)

    def test_defaults_without_file(self):
        settings = SettingsManager()
        self.assertEqual(settings.mfcc_config(), MfccConfig())
        self.assertEqual(settings.train_config().batch_size, 8)
        self.assertEqual(settings.backbone_config().width_multiplier, 0.25)

    def test_shipped_config_matches_defaults(self):
        settings = SettingsManager(str(DEFAULT_CONFIG))
        self.assertEqual(settings.mfcc_config(), MfccConfig())
        self.assertEqual(settings.train_config().optimizer.learning_rate, 1e-5)
        self.assertEqual(settings.train_config().mask_len_range, (200, 400))

    def test_file_then_flag_precedence(self):
        """File values replace defaults and set() overrides the file."""
        settings = SettingsManager(self._write({"mfcc": {"hop": 256}, "train": {"seed": 3}}))
        self.assertEqual(settings.get("mfcc.hop"), 256)
        self.assertEqual(settings.mfcc_config().hop, 256)
        self.assertEqual(settings.mfcc_config().n_fft, 2048)
        settings.set("train.seed", 9)
        settings.set("train.optimizer.learning_rate", 0.01)
        self.assertEqual(settings.train_config().seed, 9)
        self.assertEqual(settings.train_config().optimizer.learning_rate, 0.01)

    def test_get_missing_key(self):
        settings = SettingsManager(self._write({"mfcc": {"hop": 256}}))
        self.assertIsNone(settings.get("mfcc.n_fft"))
        self.assertIsNone(settings.get("train.optimizer.decay"))

    def test_persist(self):
        path = self._write({"mfcc": {"hop": 256}})
        SettingsManager(path).set("mfcc.n_mfcc", 40, persist=True)
        self.assertEqual(SettingsManager(path).mfcc_config().n_mfcc, 40)

    def test_backbone_blocks(self):
        """Block tables can be given in the file."""
        blocks = [
            {"kind": "standard", "stride": 2, "filters": 32},
            {"kind": "depthwise_separable", "stride": 4, "filters": 256},
            {"kind": "depthwise_separable", "stride": 4, "filters": 1024},
        ]
        settings = SettingsManager(
            self._write({"backbone": {"width_multiplier": 0.125, "blocks": blocks}})
        )
        backbone = settings.backbone_config()
        self.assertEqual(backbone.total_stride, 32)
        self.assertEqual(backbone.final_channels, 128)

    def test_invalid_files(self):
        """Unknown sections, unknown keys, bad values and broken YAML are rejected."""
        invalid = [
            {"model": {}},
            {"mfcc": {"window": "hann"}},
            {"mfcc": {"hop": 4096}},
            {"train": {"selection": "best"}},
            "mfcc: [unclosed",
            "- just\n- a list\n",
        ]
        for content in invalid:
            with self.subTest(content=content):
                with self.assertRaises(InvalidConfigError):
                    settings = SettingsManager(self._write(content))
                    settings.mfcc_config()
                    settings.train_config()

    def test_empty_file(self):
        self.assertEqual(SettingsManager(self._write("")).settings, {})


if __name__ == "__main__":
    unittest.main()
