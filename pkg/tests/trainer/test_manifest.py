import tempfile
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_array_equal

from src.dsp.dsp_dataclasses import FeatureMap
from src.dsp.feature_map_io import save_feature_map
from src.trainer.manifest import load_manifest, load_samples, save_manifest
from src.trainer.trainer_dataclasses import DatasetManifest, ManifestEntry
from src.utils.error_handling import ManifestError


class TestManifest(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.root = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def _write(self, text: str) -> Path:
        path = self.root / "manifest.csv"
        path.write_text(text)
        return path

    def test_relative_paths_and_folds(self):
        """Paths resolve against the CSV directory and blank folds are None."""
        manifest = load_manifest(self._write("id,path,label,fold\na,a.mfcm,1,A\nb,sub/b.mfcm,0,\n"))
        self.assertEqual(manifest.ids, ["a", "b"])
        self.assertEqual(manifest.labels, [1, 0])
        self.assertEqual(manifest.entries[0].path, self.root / "a.mfcm")
        self.assertEqual(manifest.entries[0].fold, "A")
        self.assertIsNone(manifest.entries[1].fold)
        self.assertFalse(manifest.has_folds())

    def test_save_then_load(self):
        """Saved manifests load back with the same rows."""
        original = DatasetManifest(
            [
                ManifestEntry("x", self.root / "x.mfcm", 1, "B"),
                ManifestEntry("y", self.root / "y.mfcm", 0, "A"),
            ]
        )
        loaded = load_manifest(save_manifest(original, self.root / "out" / "m.csv"))
        self.assertEqual(loaded.ids, original.ids)
        self.assertEqual([entry.fold for entry in loaded.entries], ["B", "A"])
        self.assertEqual(loaded.entries[0].path.resolve(), (self.root / "x.mfcm").resolve())
        self.assertTrue(loaded.has_folds())
        self.assertEqual(loaded.fold("A").ids, ["y"])

    def test_invalid_rows(self):
        """Bad headers, labels, folds and duplicate ids are rejected."""
        bad_files = [
            "id,file,label,fold\na,a.mfcm,1,\n",
            "id,path,label,fold\na,a.mfcm,yes,\n",
            "id,path,label,fold\na,a.mfcm,2,\n",
            "id,path,label,fold\na,a.mfcm,1,C\n",
            "id,path,label,fold\na,a.mfcm,1,\na,b.mfcm,0,\n",
        ]
        for text in bad_files:
            with self.subTest(text=text):
                with self.assertRaises(ManifestError):
                    load_manifest(self._write(text))

    def test_missing_file(self):
        with self.assertRaises(ManifestError):
            load_manifest(self.root / "absent.csv")

    def test_load_samples(self):
        """Samples carry the saved maps and labels."""
        values = np.random.default_rng(0).normal(size=(4, 40))
        save_feature_map(FeatureMap(values=values), self.root / "a.mfcm")
        manifest = load_manifest(self._write("id,path,label,fold\na,a.mfcm,1,\n"))
        (sample,) = load_samples(manifest)
        self.assertEqual((sample.id, sample.label), ("a", 1))
        assert_array_equal(sample.feature_map.values, values.astype(np.float32))

    def test_load_samples_missing_map(self):
        manifest = load_manifest(self._write("id,path,label,fold\na,a.mfcm,1,\n"))
        with self.assertRaises(ManifestError):
            load_samples(manifest)


if __name__ == "__main__":
    unittest.main()
