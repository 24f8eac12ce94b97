import unittest

from src.dsp.dsp_dataclasses import MfccConfig
from src.dsp.mfcc import frame_count
from src.utils.error_handling import SignalTooShortError


class TestFrameCount(unittest.TestCase):
    def setUp(self):
        self.centered = MfccConfig()
        self.uncentered = MfccConfig(centered=False)

    def test_centered_table(self):
        """Centered framing gives 1 + n // hop frames."""
        table = {1: 1, 511: 1, 512: 2, 22050: 44, 110250: 216, 220500: 431}
        for n_samples, expected in table.items():
            with self.subTest(n_samples=n_samples):
                self.assertEqual(frame_count(n_samples, self.centered), expected)

    def test_uncentered_table(self):
        """Uncentered framing gives 1 + (n - n_fft) // hop frames."""
        table = {2048: 1, 2559: 1, 2560: 2, 22050: 40}
        for n_samples, expected in table.items():
            with self.subTest(n_samples=n_samples):
                self.assertEqual(frame_count(n_samples, self.uncentered), expected)

    def test_monotone(self):
        """More samples never give fewer frames, in either framing mode."""
        for cfg, start in ((self.centered, 1), (self.uncentered, 2048)):
            counts = [frame_count(n, cfg) for n in range(start, start + 3000)]
            with self.subTest(centered=cfg.centered):
                self.assertTrue(all(b >= a for a, b in zip(counts, counts[1:])))

    def test_one_more_hop_adds_one_frame(self):
        """Adding exactly hop samples adds exactly one centered frame."""
        for n_samples in range(1, 30000, 97):
            with self.subTest(n_samples=n_samples):
                self.assertEqual(
                    frame_count(n_samples + self.centered.hop, self.centered),
                    frame_count(n_samples, self.centered) + 1,
                )

    def test_uncentered_shorter_than_window(self):
        """Uncentered framing rejects signals shorter than n_fft."""
        with self.assertRaises(SignalTooShortError):
            frame_count(2047, self.uncentered)

    def test_empty_signal(self):
        """An empty signal is rejected in both framing modes."""
        with self.assertRaises(SignalTooShortError):
            frame_count(0, self.centered)
        with self.assertRaises(SignalTooShortError):
            frame_count(0, self.uncentered)


if __name__ == "__main__":
    unittest.main()
