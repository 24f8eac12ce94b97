import tempfile
import unittest
from pathlib import Path

from src.utils.error_handling import (
    EXIT_DATA_ERROR,
    EXIT_DIVERGED,
    EXIT_USAGE,
    CliError,
)
from src.utils.file_logger import (
    initialize_log_file,
    log_command_call,
    log_config,
    log_epoch,
)


class TestFileLogger(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.log_path = Path(self.temp_dir.name) / "logs" / "run.log"

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_initialize_creates_directory_once(self):
        initialize_log_file(self.log_path, title="Training log")
        initialize_log_file(self.log_path, title="Second title")
        content = self.log_path.read_text()
        self.assertTrue(content.startswith("Training log ("))
        self.assertNotIn("Second title", content)

    def test_command_call_skips_unset_arguments(self):
        initialize_log_file(self.log_path)
        log_command_call(self.log_path, "cmd_predict", model=["a.fcnw", "b.fcnw"], out=None)
        content = self.log_path.read_text()
        self.assertIn("Command: cmd_predict", content)
        self.assertIn("model: a.fcnw b.fcnw", content)
        self.assertNotIn("out:", content)

    def test_epoch_and_config(self):
        initialize_log_file(self.log_path)
        log_config(self.log_path, "train_config", {"seed": 0, "batch_size": 8})
        log_epoch(self.log_path, 3, {"train_loss": 0.1, "val_acc": None})
        content = self.log_path.read_text()
        self.assertIn('"batch_size": 8', content)
        self.assertIn("Message: epoch 3", content)
        self.assertIn("train_loss: 0.1", content)
        self.assertIn("val_acc: -", content)


class TestCliErrorExitCodes(unittest.TestCase):
    def test_exit_codes(self):
        self.assertEqual(CliError("bad flag", "USAGE").exit_code, EXIT_USAGE)
        self.assertEqual(CliError("nan loss", "DIVERGED").exit_code, EXIT_DIVERGED)
        self.assertEqual(CliError("no files", "NO_INPUT_FILES").exit_code, EXIT_DATA_ERROR)

    def test_message_has_hint(self):
        message = CliError("no files", "NO_INPUT_FILES").format_error_message()
        self.assertTrue(message.startswith("no files\nHint:"))


if __name__ == "__main__":
    unittest.main()
