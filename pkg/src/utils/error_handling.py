"""
SharedErrors
"""


class ArgumentError(ValueError):
    pass


"""
DspErrors
"""


class DspError(Exception):
    pass


class WavFormatError(DspError):
    pass


class UnsupportedEncodingError(DspError):
    pass


class SignalTooShortError(DspError):
    pass


class DegenerateFilterError(DspError):
    pass


class InvalidConfigError(DspError):
    pass


class FeatureMapFormatError(DspError):
    pass


"""
NNCoreErrors
"""


class NNCoreError(Exception):
    pass


class ShapeError(NNCoreError):
    pass


class AutogradStateError(NNCoreError):
    pass


class WeightFileError(NNCoreError):
    pass


"""
ModelErrors
"""


class ModelError(Exception):
    pass


class InputTooShortError(ModelError):
    pass


class ModelSchemaError(ModelError):
    def __init__(self, message, tensor_name: str | None = None):
        super().__init__(message)
        self.tensor_name = tensor_name


"""
TrainerErrors
"""


class TrainerError(Exception):
    pass


class ManifestError(TrainerError):
    pass


class TrainingDivergedError(TrainerError):
    def __init__(self, message, epoch: int, batch: int):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


"""
VizErrors
"""


class VizError(Exception):
    pass


class RenderError(VizError):
    pass


"""
CliErrors
"""

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_DATA_ERROR = 2
EXIT_DIVERGED = 3


class CliError(Exception):
    def __init__(self, message, error_code):
        super().__init__(message)
        self.error_code = error_code

    @property
    def exit_code(self) -> int:
        if self.error_code == "USAGE":
            return EXIT_USAGE
        if self.error_code == "DIVERGED":
            return EXIT_DIVERGED
        return EXIT_DATA_ERROR

    def format_error_message(self):
        error_message = str(self)
        if self.error_code == "NO_INPUT_FILES":
            hint = "Hint: Point --in at a .wav/.mfcm file or a directory that contains some."
        elif self.error_code == "PARTIAL_FAILURE":
            hint = "Hint: See the log for the files that failed; the others were written."
        elif self.error_code == "DIVERGED":
            hint = "Hint: Lower the learning rate or check the inputs for non-finite values."
        elif self.error_code == "SCHEMA":
            hint = "Hint: The weight file and its JSON sidecar must come from the same run."
        elif self.error_code == "INIT_WEIGHTS":
            hint = "Hint: --init-weights must come from a model with the same --alpha and block table."
        elif self.error_code == "USAGE":
            hint = "Hint: Run with --help to see the accepted flags."
        else:
            hint = "Hint: Check the input files and the manifest for consistency."
        return f"{error_message}\n{hint}"
