# src/model/fcn_model.py

import logging

import numpy as np

from src.dsp.dsp_dataclasses import FeatureMap
from src.dsp.mfcc import standardize_map
from src.model.model_dataclasses import (
    BackboneConfig,
    Prediction,
    TimeActivations,
    label_from_probs,
)
from src.nncore.ops import (
    batchnorm,
    conv1d,
    conv2d,
    depthwise_conv2d,
    gap_over_axis,
    mask_time,
    relu6,
    softmax,
)
from src.nncore.tensor import Parameter, Tensor, no_grad
from src.utils.error_handling import (
    ArgumentError,
    InputTooShortError,
    ModelSchemaError,
    ShapeError,
)

N_CLASSES = 2
HEAD_PREFIX = "head/"
KERNEL_SIZE = 3
MODES = ("train", "infer")


def replicate_channels(feature_map: FeatureMap, channels: int = 3) -> Tensor:
    """Stacks the (p, t) map into a (channels, p, t) tensor of identical channels."""
    return Tensor(np.repeat(feature_map.values[np.newaxis, :, :], channels, axis=0))


def pad_batch(maps: list[FeatureMap], channels: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """
    Zero-pads feature maps on the right to the longest map of the mini-batch.

    Returns:
        tuple[np.ndarray, np.ndarray]: (N, channels, p, t_max) float32 batch and the
            original frame counts.

    Raises:
        ArgumentError: If `maps` is empty.
        ShapeError: If the maps disagree on p.
    """
    if not maps:
        raise ArgumentError("pad_batch needs at least one feature map")
    heights = {feature_map.p for feature_map in maps}
    if len(heights) != 1:
        raise ShapeError(f"Feature maps in one batch must share p, got {sorted(heights)}")
    p = maps[0].p
    valid_lens = np.array([feature_map.t for feature_map in maps], dtype=np.int64)
    batch = np.zeros((len(maps), channels, p, int(valid_lens.max())), dtype=np.float32)
    for index, feature_map in enumerate(maps):
        batch[index, :, :, : feature_map.t] = feature_map.values[np.newaxis, :, :]
    return batch, valid_lens


class FcnModel:
    """
    Fully convolutional classifier over MFCC feature maps.

    The backbone maps a (3, p, t) input to (C, p/32, ceil(t/32)); the frequency
    axis is averaged away, a 2-filter 1-D convolution gives per-timestep class
    evidence, and the time average of that evidence goes through a softmax.

    Attributes:
        config (BackboneConfig): The backbone description.
        standardize_input (bool): Whether maps are standardised before the backbone.
        parameters (dict[str, Parameter]): Learnable tensors by name.
        buffers (dict[str, np.ndarray]): Batch-norm running statistics by name.
    """

    def __init__(self, config: BackboneConfig, standardize_input: bool = False) -> None:
        self.config = config.validate()
        self.standardize_input = standardize_input
        self.parameters: dict[str, Parameter] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self._state_names: list[str] = []

    @classmethod
    def initialize(
        cls, config: BackboneConfig, seed: int = 0, standardize_input: bool = False
    ) -> "FcnModel":
        """
        Builds a freshly initialised model.

        Backbone kernels are He-uniform, the head is LeCun-uniform with zero bias,
        batch-norm starts at gamma=1, beta=0 with running statistics (0, 1).
        """
        model = cls(config, standardize_input=standardize_input)
        rng = np.random.default_rng(seed)
        in_channels = config.input_channels
        for index, block in enumerate(config.blocks):
            prefix = cls.block_prefix(index)
            out_channels = config.channels(block.filters)
            if block.kind == "standard":
                fan_in = in_channels * KERNEL_SIZE * KERNEL_SIZE
                model._add_kernel(
                    f"{prefix}/conv/kernel",
                    rng,
                    (out_channels, in_channels, KERNEL_SIZE, KERNEL_SIZE),
                    np.sqrt(6.0 / fan_in),
                )
                model._add_batchnorm(f"{prefix}/bn", out_channels)
            else:
                model._add_kernel(
                    f"{prefix}/depthwise/kernel",
                    rng,
                    (in_channels, KERNEL_SIZE, KERNEL_SIZE),
                    np.sqrt(6.0 / (KERNEL_SIZE * KERNEL_SIZE)),
                )
                model._add_batchnorm(f"{prefix}/depthwise_bn", in_channels)
                model._add_kernel(
                    f"{prefix}/pointwise/kernel",
                    rng,
                    (out_channels, in_channels, 1, 1),
                    np.sqrt(6.0 / in_channels),
                )
                model._add_batchnorm(f"{prefix}/pointwise_bn", out_channels)
            in_channels = out_channels

        model._add_kernel(
            "head/kernel", rng, (N_CLASSES, in_channels, 1), np.sqrt(3.0 / in_channels)
        )
        model._add_parameter("head/bias", np.zeros(N_CLASSES, dtype=np.float32))
        logging.debug(
            f"Initialised FcnModel alpha={config.width_multiplier} with "
            f"{model.parameter_count()} trainable values"
        )
        return model

    @staticmethod
    def block_prefix(index: int) -> str:
        return f"block_{index:02d}"

    def _add_parameter(self, name: str, values: np.ndarray) -> None:
        self.parameters[name] = Parameter(values.astype(np.float32), name=name)
        self._state_names.append(name)

    def _add_buffer(self, name: str, values: np.ndarray) -> None:
        self.buffers[name] = values.astype(np.float32)
        self._state_names.append(name)

    def _add_kernel(
        self, name: str, rng: np.random.Generator, shape: tuple[int, ...], limit: float
    ) -> None:
        self._add_parameter(name, rng.uniform(-limit, limit, size=shape))

    def _add_batchnorm(self, prefix: str, channels: int) -> None:
        self._add_parameter(f"{prefix}/gamma", np.ones(channels))
        self._add_parameter(f"{prefix}/beta", np.zeros(channels))
        self._add_buffer(f"{prefix}/running_mean", np.zeros(channels))
        self._add_buffer(f"{prefix}/running_var", np.ones(channels))

    def parameter_list(self) -> list[Parameter]:
        return [self.parameters[name] for name in self._state_names if name in self.parameters]

    def zero_grad(self) -> None:
        for param in self.parameters.values():
            param.zero_grad()

    def parameter_count(self, include_head: bool = True) -> int:
        """Number of trainable values."""
        return sum(
            param.data.size
            for name, param in self.parameters.items()
            if include_head or not name.startswith(HEAD_PREFIX)
        )

    def buffer_count(self) -> int:
        return sum(buffer.size for buffer in self.buffers.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copies of every parameter and buffer, in construction order."""
        state = {}
        for name in self._state_names:
            source = self.parameters[name].data if name in self.parameters else self.buffers[name]
            state[name] = source.copy()
        return state

    def load_state_dict(self, state: dict[str, np.ndarray], backbone_only: bool = False) -> None:
        """
        Replaces parameters and buffers.

        Args:
            state (dict[str, np.ndarray]): Tensors by name, e.g. from a weight file.
            backbone_only (bool): Load only the backbone tensors. Head tensors in
                `state` are ignored and the model keeps its own head, so a trained
                backbone can start a new training run.

        Raises:
            ModelSchemaError: Naming the first missing, unexpected or mis-shaped tensor.
        """
        names = [
            name
            for name in self._state_names
            if not (backbone_only and name.startswith(HEAD_PREFIX))
        ]
        expected = set(names)
        for name in names:
            if name not in state:
                raise ModelSchemaError(f"Tensor '{name}' is missing from the weights", name)
        for name in state:
            if backbone_only and name.startswith(HEAD_PREFIX):
                continue
            if name not in expected:
                raise ModelSchemaError(f"Unexpected tensor '{name}' in the weights", name)
        for name in names:
            target = self.parameters[name].data if name in self.parameters else self.buffers[name]
            values = np.asarray(state[name])
            if values.shape != target.shape:
                raise ModelSchemaError(
                    f"Tensor '{name}' has shape {values.shape}, expected {target.shape}", name
                )
        for name in names:
            if name in self.parameters:
                self.parameters[name].assign(state[name])
            else:
                self.buffers[name] = np.asarray(state[name], dtype=np.float32).copy()

    def preprocess(self, feature_map: FeatureMap, valid_len: int | None = None) -> FeatureMap:
        """
        Standardises the first `valid_len` frames when standardize_input is set.
        Trailing padding stays zero, so a padded map is scaled like the unpadded one.
        """
        if not self.standardize_input:
            return feature_map
        if valid_len is None or valid_len == feature_map.t:
            return standardize_map(feature_map)
        values = np.zeros_like(feature_map.values)
        content = FeatureMap(values=feature_map.values[:, :valid_len])
        values[:, :valid_len] = standardize_map(content).values
        return FeatureMap(values=values)

    def _batchnorm(self, x: Tensor, prefix: str, mode: str) -> Tensor:
        return batchnorm(
            x,
            self.parameters[f"{prefix}/gamma"],
            self.parameters[f"{prefix}/beta"],
            self.buffers[f"{prefix}/running_mean"],
            self.buffers[f"{prefix}/running_var"],
            mode=mode,
        )

    def forward_batch(
        self,
        batch: np.ndarray,
        valid_lens: np.ndarray | None = None,
        mode: str = "infer",
        masked_gap: bool = False,
    ) -> tuple[Tensor, Tensor]:
        """
        Runs a padded (N, 3, p, t) batch through the network.

        With `masked_gap`, activations beyond each sample's valid length are zeroed
        after every block and the final time average covers only ceil(valid_len / 32)
        steps, so a zero-padded sample scores exactly like the unpadded one.

        Returns:
            tuple[Tensor, Tensor]: (N, 2) probabilities and (N, 2, t') time activations.

        Raises:
            InputTooShortError: If t < 32.
        """
        if mode not in MODES:
            raise ArgumentError(f"mode must be one of {MODES}, got '{mode}'")
        batch = np.asarray(batch, dtype=np.float32)
        if batch.ndim != 4 or batch.shape[1] != self.config.input_channels:
            raise ShapeError(
                f"Expected a (N, {self.config.input_channels}, p, t) batch, got {batch.shape}"
            )
        t = batch.shape[3]
        if t < self.config.total_stride:
            raise InputTooShortError(
                f"Input has {t} frames; the network needs at least {self.config.total_stride}"
            )
        lengths = (
            np.full(batch.shape[0], t, dtype=np.int64)
            if valid_lens is None
            else np.asarray(valid_lens, dtype=np.int64)
        )
        if lengths.shape != (batch.shape[0],) or np.any(lengths < 1) or np.any(lengths > t):
            raise ArgumentError(f"valid_lens must be N values in [1, {t}], got {lengths.tolist()}")

        x = Tensor(batch)
        if masked_gap:
            x = mask_time(x, lengths)
        for index, block in enumerate(self.config.blocks):
            prefix = self.block_prefix(index)
            if block.kind == "standard":
                x = conv2d(x, self.parameters[f"{prefix}/conv/kernel"], stride=block.stride)
                x = relu6(self._batchnorm(x, f"{prefix}/bn", mode))
            else:
                x = depthwise_conv2d(
                    x, self.parameters[f"{prefix}/depthwise/kernel"], stride=block.stride
                )
                x = relu6(self._batchnorm(x, f"{prefix}/depthwise_bn", mode))
                x = conv2d(x, self.parameters[f"{prefix}/pointwise/kernel"], stride=1)
                x = relu6(self._batchnorm(x, f"{prefix}/pointwise_bn", mode))
            lengths = -(-lengths // block.stride)
            if masked_gap:
                x = mask_time(x, lengths)

        features = gap_over_axis(x, axis=2)
        activations = conv1d(
            features, self.parameters["head/kernel"], self.parameters["head/bias"]
        )
        logits = gap_over_axis(
            activations, axis=2, valid_lengths=lengths if masked_gap else None
        )
        return softmax(logits), activations

    def predict(
        self,
        feature_map: FeatureMap,
        mode: str = "infer",
        masked_gap: bool = False,
        valid_len: int | None = None,
    ) -> Prediction:
        return forward(self, feature_map, mode=mode, masked_gap=masked_gap, valid_len=valid_len)


def forward(
    model: FcnModel,
    feature_map: FeatureMap,
    mode: str = "infer",
    masked_gap: bool = False,
    valid_len: int | None = None,
) -> Prediction:
    """
    Classifies one feature map as a batch of one.

    Args:
        model (FcnModel): The network.
        feature_map (FeatureMap): A (p, t) map with t >= 32.
        mode (str): "infer" uses running batch-norm statistics; "train" uses the
            sample's own statistics and updates the running ones.
        masked_gap (bool): Restrict the time average to the first valid_len frames.
        valid_len (int, optional): Frames of real content; defaults to t.

    Returns:
        Prediction: Probabilities, label and the (t', 2) time activations.
    """
    valid_len = feature_map.t if valid_len is None else valid_len
    if not 1 <= valid_len <= feature_map.t:
        raise ArgumentError(f"valid_len must be in [1, {feature_map.t}], got {valid_len}")
    feature_map = model.preprocess(feature_map, valid_len)
    batch = replicate_channels(feature_map, model.config.input_channels).data[np.newaxis]
    with no_grad():
        probs, activations = model.forward_batch(
            batch, np.array([valid_len]), mode=mode, masked_gap=masked_gap
        )
    prob_vector = probs.data[0].astype(np.float64)
    prob_vector /= prob_vector.sum()
    return Prediction(
        probs=prob_vector,
        label=label_from_probs(prob_vector),
        time_activations=TimeActivations(
            values=activations.data[0].T.astype(np.float64), source_t=feature_map.t
        ),
    )
