# src/nncore/ops.py
"""
Differentiable operators on Tensors.

Spatial ops take batched (N, C, H, W) input; an unbatched (C, H, W) input is
treated as a batch of one and returned unbatched. Products and reductions are
accumulated in float64 and cast back to the input dtype.
"""

import numpy as np

from src.nncore.tensor import Tensor
from src.utils.error_handling import ShapeError

PADDING_MODES = ("same", "valid")
BATCHNORM_EPSILON = 1e-3
BATCHNORM_MOMENTUM = 0.99
PROBABILITY_FLOOR = 1e-12
RELU6_CAP = 6.0


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _conv_geometry(size: int, kernel: int, stride: int, padding: str) -> tuple[int, int, int]:
    """Output extent and (low, high) zero padding for one spatial axis."""
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + kernel - size, 0)
        # Extra pad goes on the high-index side.
        return out, total // 2, total - total // 2
    if padding == "valid":
        if size < kernel:
            raise ShapeError(f"valid convolution needs extent >= kernel ({size} < {kernel})")
        return (size - kernel) // stride + 1, 0, 0
    raise ShapeError(f"Unknown padding mode '{padding}', expected one of {PADDING_MODES}")


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    x = _as_tensor(x)
    original = x.shape

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad.reshape(original))

    return Tensor.from_op(x.data.reshape(shape), (x,), backward, "reshape")


def _batched(x: Tensor, rank: int) -> tuple[Tensor, bool]:
    if x.ndim == rank - 1:
        return reshape(x, (1,) + x.shape), True
    if x.ndim != rank:
        raise ShapeError(f"Expected a rank {rank - 1} or {rank} tensor, got shape {x.shape}")
    return x, False


def _unbatched(y: Tensor, squeeze: bool) -> Tensor:
    return reshape(y, y.shape[1:]) if squeeze else y


def conv2d(
    x: Tensor, kernels: Tensor, stride: int = 1, padding: str = "same"
) -> Tensor:
    """
    Standard 2-D convolution (cross-correlation), no bias.

    Args:
        x (Tensor): (N, C_in, H, W) or (C_in, H, W) input.
        kernels (Tensor): (C_out, C_in, kh, kw) filters.
        stride (int): Step on both spatial axes.
        padding (str): "same" gives ceil(H / stride) outputs; "valid" pads nothing.

    Returns:
        Tensor: (N, C_out, H', W') output, or (C_out, H', W') for unbatched input.

    Raises:
        ShapeError: On incompatible shapes or a bad stride.
    """
    x, squeeze = _batched(_as_tensor(x), 4)
    kernels = _as_tensor(kernels)
    if kernels.ndim != 4 or kernels.shape[1] != x.shape[1]:
        raise ShapeError(
            f"conv2d kernels of shape {kernels.shape} do not match input channels {x.shape[1]}"
        )
    n, c_in, h, w = x.shape
    c_out, _, kh, kw = kernels.shape
    h_out, top, bottom = _conv_geometry(h, kh, stride, padding)
    w_out, left, right = _conv_geometry(w, kw, stride, padding)

    padded = np.pad(x.data.astype(np.float64), ((0, 0), (0, 0), (top, bottom), (left, right)))
    weights = kernels.data.astype(np.float64)
    h_span = stride * (h_out - 1) + 1
    w_span = stride * (w_out - 1) + 1

    def window(i: int, j: int) -> tuple[slice, ...]:
        return (
            slice(None),
            slice(None),
            slice(i, i + h_span, stride),
            slice(j, j + w_span, stride),
        )

    out = np.zeros((n, c_out, h_out, w_out), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            patch = padded[window(i, j)]
            out += np.tensordot(patch, weights[:, :, i, j], axes=([1], [1])).transpose(0, 3, 1, 2)

    def backward(grad: np.ndarray) -> None:
        grad = grad.astype(np.float64)
        grad_padded = np.zeros_like(padded)
        grad_kernels = np.zeros_like(weights)
        for i in range(kh):
            for j in range(kw):
                patch = padded[window(i, j)]
                grad_kernels[:, :, i, j] = np.tensordot(grad, patch, axes=([0, 2, 3], [0, 2, 3]))
                grad_padded[window(i, j)] += np.tensordot(
                    grad, weights[:, :, i, j], axes=([1], [0])
                ).transpose(0, 3, 1, 2)
        x.accumulate_grad(grad_padded[:, :, top : top + h, left : left + w])
        kernels.accumulate_grad(grad_kernels)

    y = Tensor.from_op(out.astype(x.dtype), (x, kernels), backward, "conv2d")
    return _unbatched(y, squeeze)


def depthwise_conv2d(
    x: Tensor, kernels: Tensor, stride: int = 1, padding: str = "same"
) -> Tensor:
    """
    Per-channel 2-D convolution: channel c is filtered only by kernel c.

    Args:
        x (Tensor): (N, C, H, W) or (C, H, W) input.
        kernels (Tensor): (C, kh, kw) filters.
    """
    x, squeeze = _batched(_as_tensor(x), 4)
    kernels = _as_tensor(kernels)
    if kernels.ndim != 3 or kernels.shape[0] != x.shape[1]:
        raise ShapeError(
            f"depthwise kernels of shape {kernels.shape} do not match input channels {x.shape[1]}"
        )
    n, c, h, w = x.shape
    _, kh, kw = kernels.shape
    h_out, top, bottom = _conv_geometry(h, kh, stride, padding)
    w_out, left, right = _conv_geometry(w, kw, stride, padding)

    padded = np.pad(x.data.astype(np.float64), ((0, 0), (0, 0), (top, bottom), (left, right)))
    weights = kernels.data.astype(np.float64)
    h_span = stride * (h_out - 1) + 1
    w_span = stride * (w_out - 1) + 1

    def window(i: int, j: int) -> tuple[slice, ...]:
        return (
            slice(None),
            slice(None),
            slice(i, i + h_span, stride),
            slice(j, j + w_span, stride),
        )

    out = np.zeros((n, c, h_out, w_out), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            out += padded[window(i, j)] * weights[np.newaxis, :, i, j, np.newaxis, np.newaxis]

    def backward(grad: np.ndarray) -> None:
        grad = grad.astype(np.float64)
        grad_padded = np.zeros_like(padded)
        grad_kernels = np.zeros_like(weights)
        for i in range(kh):
            for j in range(kw):
                grad_kernels[:, i, j] = np.sum(grad * padded[window(i, j)], axis=(0, 2, 3))
                grad_padded[window(i, j)] += (
                    grad * weights[np.newaxis, :, i, j, np.newaxis, np.newaxis]
                )
        x.accumulate_grad(grad_padded[:, :, top : top + h, left : left + w])
        kernels.accumulate_grad(grad_kernels)

    y = Tensor.from_op(out.astype(x.dtype), (x, kernels), backward, "depthwise_conv2d")
    return _unbatched(y, squeeze)


def batchnorm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: str = "infer",
    momentum: float = BATCHNORM_MOMENTUM,
    eps: float = BATCHNORM_EPSILON,
) -> Tensor:
    """
    Per-channel batch normalisation over (N, H, W).

    In "train" mode the batch statistics normalise the input and the running
    statistics are updated in place: running = momentum * running + (1 - momentum) * batch.
    In "infer" mode the running statistics are used and nothing is updated.
    """
    x, squeeze = _batched(_as_tensor(x), 4)
    gamma, beta = _as_tensor(gamma), _as_tensor(beta)
    channels = x.shape[1]
    for name, vector in (
        ("gamma", gamma.data),
        ("beta", beta.data),
        ("running_mean", running_mean),
        ("running_var", running_var),
    ):
        if vector.shape != (channels,):
            raise ShapeError(f"batchnorm {name} has shape {vector.shape}, expected ({channels},)")
    if mode not in ("train", "infer"):
        raise ShapeError(f"batchnorm mode must be 'train' or 'infer', got '{mode}'")

    data = x.data.astype(np.float64)
    axes = (0, 2, 3)
    if data.size == 0:
        raise ShapeError("batchnorm received an empty batch")
    if mode == "train":
        mean = data.mean(axis=axes)
        var = data.var(axis=axes)
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mean
        running_var *= momentum
        running_var += (1.0 - momentum) * var
    else:
        mean = running_mean.astype(np.float64)
        var = running_var.astype(np.float64)

    inv_std = 1.0 / np.sqrt(var + eps)
    shape = (1, channels, 1, 1)
    normalized = (data - mean.reshape(shape)) * inv_std.reshape(shape)
    g = gamma.data.astype(np.float64).reshape(shape)
    out = normalized * g + beta.data.astype(np.float64).reshape(shape)

    def backward(grad: np.ndarray) -> None:
        grad = grad.astype(np.float64)
        gamma.accumulate_grad(np.sum(grad * normalized, axis=axes))
        beta.accumulate_grad(np.sum(grad, axis=axes))
        grad_normalized = grad * g
        if mode == "train":
            mean_grad = grad_normalized.mean(axis=axes, keepdims=True)
            mean_grad_norm = (grad_normalized * normalized).mean(axis=axes, keepdims=True)
            grad_x = (grad_normalized - mean_grad - normalized * mean_grad_norm) * inv_std.reshape(
                shape
            )
        else:
            grad_x = grad_normalized * inv_std.reshape(shape)
        x.accumulate_grad(grad_x)

    y = Tensor.from_op(out.astype(x.dtype), (x, gamma, beta), backward, "batchnorm")
    return _unbatched(y, squeeze)


def relu6(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out = np.clip(x.data, 0.0, RELU6_CAP)

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad * ((x.data > 0.0) & (x.data < RELU6_CAP)))

    return Tensor.from_op(out, (x,), backward, "relu6")


def gap_over_axis(
    x: Tensor, axis: int, valid_lengths: np.ndarray | None = None
) -> Tensor:
    """
    Global average pooling over one axis, removing it.

    Args:
        x (Tensor): Input tensor.
        axis (int): Axis to average away.
        valid_lengths (np.ndarray, optional): Per-sample counts of leading positions
            to average over; requires a leading batch axis distinct from `axis`.
    """
    x = _as_tensor(x)
    if x.data.size == 0:
        raise ShapeError("gap_over_axis received an empty tensor")
    axis = axis % x.ndim
    extent = x.shape[axis]
    data = x.data.astype(np.float64)

    if valid_lengths is None:
        out = data.mean(axis=axis)

        def backward(grad: np.ndarray) -> None:
            expanded = np.expand_dims(grad.astype(np.float64), axis) / extent
            x.accumulate_grad(np.broadcast_to(expanded, x.shape))

        return Tensor.from_op(out.astype(x.dtype), (x,), backward, "gap")

    lengths = np.asarray(valid_lengths, dtype=np.int64)
    if axis == 0 or lengths.shape != (x.shape[0],):
        raise ShapeError(
            f"valid_lengths of shape {lengths.shape} need a batch axis 0 of size {x.shape[0]}"
        )
    if np.any(lengths < 1) or np.any(lengths > extent):
        raise ShapeError(f"valid_lengths must lie in [1, {extent}], got {lengths.tolist()}")
    mask_shape = [1] * x.ndim
    mask_shape[0] = x.shape[0]
    mask_shape[axis] = extent
    mask = (np.arange(extent)[np.newaxis, :] < lengths[:, np.newaxis]).reshape(mask_shape)
    counts_shape = [x.shape[0]] + [1] * (x.ndim - 1)
    counts = lengths.astype(np.float64).reshape(counts_shape)
    out = np.sum(data * mask, axis=axis) / np.squeeze(counts, axis=axis)

    def masked_backward(grad: np.ndarray) -> None:
        expanded = np.expand_dims(grad.astype(np.float64), axis)
        x.accumulate_grad(expanded * mask / counts)

    return Tensor.from_op(out.astype(x.dtype), (x,), masked_backward, "masked_gap")


def mask_time(x: Tensor, valid_lengths: np.ndarray) -> Tensor:
    """Zeroes every position at or beyond each sample's valid length on the last axis."""
    x = _as_tensor(x)
    lengths = np.asarray(valid_lengths, dtype=np.int64)
    if lengths.shape != (x.shape[0],):
        raise ShapeError(f"valid_lengths of shape {lengths.shape} do not match batch {x.shape[0]}")
    extent = x.shape[-1]
    mask_shape = [x.shape[0]] + [1] * (x.ndim - 2) + [extent]
    mask = (np.arange(extent)[np.newaxis, :] < lengths[:, np.newaxis]).reshape(mask_shape)
    out = x.data * mask

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad * mask)

    return Tensor.from_op(out, (x,), backward, "mask_time")


def conv1d(
    x: Tensor, kernels: Tensor, bias: Tensor | None = None, padding: str = "same"
) -> Tensor:
    """
    1-D convolution with stride 1 and optional bias.

    Args:
        x (Tensor): (N, C_in, L) or (C_in, L) input.
        kernels (Tensor): (C_out, C_in, k) filters.
        bias (Tensor, optional): (C_out,) offsets.

    Returns:
        Tensor: (N, C_out, L) or (C_out, L).
    """
    x, squeeze = _batched(_as_tensor(x), 3)
    kernels = _as_tensor(kernels)
    if kernels.ndim != 3:
        raise ShapeError(f"conv1d kernels must be (C_out, C_in, k), got {kernels.shape}")
    n, c_in, length = x.shape
    c_out, _, k = kernels.shape
    y = conv2d(
        reshape(x, (n, c_in, 1, length)),
        reshape(kernels, (c_out, c_in, 1, k)),
        stride=1,
        padding=padding,
    )
    y = reshape(y, (n, c_out, y.shape[-1]))
    if bias is not None:
        y = add_channel_bias(y, bias)
    return _unbatched(y, squeeze)


def add_channel_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Adds bias[c] to every element of channel c (axis 1)."""
    x, bias = _as_tensor(x), _as_tensor(bias)
    if bias.shape != (x.shape[1],):
        raise ShapeError(f"bias of shape {bias.shape} does not match channels {x.shape[1]}")
    shape = [1, x.shape[1]] + [1] * (x.ndim - 2)
    out = x.data + bias.data.reshape(shape).astype(x.dtype)
    sum_axes = tuple(a for a in range(x.ndim) if a != 1)

    def backward(grad: np.ndarray) -> None:
        x.accumulate_grad(grad)
        bias.accumulate_grad(np.sum(grad.astype(np.float64), axis=sum_axes))

    return Tensor.from_op(out, (x, bias), backward, "add_bias")


def softmax(logits: Tensor) -> Tensor:
    """Softmax over the last axis, shifted by the max so it is invariant to constant offsets."""
    logits = _as_tensor(logits)
    if logits.data.size == 0:
        raise ShapeError("softmax received an empty tensor")
    data = logits.data.astype(np.float64)
    shifted = data - data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=-1, keepdims=True)

    def backward(grad: np.ndarray) -> None:
        grad = grad.astype(np.float64)
        inner = np.sum(grad * probs, axis=-1, keepdims=True)
        logits.accumulate_grad(probs * (grad - inner))

    return Tensor.from_op(probs.astype(logits.dtype), (logits,), backward, "softmax")


def cross_entropy(probs: Tensor, true_classes) -> Tensor:
    """
    Mean of -log(prob[true_class]) over the batch, probabilities floored at 1e-12.

    Args:
        probs (Tensor): (N, K) probabilities or a single (K,) vector.
        true_classes: (N,) class indices or a single index.

    Returns:
        Tensor: A scalar.
    """
    probs = _as_tensor(probs)
    if probs.data.size == 0:
        raise ShapeError("cross_entropy received an empty tensor")
    classes = np.atleast_1d(np.asarray(true_classes, dtype=np.int64))
    data = probs.data.astype(np.float64).reshape(-1, probs.shape[-1])
    if classes.shape[0] != data.shape[0]:
        raise ShapeError(f"{classes.shape[0]} labels for {data.shape[0]} probability rows")
    if np.any(classes < 0) or np.any(classes >= data.shape[1]):
        raise ShapeError(f"class index out of range for {data.shape[1]} classes")
    rows = np.arange(data.shape[0])
    picked = data[rows, classes]
    floored = np.maximum(picked, PROBABILITY_FLOOR)
    loss = -np.mean(np.log(floored))

    def backward(grad: np.ndarray) -> None:
        upstream = float(np.asarray(grad, dtype=np.float64).reshape(-1)[0])
        grad_probs = np.zeros_like(data)
        live = picked > PROBABILITY_FLOOR
        grad_probs[rows[live], classes[live]] = -upstream / (data.shape[0] * picked[live])
        probs.accumulate_grad(grad_probs.reshape(probs.shape))

    return Tensor.from_op(np.asarray(loss, dtype=probs.dtype), (probs,), backward, "cross_entropy")
