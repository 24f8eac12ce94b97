# src/nncore/optim.py

from typing import Iterable

import numpy as np

from src.nncore.nncore_dataclasses import OptimizerConfig
from src.nncore.tensor import Parameter


def rmsprop_step(param: Parameter, cfg: OptimizerConfig) -> Parameter:
    """
    One RMSProp update, in place:

        acc   <- rho * acc + (1 - rho) * g^2
        value <- value - lr * g / (sqrt(acc) + eps)

    A parameter without a gradient is treated as having g = 0.
    """
    grad = param.gradient.astype(np.float64)
    acc = cfg.decay * param.rms_accumulator.astype(np.float64) + (1.0 - cfg.decay) * grad * grad
    update = cfg.learning_rate * grad / (np.sqrt(acc) + cfg.epsilon)
    param.rms_accumulator = acc.astype(param.dtype)
    param.data = (param.data.astype(np.float64) - update).astype(param.dtype)
    return param


class RMSProp:
    """Applies rmsprop_step to a fixed set of parameters."""

    def __init__(self, parameters: Iterable[Parameter], cfg: OptimizerConfig) -> None:
        self.parameters = list(parameters)
        self.cfg = cfg.validate()

    def zero_grad(self) -> None:
        for param in self.parameters:
            param.zero_grad()

    def step(self) -> None:
        for param in self.parameters:
            rmsprop_step(param, self.cfg)
