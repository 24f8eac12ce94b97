# src/nncore/tensor.py

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Callable, Sequence

import numpy as np

from src.utils.error_handling import AutogradStateError, ShapeError

_grad_enabled: ContextVar[bool] = ContextVar("grad_enabled", default=True)


@contextmanager
def no_grad():
    """Disables graph recording in the current context (thread-local by construction)."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


class Tensor:
    """
    A dense n-dimensional array that records the operation which produced it.

    Tensors created by an op keep references to their parents and a closure that
    pushes an upstream gradient back to them; `backward()` walks that graph in
    reverse topological order.

    Attributes:
        data (np.ndarray): The values, row-major.
        requires_grad (bool): Whether gradients flow into this tensor.
        grad (np.ndarray | None): Accumulated gradient, same shape as data.
    """

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Sequence["Tensor"] = (),
        _backward: Callable[[np.ndarray], None] | None = None,
        _op: str = "",
    ) -> None:
        data = np.asarray(data)
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        self.data = data
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents = tuple(_parents)
        self._backward = _backward
        self._op = _op

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward: Callable[[np.ndarray], None],
        op: str,
    ) -> "Tensor":
        requires_grad = is_grad_enabled() and any(p.requires_grad for p in parents)
        if not requires_grad:
            return cls(data, _op=op)
        return cls(data, requires_grad=True, _parents=parents, _backward=backward, _op=op)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        grad = np.asarray(grad, dtype=self.data.dtype)
        if grad.shape != self.data.shape:
            raise ShapeError(
                f"Gradient shape {grad.shape} does not match tensor shape {self.data.shape} "
                f"(op '{self._op}')"
            )
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def _topological_order(self) -> list["Tensor"]:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: np.ndarray | None = None) -> None:
        """
        Reverse-mode differentiation from this tensor.

        Args:
            grad (np.ndarray, optional): Upstream gradient; defaults to 1 for scalars.

        Raises:
            AutogradStateError: If this tensor was not produced by a recorded forward pass.
            ShapeError: If no gradient is given for a non-scalar tensor.
        """
        if self._backward is None:
            raise AutogradStateError(
                "backward() called on a tensor with no recorded forward pass"
            )
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(
                    f"backward() needs an explicit gradient for shape {self.data.shape}"
                )
            grad = np.ones_like(self.data)

        order = self._topological_order()
        for node in order:
            if node is not self and node._backward is not None:
                node.grad = None
        self.grad = None
        self.accumulate_grad(grad)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op='{self._op}')"


class Parameter(Tensor):
    """
    A learnable tensor with its gradient and RMSProp accumulator.

    The value, gradient and accumulator always share one shape.
    """

    def __init__(self, data, name: str = "") -> None:
        super().__init__(np.array(data, copy=True), requires_grad=True)
        self.name = name
        self.rms_accumulator = np.zeros_like(self.data)

    @property
    def value(self) -> np.ndarray:
        return self.data

    @property
    def gradient(self) -> np.ndarray:
        if self.grad is None:
            return np.zeros_like(self.data)
        return self.grad

    def assign(self, values: np.ndarray) -> None:
        values = np.asarray(values)
        if values.shape != self.data.shape:
            raise ShapeError(
                f"Cannot assign shape {values.shape} to parameter '{self.name}' of shape "
                f"{self.data.shape}"
            )
        self.data = values.astype(self.data.dtype, copy=True)

    def __repr__(self) -> str:
        return f"Parameter(name='{self.name}', shape={self.shape}, dtype={self.dtype})"
