"""
Reverse-mode automatic differentiation over dense float64 arrays.

A `Tensor` wraps a read-only numpy array. Every differentiable operation is a
`Function` subclass: `Function.apply` runs the forward pass on raw arrays and,
when any input requires a gradient, links the output to the function instance
so that `Tensor.backward` can walk the recorded graph in reverse topological
order.
"""
import logging
from collections.abc import Iterator, Sequence
from typing import Any, Union

import numpy as np

from src.exceptions.autodiff import BackwardError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[Any]]
Operand = Union["Tensor", float, int]

DTYPE = np.float64


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement `forward` on numpy arrays and `backward`, which maps the
    gradient with respect to the output onto one gradient per input (or None for
    inputs that receive no gradient). Intermediates needed by `backward` are saved
    on the instance during `forward`.
    """

    def __init__(self, *inputs: "Tensor"):
        self.inputs = inputs

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no forward pass")

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError(f"{type(self).__name__} has no backward pass")

    def decision(self) -> np.ndarray | None:
        """Boolean branch pattern of a non-smooth node; None for smooth nodes."""
        return None

    @classmethod
    def apply(cls, *inputs: "Tensor", **kwargs: Any) -> "Tensor":
        func = cls(*inputs)
        data = func.forward(*(t.data for t in inputs), **kwargs)
        requires_grad = any(t.requires_grad for t in inputs)
        return Tensor.wrap(data, requires_grad=requires_grad, creator=func)

    @staticmethod
    def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
        """Sum `grad` over the axes that were broadcast to reach its shape."""
        if grad.shape == shape:
            return grad
        if len(shape) == 0:
            return np.asarray(grad.sum())
        axes = tuple(
            axis
            for axis, (size, target) in enumerate(zip(grad.shape, shape))
            if target == 1 and size != 1
        )
        return grad.sum(axis=axes, keepdims=True)


def check_broadcast(left: tuple[int, ...], right: tuple[int, ...]) -> None:
    """Allow equal shapes, scalars, or equal ranks differing only by singleton axes."""
    if left == right or len(left) == 0 or len(right) == 0:
        return
    if len(left) == len(right) and all(
        a == b or a == 1 or b == 1 for a, b in zip(left, right)
    ):
        return
    raise ShapeError(f"shapes {left} and {right} are not broadcastable")


class Tensor:
    """N-dimensional float64 array with optional gradient accumulation."""

    __slots__ = ("data", "grad", "requires_grad", "creator")

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        array = np.array(data, dtype=DTYPE)
        array.setflags(write=False)
        self.data: np.ndarray = array
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.creator: Function | None = None

    @classmethod
    def wrap(
        cls,
        array: np.ndarray,
        requires_grad: bool = False,
        creator: Function | None = None,
    ) -> "Tensor":
        """Adopt a freshly computed array without copying it."""
        out = cls.__new__(cls)
        array = np.asarray(array, dtype=DTYPE)
        array.setflags(write=False)
        out.data = array
        out.grad = None
        out.requires_grad = requires_grad
        out.creator = creator if requires_grad else None
        return out

    # ------------------------------------------------------------------ views

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the entries."""
        return self.data.ravel()

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs a single-entry tensor, got {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def assign(self, array: np.ndarray) -> None:
        """Replace the values of a leaf tensor (used by optimizers)."""
        if self.creator is not None:
            raise BackwardError("only leaf tensors can be assigned")
        array = np.array(array, dtype=DTYPE)
        if array.shape != self.shape:
            raise ShapeError(f"cannot assign {array.shape} to tensor of {self.shape}")
        array.setflags(write=False)
        self.data = array

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -------------------------------------------------------------- operators

    def __add__(self, other: Operand) -> "Tensor":
        return Add.apply(self, as_tensor(other))

    def __radd__(self, other: Operand) -> "Tensor":
        return Add.apply(as_tensor(other), self)

    def __sub__(self, other: Operand) -> "Tensor":
        return Sub.apply(self, as_tensor(other))

    def __rsub__(self, other: Operand) -> "Tensor":
        return Sub.apply(as_tensor(other), self)

    def __mul__(self, other: Operand) -> "Tensor":
        return Mul.apply(self, as_tensor(other))

    def __rmul__(self, other: Operand) -> "Tensor":
        return Mul.apply(as_tensor(other), self)

    def __neg__(self) -> "Tensor":
        return Neg.apply(self)

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def sigmoid(self) -> "Tensor":
        return Sigmoid.apply(self)

    def abs(self) -> "Tensor":
        return Abs.apply(self)

    def square(self) -> "Tensor":
        return Square.apply(self)

    def log(self) -> "Tensor":
        return Log.apply(self)

    def clip(self, low: float, high: float) -> "Tensor":
        return Clip.apply(self, low=low, high=high)

    def sum(self, axis: int | tuple[int, ...] | None = None) -> "Tensor":
        return Sum.apply(self, axis=axis)

    def mean(self) -> "Tensor":
        return Sum.apply(self, axis=None) * (1.0 / self.size)

    def reshape(self, *shape: int) -> "Tensor":
        return Reshape.apply(self, shape=shape)

    # ---------------------------------------------------------------- backward

    def graph(self) -> list["Tensor"]:
        """Nodes reachable from this tensor, inputs before consumers."""
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
            if node.creator is not None:
                for parent in reversed(node.creator.inputs):
                    if id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def backward(self) -> None:
        """
        Accumulate d(self)/d(leaf) into `.grad` of every leaf requiring a gradient.

        Raises:
            BackwardError: If this tensor is not a scalar or does not depend on any
                tensor that requires a gradient.
        """
        if self.size != 1:
            raise BackwardError(f"backward needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise BackwardError("loss does not depend on any tensor requiring grad")

        order = self.graph()
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node.creator is None:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            for parent, parent_grad in zip(
                node.creator.inputs, node.creator.backward(grad)
            ):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad

    def decisions(self) -> Iterator[np.ndarray]:
        """Branch patterns of every non-smooth node in this tensor's graph."""
        for node in self.graph():
            if node.creator is not None:
                pattern = node.creator.decision()
                if pattern is not None:
                    yield pattern


def as_tensor(value: Operand | np.ndarray) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


# ---------------------------------------------------------------- elementwise


class Add(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        check_broadcast(a.shape, b.shape)
        return a + b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        a, b = self.inputs
        return self.unbroadcast(grad, a.shape), self.unbroadcast(grad, b.shape)


class Sub(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        check_broadcast(a.shape, b.shape)
        return a - b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        a, b = self.inputs
        return self.unbroadcast(grad, a.shape), self.unbroadcast(-grad, b.shape)


class Mul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        check_broadcast(a.shape, b.shape)
        return a * b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        a, b = self.inputs
        return (
            self.unbroadcast(grad * b.data, a.shape),
            self.unbroadcast(grad * a.data, b.shape),
        )


class Neg(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        return -x

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (-grad,)


class ReLU(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.active = x > 0
        return np.where(self.active, x, 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.active,)

    def decision(self) -> np.ndarray:
        return self.active


class Sigmoid(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        # exp(-log(1 + exp(-x))) never overflows
        self.out = np.exp(-np.logaddexp(0.0, -x))
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.out * (1.0 - self.out),)


class Abs(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.sign = np.sign(x)
        return np.abs(x)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        # subgradient 0 at 0
        return (grad * self.sign,)

    def decision(self) -> np.ndarray:
        return self.sign > 0


class Square(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        return x * x

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * 2.0 * self.inputs[0].data,)


class Log(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        return np.log(x)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad / self.inputs[0].data,)


class Clip(Function):
    def forward(self, x: np.ndarray, low: float, high: float) -> np.ndarray:
        self.inside = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.inside,)

    def decision(self) -> np.ndarray:
        return self.inside


# ----------------------------------------------------------------- structural


class Sum(Function):
    def forward(
        self, x: np.ndarray, axis: int | tuple[int, ...] | None = None
    ) -> np.ndarray:
        self.axis = axis
        return x.sum(axis=axis)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        shape = self.inputs[0].shape
        if self.axis is None:
            return (np.broadcast_to(grad, shape).copy(),)
        axes = (self.axis,) if isinstance(self.axis, int) else self.axis
        expanded = np.expand_dims(grad, tuple(a % len(shape) for a in axes))
        return (np.broadcast_to(expanded, shape).copy(),)


class Reshape(Function):
    def forward(self, x: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
        return x.reshape(shape)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad.reshape(self.inputs[0].shape),)
