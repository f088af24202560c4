"""
Functional operations on `Tensor`: convolution, reductions, softmax in linear and
log space, label picking, plus the `elementwise` dispatcher over the unary/binary
primitives.

Image-shaped operations accept an optional leading batch axis: `conv2d` takes
`[C, H, W]` or `[B, C, H, W]`, `spatial_sum` reduces the last two axes and
`softmax` normalizes the last axis.
"""
from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import as_strided

from src.exceptions.autodiff import ShapeError
from src.lib.autodiff.tensor import Function, Operand, Tensor, as_tensor

ElementwiseOp = Literal["add", "sub", "mul", "relu", "sigmoid", "abs", "square"]


# --------------------------------------------------------------- elementwise


def add(a: Operand, b: Operand) -> Tensor:
    return as_tensor(a) + b


def sub(a: Operand, b: Operand) -> Tensor:
    return as_tensor(a) - b


def mul(a: Operand, b: Operand) -> Tensor:
    return as_tensor(a) * b


def relu(x: Tensor) -> Tensor:
    return x.relu()


def sigmoid(x: Tensor) -> Tensor:
    return x.sigmoid()


def absolute(x: Tensor) -> Tensor:
    return x.abs()


def square(x: Tensor) -> Tensor:
    return x.square()


_UNARY: dict[str, Callable[[Tensor], Tensor]] = {
    "relu": relu,
    "sigmoid": sigmoid,
    "abs": absolute,
    "square": square,
}
_BINARY: dict[str, Callable[[Operand, Operand], Tensor]] = {
    "add": add,
    "sub": sub,
    "mul": mul,
}


def elementwise(op: ElementwiseOp, *operands: Operand) -> Tensor:
    """Apply one of the named elementwise primitives."""
    if op in _UNARY:
        if len(operands) != 1:
            raise ShapeError(f"'{op}' takes one operand, got {len(operands)}")
        return _UNARY[op](as_tensor(operands[0]))
    if op in _BINARY:
        if len(operands) != 2:
            raise ShapeError(f"'{op}' takes two operands, got {len(operands)}")
        return _BINARY[op](*operands)
    raise ValueError(f"unknown elementwise op '{op}'")


# ---------------------------------------------------------------- reductions


def spatial_sum(x: Tensor) -> Tensor:
    """Sum over the two trailing (spatial) axes: [.., N, H, W] -> [.., N]."""
    if x.ndim < 3:
        raise ShapeError(f"spatial_sum needs rank >= 3, got shape {x.shape}")
    return x.sum(axis=(-2, -1))


def mean(x: Tensor) -> Tensor:
    return x.mean()


class Softmax(Function):
    def forward(self, z: np.ndarray) -> np.ndarray:
        shifted = z - z.max(axis=-1, keepdims=True)
        exp = np.exp(shifted)
        self.out = exp / exp.sum(axis=-1, keepdims=True)
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        s = self.out
        return (s * (grad - (grad * s).sum(axis=-1, keepdims=True)),)


def softmax(z: Tensor) -> Tensor:
    """Numerically stabilized softmax over the last axis."""
    if z.ndim < 1 or z.shape[-1] < 2:
        raise ShapeError(f"softmax needs at least 2 entries, got shape {z.shape}")
    return Softmax.apply(z)


class LogSoftmax(Function):
    def forward(self, z: np.ndarray) -> np.ndarray:
        shifted = z - z.max(axis=-1, keepdims=True)
        self.out = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad - np.exp(self.out) * grad.sum(axis=-1, keepdims=True),)


def log_softmax(z: Tensor) -> Tensor:
    """log(softmax(z)) over the last axis, finite for any finite logits."""
    if z.ndim < 1 or z.shape[-1] < 2:
        raise ShapeError(f"log_softmax needs at least 2 entries, got shape {z.shape}")
    return LogSoftmax.apply(z)


class LogMeanExp(Function):
    def forward(self, *xs: np.ndarray) -> np.ndarray:
        stacked = np.stack(xs)
        top = stacked.max(axis=0)
        exp = np.exp(stacked - top)
        total = exp.sum(axis=0)
        self.weights = exp / total
        return top + np.log(total / len(xs))

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return tuple(grad * weight for weight in self.weights)


def log_mean_exp(*xs: Tensor) -> Tensor:
    """log(mean_k exp(x_k)) entry by entry; averages distributions held in log space."""
    if not xs:
        raise ShapeError("log_mean_exp needs at least one operand")
    if len({x.shape for x in xs}) != 1:
        raise ShapeError(f"log_mean_exp operands disagree in shape: {[x.shape for x in xs]}")
    return LogMeanExp.apply(*xs)


class Pick(Function):
    """Select one entry per row of the last axis."""

    def forward(self, x: np.ndarray, index: np.ndarray) -> np.ndarray:
        self.index = index
        if x.ndim == 1:
            return x[index]
        return x[np.arange(x.shape[0]), index]

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        x = self.inputs[0]
        out = np.zeros(x.shape)
        if x.ndim == 1:
            out[self.index] = grad
        else:
            np.add.at(out, (np.arange(x.shape[0]), self.index), grad)
        return (out,)


def pick(x: Tensor, index: int | Sequence[int] | np.ndarray) -> Tensor:
    """x[index] for rank-1 input, x[b, index[b]] for rank-2 input."""
    index = np.asarray(index, dtype=np.intp)
    if x.ndim == 1 and index.ndim != 0:
        raise ShapeError("rank-1 pick takes a single index")
    if x.ndim == 2 and index.shape != (x.shape[0],):
        raise ShapeError(f"need {x.shape[0]} indices, got shape {index.shape}")
    if x.ndim not in (1, 2):
        raise ShapeError(f"pick needs rank 1 or 2, got shape {x.shape}")
    return Pick.apply(x, index=index)


# --------------------------------------------------------------- convolution


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _im2col(x: np.ndarray, kernel: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    batch, channels = x.shape[:2]
    s_b, s_c, s_h, s_w = x.strides
    patches = as_strided(
        x,
        shape=(batch, channels, kernel, kernel, out_h, out_w),
        strides=(s_b, s_c, s_h, s_w, stride * s_h, stride * s_w),
        writeable=False,
    )
    return patches.reshape(batch, channels * kernel * kernel, out_h * out_w)


class Conv2d(Function):
    """Cross-correlation of [B, C, H, W] input with [O, C, k, k] kernels."""

    def forward(
        self,
        x: np.ndarray,
        weight: np.ndarray,
        bias: np.ndarray,
        stride: int,
        padding: int,
    ) -> np.ndarray:
        self.stride, self.padding = stride, padding
        out_channels, _, kernel, _ = weight.shape
        padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        self.padded_shape = padded.shape
        out_h = conv_output_size(x.shape[2], kernel, stride, padding)
        out_w = conv_output_size(x.shape[3], kernel, stride, padding)
        self.cols = _im2col(padded, kernel, stride, out_h, out_w)
        self.weight_matrix = weight.reshape(out_channels, -1)
        out = np.matmul(self.weight_matrix, self.cols) + bias[None, :, None]
        return out.reshape(x.shape[0], out_channels, out_h, out_w)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        x, weight, _ = self.inputs
        batch, out_channels, out_h, out_w = grad.shape
        kernel = weight.shape[2]
        g = grad.reshape(batch, out_channels, out_h * out_w)

        grad_bias = g.sum(axis=(0, 2))
        grad_weight = np.tensordot(g, self.cols, axes=([0, 2], [0, 2])).reshape(
            weight.shape
        )

        grad_cols = np.matmul(self.weight_matrix.T, g).reshape(
            batch, x.shape[1], kernel, kernel, out_h, out_w
        )
        grad_padded = np.zeros(self.padded_shape)
        s = self.stride
        for i in range(kernel):
            for j in range(kernel):
                grad_padded[:, :, i : i + s * out_h : s, j : j + s * out_w : s] += (
                    grad_cols[:, :, i, j]
                )
        p = self.padding
        h, w = x.shape[2], x.shape[3]
        return grad_padded[:, :, p : p + h, p : p + w], grad_weight, grad_bias


def conv2d(
    x: Tensor,
    kernels: Tensor,
    bias: Tensor,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """
    2-D convolution (cross-correlation) with square kernels.

    Args:
        x: Input of shape [C_in, H, W] or [B, C_in, H, W].
        kernels: Kernels of shape [C_out, C_in, k, k].
        bias: Bias of shape [C_out].
        stride: Step between windows, >= 1.
        padding: Zero padding on every spatial border, >= 0.

    Returns:
        Tensor of shape [C_out, H', W'] (or [B, C_out, H', W']) with
        H' = (H + 2*padding - k) // stride + 1.

    Raises:
        ShapeError: On rank, channel or bias mismatch, a kernel larger than the
            padded input, or an empty output.
    """
    if x.ndim not in (3, 4):
        raise ShapeError(f"conv2d input must be [C,H,W] or [B,C,H,W], got {x.shape}")
    if kernels.ndim != 4 or kernels.shape[2] != kernels.shape[3]:
        raise ShapeError(f"kernels must be [C_out,C_in,k,k], got {kernels.shape}")
    if stride < 1 or padding < 0:
        raise ShapeError(f"invalid stride {stride} / padding {padding}")
    out_channels, in_channels, kernel, _ = kernels.shape
    channel_axis = x.ndim - 3
    if x.shape[channel_axis] != in_channels:
        raise ShapeError(
            f"input has {x.shape[channel_axis]} channels, kernels expect {in_channels}"
        )
    if bias.shape != (out_channels,):
        raise ShapeError(f"bias must have shape ({out_channels},), got {bias.shape}")
    height, width = x.shape[-2:]
    if kernel > height + 2 * padding or kernel > width + 2 * padding:
        raise ShapeError(
            f"kernel {kernel} exceeds padded input {height}x{width} (padding {padding})"
        )
    out_h = conv_output_size(height, kernel, stride, padding)
    out_w = conv_output_size(width, kernel, stride, padding)
    if out_h <= 0 or out_w <= 0:
        raise ShapeError("convolution output would be empty")

    if x.ndim == 3:
        batched = x.reshape(1, *x.shape)
        out = Conv2d.apply(batched, kernels, bias, stride=stride, padding=padding)
        return out.reshape(out_channels, out_h, out_w)
    return Conv2d.apply(x, kernels, bias, stride=stride, padding=padding)
