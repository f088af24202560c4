"""
Instance representation transition and the three local semantic descriptors.

All descriptors map an [N, H, W] (or [B, N, H, W]) instance representation to a
representation of the same shape, so that bank elements can be summed and
differenced position by position. Windows are clipped at the map borders.
"""
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.exceptions.autodiff import ShapeError
from src.exceptions.training import ConfigurationError
from src.lib.autodiff import Function, Tensor, conv2d
from src.models.backbone import ParameterSet, kaiming_normal
from src.schemas.model import AttentionActivation, DescriptorConfig, InstanceRole


@dataclass(frozen=True)
class InstanceRepresentation:
    """Spatial map with one channel per scene category, tagged with its role."""

    tensor: Tensor
    role: InstanceRole

    def __post_init__(self) -> None:
        if self.tensor.ndim not in (3, 4):
            raise ShapeError(f"instance representation must be [N,H,W], got {self.shape}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tensor.shape

    @property
    def num_classes(self) -> int:
        return self.tensor.shape[-3]


@dataclass(frozen=True)
class RepresentationBank:
    """The ordered bank (X1, X2, X3, X4); indexed 1..4."""

    elements: tuple[InstanceRepresentation, ...]

    def __post_init__(self) -> None:
        if len(self.elements) != 4:
            raise ShapeError(f"a bank holds 4 elements, got {len(self.elements)}")
        shapes = {e.shape for e in self.elements}
        if len(shapes) != 1:
            raise ShapeError(f"bank elements disagree in shape: {sorted(shapes)}")

    def __getitem__(self, position: int) -> InstanceRepresentation:
        if not 1 <= position <= 4:
            raise IndexError(f"bank positions are 1..4, got {position}")
        return self.elements[position - 1]

    def __iter__(self) -> Iterator[InstanceRepresentation]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.elements[0].shape


def init_descriptor_parameters(
    feature_channels: int,
    num_classes: int,
    seed: int,
    with_attention: bool = True,
    positions: int = 1,
) -> ParameterSet:
    """
    Transition (and optionally attention) parameters.

    Class logits are sums over `positions` spatial cells, so the transition weights
    are kaiming-scaled and then divided by `positions`; the initial logits stay near
    zero instead of starting in the softmax's saturated range.
    """
    if positions < 1:
        raise ConfigurationError(f"positions must be >= 1, got {positions}")
    rng = np.random.default_rng([seed, 1])
    transition = kaiming_normal(rng, (num_classes, feature_channels, 1, 1)) / positions
    params: ParameterSet = {
        "transition.weight": Tensor(transition, requires_grad=True),
        "transition.bias": Tensor(np.zeros(num_classes), requires_grad=True),
    }
    if with_attention:
        params["attention.weight"] = Tensor(
            kaiming_normal(rng, (1, num_classes, 1, 1)), requires_grad=True
        )
        params["attention.bias"] = Tensor(np.zeros(1), requires_grad=True)
    return params


# ----------------------------------------------------------------- transition


def instance_transition(
    features: Tensor, weight: Tensor, bias: Tensor
) -> InstanceRepresentation:
    """X1 = conv1(X) with N 1x1 filters."""
    if weight.ndim != 4 or weight.shape[2:] != (1, 1):
        raise ShapeError(f"transition kernels must be [N,C,1,1], got {weight.shape}")
    return InstanceRepresentation(conv2d(features, weight, bias), InstanceRole.BASE)


# ------------------------------------------------------------------ attention


def attention_map(
    x1: InstanceRepresentation,
    weight: Tensor,
    bias: Tensor,
    activation: AttentionActivation = AttentionActivation.SIGMOID,
) -> Tensor:
    """A = act(conv1x1(X1; W1) + b1), shape [1, H, W]."""
    if weight.shape != (1, x1.num_classes, 1, 1):
        raise ShapeError(f"attention kernel must be [1,{x1.num_classes},1,1]")
    logits = conv2d(x1.tensor, weight, bias)
    if activation == AttentionActivation.SIGMOID:
        return logits.sigmoid()
    return logits


def spatial_attention(
    x1: InstanceRepresentation,
    weight: Tensor,
    bias: Tensor,
    activation: AttentionActivation = AttentionActivation.SIGMOID,
) -> InstanceRepresentation:
    """X2 = X1 * A, the attention map broadcast over category channels."""
    return InstanceRepresentation(
        x1.tensor * attention_map(x1, weight, bias, activation), InstanceRole.ATTENTION
    )


# -------------------------------------------------------------------- windows


def _check_window(window: int, shape: tuple[int, ...]) -> None:
    if window < 1 or window % 2 == 0:
        raise ShapeError(f"window size must be odd, got {window}")
    if window > min(shape[-2:]):
        raise ShapeError(f"window {window} exceeds map {shape[-2]}x{shape[-1]}")


def _windows(x: np.ndarray, window: int, fill: float) -> np.ndarray:
    """[..., H, W] -> [..., H, W, w, w] neighborhoods, borders padded with `fill`."""
    r = window // 2
    pad = [(0, 0)] * (x.ndim - 2) + [(r, r), (r, r)]
    padded = np.pad(x, pad, constant_values=fill)
    return sliding_window_view(padded, (window, window), axis=(-2, -1))


def window_max(x: np.ndarray, window: int) -> np.ndarray:
    return _windows(x, window, -np.inf).max(axis=(-2, -1))


def local_max_mask(x: np.ndarray, window: int) -> np.ndarray:
    """True where a value equals its window maximum; ties are all retained."""
    return x == window_max(x, window)


def strict_peak_mask(x: np.ndarray, window: int) -> np.ndarray:
    """True where a value is strictly greater than every other value in its window."""
    neighbors = _windows(x, window, -np.inf).copy()
    r = window // 2
    neighbors[..., r, r] = -np.inf
    return x > neighbors.max(axis=(-2, -1))


class LocalMaxSelect(Function):
    def forward(self, x: np.ndarray, window: int) -> np.ndarray:
        self.mask = local_max_mask(x, window)
        return np.where(self.mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.mask,)

    def decision(self) -> np.ndarray:
        return self.mask


class PeakSelect(Function):
    def forward(self, x: np.ndarray, window: int) -> np.ndarray:
        self.mask = strict_peak_mask(x, window)
        return np.where(self.mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.mask,)

    def decision(self) -> np.ndarray:
        return self.mask


class LocalMean(Function):
    """Mean over the clipped window around every position."""

    def forward(self, x: np.ndarray, window: int) -> np.ndarray:
        self.window = window
        self.counts = _windows(np.ones(x.shape[-2:]), window, 0.0).sum(axis=(-2, -1))
        return _windows(x, window, 0.0).sum(axis=(-2, -1)) / self.counts

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        # window neighborhoods are symmetric, so the adjoint is another box sum
        return (_windows(grad / self.counts, self.window, 0.0).sum(axis=(-2, -1)),)


# ------------------------------------------------------------- LMS and CACPR


def local_max_select(x1: InstanceRepresentation, window: int = 3) -> InstanceRepresentation:
    """X3: keep values equal to their window maximum per channel, zero the rest."""
    _check_window(window, x1.shape)
    return InstanceRepresentation(
        LocalMaxSelect.apply(x1.tensor, window=window), InstanceRole.LOCAL_MAX
    )


def context_weight(x1: InstanceRepresentation, context_window: int = 5) -> Tensor:
    """kappa = sigmoid(mean of X1 over the clipped context window)."""
    return LocalMean.apply(x1.tensor, window=context_window).sigmoid()


def cacpr(
    x1: InstanceRepresentation, peak_window: int = 3, context_window: int = 5
) -> InstanceRepresentation:
    """
    X4 = X1 * P * kappa.

    P marks strict local peaks of each channel (ties are not peaks) and is held
    constant in the backward pass; kappa weights every peak by the squashed mean
    response of its surrounding context.
    """
    _check_window(peak_window, x1.shape)
    if context_window < 1 or context_window % 2 == 0:
        raise ShapeError(f"context window must be odd, got {context_window}")
    peaks = PeakSelect.apply(x1.tensor, window=peak_window)
    return InstanceRepresentation(
        peaks * context_weight(x1, context_window), InstanceRole.CACPR
    )


# ----------------------------------------------------------------------- bank


def build_bank(
    x1: InstanceRepresentation,
    x2: InstanceRepresentation,
    x3: InstanceRepresentation,
    x4: InstanceRepresentation,
) -> RepresentationBank:
    return RepresentationBank((x1, x2, x3, x4))


def describe(
    x1: InstanceRepresentation, params: ParameterSet, config: DescriptorConfig
) -> RepresentationBank:
    """Run all three descriptors on X1 and assemble the bank."""
    return build_bank(
        x1,
        spatial_attention(
            x1, params["attention.weight"], params["attention.bias"],
            config.attention_activation,
        ),
        local_max_select(x1, config.lms_window),
        cacpr(x1, config.cacpr_peak_window, config.cacpr_context_window),
    )
