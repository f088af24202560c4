"""
Small residual convolutional feature extractor.

Stem 3x3 conv (stride 2) + relu, then two residual blocks
(3x3 conv stride 2 -> relu -> 3x3 conv, 1x1 projection skip), total stride 8.
Dropout is applied once to the output map in train mode.
"""
import logging

import numpy as np

from src.exceptions.autodiff import ShapeError
from src.lib.autodiff import Tensor, conv2d
from src.schemas.model import BackboneConfig, Mode

logger = logging.getLogger(__name__)

ParameterSet = dict[str, Tensor]

# A FeatureMap is a Tensor of shape [C, S/8, S/8] (or [B, C, S/8, S/8]).
FeatureMap = Tensor

BLOCK_STRIDE = 2


def kaiming_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in = int(np.prod(shape[1:]))
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def _add_conv(
    params: ParameterSet,
    rng: np.random.Generator,
    name: str,
    in_channels: int,
    out_channels: int,
    kernel: int,
) -> None:
    params[f"{name}.weight"] = Tensor(
        kaiming_normal(rng, (out_channels, in_channels, kernel, kernel)),
        requires_grad=True,
    )
    params[f"{name}.bias"] = Tensor(np.zeros(out_channels), requires_grad=True)


def init_parameters(config: BackboneConfig, seed: int) -> ParameterSet:
    """Fan-in scaled normal kernels and zero biases, deterministic in `seed`."""
    rng = np.random.default_rng(seed)
    params: ParameterSet = {}
    _add_conv(params, rng, "stem", 3, config.stem_channels, 3)
    in_channels = config.stem_channels
    for index, out_channels in enumerate(config.block_channels, start=1):
        prefix = f"block{index}"
        _add_conv(params, rng, f"{prefix}.conv1", in_channels, out_channels, 3)
        _add_conv(params, rng, f"{prefix}.conv2", out_channels, out_channels, 3)
        _add_conv(params, rng, f"{prefix}.proj", in_channels, out_channels, 1)
        in_channels = out_channels
    return params


def residual_block(x: Tensor, params: ParameterSet, prefix: str, stride: int) -> Tensor:
    """conv3x3(stride) -> relu -> conv3x3, plus identity or 1x1-projected skip."""
    h = conv2d(
        x, params[f"{prefix}.conv1.weight"], params[f"{prefix}.conv1.bias"], stride, 1
    ).relu()
    h = conv2d(h, params[f"{prefix}.conv2.weight"], params[f"{prefix}.conv2.bias"], 1, 1)
    if f"{prefix}.proj.weight" in params:
        skip = conv2d(
            x, params[f"{prefix}.proj.weight"], params[f"{prefix}.proj.bias"], stride, 0
        )
    else:
        skip = x
    return h + skip


def dropout(x: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: survivors are scaled by 1 / (1 - rate)."""
    if rate <= 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    return x * Tensor(keep / (1.0 - rate))


def backbone_forward(
    image: Tensor,
    params: ParameterSet,
    config: BackboneConfig,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | int | None = None,
) -> FeatureMap:
    """
    Map [3, S, S] (or [B, 3, S, S]) images to the [C, S/8, S/8] feature map.

    Raises:
        ShapeError: If the image is not 3-channel with side `config.input_size`.
    """
    size = config.input_size
    if image.ndim not in (3, 4) or image.shape[-3:] != (3, size, size):
        raise ShapeError(f"expected image [3, {size}, {size}], got {image.shape}")

    x = conv2d(image, params["stem.weight"], params["stem.bias"], 2, 1).relu()
    for index in range(1, len(config.block_channels) + 1):
        x = residual_block(x, params, f"block{index}", BLOCK_STRIDE)

    if mode == Mode.TRAIN and config.dropout_rate > 0.0:
        generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        x = dropout(x, config.dropout_rate, generator)
    return x
