"""Tests for the residual feature extractor."""
import numpy as np
import pytest

from src.exceptions.autodiff import ShapeError
from src.lib.autodiff import Tensor
from src.models.backbone import (
    backbone_forward,
    dropout,
    init_parameters,
    residual_block,
)
from src.schemas.model import BackboneConfig, Mode


@pytest.mark.unit
class TestBackboneForward:
    """Shapes, modes and gradient flow."""

    def test_default_output_shape(self, rng):
        config = BackboneConfig()
        params = init_parameters(config, seed=0)
        out = backbone_forward(Tensor(rng.random((3, 64, 64))), params, config)
        assert out.shape == (64, 8, 8)

    def test_batched_output_shape(self, rng, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        out = backbone_forward(Tensor(rng.random((2, 3, 24, 24))), params, tiny_backbone)
        assert out.shape == (2, 8, 3, 3)

    def test_eval_is_deterministic(self, rng, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        image = Tensor(rng.random((3, 24, 24)))
        first = backbone_forward(image, params, tiny_backbone, Mode.EVAL).data
        second = backbone_forward(image, params, tiny_backbone, Mode.EVAL).data
        np.testing.assert_array_equal(first, second)

    def test_train_mode_applies_dropout(self, rng, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        image = Tensor(rng.random((3, 24, 24)))
        evaluated = backbone_forward(image, params, tiny_backbone, Mode.EVAL).data
        trained = backbone_forward(image, params, tiny_backbone, Mode.TRAIN, rng=3).data
        kept = trained != 0.0
        np.testing.assert_allclose(trained[kept], evaluated[kept] / 0.8)
        assert not kept.all()

    def test_train_mode_deterministic_in_seed(self, rng, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        image = Tensor(rng.random((3, 24, 24)))
        first = backbone_forward(image, params, tiny_backbone, Mode.TRAIN, rng=7).data
        second = backbone_forward(image, params, tiny_backbone, Mode.TRAIN, rng=7).data
        np.testing.assert_array_equal(first, second)

    def test_wrong_input_size_rejected(self, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        with pytest.raises(ShapeError):
            backbone_forward(Tensor(np.zeros((3, 32, 32))), params, tiny_backbone)

    def test_gradients_reach_every_parameter(self, rng, tiny_backbone):
        params = init_parameters(tiny_backbone, seed=0)
        out = backbone_forward(Tensor(rng.random((3, 24, 24))), params, tiny_backbone)
        (out * Tensor(rng.normal(size=out.shape))).sum().backward()
        for name, tensor in params.items():
            assert tensor.grad is not None and np.any(tensor.grad != 0.0), name


@pytest.mark.unit
class TestInitParameters:
    def test_same_seed_same_parameters(self, tiny_backbone):
        first, second = init_parameters(tiny_backbone, 5), init_parameters(tiny_backbone, 5)
        for name in first:
            np.testing.assert_array_equal(first[name].data, second[name].data)

    def test_biases_are_zero(self):
        params = init_parameters(BackboneConfig(), seed=1)
        for name, tensor in params.items():
            if name.endswith(".bias"):
                assert not tensor.data.any(), name

    def test_kernel_variance_is_fan_in_scaled(self):
        kernel = init_parameters(BackboneConfig(), seed=2)["block2.conv2.weight"].data
        assert kernel.shape == (64, 64, 3, 3)
        assert kernel.var() == pytest.approx(2.0 / (64 * 9), rel=0.1)


@pytest.mark.unit
class TestBuildingBlocks:
    def test_zeroed_block_with_identity_skip_is_identity(self, rng):
        channels = 4
        zero_conv = lambda: Tensor(np.zeros((channels, channels, 3, 3)))  # noqa: E731
        params = {
            "blk.conv1.weight": zero_conv(),
            "blk.conv1.bias": Tensor(np.zeros(channels)),
            "blk.conv2.weight": zero_conv(),
            "blk.conv2.bias": Tensor(np.zeros(channels)),
        }
        x = Tensor(rng.normal(size=(channels, 5, 5)))
        np.testing.assert_array_equal(residual_block(x, params, "blk", stride=1).data, x.data)

    def test_dropout_statistics(self, rng):
        """Survivors scale to 1.25 and about 20% of entries are dropped."""
        out = dropout(Tensor(np.ones((100, 100))), 0.2, rng).data
        np.testing.assert_allclose(out[out != 0.0], 1.25)
        assert abs((out == 0.0).mean() - 0.2) < 0.02

    def test_zero_rate_is_identity(self, rng):
        x = Tensor(np.ones(4))
        assert dropout(x, 0.0, rng) is x
