"""Tests for checkpoint save/load."""
import numpy as np
import pytest

from src.exceptions.training import CheckpointError
from src.models.network import IRBNetwork
from src.repositories.checkpoints.checkpoint_repository import MAGIC, CheckpointRepository
from src.schemas.model import AblationVariant


@pytest.mark.unit
class TestCheckpointRepository:
    """Saved networks reload with identical parameters and predictions."""

    @pytest.mark.parametrize("variant", [AblationVariant.RES, AblationVariant.RES_IRB_SF_SSA])
    def test_round_trip(self, tmp_path, variant, class_names, tiny_backbone, descriptor_config, rng):
        network = IRBNetwork(variant, class_names, tiny_backbone, descriptor_config, seed=3)
        repository = CheckpointRepository(tmp_path / "checkpoint.irb")
        repository.save(network)

        restored = repository.load()

        assert restored.variant == variant
        assert restored.class_names == class_names
        assert list(restored.params) == list(network.params)
        for name, tensor in network.params.items():
            np.testing.assert_array_equal(restored.params[name].data, tensor.data)
            assert restored.params[name].requires_grad
        images = rng.random((2, 3, 24, 24))
        np.testing.assert_array_equal(restored.predict_proba(images), network.predict_proba(images))

    def test_header_is_readable(self, tmp_path, tiny_network):
        repository = CheckpointRepository(tmp_path / "checkpoint.irb")
        repository.save(tiny_network)

        header, payload = repository.read_header()

        assert repository.path.read_bytes().startswith(MAGIC + b"\n")
        assert header.variant == tiny_network.variant
        assert len(payload) == tiny_network.parameter_count * 8

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            CheckpointRepository(tmp_path / "absent.irb").load()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "checkpoint.irb"
        path.write_bytes(b"NOT-A-CHECKPOINT\n{}\n")
        with pytest.raises(CheckpointError, match="not an IRB checkpoint"):
            CheckpointRepository(path).load()

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "checkpoint.irb"
        path.write_bytes(MAGIC + b"\n{\"variant\": \"res\"}\n")
        with pytest.raises(CheckpointError, match="malformed"):
            CheckpointRepository(path).load()

    def test_truncated_payload(self, tmp_path, tiny_network):
        repository = CheckpointRepository(tmp_path / "checkpoint.irb")
        repository.save(tiny_network)
        raw = repository.path.read_bytes()
        repository.path.write_bytes(raw[:-8])

        with pytest.raises(CheckpointError, match="bytes"):
            repository.load()

    def test_parameters_must_fit_variant(self, tmp_path, class_names, tiny_backbone, descriptor_config):
        network = IRBNetwork(AblationVariant.RES, class_names, tiny_backbone, descriptor_config)
        repository = CheckpointRepository(tmp_path / "checkpoint.irb")
        repository.save(network)
        header, payload = repository.read_header()
        forged = header.model_copy(update={"variant": AblationVariant.RES_ATTENTION})
        repository.path.write_bytes(MAGIC + b"\n" + forged.model_dump_json().encode() + b"\n" + payload)

        with pytest.raises(CheckpointError, match="do not match"):
            repository.load()
