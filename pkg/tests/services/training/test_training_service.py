"""Tests for mini-batch training of one variant."""
import json

import numpy as np
import pytest

from src.core.config import Settings
from src.exceptions.training import DivergenceError
from src.lib.autodiff import Tensor
from src.schemas.model import AblationVariant
from src.services.datasets.dataset_service import DatasetService
from src.services.splits.split_service import stratified_split
from src.services.training.training_service import (
    DIVERGENCE_FILE,
    TrainingService,
    schedule_for,
)


@pytest.fixture
def split(tiny_dataset):
    return stratified_split(tiny_dataset.samples, 0.5, seed=0)


@pytest.mark.unit
class TestTrainingService:
    """Runs are determined by configuration and seeds."""

    def test_bit_identical_reruns(self, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        service = TrainingService(tiny_train_config, tiny_backbone, descriptor_config)

        first, first_report = service.train(split, class_names, init_seed=7)
        second, second_report = service.train(split, class_names, init_seed=7)

        for name, tensor in first.params.items():
            np.testing.assert_array_equal(tensor.data, second.params[name].data)
        assert first_report.model_dump() == second_report.model_dump()
        assert [e.loss for e in first_report.epochs] == [e.loss for e in second_report.epochs]

    def test_init_seed_changes_result(self, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        service = TrainingService(tiny_train_config, tiny_backbone, descriptor_config)
        first, _ = service.train(split, class_names, init_seed=1)
        second, _ = service.train(split, class_names, init_seed=2)
        assert not np.array_equal(first.params["stem.weight"].data, second.params["stem.weight"].data)

    def test_report_contents(self, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        service = TrainingService(tiny_train_config, tiny_backbone, descriptor_config)

        _, report = service.train(split, class_names, run=3)

        assert report.run == 3
        assert report.init_seed == tiny_train_config.seed + 1000
        assert report.split_seed == split.seed
        assert [e.epoch for e in report.epochs] == list(range(tiny_train_config.epochs))
        assert [e.lr for e in report.epochs] == [1e-3, 1e-4]
        assert sum(map(sum, report.confusion)) == len(split.test)
        for record in report.epochs:
            assert record.loss.alpha == tiny_train_config.alpha
            assert record.loss.total == pytest.approx(
                record.loss.l_cls + record.loss.alpha * record.loss.l_sealig
            )

    def test_alignment_weight_only_for_full_model(self, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        config = tiny_train_config.model_copy(update={"variant": AblationVariant.RES_IRB_SF, "epochs": 1})

        _, report = TrainingService(config, tiny_backbone, descriptor_config).train(split, class_names)

        loss = report.epochs[0].loss
        assert loss.alpha == 0.0
        assert loss.l_sealig > 0.0
        assert loss.total == loss.l_cls

    def test_loss_decreases(self, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        config = tiny_train_config.model_copy(
            update={"lr_init": 1e-2, "lr_decay_every": 100, "epochs": 10, "batch_size": 3}
        )

        _, report = TrainingService(config, tiny_backbone, descriptor_config).train(split, class_names)

        assert report.epochs[-1].loss.l_cls < report.epochs[0].loss.l_cls

    def test_divergence_dumps_diagnostics(self, mocker, tmp_path, split, class_names, tiny_train_config, tiny_backbone, descriptor_config):
        mocker.patch(
            "src.services.training.training_service.loss_terms",
            return_value=(Tensor(np.array(np.nan)), None),
        )
        service = TrainingService(tiny_train_config, tiny_backbone, descriptor_config, out_dir=tmp_path)

        with pytest.raises(DivergenceError) as info:
            service.train(split, class_names)

        assert (info.value.epoch, info.value.batch_index) == (0, 0)
        assert len(info.value.sample_ids) == tiny_train_config.batch_size
        dump = json.loads((tmp_path / DIVERGENCE_FILE).read_text())
        assert dump["sample_ids"] == info.value.sample_ids
        assert dump["loss"] == ["nan"]

    def test_schedule_follows_config(self, tiny_train_config):
        schedule = schedule_for(tiny_train_config)
        assert [schedule.lr(e) for e in range(4)] == [1e-3, 1e-4, 1e-5, 1e-5]


@pytest.mark.integration
class TestDefaultConfiguration:
    """Default network, learning rate and data generator, on a reduced sample count."""

    def test_full_model_learns(self):
        settings = Settings(_env_file=None, SAMPLES_PER_CLASS=40, EPOCHS=6)
        dataset = DatasetService(settings).load()
        split = stratified_split(dataset.samples, settings.TRAIN_RATIO, seed=settings.SEED)
        service = TrainingService(
            settings.train_config(), settings.backbone_config(), settings.descriptor_config()
        )

        _, report = service.train(split, dataset.class_names)

        first, last = report.epochs[0].loss, report.epochs[-1].loss
        assert report.epochs[0].lr == 5e-5
        assert first.l_cls < 5.0
        assert last.l_cls < first.l_cls
        assert last.l_sealig > 0.0
