"""Tests for resolving DATA to a dataset."""
import pytest

from src.core.config import Settings
from src.exceptions.data import DatasetError
from src.repositories.scenes.manifest_repository import ManifestRepository
from src.services.datasets.dataset_service import DatasetService


def small_settings(**overrides) -> Settings:
    values = dict(NUM_CLASSES=2, IMAGE_SIZE=16, SAMPLES_PER_CLASS=3, SEED=4)
    values.update(overrides)
    return Settings(_env_file=None, **values)


@pytest.mark.unit
class TestDatasetService:
    def test_synthetic_source(self):
        dataset = DatasetService(small_settings()).load()

        assert dataset.class_names == ["striped", "grid"]
        assert len(dataset.samples) == 6
        assert dataset.samples[0].image.shape == (3, 16, 16)

    def test_synthetic_source_follows_seed(self):
        first = DatasetService(small_settings()).load()
        second = DatasetService(small_settings(SEED=5)).load()
        assert not (first.samples[0].image == second.samples[0].image).all()

    def test_export_then_load_folder(self, tmp_path):
        dataset, manifest = DatasetService(small_settings()).export(tmp_path)

        records = ManifestRepository(manifest).read()
        reloaded = DatasetService(small_settings(DATA=str(tmp_path / "images"))).load()

        assert manifest == tmp_path / "manifest.jsonl"
        assert [r.id for r in records] == [s.id for s in dataset.samples]
        assert [r.source for r in records] == [s.source for s in dataset.samples]
        assert all((tmp_path / "images" / r.source).is_file() for r in records)
        assert all(r.class_name == dataset.class_names[r.label] for r in records)
        assert sorted(reloaded.class_names) == reloaded.class_names == ["grid", "striped"]
        assert len(reloaded.samples) == len(dataset.samples)

    def test_missing_folder(self, tmp_path):
        with pytest.raises(DatasetError):
            DatasetService(small_settings(DATA=str(tmp_path / "missing"))).load()
