"""
Scaled ablation on the default synthetic dataset.

The full-size run is marked slow (run with `pytest -m slow`); the determinism
check runs on a tiny configuration.
"""
import numpy as np
import pytest

from src.core.config import Settings
from src.repositories.metrics.metrics_repository import MetricsRepository
from src.schemas.model import AblationVariant
from src.services.ablation.ablation_service import AblationService
from src.services.datasets.dataset_service import DatasetService


def ablate(settings: Settings, out_dir):
    metrics = MetricsRepository(out_dir)
    metrics.reset()
    service = AblationService(
        settings.backbone_config(), settings.descriptor_config(), metrics, settings.WORKERS
    )
    return service.ablate(DatasetService(settings).load(), settings.train_config()), metrics


@pytest.mark.integration
class TestAblationDeterminism:
    def test_repeated_ablations_write_identical_metrics(self, tmp_path):
        settings = Settings(
            _env_file=None,
            NUM_CLASSES=2, IMAGE_SIZE=24, SAMPLES_PER_CLASS=4, STEM_CHANNELS=4,
            BLOCK_CHANNELS=[6, 8], EPOCHS=1, BATCH_SIZE=4, LR_INIT=1e-3, LR_FLOOR=1e-5,
            TRAIN_RATIO=0.5, RUNS=2,
        )

        _, first = ablate(settings, tmp_path / "first")
        _, second = ablate(settings, tmp_path / "second")

        assert first.path.read_bytes() == second.path.read_bytes()
        summaries = [row for row in first.read() if row["kind"] == "summary"]
        assert [row["variant"] for row in summaries] == [v.value for v in AblationVariant]


@pytest.mark.slow
@pytest.mark.integration
class TestAblationTrend:
    def test_components_contribute(self, tmp_path):
        """Default data, five paired runs of thirty epochs per variant."""
        settings = Settings(_env_file=None, NUM_CLASSES=4, IMAGE_SIZE=64, SAMPLES_PER_CLASS=250, RUNS=5, WORKERS=4)

        table, _ = ablate(settings, tmp_path)
        rows = {row.variant: row.summary for row in table.rows}

        full = rows[AblationVariant.RES_IRB_SF_SSA]
        assert full.mean >= 0.95
        assert full.mean - rows[AblationVariant.RES].mean >= 0.02
        singles = [AblationVariant.RES_ATTENTION, AblationVariant.RES_LMS, AblationVariant.RES_CACPR]
        pooled_std = float(np.sqrt(np.mean([rows[v].std ** 2 for v in singles])))
        for variant in singles:
            assert rows[AblationVariant.RES_IRB_SF].mean >= rows[variant].mean - pooled_std
