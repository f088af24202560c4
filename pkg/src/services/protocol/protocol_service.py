"""Repeated-run protocol: R paired runs, reported as population mean ± std."""
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from src.models.network import IRBNetwork
from src.repositories.metrics.metrics_repository import MetricsRepository
from src.schemas.data import SceneDataset
from src.schemas.model import AblationVariant, BackboneConfig, DescriptorConfig
from src.schemas.training import ProtocolSummary, RunReport, TrainConfig
from src.services.splits.split_service import stratified_split
from src.services.training.training_service import TrainingService

logger = logging.getLogger(__name__)

INIT_SEED_OFFSET = 1000


def protocol_seeds(base_seed: int, run: int) -> tuple[int, int]:
    """(split seed, init seed) of run `run`."""
    return base_seed + run, base_seed + INIT_SEED_OFFSET + run


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean * 100:.2f}±{std * 100:.2f}"


def summarize(variant: AblationVariant, accuracies: Sequence[float]) -> ProtocolSummary:
    values = np.asarray(accuracies, dtype=np.float64)
    mean = float(values.mean())
    std = float(values.std())
    return ProtocolSummary(
        variant=variant,
        accuracies=list(accuracies),
        mean=mean,
        std=std,
        formatted=format_mean_std(mean, std),
    )


def run_once(
    dataset: SceneDataset,
    config: TrainConfig,
    backbone_config: BackboneConfig,
    descriptor_config: DescriptorConfig,
    run: int,
    out_dir: Path | None = None,
) -> tuple[IRBNetwork, RunReport]:
    split_seed, init_seed = protocol_seeds(config.seed, run)
    split = stratified_split(dataset.samples, config.train_ratio, split_seed)
    service = TrainingService(config, backbone_config, descriptor_config, out_dir)
    network, report = service.train(split, dataset.class_names, init_seed, run)
    logger.info(
        "%s run %d accuracy %.4f (%.1fs)", config.variant, run, report.accuracy, report.seconds
    )
    return network, report


class ProtocolService:
    def __init__(
        self,
        backbone_config: BackboneConfig,
        descriptor_config: DescriptorConfig,
        metrics: MetricsRepository | None = None,
    ):
        self.backbone_config = backbone_config
        self.descriptor_config = descriptor_config
        self.metrics = metrics

    def run_protocol(
        self, dataset: SceneDataset, config: TrainConfig
    ) -> tuple[IRBNetwork, list[RunReport], ProtocolSummary]:
        """
        Train and evaluate `config.runs` times with paired seeds.

        Returns the network of the last run, every run report and the summary.
        """
        out_dir = self.metrics.out_dir if self.metrics is not None else None
        network: IRBNetwork | None = None
        reports: list[RunReport] = []
        for run in range(config.runs):
            network, report = run_once(
                dataset, config, self.backbone_config, self.descriptor_config, run, out_dir
            )
            reports.append(report)
            if self.metrics is not None:
                self.metrics.append([*report.epochs, report])

        summary = summarize(config.variant, [r.accuracy for r in reports])
        if self.metrics is not None:
            self.metrics.append([summary])
        assert network is not None
        return network, reports, summary
