"""
Mini-batch training of one ablation variant.

Adam with L2 weight decay, a step-decayed learning rate, per-epoch shuffling and
dropout masks drawn from a generator seeded by (init seed, epoch), so a run is
fully determined by its configuration and seeds.
"""
import logging
import math
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from src.exceptions.training import DivergenceError
from src.lib.autodiff import Adam, StepDecaySchedule
from src.models.fusion import total_loss
from src.models.network import IRBNetwork, effective_alpha, loss_terms
from src.repositories.metrics.metrics_repository import MetricsRepository
from src.schemas.data import DatasetSplit
from src.schemas.model import BackboneConfig, DescriptorConfig, Mode
from src.schemas.training import EpochRecord, LossBreakdown, RunReport, TrainConfig
from src.services.evaluation.evaluation_service import evaluate

logger = logging.getLogger(__name__)

DIVERGENCE_FILE = "divergence.json"


def schedule_for(config: TrainConfig) -> StepDecaySchedule:
    return StepDecaySchedule(
        lr_init=config.lr_init,
        factor=config.lr_decay_factor,
        every=config.lr_decay_every,
        floor=config.lr_floor,
    )


class TrainingService:
    def __init__(
        self,
        config: TrainConfig,
        backbone_config: BackboneConfig,
        descriptor_config: DescriptorConfig,
        out_dir: Path | None = None,
    ):
        self.config = config
        self.backbone_config = backbone_config
        self.descriptor_config = descriptor_config
        self.out_dir = out_dir
        self.schedule = schedule_for(config)

    def train(
        self,
        split: DatasetSplit,
        class_names: Sequence[str],
        init_seed: int | None = None,
        run: int = 0,
    ) -> tuple[IRBNetwork, RunReport]:
        """
        Train on `split.train`, then evaluate on `split.test`.

        Raises:
            DivergenceError: On the first batch whose loss is not finite.
            EvaluationError: If the test split is empty.
        """
        config = self.config
        seed = config.seed + 1000 if init_seed is None else init_seed
        network = IRBNetwork(
            config.variant, class_names, self.backbone_config, self.descriptor_config, seed=seed
        )
        optimizer = Adam(network.params, weight_decay=config.weight_decay)
        alpha = effective_alpha(network.variant, config.alpha)

        images = np.stack([s.image for s in split.train])
        labels = np.array([s.label for s in split.train])
        ids = [s.id for s in split.train]

        started = time.perf_counter()
        history: list[EpochRecord] = []
        for epoch in range(config.epochs):
            lr = self.schedule.lr(epoch)
            rng = np.random.default_rng([seed, epoch])
            order = rng.permutation(len(labels))
            sums = np.zeros(2)
            for batch_index, start in enumerate(range(0, len(order), config.batch_size)):
                index = order[start : start + config.batch_size]
                result = network.forward(images[index], Mode.TRAIN, rng)
                l_cls, l_sealig = loss_terms(result, labels[index], config.alignment_mode)

                values = [l_cls.item()] + ([l_sealig.item()] if l_sealig is not None else [])
                if not all(math.isfinite(v) for v in values):
                    self._dump_divergence(epoch, batch_index, [ids[i] for i in index], lr, values)
                    raise DivergenceError(epoch, batch_index, [ids[i] for i in index])

                loss, breakdown = total_loss(l_cls, l_sealig, alpha)
                network.zero_grad()
                loss.backward()
                optimizer.step(lr)
                sums += len(index) * np.array([breakdown.l_cls, breakdown.l_sealig])

            l_cls_mean, l_sealig_mean = (sums / len(order)).tolist()
            record = EpochRecord(
                variant=network.variant,
                run=run,
                epoch=epoch,
                lr=lr,
                loss=LossBreakdown(
                    l_cls=l_cls_mean,
                    l_sealig=l_sealig_mean,
                    alpha=alpha,
                    total=l_cls_mean + alpha * l_sealig_mean,
                ),
            )
            history.append(record)
            logger.info(
                "%s run %d epoch %d lr %.1e l_cls %.6f l_sealig %.6f total %.6f",
                network.variant, run, epoch, lr,
                record.loss.l_cls, record.loss.l_sealig, record.loss.total,
            )

        evaluation = evaluate(network, split.test)
        report = RunReport(
            variant=network.variant,
            run=run,
            split_seed=split.seed,
            init_seed=seed,
            epochs=history,
            accuracy=evaluation.accuracy,
            confusion=evaluation.confusion,
            seconds=time.perf_counter() - started,
        )
        return network, report

    def _dump_divergence(
        self,
        epoch: int,
        batch_index: int,
        sample_ids: list[str],
        lr: float,
        values: list[float],
    ) -> None:
        location = "(no output directory)"
        if self.out_dir is not None:
            payload = {
                "variant": str(self.config.variant),
                "epoch": epoch,
                "batch_index": batch_index,
                "sample_ids": sample_ids,
                "lr": lr,
                "loss": [repr(v) for v in values],
            }
            location = str(MetricsRepository(self.out_dir).write_json(DIVERGENCE_FILE, payload))
        logger.error(
            "Non-finite loss at epoch %d batch %d; diagnostics in %s", epoch, batch_index, location
        )
