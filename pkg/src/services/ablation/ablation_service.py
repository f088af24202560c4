"""
The seven-row component ablation.

Every variant runs the same R paired runs (identical split seeds per run index).
With more than one worker, (variant, run) jobs are spread over a process pool
and reassembled in the fixed row order, so the emitted metrics do not depend on
scheduling.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from src.repositories.metrics.metrics_repository import MetricsRepository
from src.schemas.data import SceneDataset
from src.schemas.model import AblationVariant, BackboneConfig, DescriptorConfig
from src.schemas.training import AblationRow, AblationTable, RunReport, TrainConfig
from src.services.protocol.protocol_service import run_once, summarize

logger = logging.getLogger(__name__)

Job = tuple[AblationVariant, int]

_worker_context: dict[str, object] = {}


def _init_worker(
    dataset: SceneDataset,
    config: TrainConfig,
    backbone_config: BackboneConfig,
    descriptor_config: DescriptorConfig,
    out_dir: Path | None,
) -> None:
    _worker_context.update(
        dataset=dataset,
        config=config,
        backbone_config=backbone_config,
        descriptor_config=descriptor_config,
        out_dir=out_dir,
    )


def _run_job(job: Job) -> RunReport:
    variant, run = job
    ctx = _worker_context
    config = ctx["config"].model_copy(update={"variant": variant})  # type: ignore[attr-defined]
    _, report = run_once(
        ctx["dataset"],  # type: ignore[arg-type]
        config,
        ctx["backbone_config"],  # type: ignore[arg-type]
        ctx["descriptor_config"],  # type: ignore[arg-type]
        run,
        ctx["out_dir"],  # type: ignore[arg-type]
    )
    return report


class AblationService:
    def __init__(
        self,
        backbone_config: BackboneConfig,
        descriptor_config: DescriptorConfig,
        metrics: MetricsRepository | None = None,
        workers: int = 1,
    ):
        self.backbone_config = backbone_config
        self.descriptor_config = descriptor_config
        self.metrics = metrics
        self.workers = workers

    def ablate(self, dataset: SceneDataset, config: TrainConfig) -> AblationTable:
        jobs: list[Job] = [(variant, run) for variant in AblationVariant for run in range(config.runs)]
        context = (
            dataset,
            config,
            self.backbone_config,
            self.descriptor_config,
            self.metrics.out_dir if self.metrics is not None else None,
        )

        if self.workers > 1:
            logger.info("Running %d ablation jobs on %d workers", len(jobs), self.workers)
            with ProcessPoolExecutor(
                max_workers=self.workers, initializer=_init_worker, initargs=context
            ) as pool:
                reports = list(pool.map(_run_job, jobs))
        else:
            _init_worker(*context)
            reports = [_run_job(job) for job in jobs]

        by_variant: dict[AblationVariant, list[RunReport]] = {v: [] for v in AblationVariant}
        for (variant, _), report in zip(jobs, reports):
            by_variant[variant].append(report)

        rows: list[AblationRow] = []
        for variant, variant_reports in by_variant.items():
            summary = summarize(variant, [r.accuracy for r in variant_reports])
            if self.metrics is not None:
                for report in variant_reports:
                    self.metrics.append([*report.epochs, report])
                self.metrics.append([summary])
            rows.append(AblationRow(variant=variant, label=variant.label, summary=summary))
            logger.info("%s %s", variant.label, summary.formatted)

        return AblationTable(train_ratio=config.train_ratio, runs=config.runs, rows=rows)
