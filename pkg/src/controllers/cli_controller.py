"""
Command-line entry point.

    python -m src train      train R paired runs of one variant, save the last checkpoint
    python -m src eval       evaluate a checkpoint on the run-0 test split
    python -m src ablate     the seven-row ablation table
    python -m src visualize  per-descriptor heatmaps for one test sample
    python -m src gen-data   export the synthetic dataset as a PNG tree + manifest
    python -m src serve      HTTP inference service

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""
import argparse
import logging
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path

from pydantic import ValidationError

from src.core.config import Settings, load_settings
from src.core.logging import configure_logging
from src.exceptions import IRBError
from src.exceptions.training import ConfigurationError
from src.models.network import IRBNetwork, parse_variant
from src.repositories.checkpoints.checkpoint_repository import CheckpointRepository
from src.repositories.metrics.metrics_repository import MetricsRepository
from src.schemas.data import DatasetSplit, SceneDataset
from src.schemas.model import AlignmentMode, AttentionActivation
from src.services.ablation.ablation_service import AblationService
from src.services.datasets.dataset_service import DatasetService
from src.services.evaluation.evaluation_service import evaluate
from src.services.protocol.protocol_service import ProtocolService, protocol_seeds
from src.services.splits.split_service import stratified_split
from src.services.visualization.visualization_service import VisualizationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

CHECKPOINT_FILE = "checkpoint.irb"

# CLI flag -> settings key
OVERRIDES = {
    "seed": "SEED",
    "variant": "VARIANT",
    "data": "DATA",
    "ratio": "TRAIN_RATIO",
    "runs": "RUNS",
    "epochs": "EPOCHS",
    "alpha": "ALPHA",
    "alignment_mode": "ALIGNMENT_MODE",
    "attention_activation": "ATTENTION_ACTIVATION",
    "out": "OUT",
    "workers": "WORKERS",
    "log_level": "LOG_LEVEL",
    "checkpoint": "CHECKPOINT_PATH",
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="KEY=VALUE settings file")
    common.add_argument("--seed", type=int)
    common.add_argument("--variant", help="ablation variant id, e.g. res_irb_sf_ssa")
    common.add_argument("--data", help="'synthetic' or a class-per-subdirectory image folder")
    common.add_argument("--ratio", type=float, help="training ratio in (0, 1)")
    common.add_argument("--runs", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--alignment-mode", choices=[m.value for m in AlignmentMode])
    common.add_argument(
        "--attention-activation", choices=[a.value for a in AttentionActivation]
    )
    common.add_argument("--out", type=Path)
    common.add_argument("--workers", type=int)
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = ArgumentParser(prog="irb-scene", description=__doc__.split("\n\n")[0].strip())
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("train", parents=[common], help="train and save a checkpoint")
    eval_parser = commands.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    eval_parser.add_argument("--checkpoint", type=Path, required=True)
    commands.add_parser("ablate", parents=[common], help="run the ablation table")
    vis_parser = commands.add_parser("visualize", parents=[common], help="export heatmaps")
    vis_parser.add_argument("--checkpoint", type=Path, required=True)
    vis_parser.add_argument("--index", type=int, default=0, help="index into the test split")
    commands.add_parser("gen-data", parents=[common], help="export the synthetic dataset")
    serve_parser = commands.add_parser("serve", parents=[common], help="HTTP inference service")
    serve_parser.add_argument("--checkpoint", type=Path)
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8000)
    return parser


def resolve_settings(args: argparse.Namespace) -> Settings:
    if args.config is not None and not args.config.is_file():
        raise ConfigurationError(f"config file {args.config} does not exist")
    if getattr(args, "variant", None) is not None:
        parse_variant(args.variant)
    overrides = {key: getattr(args, flag, None) for flag, key in OVERRIDES.items()}
    return load_settings(args.config, **overrides)


def _run_zero_split(dataset: SceneDataset, settings: Settings) -> DatasetSplit:
    split_seed, _ = protocol_seeds(settings.SEED, 0)
    return stratified_split(dataset.samples, settings.TRAIN_RATIO, split_seed)


def _load_checkpoint(settings: Settings, dataset: SceneDataset) -> IRBNetwork:
    assert settings.CHECKPOINT_PATH is not None
    network = CheckpointRepository(settings.CHECKPOINT_PATH).load()
    if network.class_names != dataset.class_names:
        raise ConfigurationError(
            f"checkpoint classes {network.class_names} differ from dataset {dataset.class_names}"
        )
    return network


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    dataset = DatasetService(settings).load()
    metrics = MetricsRepository(settings.OUT)
    metrics.reset()
    service = ProtocolService(settings.backbone_config(), settings.descriptor_config(), metrics)
    network, _, summary = service.run_protocol(dataset, settings.train_config())
    checkpoint = CheckpointRepository(settings.OUT / CHECKPOINT_FILE).save(network)
    print(f"{settings.VARIANT.label}: {summary.formatted}")
    print(f"checkpoint: {checkpoint}")
    print(f"wall clock: {time.perf_counter() - started:.1f}s")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    dataset = DatasetService(settings).load()
    network = _load_checkpoint(settings, dataset)
    result = evaluate(network, _run_zero_split(dataset, settings).test)
    print(f"accuracy: {result.accuracy * 100:.2f}% on {result.total} samples")
    for name, row in zip(network.class_names, result.confusion):
        print(f"  {name:<14} {' '.join(f'{count:4d}' for count in row)}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    dataset = DatasetService(settings).load()
    metrics = MetricsRepository(settings.OUT)
    metrics.reset()
    service = AblationService(
        settings.backbone_config(), settings.descriptor_config(), metrics, settings.WORKERS
    )
    table = service.ablate(dataset, settings.train_config())
    print(table.render())
    print(f"wall clock: {time.perf_counter() - started:.1f}s")
    return EXIT_OK


def cmd_visualize(args: argparse.Namespace, settings: Settings) -> int:
    dataset = DatasetService(settings).load()
    network = _load_checkpoint(settings, dataset)
    test = _run_zero_split(dataset, settings).test
    if not 0 <= args.index < len(test):
        raise ConfigurationError(f"--index must lie in [0, {len(test)}), got {args.index}")
    sidecar = VisualizationService(settings.OUT / "heatmaps").visualize(network, test[args.index])
    print(
        f"{sidecar.sample_id}: predicted {sidecar.class_name}, "
        f"{len(sidecar.maps)} heatmaps in {settings.OUT / 'heatmaps'}"
    )
    return EXIT_OK


def cmd_gen_data(args: argparse.Namespace, settings: Settings) -> int:
    if not settings.uses_synthetic_data:
        raise ConfigurationError("gen-data exports the synthetic dataset; use --data synthetic")
    dataset, manifest = DatasetService(settings).export(settings.OUT)
    print(f"{len(dataset.samples)} images, manifest {manifest}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    from src.core import config

    # the app reads the module-level settings object
    config.settings.CHECKPOINT_PATH = settings.CHECKPOINT_PATH
    from src.main import app

    uvicorn.run(app, host=args.host, port=args.port, log_level=settings.log_level.lower())
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "visualize": cmd_visualize,
    "gen-data": cmd_gen_data,
    "serve": cmd_serve,
}


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
    except (ValidationError, ConfigurationError) as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(settings.log_level)
    try:
        return COMMANDS[args.command](args, settings)
    except (ValidationError, ConfigurationError) as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except (IRBError, OSError) as exc:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_RUNTIME
