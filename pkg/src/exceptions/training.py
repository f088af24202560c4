from collections.abc import Sequence

from src.exceptions import IRBError


class ConfigurationError(IRBError, ValueError):
    """Configuration values are inconsistent."""


class UnknownVariantError(ConfigurationError):
    def __init__(self, variant: str):
        super().__init__(f"unknown ablation variant '{variant}'")
        self.variant = variant


class DivergenceError(IRBError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch_index: int, sample_ids: Sequence[str]):
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch_index} "
            f"({len(sample_ids)} samples)"
        )
        self.epoch = epoch
        self.batch_index = batch_index
        self.sample_ids = list(sample_ids)


class EvaluationError(IRBError):
    """Evaluation cannot be performed."""


class CheckpointError(IRBError):
    """A checkpoint file is missing, truncated or inconsistent."""


class VisualizationError(IRBError):
    """Heatmaps cannot be produced or written."""
