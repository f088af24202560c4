"""Training configuration, loss breakdowns and run/protocol reports."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.model import AblationVariant, AlignmentMode


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    batch_size: int = Field(default=32, ge=1)
    lr_init: float = 5e-5
    lr_decay_factor: float = Field(default=10.0, gt=0.0)
    lr_decay_every: int = Field(default=20, ge=1)
    lr_floor: float = 5e-7
    weight_decay: float = Field(default=5e-4, ge=0.0)
    alpha: float = Field(default=5e-4, ge=0.0)
    alignment_mode: AlignmentMode = AlignmentMode.ENTROPY
    epochs: int = Field(default=30, ge=1)
    seed: int = 0
    variant: AblationVariant = AblationVariant.RES_IRB_SF_SSA
    train_ratio: float = Field(default=0.8, gt=0.0, lt=1.0)
    runs: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _lr_order(self) -> "TrainConfig":
        if not self.lr_init > self.lr_floor > 0:
            raise ValueError("need lr_init > lr_floor > 0")
        return self


class LossBreakdown(BaseModel):
    """total == l_cls + alpha * l_sealig, as computed by the loss graph."""

    model_config = ConfigDict(frozen=True)

    l_cls: float = Field(ge=0.0)
    l_sealig: float = Field(ge=0.0)
    alpha: float = 5e-4
    total: float


class EpochRecord(BaseModel):
    kind: Literal["epoch"] = "epoch"
    variant: AblationVariant
    run: int
    epoch: int
    lr: float
    loss: LossBreakdown


class EvaluationResult(BaseModel):
    accuracy: float = Field(ge=0.0, le=1.0)
    confusion: list[list[int]]
    predictions: list[int]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.confusion)


class RunReport(BaseModel):
    kind: Literal["run"] = "run"
    variant: AblationVariant
    run: int
    split_seed: int
    init_seed: int
    epochs: list[EpochRecord] = Field(default_factory=list, exclude=True)
    accuracy: float
    confusion: list[list[int]]
    seconds: float = Field(default=0.0, exclude=True)


class ProtocolSummary(BaseModel):
    kind: Literal["summary"] = "summary"
    variant: AblationVariant
    accuracies: list[float]
    mean: float
    std: float
    formatted: str


class AblationRow(BaseModel):
    variant: AblationVariant
    label: str
    summary: ProtocolSummary


class AblationTable(BaseModel):
    train_ratio: float
    runs: int
    rows: list[AblationRow]

    def render(self) -> str:
        header = f"{'Method':<18} {self.train_ratio:.0%} (mean±std, population)"
        lines = [header, "-" * len(header)]
        lines += [f"{row.label:<18} {row.summary.formatted}" for row in self.rows]
        return "\n".join(lines)
