"""Schemas describing the network: variants, roles and structural configuration."""
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str.__str__(self)

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):  # noqa: ANN001
            return name.lower()

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class AblationVariant(StrEnum):
    """Rows of the component ablation, in reporting order."""

    RES = "res"
    RES_ATTENTION = "res_attention"
    RES_LMS = "res_lms"
    RES_CACPR = "res_cacpr"
    RES_IRB = "res_irb"
    RES_IRB_SF = "res_irb_sf"
    RES_IRB_SF_SSA = "res_irb_sf_ssa"

    @property
    def label(self) -> str:
        return VARIANT_LABELS[self]


VARIANT_LABELS: dict[AblationVariant, str] = {
    AblationVariant.RES: "Res",
    AblationVariant.RES_ATTENTION: "Res+attention",
    AblationVariant.RES_LMS: "Res+LMS",
    AblationVariant.RES_CACPR: "Res+CACPR",
    AblationVariant.RES_IRB: "Res+IRB",
    AblationVariant.RES_IRB_SF: "Res+IRB+SF",
    AblationVariant.RES_IRB_SF_SSA: "Res+IRB+SF+SSA",
}


class InstanceRole(StrEnum):
    BASE = "base"
    ATTENTION = "attention"
    LOCAL_MAX = "local_max"
    CACPR = "cacpr"
    FINAL = "final"
    DIFFERENCE = "difference"


class AttentionActivation(StrEnum):
    SIGMOID = "sigmoid"
    LINEAR = "linear"


class AlignmentMode(StrEnum):
    ENTROPY = "entropy"
    NORM = "norm"


class Mode(StrEnum):
    TRAIN = "train"
    EVAL = "eval"


class BackboneConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    input_size: int = Field(default=64, gt=0)
    stem_channels: int = Field(default=16, gt=0)
    block_channels: tuple[int, ...] = (32, 64)
    dropout_rate: float = Field(default=0.2, ge=0.0, lt=1.0)

    @field_validator("input_size")
    @classmethod
    def _divisible_by_stride(cls, value: int) -> int:
        if value % 8 != 0:
            raise ValueError("input_size must be divisible by 8")
        return value

    @field_validator("block_channels")
    @classmethod
    def _two_blocks(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if len(value) != 2 or min(value) <= 0:
            raise ValueError("block_channels must hold two positive widths")
        return value

    @property
    def feature_channels(self) -> int:
        return self.block_channels[-1]

    @property
    def feature_size(self) -> int:
        return self.input_size // 8


class DescriptorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lms_window: int = 3
    cacpr_peak_window: int = 3
    cacpr_context_window: int = 5
    attention_activation: AttentionActivation = AttentionActivation.SIGMOID

    @model_validator(mode="after")
    def _odd_windows(self) -> "DescriptorConfig":
        for name in ("lms_window", "cacpr_peak_window", "cacpr_context_window"):
            value = getattr(self, name)
            if value < 3 or value % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3, got {value}")
        return self
