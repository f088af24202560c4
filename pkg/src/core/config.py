from pathlib import Path
from typing import List

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.schemas.data import SyntheticSpec
from src.schemas.model import (
    AblationVariant,
    AlignmentMode,
    AttentionActivation,
    BackboneConfig,
    DescriptorConfig,
)
from src.schemas.training import TrainConfig

SYNTHETIC = "synthetic"


class Settings(BaseSettings):
    """
    Key-value configuration.

    Read from a dotenv-style file (`KEY=VALUE` per line, see `.env.example`),
    then environment variables, then keyword overrides (CLI flags), each layer
    overriding the previous one.
    """

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    # Project
    PROJECT_NAME: str = "IRB SCENE"
    VERSION: str = "1.0.0"

    # Logging
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Run
    SEED: int = 0
    VARIANT: AblationVariant = AblationVariant.RES_IRB_SF_SSA
    RUNS: int = 1
    WORKERS: int = 1
    OUT: Path = Path("runs")

    # Data: "synthetic" or a class-per-subdirectory image folder
    DATA: str = SYNTHETIC
    NUM_CLASSES: int = 4
    IMAGE_SIZE: int = 64
    SAMPLES_PER_CLASS: int = 250
    NOISE_STD: float = 0.05
    TRAIN_RATIO: float = 0.8

    # Optimization
    EPOCHS: int = 30
    BATCH_SIZE: int = 32
    LR_INIT: float = 5e-5
    LR_DECAY_FACTOR: float = 10.0
    LR_DECAY_EVERY: int = 20
    LR_FLOOR: float = 5e-7
    WEIGHT_DECAY: float = 5e-4
    DROPOUT: float = 0.2

    # Losses
    ALPHA: float = 5e-4
    ALIGNMENT_MODE: AlignmentMode = AlignmentMode.ENTROPY

    # Network
    STEM_CHANNELS: int = 16
    BLOCK_CHANNELS: List[int] = [32, 64]
    ATTENTION_ACTIVATION: AttentionActivation = AttentionActivation.SIGMOID
    LMS_WINDOW: int = 3
    CACPR_PEAK_WINDOW: int = 3
    CACPR_CONTEXT_WINDOW: int = 5

    # Inference API
    CHECKPOINT_PATH: Path | None = None

    @model_validator(mode="after")
    def _consistent(self) -> "Settings":
        # Building the projections runs their validators once, up front.
        self.backbone_config()
        self.descriptor_config()
        self.train_config()
        if self.uses_synthetic_data:
            self.synthetic_spec()
        if self.RUNS < 1 or self.WORKERS < 1:
            raise ValueError("RUNS and WORKERS must be >= 1")
        return self

    @property
    def uses_synthetic_data(self) -> bool:
        return self.DATA == SYNTHETIC

    @property
    def log_level(self) -> str:
        return "DEBUG" if self.DEBUG else self.LOG_LEVEL.upper()

    def backbone_config(self) -> BackboneConfig:
        return BackboneConfig(
            input_size=self.IMAGE_SIZE,
            stem_channels=self.STEM_CHANNELS,
            block_channels=tuple(self.BLOCK_CHANNELS),
            dropout_rate=self.DROPOUT,
        )

    def descriptor_config(self) -> DescriptorConfig:
        return DescriptorConfig(
            lms_window=self.LMS_WINDOW,
            cacpr_peak_window=self.CACPR_PEAK_WINDOW,
            cacpr_context_window=self.CACPR_CONTEXT_WINDOW,
            attention_activation=self.ATTENTION_ACTIVATION,
        )

    def synthetic_spec(self) -> SyntheticSpec:
        return SyntheticSpec(
            num_classes=self.NUM_CLASSES,
            image_size=self.IMAGE_SIZE,
            samples_per_class=self.SAMPLES_PER_CLASS,
            noise_std=self.NOISE_STD,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.BATCH_SIZE,
            lr_init=self.LR_INIT,
            lr_decay_factor=self.LR_DECAY_FACTOR,
            lr_decay_every=self.LR_DECAY_EVERY,
            lr_floor=self.LR_FLOOR,
            weight_decay=self.WEIGHT_DECAY,
            alpha=self.ALPHA,
            alignment_mode=self.ALIGNMENT_MODE,
            epochs=self.EPOCHS,
            seed=self.SEED,
            variant=self.VARIANT,
            train_ratio=self.TRAIN_RATIO,
            runs=self.RUNS,
        )


def load_settings(config_file: Path | None = None, **overrides: object) -> Settings:
    """Settings from `config_file` (or `.env`) with non-None keyword overrides."""
    values = {key: value for key, value in overrides.items() if value is not None}
    if config_file is not None:
        return Settings(_env_file=config_file, **values)
    return Settings(**values)


settings = Settings()
