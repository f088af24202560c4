"""Scene samples, dataset splits and manifest records."""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MOTIFS: tuple[str, ...] = ("striped", "grid", "blob_cluster", "concentric")


class SyntheticSpec(BaseModel):
    """Procedural stand-in for an aerial benchmark; one motif per class."""

    model_config = ConfigDict(frozen=True)

    num_classes: int = Field(default=4, ge=2)
    image_size: int = Field(default=64, gt=0)
    samples_per_class: int = Field(default=250, ge=1)
    noise_std: float = Field(default=0.05, ge=0.0)
    motifs: tuple[str, ...] = MOTIFS

    @model_validator(mode="after")
    def _enough_motifs(self) -> "SyntheticSpec":
        unknown = set(self.motifs) - set(MOTIFS)
        if unknown:
            raise ValueError(f"unknown motifs {sorted(unknown)}")
        if self.num_classes > len(self.motifs):
            raise ValueError(
                f"{self.num_classes} classes requested, {len(self.motifs)} motifs defined"
            )
        return self

    @property
    def class_names(self) -> list[str]:
        return list(self.motifs[: self.num_classes])


class SceneSample(BaseModel):
    """A labeled [3, S, S] image with pixel values in [0, 1]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: str
    image: np.ndarray
    label: int = Field(ge=0)
    source: str = "synthetic"

    @field_validator("image")
    @classmethod
    def _valid_image(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 3 or value.shape[0] != 3 or value.shape[1] != value.shape[2]:
            raise ValueError(f"image must be [3, S, S], got {value.shape}")
        if not np.all((value >= 0.0) & (value <= 1.0)):
            raise ValueError("pixel values must lie in [0, 1]")
        return value


class SceneDataset(BaseModel):
    """Samples together with their ordered class names."""

    model_config = ConfigDict(frozen=True)

    samples: list[SceneSample]
    class_names: list[str]
    skipped: int = 0

    @model_validator(mode="after")
    def _labels_in_range(self) -> "SceneDataset":
        limit = len(self.class_names)
        for sample in self.samples:
            if sample.label >= limit:
                raise ValueError(f"sample {sample.id} label {sample.label} >= {limit}")
        return self

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


class DatasetSplit(BaseModel):
    model_config = ConfigDict(frozen=True)

    train: list[SceneSample]
    test: list[SceneSample]
    train_ratio: float = Field(gt=0.0, lt=1.0)
    seed: int

    @model_validator(mode="after")
    def _disjoint(self) -> "DatasetSplit":
        overlap = {s.id for s in self.train} & {s.id for s in self.test}
        if overlap:
            raise ValueError(f"train and test share ids: {sorted(overlap)[:5]}")
        return self


class ManifestRecord(BaseModel):
    id: str
    source: str
    label: int
    class_name: str

    @classmethod
    def for_sample(cls, sample: SceneSample, class_names: list[str]) -> "ManifestRecord":
        return cls(
            id=sample.id,
            source=sample.source,
            label=sample.label,
            class_name=class_names[sample.label],
        )
