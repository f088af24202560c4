from pydantic import BaseModel

from src.schemas.model import AblationVariant, BackboneConfig, DescriptorConfig


class ParameterEntry(BaseModel):
    name: str
    shape: list[int]

    @property
    def size(self) -> int:
        size = 1
        for dim in self.shape:
            size *= dim
        return size


class CheckpointHeader(BaseModel):
    """Human-readable second line of a checkpoint file."""

    format_version: int = 1
    variant: AblationVariant
    class_names: list[str]
    backbone: BackboneConfig
    descriptors: DescriptorConfig
    parameters: list[ParameterEntry]
