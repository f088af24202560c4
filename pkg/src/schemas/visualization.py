from pydantic import BaseModel

from src.schemas.model import InstanceRole


class HeatmapRecord(BaseModel):
    role: InstanceRole
    file: str
    raw_min: float
    raw_max: float


class HeatmapSidecar(BaseModel):
    sample_id: str
    label: int
    predicted: int
    class_name: str
    image_size: int
    maps: list[HeatmapRecord]
