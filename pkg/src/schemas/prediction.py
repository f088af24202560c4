from pydantic import BaseModel, Field

from src.schemas.model import AblationVariant


class PredictionRequest(BaseModel):
    image_base64: str = Field(min_length=1, description="Base64-encoded PNG or JPEG")
    include_channel_sums: bool = False


class PredictionResponse(BaseModel):
    predicted: int
    class_name: str
    probabilities: dict[str, float]
    channel_sums: dict[str, list[float]] | None = None


class ModelInfo(BaseModel):
    variant: AblationVariant
    class_names: list[str]
    input_size: int
    parameter_count: int
