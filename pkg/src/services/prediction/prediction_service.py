import base64
import binascii
import logging
from pathlib import Path

from PIL import UnidentifiedImageError

from src.exceptions.data import DatasetError
from src.models.network import IRBNetwork
from src.repositories.checkpoints.checkpoint_repository import CheckpointRepository
from src.repositories.scenes.imaging import decode_image
from src.schemas.prediction import ModelInfo, PredictionRequest, PredictionResponse

logger = logging.getLogger(__name__)


class PredictionService:
    """Single-image inference with a trained network."""

    def __init__(self, network: IRBNetwork):
        self.network = network

    @classmethod
    def from_checkpoint(cls, path: Path) -> "PredictionService":
        return cls(CheckpointRepository(path).load())

    def info(self) -> ModelInfo:
        return ModelInfo(
            variant=self.network.variant,
            class_names=self.network.class_names,
            input_size=self.network.backbone_config.input_size,
            parameter_count=self.network.parameter_count,
        )

    def decode(self, image_base64: str) -> bytes:
        try:
            return base64.b64decode(image_base64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise DatasetError("image_base64 is not valid base64") from exc

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        """
        Raises:
            DatasetError: If the payload is not base64 or not a decodable image.
        """
        payload = self.decode(request.image_base64)
        try:
            image = decode_image(payload, self.network.backbone_config.input_size)
        except (UnidentifiedImageError, OSError) as exc:
            raise DatasetError(f"cannot decode image: {exc}") from exc

        result = self.network.forward(image)
        probabilities = result.probabilities.data
        predicted = int(probabilities.argmax())
        channel_sums = None
        if request.include_channel_sums:
            channel_sums = {
                str(role): element.tensor.data.sum(axis=(-2, -1)).tolist()
                for role, element in result.elements.items()
            }
            channel_sums["final"] = result.final.tensor.data.sum(axis=(-2, -1)).tolist()

        return PredictionResponse(
            predicted=predicted,
            class_name=self.network.class_names[predicted],
            probabilities=dict(zip(self.network.class_names, probabilities.tolist())),
            channel_sums=channel_sums,
        )
