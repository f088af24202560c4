import logging
from functools import lru_cache

from src.core.config import settings
from src.exceptions.training import CheckpointError
from src.services.prediction.prediction_service import PredictionService

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1)
def _load_classifier() -> PredictionService | None:
    if settings.CHECKPOINT_PATH is None:
        logger.warning("CHECKPOINT_PATH is not set; prediction endpoints are unavailable")
        return None
    try:
        service = PredictionService.from_checkpoint(settings.CHECKPOINT_PATH)
    except CheckpointError as exc:
        logger.error("Cannot load model: %s", exc)
        return None
    logger.info("Loaded %s model from %s", service.network.variant, settings.CHECKPOINT_PATH)
    return service


def get_classifier() -> PredictionService | None:
    """Dependency yielding the checkpoint-backed classifier, or None when none is configured."""
    return _load_classifier()
