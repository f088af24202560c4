from fastapi import APIRouter, Depends

from src.core.classifier import get_classifier
from src.services.prediction.prediction_service import PredictionService

router = APIRouter(prefix="/api/health")


@router.get("")
def health_check(classifier: PredictionService | None = Depends(get_classifier)):
    """Health check endpoint"""
    return {"status": "ok", "model_loaded": classifier is not None}
