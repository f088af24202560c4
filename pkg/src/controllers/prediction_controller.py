from fastapi import APIRouter, Depends, HTTPException, status

from src.core.classifier import get_classifier
from src.exceptions import IRBError
from src.schemas.prediction import ModelInfo, PredictionRequest, PredictionResponse
from src.services.prediction.prediction_service import PredictionService

router = APIRouter(prefix="/api/v1")


def require_classifier(
    classifier: PredictionService | None = Depends(get_classifier),
) -> PredictionService:
    if classifier is None:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="No model loaded; set CHECKPOINT_PATH",
        )
    return classifier


@router.get("/model", response_model=ModelInfo)
def model_info(classifier: PredictionService = Depends(require_classifier)):
    return classifier.info()


@router.post("/predict", response_model=PredictionResponse)
def predict(
    request: PredictionRequest,
    classifier: PredictionService = Depends(require_classifier),
):
    """Classify one base64-encoded PNG or JPEG scene."""
    try:
        return classifier.predict(request)
    except IRBError as exc:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc)
        ) from exc
