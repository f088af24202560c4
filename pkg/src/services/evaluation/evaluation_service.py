import logging
from collections.abc import Sequence

import numpy as np

from src.exceptions.training import EvaluationError
from src.models.network import IRBNetwork
from src.schemas.data import SceneSample
from src.schemas.training import EvaluationResult

logger = logging.getLogger(__name__)


def confusion_matrix(labels: np.ndarray, predictions: np.ndarray, num_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (labels, predictions), 1)
    return matrix


def evaluate(
    network: IRBNetwork, samples: Sequence[SceneSample], batch_size: int = 64
) -> EvaluationResult:
    """
    Argmax of the bag distribution per sample, in eval mode.

    Raises:
        EvaluationError: If `samples` is empty.
    """
    if not samples:
        raise EvaluationError("cannot evaluate on an empty test set")

    predictions: list[np.ndarray] = []
    for start in range(0, len(samples), batch_size):
        batch = samples[start : start + batch_size]
        probabilities = network.predict_proba(np.stack([s.image for s in batch]))
        predictions.append(probabilities.argmax(axis=-1))

    predicted = np.concatenate(predictions)
    labels = np.array([s.label for s in samples])
    matrix = confusion_matrix(labels, predicted, network.num_classes)
    accuracy = float(np.trace(matrix)) / len(samples)
    logger.info("%s accuracy %.4f on %d samples", network.variant, accuracy, len(samples))
    return EvaluationResult(
        accuracy=accuracy,
        confusion=matrix.tolist(),
        predictions=predicted.tolist(),
    )
