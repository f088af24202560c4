"""Tests for accuracy and confusion matrices."""
import numpy as np
import pytest

from src.exceptions.training import EvaluationError
from src.models.network import IRBNetwork
from src.schemas.model import AblationVariant
from src.services.evaluation.evaluation_service import confusion_matrix, evaluate


def oracle_network(mocker, num_classes: int, labels_for):
    """Network stub whose predictions come from `labels_for(images)`."""
    network = mocker.MagicMock(spec=IRBNetwork)
    network.num_classes = num_classes
    network.variant = AblationVariant.RES
    network.predict_proba.side_effect = lambda images: np.eye(num_classes)[labels_for(images)]
    return network


@pytest.mark.unit
class TestConfusionMatrix:
    def test_counts(self):
        matrix = confusion_matrix(np.array([0, 0, 1, 2, 2]), np.array([0, 1, 1, 2, 0]), 3)
        np.testing.assert_array_equal(matrix, [[1, 1, 0], [0, 1, 0], [1, 0, 1]])

    def test_repeated_pairs_accumulate(self):
        matrix = confusion_matrix(np.array([1, 1, 1]), np.array([0, 0, 0]), 2)
        assert matrix[1, 0] == 3


@pytest.mark.unit
class TestEvaluate:
    def test_all_correct(self, mocker, tiny_dataset):
        by_image = {s.image.tobytes(): s.label for s in tiny_dataset.samples}
        network = oracle_network(
            mocker, 3, lambda images: np.array([by_image[i.tobytes()] for i in images])
        )

        result = evaluate(network, tiny_dataset.samples, batch_size=5)

        assert result.accuracy == 1.0
        assert np.trace(np.array(result.confusion)) == len(tiny_dataset.samples)
        assert result.predictions == [s.label for s in tiny_dataset.samples]
        assert network.predict_proba.call_count == 4

    def test_constant_predictor(self, mocker, tiny_dataset):
        network = oracle_network(mocker, 3, lambda images: np.zeros(len(images), dtype=int))

        result = evaluate(network, tiny_dataset.samples)

        assert result.accuracy == pytest.approx(1 / 3)
        assert [row[0] for row in result.confusion] == [6, 6, 6]
        assert result.total == len(tiny_dataset.samples)

    def test_empty_set(self, tiny_network):
        with pytest.raises(EvaluationError):
            evaluate(tiny_network, [])

    def test_untrained_network_near_chance(self, tiny_dataset, class_names, tiny_backbone, descriptor_config):
        accuracies = [
            evaluate(
                IRBNetwork(AblationVariant.RES, class_names, tiny_backbone, descriptor_config, seed=seed),
                tiny_dataset.samples,
            ).accuracy
            for seed in range(20)
        ]
        assert abs(np.mean(accuracies) - 1 / 3) < 0.2

    def test_real_network_result_is_consistent(self, tiny_network, tiny_dataset):
        result = evaluate(tiny_network, tiny_dataset.samples)

        assert result.total == len(tiny_dataset.samples)
        assert len(result.predictions) == len(tiny_dataset.samples)
        assert all(0 <= p < 3 for p in result.predictions)
        assert result.accuracy == pytest.approx(
            np.mean([p == s.label for p, s in zip(result.predictions, tiny_dataset.samples)])
        )
