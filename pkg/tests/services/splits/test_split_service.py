"""Tests for the stratified train/test split."""
import pytest

from src.exceptions.data import SplitError
from src.services.splits.split_service import stratified_split, train_count
from tests.factories import SceneSampleFactory


def make_samples(per_class: int, num_classes: int):
    return [
        SceneSampleFactory(label=label)
        for label in range(num_classes)
        for _ in range(per_class)
    ]


@pytest.mark.unit
class TestTrainCount:
    @pytest.mark.parametrize(
        ("count", "ratio", "expected"),
        [(10, 0.8, 8), (10, 0.5, 5), (10, 0.2, 2), (3, 0.5, 2), (2, 0.99, 1), (2, 0.01, 1), (7, 0.8, 6)],
    )
    def test_values(self, count, ratio, expected):
        assert train_count(count, ratio) == expected


@pytest.mark.unit
class TestStratifiedSplit:
    """Per-class seeded shuffles."""

    def test_counts_per_class(self):
        split = stratified_split(make_samples(10, 3), 0.8, seed=0)

        for label in range(3):
            assert sum(s.label == label for s in split.train) == 8
            assert sum(s.label == label for s in split.test) == 2

    def test_partition(self):
        samples = make_samples(7, 4)
        split = stratified_split(samples, 0.5, seed=1)

        train_ids = {s.id for s in split.train}
        test_ids = {s.id for s in split.test}
        assert train_ids.isdisjoint(test_ids)
        assert train_ids | test_ids == {s.id for s in samples}

    def test_deterministic_in_seed(self):
        samples = make_samples(10, 3)
        first = stratified_split(samples, 0.8, seed=5)
        second = stratified_split(samples, 0.8, seed=5)
        assert [s.id for s in first.train] == [s.id for s in second.train]
        assert [s.id for s in first.test] == [s.id for s in second.test]

    def test_seeds_give_different_splits(self):
        samples = make_samples(20, 2)
        splits = {tuple(s.id for s in stratified_split(samples, 0.5, seed).test) for seed in range(5)}
        assert len(splits) > 1

    def test_records_ratio_and_seed(self):
        split = stratified_split(make_samples(4, 2), 0.5, seed=9)
        assert split.train_ratio == 0.5
        assert split.seed == 9

    def test_singleton_class_rejected(self):
        samples = make_samples(5, 2) + [SceneSampleFactory(label=2)]
        with pytest.raises(SplitError, match="class 2"):
            stratified_split(samples, 0.8, seed=0)

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.5, 1.5])
    def test_ratio_out_of_range(self, ratio):
        with pytest.raises(SplitError):
            stratified_split(make_samples(4, 2), ratio, seed=0)
