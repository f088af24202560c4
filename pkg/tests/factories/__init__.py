"""
Test Factories using factory-boy.

Factories generate test data consistently.
"""
import numpy as np
from factory import Factory, Faker, LazyAttribute, Sequence

from src.schemas.data import SceneSample


class SceneSampleFactory(Factory):
    """Factory for SceneSample instances with reproducible random pixels."""

    class Meta:
        model = SceneSample

    class Params:
        size = 8

    id = Sequence(lambda n: f"sample-{n:04d}")
    label = 0
    source = Faker("file_name", extension="png")
    image = LazyAttribute(
        lambda o: np.random.default_rng(int(o.id.rsplit("-", 1)[-1]) if "-" in o.id else 0)
        .random((3, o.size, o.size))
    )
