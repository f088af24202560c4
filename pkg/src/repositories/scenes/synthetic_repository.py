import logging
from collections.abc import Sequence

import numpy as np

from src.repositories.scenes.motifs import render_scene
from src.schemas.data import SceneDataset, SceneSample, SyntheticSpec

logger = logging.getLogger(__name__)


class SyntheticSceneRepository:
    """Class-balanced procedural scenes, fully determined by a SyntheticSpec and a seed."""

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec

    def render(self, label: int, inner_seed: int | Sequence[int]) -> np.ndarray:
        """One image of class `label`; identical for identical inner seeds."""
        motif = self.spec.class_names[label]
        rng = np.random.default_rng(inner_seed)
        return render_scene(motif, self.spec.image_size, self.spec.noise_std, rng)

    def generate(self, seed: int) -> SceneDataset:
        class_names = self.spec.class_names
        samples = [
            SceneSample(
                id=f"{name}-{index:04d}",
                image=self.render(label, (seed, label, index)),
                label=label,
            )
            for label, name in enumerate(class_names)
            for index in range(self.spec.samples_per_class)
        ]
        logger.info(
            "Generated %d synthetic scenes (%d classes, seed %d)",
            len(samples), len(class_names), seed,
        )
        return SceneDataset(samples=samples, class_names=class_names)


def generate_synthetic(spec: SyntheticSpec, seed: int) -> SceneDataset:
    return SyntheticSceneRepository(spec).generate(seed)
