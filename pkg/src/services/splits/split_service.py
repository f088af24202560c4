import math
from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from src.exceptions.data import SplitError
from src.schemas.data import DatasetSplit, SceneSample


def train_count(count: int, train_ratio: float) -> int:
    """ceil(ratio * count), keeping at least one sample on each side."""
    # the epsilon absorbs float error such as 0.8 * 10 = 8.000000000000002
    return max(1, min(math.ceil(train_ratio * count - 1e-9), count - 1))


def stratified_split(
    samples: Sequence[SceneSample], train_ratio: float, seed: int
) -> DatasetSplit:
    """
    Per-class seeded shuffle; the first ceil(ratio * count) of each class train.

    Raises:
        SplitError: If the ratio is outside (0, 1) or a class has fewer than 2 samples.
    """
    if not 0.0 < train_ratio < 1.0:
        raise SplitError(f"train_ratio must lie in (0, 1), got {train_ratio}")

    by_class: dict[int, list[SceneSample]] = defaultdict(list)
    for sample in samples:
        by_class[sample.label].append(sample)

    rng = np.random.default_rng(seed)
    train: list[SceneSample] = []
    test: list[SceneSample] = []
    for label in sorted(by_class):
        members = by_class[label]
        if len(members) < 2:
            raise SplitError(f"class {label} has {len(members)} sample(s), need at least 2")
        order = rng.permutation(len(members))
        cut = train_count(len(members), train_ratio)
        train.extend(members[i] for i in order[:cut])
        test.extend(members[i] for i in order[cut:])

    return DatasetSplit(train=train, test=test, train_ratio=train_ratio, seed=seed)
