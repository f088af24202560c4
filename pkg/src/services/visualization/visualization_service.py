import logging
from pathlib import Path

import numpy as np
from PIL import Image

from src.exceptions.training import VisualizationError
from src.models.network import IRBNetwork
from src.repositories.scenes.imaging import to_uint8
from src.schemas.data import SceneSample
from src.schemas.model import InstanceRole
from src.schemas.visualization import HeatmapRecord, HeatmapSidecar

logger = logging.getLogger(__name__)

SIDECAR_FILE = "heatmaps.json"


def normalize_map(values: np.ndarray) -> np.ndarray:
    """Min-max to [0, 1]; a constant map becomes uniform 0.5."""
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.full(values.shape, 0.5)
    return (values - low) / (high - low)


def heatmap_image(values: np.ndarray, size: int) -> Image.Image:
    """Grayscale image of the normalized map, upscaled to size x size by nearest neighbor."""
    image = Image.fromarray(to_uint8(normalize_map(values)))
    return image.resize((size, size), Image.NEAREST)


class VisualizationService:
    """Per-descriptor heatmaps of the predicted class channel for one sample."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    def visualize(self, network: IRBNetwork, sample: SceneSample) -> HeatmapSidecar:
        result = network.forward(sample.image)
        predicted = int(result.probabilities.data.argmax())
        size = network.backbone_config.input_size

        maps = {role: element.tensor.data[predicted] for role, element in result.elements.items()}
        maps[InstanceRole.FINAL] = result.final.tensor.data[predicted]

        stem = sample.id.replace("/", "_")
        records: list[HeatmapRecord] = []
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            for role, values in maps.items():
                filename = f"{stem}_{role}.png"
                heatmap_image(values, size).save(self.out_dir / filename, format="PNG")
                records.append(
                    HeatmapRecord(
                        role=role,
                        file=filename,
                        raw_min=float(values.min()),
                        raw_max=float(values.max()),
                    )
                )
            sidecar = HeatmapSidecar(
                sample_id=sample.id,
                label=sample.label,
                predicted=predicted,
                class_name=network.class_names[predicted],
                image_size=size,
                maps=records,
            )
            (self.out_dir / SIDECAR_FILE).write_text(
                sidecar.model_dump_json(indent=2) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise VisualizationError(f"cannot write heatmaps to {self.out_dir}: {exc}") from exc

        logger.info("Wrote %d heatmaps for %s to %s", len(records), sample.id, self.out_dir)
        return sidecar
