from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from src.exceptions.data import DatasetError
from src.schemas.data import ManifestRecord, SceneDataset


class ManifestRepository:
    """One JSON object per line: id, source, label, class_name."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def write(self, records: Iterable[ManifestRecord]) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(record.model_dump_json() + "\n")
        return self.path

    def write_dataset(self, dataset: SceneDataset) -> Path:
        return self.write(
            ManifestRecord.for_sample(sample, dataset.class_names)
            for sample in dataset.samples
        )

    def read(self) -> list[ManifestRecord]:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
            return [ManifestRecord.model_validate_json(line) for line in lines if line.strip()]
        except (OSError, ValidationError) as exc:
            raise DatasetError(f"cannot read manifest {self.path}: {exc}") from exc
