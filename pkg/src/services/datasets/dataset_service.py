import logging
from pathlib import Path

from src.core.config import Settings
from src.repositories.scenes.folder_repository import ImageFolderRepository
from src.repositories.scenes.manifest_repository import ManifestRepository
from src.repositories.scenes.synthetic_repository import SyntheticSceneRepository
from src.schemas.data import SceneDataset

logger = logging.getLogger(__name__)


class DatasetService:
    """Resolves the DATA setting to a synthetic dataset or an image folder."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def load(self) -> SceneDataset:
        if self.settings.uses_synthetic_data:
            repository = SyntheticSceneRepository(self.settings.synthetic_spec())
            return repository.generate(self.settings.SEED)
        return ImageFolderRepository(Path(self.settings.DATA), self.settings.IMAGE_SIZE).load()

    def export(self, out_dir: Path) -> tuple[SceneDataset, Path]:
        """Write the dataset as a PNG tree under `out_dir/images` plus `manifest.jsonl`."""
        dataset = self.load()
        exported = ImageFolderRepository(out_dir / "images", self.settings.IMAGE_SIZE).export(dataset)
        manifest = ManifestRepository(out_dir / "manifest.jsonl").write_dataset(exported)
        logger.info("Wrote manifest with %d records to %s", len(exported.samples), manifest)
        return exported, manifest
