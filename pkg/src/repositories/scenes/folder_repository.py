import logging
from pathlib import Path

from PIL import UnidentifiedImageError

from src.exceptions.data import DatasetError, EmptyClassError
from src.repositories.scenes.imaging import read_image, write_rgb_png
from src.schemas.data import SceneDataset, SceneSample

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = frozenset({".png", ".jpg", ".jpeg"})


class ImageFolderRepository:
    """
    A directory with one subdirectory per class.

    Classes are indexed in lexicographic order of their directory names. Files
    that cannot be decoded are skipped with a warning and counted.
    """

    def __init__(self, root: Path, image_size: int):
        self.root = Path(root)
        self.image_size = image_size

    def class_dirs(self) -> list[Path]:
        if not self.root.is_dir():
            raise DatasetError(f"dataset root {self.root} is not a directory")
        dirs = sorted((d for d in self.root.iterdir() if d.is_dir()), key=lambda d: d.name)
        if len(dirs) < 2:
            raise DatasetError(f"{self.root} needs at least 2 class directories")
        return dirs

    def load(self) -> SceneDataset:
        samples: list[SceneSample] = []
        skipped = 0
        dirs = self.class_dirs()
        for label, class_dir in enumerate(dirs):
            files = sorted(
                f for f in class_dir.iterdir()
                if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES
            )
            loaded = 0
            for path in files:
                try:
                    image = read_image(path, self.image_size)
                except (UnidentifiedImageError, OSError, ValueError) as exc:
                    logger.warning("Skipping unreadable image %s: %s", path, exc)
                    skipped += 1
                    continue
                samples.append(
                    SceneSample(
                        id=f"{class_dir.name}/{path.stem}",
                        image=image,
                        label=label,
                        source=str(path.relative_to(self.root)),
                    )
                )
                loaded += 1
            if loaded == 0:
                raise EmptyClassError(class_dir.name)

        logger.info(
            "Loaded %d images from %s (%d classes, %d skipped)",
            len(samples), self.root, len(dirs), skipped,
        )
        return SceneDataset(
            samples=samples, class_names=[d.name for d in dirs], skipped=skipped
        )

    def export(self, dataset: SceneDataset) -> SceneDataset:
        """
        Write every sample as `<root>/<class>/<name>.png`; the tree reloads via `load`.

        Returns the dataset with each sample's source set to its file relative to
        the root.
        """
        exported: list[SceneSample] = []
        for sample in dataset.samples:
            class_name = dataset.class_names[sample.label]
            target = self.root / class_name / f"{sample.id.rsplit('/', 1)[-1]}.png"
            try:
                target.parent.mkdir(parents=True, exist_ok=True)
                write_rgb_png(sample.image, target)
            except OSError as exc:
                raise DatasetError(f"cannot write {target}: {exc}") from exc
            exported.append(
                sample.model_copy(update={"source": str(target.relative_to(self.root))})
            )
        logger.info("Exported %d images to %s", len(exported), self.root)
        return dataset.model_copy(update={"samples": exported})


def load_image_folder(root: Path, image_size: int) -> SceneDataset:
    return ImageFolderRepository(root, image_size).load()
