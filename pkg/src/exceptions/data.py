from src.exceptions import IRBError


class DatasetError(IRBError):
    """A dataset source cannot be read or is malformed."""


class EmptyClassError(DatasetError):
    """A class directory holds no decodable image."""

    def __init__(self, class_name: str):
        super().__init__(f"class '{class_name}' has no decodable image")
        self.class_name = class_name


class SplitError(DatasetError, ValueError):
    """A train/test split cannot be produced."""
