import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from pydantic import BaseModel


class MetricsRepository:
    """
    JSON-lines metric stream under an output directory.

    Records carry a `kind` field (epoch, run or summary). Nothing time dependent
    is written, so repeated runs with identical inputs produce identical files.
    """

    FILENAME = "metrics.jsonl"

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.path = self.out_dir / self.FILENAME

    def reset(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")

    def append(self, records: Iterable[BaseModel]) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            for record in records:
                fh.write(record.model_dump_json() + "\n")

    def read(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        with self.path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def write_json(self, name: str, payload: BaseModel | dict[str, Any]) -> Path:
        target = self.out_dir / name
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if isinstance(payload, BaseModel):
            target.write_text(payload.model_dump_json(indent=2) + "\n", encoding="utf-8")
        else:
            target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target
