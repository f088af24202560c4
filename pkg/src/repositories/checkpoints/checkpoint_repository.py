"""
Checkpoint files.

    line 1   IRB-CHECKPOINT 1
    line 2   JSON header (variant, class names, configs, parameter names/shapes)
    rest     little-endian float64 values of every parameter, in header order
"""
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.exceptions.training import CheckpointError
from src.lib.autodiff import Tensor
from src.models.network import IRBNetwork, init_network_parameters
from src.schemas.checkpoint import CheckpointHeader, ParameterEntry

logger = logging.getLogger(__name__)

MAGIC = b"IRB-CHECKPOINT 1"
VALUE_DTYPE = np.dtype("<f8")


class CheckpointRepository:
    def __init__(self, path: Path):
        self.path = Path(path)

    def save(self, network: IRBNetwork) -> Path:
        header = CheckpointHeader(
            variant=network.variant,
            class_names=network.class_names,
            backbone=network.backbone_config,
            descriptors=network.descriptor_config,
            parameters=[
                ParameterEntry(name=name, shape=list(tensor.shape))
                for name, tensor in network.params.items()
            ],
        )
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("wb") as fh:
                fh.write(MAGIC + b"\n")
                fh.write(header.model_dump_json().encode("utf-8") + b"\n")
                for tensor in network.params.values():
                    fh.write(np.ascontiguousarray(tensor.data, dtype=VALUE_DTYPE).tobytes())
        except OSError as exc:
            raise CheckpointError(f"cannot write checkpoint {self.path}: {exc}") from exc
        logger.info("Saved %s checkpoint to %s", network.variant, self.path)
        return self.path

    def read_header(self) -> tuple[CheckpointHeader, bytes]:
        try:
            raw = self.path.read_bytes()
        except OSError as exc:
            raise CheckpointError(f"cannot read checkpoint {self.path}: {exc}") from exc
        parts = raw.split(b"\n", 2)
        if len(parts) != 3 or parts[0] != MAGIC:
            raise CheckpointError(f"{self.path} is not an IRB checkpoint")
        try:
            header = CheckpointHeader.model_validate_json(parts[1])
        except ValidationError as exc:
            raise CheckpointError(f"malformed checkpoint header: {exc}") from exc
        return header, parts[2]

    def load(self) -> IRBNetwork:
        """
        Rebuild the network stored at `path`.

        Raises:
            CheckpointError: On a missing file, bad magic line, malformed header,
                truncated payload or parameters that do not fit the variant.
        """
        header, payload = self.read_header()
        expected_bytes = sum(entry.size for entry in header.parameters) * VALUE_DTYPE.itemsize
        if len(payload) != expected_bytes:
            raise CheckpointError(
                f"checkpoint payload holds {len(payload)} bytes, header needs {expected_bytes}"
            )

        reference = init_network_parameters(
            header.variant, header.backbone, len(header.class_names), seed=0
        )
        declared = {entry.name: tuple(entry.shape) for entry in header.parameters}
        expected = {name: tensor.shape for name, tensor in reference.items()}
        if declared != expected:
            raise CheckpointError(f"parameters do not match variant {header.variant}")

        params: dict[str, Tensor] = {}
        offset = 0
        for entry in header.parameters:
            values = np.frombuffer(payload, dtype=VALUE_DTYPE, count=entry.size, offset=offset)
            params[entry.name] = Tensor(
                values.astype(np.float64).reshape(entry.shape), requires_grad=True
            )
            offset += entry.size * VALUE_DTYPE.itemsize

        return IRBNetwork(
            header.variant,
            header.class_names,
            header.backbone,
            header.descriptors,
            params=params,
        )
