"""Pillow-backed decoding/encoding and the resampling used by the loaders."""
import io
from pathlib import Path

import numpy as np
from PIL import Image


def bilinear_resize(image: np.ndarray, size: int) -> np.ndarray:
    """
    Resize [C, H, W] to [C, size, size] by bilinear interpolation.

    Pixel centers are aligned (source coordinate = (dst + 0.5) * in/out - 0.5)
    and no anti-aliasing prefilter is applied, so halving a map averages
    neighboring pixel pairs.
    """

    def axis_weights(n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(size) + 0.5) * (n_in / size) - 0.5
        src = np.clip(src, 0.0, n_in - 1)
        lower = np.floor(src).astype(np.intp)
        upper = np.minimum(lower + 1, n_in - 1)
        return lower, upper, src - lower

    _, height, width = image.shape
    top, bottom, wy = axis_weights(height)
    left, right, wx = axis_weights(width)
    rows = image[:, top, :] * (1.0 - wy)[None, :, None] + image[:, bottom, :] * wy[None, :, None]
    return rows[:, :, left] * (1.0 - wx)[None, None, :] + rows[:, :, right] * wx[None, None, :]


def _to_array(img: Image.Image, size: int) -> np.ndarray:
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    chw = rgb.transpose(2, 0, 1)
    if chw.shape[1:] != (size, size):
        chw = bilinear_resize(chw, size)
    return np.clip(chw, 0.0, 1.0)


def read_image(path: Path, size: int) -> np.ndarray:
    """Decode a PNG/JPEG file into a [3, size, size] array in [0, 1]."""
    with Image.open(path) as img:
        img.load()
        return _to_array(img, size)


def decode_image(payload: bytes, size: int) -> np.ndarray:
    with Image.open(io.BytesIO(payload)) as img:
        img.load()
        return _to_array(img, size)


def to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)


def write_rgb_png(image: np.ndarray, path: Path) -> None:
    """Write a [3, H, W] array in [0, 1] as an 8-bit RGB PNG."""
    Image.fromarray(to_uint8(image.transpose(1, 2, 0))).save(path, format="PNG")


def encode_png(image: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(to_uint8(image.transpose(1, 2, 0))).save(buffer, format="PNG")
    return buffer.getvalue()
