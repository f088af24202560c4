"""
Procedural scene motifs.

Every renderer returns an alpha mask in [0, 1] of shape [S, S]; position, scale
and orientation are drawn from the generator, so a class is characterised by its
local pattern rather than by where the pattern sits.
"""
from collections.abc import Callable

import numpy as np

from src.repositories.scenes.imaging import bilinear_resize

MotifRenderer = Callable[[np.random.Generator, int], np.ndarray]


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return yy + 0.5, xx + 0.5


def _rotated(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates in a randomly rotated frame centred at a random point."""
    yy, xx = _grid(size)
    cy, cx = rng.uniform(0.3 * size, 0.7 * size, size=2)
    theta = rng.uniform(0.0, np.pi)
    dy, dx = yy - cy, xx - cx
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    return u, v


def striped(rng: np.random.Generator, size: int) -> np.ndarray:
    """A long band filled with lengthwise stripes."""
    u, v = _rotated(rng, size)
    half_width = rng.uniform(0.15, 0.3) * size
    period = rng.uniform(4.0, 8.0)
    band = np.abs(u) < half_width
    return (band & (np.mod(u, period) < period / 2)).astype(np.float64)


def grid(rng: np.random.Generator, size: int) -> np.ndarray:
    """A rectangular lattice of small cells."""
    u, v = _rotated(rng, size)
    half_u, half_v = rng.uniform(0.25, 0.45, size=2) * size
    period = rng.uniform(6.0, 10.0)
    region = (np.abs(u) < half_u) & (np.abs(v) < half_v)
    cells = (np.mod(u, period) < 0.6 * period) & (np.mod(v, period) < 0.4 * period)
    return (region & cells).astype(np.float64)


def blob_cluster(rng: np.random.Generator, size: int) -> np.ndarray:
    """Overlapping soft blobs scattered around a common centre."""
    yy, xx = _grid(size)
    centre = rng.uniform(0.3 * size, 0.7 * size, size=2)
    spread = rng.uniform(0.1, 0.2) * size
    count = int(rng.integers(6, 13))
    alpha = np.zeros((size, size))
    for cy, cx in rng.normal(centre, spread, size=(count, 2)):
        sigma = rng.uniform(0.03, 0.07) * size
        alpha += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
    return np.clip(alpha, 0.0, 1.0)


def concentric(rng: np.random.Generator, size: int) -> np.ndarray:
    """One to three discs drawn as concentric rings."""
    yy, xx = _grid(size)
    alpha = np.zeros((size, size))
    for _ in range(int(rng.integers(1, 4))):
        cy, cx = rng.uniform(0.2 * size, 0.8 * size, size=2)
        radius = rng.uniform(0.12, 0.25) * size
        r = np.hypot(yy - cy, xx - cx)
        rings = np.cos(2.0 * np.pi * r / (radius / 2.5)) > 0.0
        alpha = np.maximum(alpha, ((r < radius) & rings).astype(np.float64))
    return alpha


RENDERERS: dict[str, MotifRenderer] = {
    "striped": striped,
    "grid": grid,
    "blob_cluster": blob_cluster,
    "concentric": concentric,
}


def textured_background(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Smooth coloured texture shared by all classes, and a contrasting foreground colour."""
    base = rng.uniform(0.25, 0.6, size=3)
    coarse = rng.normal(0.0, 1.0, size=(3, 5, 5))
    texture = bilinear_resize(coarse, size) * 0.08
    background = np.clip(base[:, None, None] + texture, 0.0, 1.0)
    direction = 1.0 if rng.random() < 0.5 else -1.0
    offset = direction * rng.uniform(0.25, 0.4)
    foreground = np.clip(base.mean() + offset + rng.normal(0.0, 0.05, size=3), 0.0, 1.0)
    return background, foreground


def render_scene(motif: str, size: int, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Compose background, motif and pixel noise into a [3, S, S] image in [0, 1]."""
    background, foreground = textured_background(rng, size)
    alpha = RENDERERS[motif](rng, size)[None, :, :]
    image = background * (1.0 - alpha) + foreground[:, None, None] * alpha
    if noise_std > 0.0:
        image = image + rng.normal(0.0, noise_std, size=image.shape)
    return np.clip(image, 0.0, 1.0)
