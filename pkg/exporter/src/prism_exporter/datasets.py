"""Image-instruction sample sources.

Two dataset specs: ``synthetic:N`` procedurally renders N deterministic
RGB images (gradient background, random rectangles, sinusoidal texture),
and a directory path exports every image file found there. Each sample
carries an id, a source tag, an instruction string, and a float32 CHW
image in [0, 1] at the model's input size.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ConfigError
from .toy_model import IMAGE_SIZE

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")

_INSTRUCTION_TEMPLATES = (
    "describe the image",
    "what objects are present?",
    "summarize the scene",
    "what colors dominate?",
)


@dataclass(frozen=True)
class Sample:
    sample_id: str
    source_tag: str
    instruction: str
    image: np.ndarray  # (3, H, W) float32 in [0, 1]


def _render_synthetic(index: int, size: int) -> np.ndarray:
    rng = np.random.default_rng([0x1A6E, index])
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float32) / (size - 1)
    base = rng.uniform(0.1, 0.9, size=3).astype(np.float32)
    tilt = rng.uniform(-0.4, 0.4, size=(3, 2)).astype(np.float32)
    img = base[:, None, None] + tilt[:, 0, None, None] * yy + tilt[:, 1, None, None] * xx
    for _ in range(int(rng.integers(1, 4))):
        x0, y0 = rng.integers(0, size - 8, size=2)
        w, h = rng.integers(6, size // 2, size=2)
        color = rng.uniform(0, 1, size=3).astype(np.float32)
        img[:, y0 : y0 + h, x0 : x0 + w] = color[:, None, None]
    freq = rng.uniform(2, 9)
    phase = rng.uniform(0, 2 * np.pi)
    img += 0.08 * np.sin(2 * np.pi * freq * xx + phase)[None, :, :]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _iter_synthetic(count: int) -> Iterator[Sample]:
    for i in range(count):
        yield Sample(
            sample_id=f"img-{i:05d}",
            source_tag="synthetic",
            instruction=_INSTRUCTION_TEMPLATES[i % len(_INSTRUCTION_TEMPLATES)],
            image=_render_synthetic(i, IMAGE_SIZE),
        )


def _load_image_file(path: Path, size: int) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as img:
        rgb = img.convert("RGB").resize((size, size))
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def _iter_directory(root: Path) -> Iterator[Sample]:
    files = sorted(
        p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES
    )
    for path in files:
        yield Sample(
            sample_id=path.stem,
            source_tag=root.name,
            instruction=_INSTRUCTION_TEMPLATES[0],
            image=_load_image_file(path, IMAGE_SIZE),
        )


def open_dataset(spec: str) -> Iterator[Sample]:
    """Resolve a dataset spec into a sample iterator."""
    if spec.startswith("synthetic:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad synthetic dataset spec {spec!r}") from None
        if count < 1:
            raise ConfigError("synthetic dataset needs at least one sample")
        return _iter_synthetic(count)
    root = Path(spec)
    if root.is_dir():
        return _iter_directory(root)
    raise ConfigError(f"cannot resolve dataset {spec!r}: not synthetic:N or a directory")
