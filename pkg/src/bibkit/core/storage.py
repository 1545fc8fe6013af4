"""File formats shared by the CLI subcommands.

* binary portable pixmaps (P6, 8-bit) written and read through Pillow,
* ``key=value`` sidecar metadata and run files,
* JSON-lines records (one pydantic record per line).
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Union

import numpy as np
from PIL import Image
from pydantic import BaseModel

from .exceptions import ConfigurationError, ValidationError

logger = logging.getLogger(__name__)

# One fixed color per basin index; Unresolved cells are black.
BASIN_PALETTE: List[tuple] = [
    (230, 190, 40),
    (40, 120, 200),
    (200, 60, 70),
    (60, 170, 90),
    (150, 80, 180),
    (240, 130, 30),
    (90, 200, 200),
    (200, 200, 200),
    (120, 90, 50),
    (250, 120, 180),
]
UNRESOLVED_COLOR = (0, 0, 0)


def labels_to_rgb(labels: np.ndarray) -> np.ndarray:
    """Color a ``(nx, ny)`` label array as a ``(ny, nx, 3)`` image, imaginary axis up."""
    if labels.max(initial=-1) >= len(BASIN_PALETTE):
        raise ValidationError(
            f"at most {len(BASIN_PALETTE)} basins can be rendered",
            field="labels",
            value=int(labels.max()),
        )
    palette = np.array([UNRESOLVED_COLOR, *BASIN_PALETTE], dtype=np.uint8)
    image = palette[labels + 1]
    return np.ascontiguousarray(image.transpose(1, 0, 2)[::-1])


def rgb_to_labels(image: np.ndarray) -> np.ndarray:
    """Inverse of :func:`labels_to_rgb`; unknown colors raise ``ValidationError``."""
    flipped = image[::-1].transpose(1, 0, 2)
    labels = np.full(flipped.shape[:2], -2, dtype=np.int64)
    for index, color in enumerate([UNRESOLVED_COLOR, *BASIN_PALETTE]):
        labels[np.all(flipped == np.array(color, dtype=np.uint8), axis=-1)] = index - 1
    if (labels == -2).any():
        raise ValidationError("pixmap contains colors outside the basin palette")
    return labels


def write_pixmap(path: Path, rgb: np.ndarray) -> Path:
    """Write an RGB array as a binary (P6) pixmap."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(path, format="PPM")
    logger.debug("wrote pixmap %s (%dx%d)", path, rgb.shape[1], rgb.shape[0])
    return path


def write_mask(path: Path, mask: np.ndarray) -> Path:
    """Write a boolean ``(nx, ny)`` mask as a white-on-black pixmap."""
    gray = np.where(mask, 255, 0).astype(np.uint8).T[::-1]
    return write_pixmap(path, np.repeat(gray[:, :, None], 3, axis=2))


def read_pixmap(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as e:
        raise ConfigurationError(f"cannot read pixmap {path}: {e}", config_type="pixmap")


def parse_key_values(text: str, source: str = "<string>") -> Dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{source}:{lineno}: expected key=value, got {raw!r}",
                config_type="key_value",
            )
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def write_key_values(path: Path, values: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{k}={v}\n" for k, v in values.items()), encoding="utf-8")
    return path


def read_key_values(path: Path) -> Dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"file not found: {path}", config_type="key_value")
    return parse_key_values(path.read_text(encoding="utf-8"), str(path))


def write_jsonl(
    path: Path, records: Iterable[Union[BaseModel, Dict[str, Any]]], append: bool = False
) -> Path:
    """Write records as JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a" if append else "w", encoding="utf-8") as f:
        for record in records:
            payload = (
                record.model_dump(mode="json") if isinstance(record, BaseModel) else record
            )
            f.write(json.dumps(payload, ensure_ascii=False) + "\n")
    return path


def read_jsonl(path: Path) -> List[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"file not found: {path}", config_type="jsonl")
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ConfigurationError(
                    f"{path}:{lineno}: invalid JSON ({e})", config_type="jsonl"
                )
    return records
