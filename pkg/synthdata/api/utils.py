import hashlib
import logging
import subprocess
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

logger = logging.getLogger(__name__)


def quantize(image: np.ndarray) -> np.ndarray:
    """Snap values in [0, 1] to the 8-bit grid so they survive a PNG round-trip unchanged."""
    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_png(image: np.ndarray, path) -> None:
    """Write an H x W x 3 RGB image or an H x W grayscale map (masks use {0, 255})."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not (image.ndim == 2 or (image.ndim == 3 and image.shape[2] == 3)):
        raise ValueError(f'Cannot write image of shape {image.shape} as PNG')
    Image.fromarray(to_uint8(image)).save(path, format='PNG')


def load_png(path, mode: str = 'RGB') -> np.ndarray:
    """Read a PNG as float64 in [0, 1]; mode 'L' returns H x W."""
    try:
        with Image.open(path) as img:
            data = np.asarray(img.convert(mode), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f'Cannot decode image {path}: {exc}') from exc
    return data


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def run_command(command: list) -> None:
    """Run an external tool, logging its stderr when it fails."""
    try:
        subprocess.run(command, check=True, capture_output=True, text=True)
        logger.debug('Command succeeded: %s', command[0])
    except subprocess.CalledProcessError as e:
        logger.error('Command %s failed:\n%s', command[0], e.stderr)
        raise
