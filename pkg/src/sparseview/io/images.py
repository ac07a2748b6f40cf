"""PNG image I/O (8-bit RGB) via Pillow."""

from __future__ import annotations

import numpy as np
from PIL import Image

from ..errors import InputError


def write_png(path, image: np.ndarray) -> None:
    """Write an image as 8-bit RGB PNG.

    Float inputs are treated as [0, 1] and quantized; integer inputs are
    taken as already 8-bit.
    """
    arr = np.asarray(image)
    if arr.dtype.kind == "f":
        arr = np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    elif arr.dtype != np.uint8:
        arr = arr.astype(np.uint8)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InputError(f"expected HxWx3 image, got shape {arr.shape}")
    Image.fromarray(arr, mode="RGB").save(str(path), format="PNG")


def read_png(path) -> np.ndarray:
    """Read a PNG as (H, W, 3) uint8."""
    with Image.open(str(path)) as img:
        return np.asarray(img.convert("RGB"))


def to_unit_float(image: np.ndarray) -> np.ndarray:
    """Normalize an 8-bit image to float64 in [0, 1]; floats pass through."""
    arr = np.asarray(image)
    if arr.dtype.kind == "f":
        return arr.astype(float)
    return arr.astype(float) / 255.0
