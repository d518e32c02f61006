"""
Grayscale rasters, luma conversion and 4x4 window access.

All encoders operate on :class:`GrayImage`, an immutable 2-D ``uint8``
raster. Coordinates exposed by this module are one-based, so the window
anchored at the top-left pixel of an image is ``window4(img, 1, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

#: Smallest raster accepted by the quadruple-pattern encoder.
MIN_LQPAT_SIZE = 4

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


class DimensionError(ValueError):
    """Raised when an array or image has an unusable shape."""


class ImageDecodeError(ValueError):
    """Raised when a file cannot be decoded as an image."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale raster.

    Parameters
    ----------
    data : array_like
        2-D array of intensities in ``[0, 255]``, indexed ``[row, column]``.
        The array is copied to ``uint8`` and marked read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError(
                f"GrayImage needs a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
                raise ValueError("intensities must be integers")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))


def to_grayscale(rgb) -> GrayImage:
    """Convert an ``(H, W, 3)`` RGB raster to luma.

    Each output pixel is ``0.299 R + 0.587 G + 0.114 B`` rounded half-up
    and clamped to ``[0, 255]``.
    """
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"expected a non-empty (H, W, 3) raster, got shape {arr.shape}")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("channel values must lie in [0, 255]")
    luma = np.floor(arr.astype(np.float64) @ _LUMA + 0.5)
    return GrayImage(np.clip(luma, 0, 255).astype(np.uint8))


def window4(img: GrayImage, i: int, j: int) -> np.ndarray:
    """Return the 16 intensities of the 4x4 block whose top-left pixel is ``(i, j)``.

    ``i`` and ``j`` are one-based and must satisfy ``1 <= i <= M-3`` and
    ``1 <= j <= N-3`` for an ``M x N`` image. The result is a flat,
    row-major array of length 16.
    """
    m, n = img.shape
    if not 1 <= i <= m - 3:
        raise IndexError(f"row index i={i} outside 1 <= i <= M-3 = {m - 3}")
    if not 1 <= j <= n - 3:
        raise IndexError(f"column index j={j} outside 1 <= j <= N-3 = {n - 3}")
    return img.data[i - 1:i + 3, j - 1:j + 3].reshape(16).copy()


def window_origins(shape: tuple[int, int]) -> list[tuple[int, int]]:
    """All one-based ``(i, j)`` origins of valid 4x4 windows, row-major."""
    m, n = shape
    return [(i, j) for i in range(1, m - 2) for j in range(1, n - 2)]


PathLike = Union[str, Path]


def read_image(path: PathLike) -> GrayImage:
    """Decode PNG, JPEG, BMP or PGM into a :class:`GrayImage`.

    Colour images go through :func:`to_grayscale`.
    """
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "L":
                return GrayImage(np.asarray(im))
            if im.mode in ("I;16", "I;16B", "I", "F"):
                raise ImageDecodeError(f"{path}: unsupported bit depth ({im.mode})")
            return to_grayscale(np.asarray(im.convert("RGB")))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"{path}: {exc}") from exc


def write_pgm(img: GrayImage, path: PathLike) -> None:
    """Write ``img`` as binary PGM (P5, maxval 255)."""
    Image.fromarray(np.ascontiguousarray(img.data)).save(path, format="PPM")
