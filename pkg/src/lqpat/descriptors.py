"""
Local Quadruple Pattern (LQPAT), LBP and CSLBP encoders.

LQPAT slides a 4x4 window over the image with stride 1. The window is split
into four 2x2 blocks::

    red    | green
    -------+------
    purple | blue

Pixels of each block are compared with the matching pixels of the next block
in the cycle red -> green -> blue -> purple -> red. The red/green and
green/blue comparisons give the 8-bit ``a`` code, the blue/purple and
purple/red comparisons give the 8-bit ``b`` code. The histograms of the two
resulting code images, concatenated, form a 512-bin feature vector.

LBP and CSLBP use a 3x3 neighbourhood with neighbours numbered clockwise from
the top-left pixel (R1 = top-left, ..., R8 = left), R1 being the most
significant bit.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numba import njit

from .image_core import DimensionError, GrayImage

DESCRIPTORS = ("lqpat", "lbp", "cslbp")

# (weight, (row, col) of E, (row, col) of F) within the 4x4 window; bit = E > F
LQPAT_A_TERMS = (
    (128, (0, 0), (0, 2)),
    (64, (0, 1), (0, 3)),
    (32, (1, 0), (1, 2)),
    (16, (1, 1), (1, 3)),
    (8, (0, 2), (2, 2)),
    (4, (0, 3), (2, 3)),
    (2, (1, 2), (3, 2)),
    (1, (1, 3), (3, 3)),
)
LQPAT_B_TERMS = (
    (128, (2, 2), (2, 0)),
    (64, (2, 3), (2, 1)),
    (32, (3, 2), (3, 0)),
    (16, (3, 3), (3, 1)),
    (8, (2, 0), (0, 0)),
    (4, (2, 1), (0, 1)),
    (2, (3, 0), (1, 0)),
    (1, (3, 1), (1, 1)),
)

# clockwise from top-left, offsets relative to the centre pixel
LBP_RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def encode_order(e: int, f: int) -> int:
    """Order bit of the quadruple pattern: 0 if ``e <= f`` else 1."""
    return 0 if e <= f else 1


def encode_threshold(ref: int, nbr: int, threshold: int = 0) -> int:
    """LBP bit: 1 if ``nbr - ref > threshold`` else 0."""
    return 1 if int(nbr) - int(ref) > threshold else 0


class ComparisonCounter:
    """Thread-safe tally of pixel comparisons performed by the encoders."""

    def __init__(self):
        self._total = 0
        self._lock = threading.Lock()

    def add(self, n: int) -> None:
        with self._lock:
            self._total += int(n)

    @property
    def total(self) -> int:
        return self._total

    def reset(self) -> None:
        with self._lock:
            self._total = 0


@dataclass(frozen=True)
class QuadrupleCodes:
    """The two 8-bit codes of one LQPAT window."""

    a: int
    b: int

    @property
    def a_high(self) -> int:
        """Red/green nibble, already weighted (multiple of 16)."""
        return self.a & 0xF0

    @property
    def a_low(self) -> int:
        return self.a & 0x0F

    @property
    def b_high(self) -> int:
        return self.b & 0xF0

    @property
    def b_low(self) -> int:
        return self.b & 0x0F


@dataclass(frozen=True)
class DescriptorSpec:
    """Which descriptor to run and how.

    ``threshold`` is only used by ``lbp`` and ``cslbp``; the quadruple
    pattern compares pixel order and takes no threshold.
    """

    kind: str = "lqpat"
    threshold: int = 0
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in _REGISTRY:
            raise ValueError(
                f"unknown descriptor {self.kind!r}; valid names: {', '.join(sorted(_REGISTRY))}")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")

    @property
    def bin_count(self) -> int:
        return _REGISTRY[self.kind].bin_count

    @property
    def min_size(self) -> int:
        return _REGISTRY[self.kind].min_size


@dataclass(frozen=True, eq=False)
class FeatureImageSet:
    """Code images produced by one descriptor for one input image."""

    images: tuple
    descriptor: str

    def __eq__(self, other):
        if not isinstance(other, FeatureImageSet):
            return NotImplemented
        return (self.descriptor == other.descriptor
                and len(self.images) == len(other.images)
                and all(x.shape == y.shape and np.array_equal(x, y)
                        for x, y in zip(self.images, other.images)))

    def __len__(self):
        return len(self.images)


@dataclass(eq=False)
class FeatureVector:
    """Concatenated code histograms."""

    bins: np.ndarray
    descriptor: str = "lqpat"
    normalized: bool = False

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.float64)
        if self.bins.ndim != 1:
            raise DimensionError("feature bins must be one-dimensional")

    @property
    def bin_count(self) -> int:
        return self.bins.shape[0]

    def __len__(self):
        return self.bin_count

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (self.normalized == other.normalized
                and self.bins.shape == other.bins.shape
                and bool(np.array_equal(self.bins, other.bins)))


# ---------------------------------------------------------------------------
# vectorised encoders; each comparison is one array op over every window

@njit(cache=True, nogil=True)
def _lqpat_kernel(d, normalize):
    # one pass per window: 16 order comparisons, both codes, both histograms
    m, n = d.shape
    h, w = m - 3, n - 3
    a_img = np.empty((h, w), np.uint8)
    b_img = np.empty((h, w), np.uint8)
    hist = np.zeros(512, np.int64)
    count = 0
    for i in range(h):
        for j in range(w):
            a = 0
            if d[i, j] > d[i, j + 2]:
                a |= 128
            if d[i, j + 1] > d[i, j + 3]:
                a |= 64
            if d[i + 1, j] > d[i + 1, j + 2]:
                a |= 32
            if d[i + 1, j + 1] > d[i + 1, j + 3]:
                a |= 16
            if d[i, j + 2] > d[i + 2, j + 2]:
                a |= 8
            if d[i, j + 3] > d[i + 2, j + 3]:
                a |= 4
            if d[i + 1, j + 2] > d[i + 3, j + 2]:
                a |= 2
            if d[i + 1, j + 3] > d[i + 3, j + 3]:
                a |= 1
            b = 0
            if d[i + 2, j + 2] > d[i + 2, j]:
                b |= 128
            if d[i + 2, j + 3] > d[i + 2, j + 1]:
                b |= 64
            if d[i + 3, j + 2] > d[i + 3, j]:
                b |= 32
            if d[i + 3, j + 3] > d[i + 3, j + 1]:
                b |= 16
            if d[i + 2, j] > d[i, j]:
                b |= 8
            if d[i + 2, j + 1] > d[i, j + 1]:
                b |= 4
            if d[i + 3, j] > d[i + 1, j]:
                b |= 2
            if d[i + 3, j + 1] > d[i + 1, j + 1]:
                b |= 1
            count += 16
            a_img[i, j] = a
            b_img[i, j] = b
            hist[a] += 1
            hist[256 + b] += 1
    bins = np.empty(512, np.float64)
    total = 2.0 * h * w if normalize else 1.0
    for k in range(512):
        bins[k] = hist[k] / total
    return a_img, b_img, bins, count


def _lqpat(data, threshold, counter, normalize=False):
    a_img, b_img, bins, count = _lqpat_kernel(np.ascontiguousarray(data, dtype=np.uint8), normalize)
    if counter is not None:
        counter.add(count)
    return (a_img, b_img), bins


def _lqpat_images(data, threshold, counter):
    return _lqpat(data, threshold, counter)[0]


def _with_histogram(encode, nbins):
    def run(data, threshold, counter, normalize=False):
        images = encode(data, threshold, counter)
        bins = np.concatenate([np.bincount(im.ravel(), minlength=nbins) for im in images])
        bins = bins.astype(np.float64)
        if normalize:
            bins /= bins.sum()
        return images, bins
    return run


def _ring_planes(data: np.ndarray) -> list[np.ndarray]:
    m, n = data.shape
    h, w = m - 2, n - 2
    return [data[1 + dr:1 + dr + h, 1 + dc:1 + dc + w] for dr, dc in LBP_RING]


def _lbp_images(data, threshold, counter):
    m, n = data.shape
    centre = data[1:m - 1, 1:n - 1].astype(np.int16)
    code = np.zeros(centre.shape, dtype=np.uint8)
    for k, plane in enumerate(_ring_planes(data)):
        bit = (plane.astype(np.int16) - centre) > threshold
        if counter is not None:
            counter.add(bit.size)
        code |= bit.astype(np.uint8) << np.uint8(7 - k)
    return (code,)


def _cslbp_images(data, threshold, counter):
    ring = [p.astype(np.int16) for p in _ring_planes(data)]
    code = np.zeros(ring[0].shape, dtype=np.uint8)
    for k in range(4):
        bit = (ring[k + 4] - ring[k]) > threshold
        if counter is not None:
            counter.add(bit.size)
        code |= bit.astype(np.uint8) << np.uint8(3 - k)
    return (code,)


@dataclass(frozen=True)
class _Descriptor:
    encode: Callable
    bin_count: int
    min_size: int
    border: int
    comparisons_per_window: int
    n_images: int = 1
    codes_per_image: int = 256


_REGISTRY: dict[str, _Descriptor] = {
    "lqpat": _Descriptor(_lqpat, 512, 4, 3, 16, n_images=2),
    "lbp": _Descriptor(_with_histogram(_lbp_images, 256), 256, 3, 2, 8),
    "cslbp": _Descriptor(_with_histogram(_cslbp_images, 16), 16, 3, 2, 4, codes_per_image=16),
}


def lqpat_codes(block) -> QuadrupleCodes:
    """Encode one 4x4 block into its ``(a, b)`` quadruple codes."""
    arr = np.asarray(block)
    if arr.size != 16 or arr.ndim not in (1, 2) or (arr.ndim == 2 and arr.shape != (4, 4)):
        raise DimensionError(f"expected a 4x4 block, got shape {arr.shape}")
    arr = arr.reshape(4, 4)
    a, b = _lqpat_images(arr, 0, None)
    return QuadrupleCodes(int(a[0, 0]), int(b[0, 0]))


def _neighbourhood(img: GrayImage, center: tuple[int, int]) -> np.ndarray:
    m, n = img.shape
    i, j = center
    if not (2 <= i <= m - 1 and 2 <= j <= n - 1):
        raise IndexError(
            f"center {center} needs all 8 neighbours; valid rows 2..{m - 1}, columns 2..{n - 1}")
    return img.data[i - 2:i + 1, j - 2:j + 1]


def lbp_code(img: GrayImage, center: tuple[int, int], threshold: int = 0) -> int:
    """8-bit LBP code at the one-based ``center`` pixel."""
    (code,) = _lbp_images(_neighbourhood(img, center), threshold, None)
    return int(code[0, 0])


def cslbp_code(img: GrayImage, center: tuple[int, int], threshold: int = 0) -> int:
    """4-bit center-symmetric LBP code at the one-based ``center`` pixel."""
    (code,) = _cslbp_images(_neighbourhood(img, center), threshold, None)
    return int(code[0, 0])


def _as_spec(spec) -> DescriptorSpec:
    if isinstance(spec, str):
        return DescriptorSpec(spec)
    return spec


def _check_size(shape, spec: DescriptorSpec) -> None:
    need = spec.min_size
    if shape[0] < need or shape[1] < need:
        raise DimensionError(
            f"{spec.kind} needs an image of at least {need}x{need}, got {shape[0]}x{shape[1]}")


def feature_images(img: GrayImage, spec="lqpat",
                   counter: Optional[ComparisonCounter] = None) -> FeatureImageSet:
    """Compute the code images of ``img``.

    LQPAT yields the A- and B-images, each ``(M-3) x (N-3)``; LBP and CSLBP
    yield a single ``(M-2) x (N-2)`` image. Border pixels without a full
    neighbourhood are skipped.
    """
    spec = _as_spec(spec)
    _check_size(img.shape, spec)
    images, _ = _REGISTRY[spec.kind].encode(img.data, spec.threshold, counter)
    for im in images:
        im.setflags(write=False)
    return FeatureImageSet(tuple(images), spec.kind)


def histogram(fis: FeatureImageSet) -> np.ndarray:
    """Concatenated per-image code histograms (raw counts)."""
    nbins = _REGISTRY[fis.descriptor].codes_per_image
    return np.concatenate([np.bincount(im.ravel(), minlength=nbins) for im in fis.images])


def extract(img: GrayImage, spec="lqpat",
            counter: Optional[ComparisonCounter] = None) -> FeatureVector:
    """Feature vector of ``img``: 512 bins for LQPAT, 256 for LBP, 16 for CSLBP.

    With ``spec.normalize`` the whole vector is scaled to sum to one.
    """
    spec = _as_spec(spec)
    _check_size(img.shape, spec)
    desc = _REGISTRY[spec.kind]
    _, bins = desc.encode(img.data, spec.threshold, counter, spec.normalize)
    if bins.shape[0] != desc.bin_count:
        raise AssertionError(f"{spec.kind} produced {bins.shape[0]} bins, expected {desc.bin_count}")
    return FeatureVector(bins, spec.kind, spec.normalize)


def count_comparisons(spec, shape: tuple[int, int]) -> int:
    """Number of pixel comparisons a full extraction of an ``M x N`` image performs."""
    spec = _as_spec(spec)
    _check_size(shape, spec)
    desc = _REGISTRY[spec.kind]
    m, n = shape
    windows = (m - desc.border) * (n - desc.border)
    return desc.comparisons_per_window * windows
