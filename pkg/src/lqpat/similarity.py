"""Chi-square histogram distance and exhaustive nearest-neighbour ranking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ._parallel import parallel_map
from .image_core import DimensionError


def _bins(x) -> np.ndarray:
    return np.asarray(getattr(x, "bins", x), dtype=np.float64)


def chi_square(x, y) -> float:
    """``0.5 * sum((x - y)**2 / (x + y))``; bins with ``x + y == 0`` add nothing."""
    x, y = _bins(x), _bins(y)
    if x.shape != y.shape:
        raise DimensionError(f"bin count mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(_chi_square_rows(x, y[None, :])[0])


def _chi_square_rows(x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    num = (ys - x) ** 2
    den = ys + x
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return 0.5 * terms.sum(axis=1)


def chi_square_to_gallery(probe, gallery: np.ndarray) -> np.ndarray:
    """Distances from one probe to every row of a ``(n, bins)`` gallery matrix."""
    x = _bins(probe)
    gallery = np.asarray(gallery, dtype=np.float64)
    if gallery.ndim != 2 or gallery.shape[1] != x.shape[0]:
        raise DimensionError(f"gallery shape {gallery.shape} does not match {x.shape[0]} bins")
    return _chi_square_rows(x, gallery)


def distance_matrix(features: np.ndarray, workers: int | None = None) -> np.ndarray:
    """All-pairs chi-square distances, computed one probe row at a time.

    Every row goes through the same code path whatever the worker count, so
    the matrix is bit-identical across thread settings.
    """
    feats = np.asarray(features, dtype=np.float64)
    rows = parallel_map(lambda k: _chi_square_rows(feats[k], feats), range(len(feats)), workers)
    return np.vstack(rows) if rows else np.zeros((0, 0))


@dataclass(frozen=True, eq=False)
class RankedRetrieval:
    """Gallery entries sorted by distance to a query; ranks are one-based."""

    query_id: Hashable
    ids: tuple
    distances: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        return np.arange(1, len(self.ids) + 1)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, RankedRetrieval):
            return NotImplemented
        return (self.query_id == other.query_id and self.ids == other.ids
                and np.array_equal(self.distances, other.distances))

    def __iter__(self):
        """Yield ``(gallery_id, distance, rank)`` triples."""
        for r, (gid, d) in enumerate(zip(self.ids, self.distances), start=1):
            yield gid, float(d), r


def rank_from_distances(query_id, ids: Sequence, distances) -> RankedRetrieval:
    distances = np.asarray(distances, dtype=np.float64)
    # stable: equal distances keep gallery order
    order = np.argsort(distances, kind="stable")
    return RankedRetrieval(query_id, tuple(ids[k] for k in order), distances[order])


def rank_gallery(probe, gallery: Sequence[tuple], query_id=None) -> RankedRetrieval:
    """Rank ``(id, vector)`` gallery entries by ascending chi-square distance to ``probe``."""
    if len(gallery) == 0:
        raise ValueError("gallery is empty")
    ids = [g[0] for g in gallery]
    mat = np.vstack([_bins(g[-1]) for g in gallery])
    return rank_from_distances(query_id, ids, chi_square_to_gallery(probe, mat))


def classify_1nn(probe, gallery: Sequence[tuple]):
    """Label of the nearest ``(id, label, vector)`` gallery entry.

    Ties go to the entry listed first.
    """
    if len(gallery) == 0:
        raise ValueError("gallery is empty")
    mat = np.vstack([_bins(g[2]) for g in gallery])
    d = chi_square_to_gallery(probe, mat)
    return gallery[int(np.argmin(d))][1]
