"""
Retrieval and recognition metrics.

Every function that takes ``features`` and ``labels`` treats the collection
as a closed set: each image is used as a query (probe) against all the
others, ranked by chi-square distance with ties resolved by dataset order.

ANMRR follows the MPEG-7 convention. For a query with ``NG`` same-class
images and ``GTM`` the largest ``NG`` over all queries::

    K     = min(4 * NG, 2 * GTM)
    rank' = rank if rank <= K else 1.25 * K
    AVR   = mean(rank') over the NG relevant images
    MRR   = AVR - 0.5 - NG / 2
    NMRR  = MRR / (1.25 * K - 0.5 - NG / 2)

and ANMRR is the mean NMRR over queries.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .descriptors import FeatureImageSet
from .similarity import RankedRetrieval, distance_matrix

CSV_FLOAT = "{:.9g}"


# ---------------------------------------------------------------------------
# result containers

@dataclass(frozen=True)
class RetrievalCurve:
    """Metric value for each number of retrieved images ``n = 1..n_max``."""

    kind: str
    n: np.ndarray
    values: np.ndarray

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.n, self.values)]

    def __getitem__(self, n: int) -> float:
        return float(self.values[n - 1])


@dataclass(frozen=True)
class CmcCurve:
    """Identification rate (fraction in [0, 1]) at each rank ``1..max_rank``."""

    ranks: np.ndarray
    rates: np.ndarray

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.ranks, self.rates)]

    def __getitem__(self, rank: int) -> float:
        return float(self.rates[rank - 1])


@dataclass(frozen=True)
class CrossValConfig:
    probe_fraction: float
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.probe_fraction < 1.0:
            raise ValueError("probe_fraction must lie strictly between 0 and 1")
        if self.folds < 1:
            raise ValueError("folds must be a positive integer")
        if not -2**63 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class CrossValResult:
    config: CrossValConfig
    fold_rates: tuple
    probe_sets: tuple

    @property
    def mean_rate(self) -> float:
        return math.fsum(self.fold_rates) / len(self.fold_rates)


@dataclass
class QueryRow:
    query_id: object
    label: object
    precision: np.ndarray
    recall: np.ndarray
    nmrr: float


@dataclass
class EvaluationReport:
    """Per-query retrieval rows plus their aggregates."""

    rows: list
    arp: RetrievalCurve
    arr: RetrievalCurve
    anmrr: float
    averaging: str = "macro"
    recognition_rate: Optional[float] = None
    cmc: Optional[CmcCurve] = None
    provenance: dict = field(default_factory=dict)

    def validate(self) -> list[str]:
        """Structural checks; returns a list of violations (empty when sound)."""
        problems = _curve_problems(self.arp) + _curve_problems(self.arr)
        if np.any(np.diff(self.arr.values) < 0):
            problems.append("ARR decreases with n")
        if not 0.0 <= self.anmrr <= 1.0:
            problems.append(f"ANMRR {self.anmrr} outside [0, 1]")
        if self.cmc is not None:
            problems += validate_cmc(self.cmc, self.recognition_rate)
        return problems


def _curve_problems(curve: RetrievalCurve) -> list[str]:
    if np.any(curve.values < 0) or np.any(curve.values > 1):
        return [f"{curve.kind} has values outside [0, 1]"]
    return []


def validate_cmc(curve: CmcCurve, recognition_rate: Optional[float] = None) -> list[str]:
    problems = []
    if np.any(np.diff(curve.rates) < 0):
        problems.append("CMC decreases with rank")
    if np.any(curve.rates < 0) or np.any(curve.rates > 1):
        problems.append("CMC has values outside [0, 1]")
    if recognition_rate is not None and len(curve.rates):
        if abs(curve.rates[0] * 100.0 - recognition_rate) > 1e-9:
            problems.append("CMC rank-1 value disagrees with the recognition rate")
    return problems


# ---------------------------------------------------------------------------
# input handling and ranking

def _unpack(features, labels=None, ids=None):
    if labels is None:
        records = getattr(features, "records", None)
        if records is None:
            raise TypeError("labels are required unless a LabeledDataset is passed")
        ids = [r.id for r in records]
        labels = [r.label for r in records]
        features = [r.payload for r in records]
    mat = np.vstack([np.asarray(getattr(f, "bins", f), dtype=np.float64) for f in features])
    labels = list(labels)
    if len(labels) != mat.shape[0]:
        raise ValueError(f"{mat.shape[0]} feature vectors but {len(labels)} labels")
    ids = list(range(len(labels))) if ids is None else list(ids)
    return mat, np.asarray(labels, dtype=object), ids


def _leave_one_out(dist: np.ndarray) -> np.ndarray:
    """Per query, gallery indices (all other images) sorted by distance; ties keep dataset order."""
    n = dist.shape[0]
    order = np.empty((n, n - 1), dtype=np.intp)
    for q in range(n):
        gallery = np.delete(np.arange(n), q)
        order[q] = gallery[np.argsort(dist[q, gallery], kind="stable")]
    return order


class _ClosedSet:
    """Distances, leave-one-out rankings and relevance for one collection."""

    def __init__(self, features, labels=None, ids=None, workers=None):
        self.features, self.labels, self.ids = _unpack(features, labels, ids)
        self.n = len(self.labels)
        if self.n < 2:
            raise ValueError("need at least two images")
        self.dist = distance_matrix(self.features, workers)
        self.order = _leave_one_out(self.dist)
        self.relevant = self.labels[self.order] == self.labels[:, None]
        self.ng = self.relevant.sum(axis=1)

    def ranked(self, q: int) -> RankedRetrieval:
        idx = self.order[q]
        return RankedRetrieval(self.ids[q], tuple(self.ids[k] for k in idx), self.dist[q, idx])

    def usable_queries(self) -> np.ndarray:
        usable = np.flatnonzero(self.ng > 0)
        skipped = self.n - usable.size
        if skipped:
            warnings.warn(f"{skipped} query image(s) belong to single-image classes and are "
                          "excluded from retrieval metrics", stacklevel=3)
        if usable.size == 0:
            raise ValueError("no class has two or more images")
        return usable


# ---------------------------------------------------------------------------
# retrieval

def precision_recall_at(ranked: RankedRetrieval, labels: Mapping, query_class, n: int):
    """Precision and recall of the top ``n`` entries of ``ranked``.

    ``labels`` maps every image id of the collection (query included) to its
    class; recall is taken over the ``class size - 1`` images that share the
    query's class.
    """
    if not 1 <= n <= len(ranked):
        raise ValueError(f"cutoff n={n} outside 1..{len(ranked)}")
    hits = sum(labels[g] == query_class for g in ranked.ids[:n])
    total = sum(1 for k, c in labels.items() if c == query_class and k != ranked.query_id)
    precision = hits / n
    recall = hits / total if total else 0.0
    return precision, recall


def _class_mean(values: np.ndarray, labels: np.ndarray, averaging: str) -> np.ndarray:
    """Average rows of ``values`` per class then over classes (macro) or over rows (micro)."""
    if averaging == "micro":
        return values.mean(axis=0)
    if averaging != "macro":
        raise ValueError("averaging must be 'macro' or 'micro'")
    classes = list(dict.fromkeys(labels.tolist()))
    per_class = np.vstack([values[labels == c].mean(axis=0) for c in classes])
    return per_class.mean(axis=0)


def _precision_recall_table(cs: _ClosedSet, queries: np.ndarray, n_max: int):
    hits = np.cumsum(cs.relevant[queries, :n_max], axis=1)
    n = np.arange(1, n_max + 1)
    return hits / n, hits / cs.ng[queries, None]


def _check_n_max(cs: _ClosedSet, n_max: int) -> None:
    if not 1 <= n_max <= cs.n - 1:
        raise ValueError(f"n_max={n_max} outside 1..{cs.n - 1} (gallery size)")


def arp_arr(features, labels=None, n_max: int = 10, averaging: str = "macro",
            workers: Optional[int] = None) -> tuple[RetrievalCurve, RetrievalCurve]:
    """Average retrieval precision and recall curves for ``n = 1..n_max``.

    Each image queries all the others. ``macro`` averages queries within each
    class and then across classes; ``micro`` averages all queries directly.
    Queries from single-image classes are skipped with a warning.
    """
    cs = features if isinstance(features, _ClosedSet) else _ClosedSet(features, labels, workers=workers)
    _check_n_max(cs, n_max)
    queries = cs.usable_queries()
    prec, rec = _precision_recall_table(cs, queries, n_max)
    n = np.arange(1, n_max + 1)
    qlabels = cs.labels[queries]
    return (RetrievalCurve("arp", n, _class_mean(prec, qlabels, averaging)),
            RetrievalCurve("arr", n, _class_mean(rec, qlabels, averaging)))


def nmrr(relevant_ranks: Sequence[int], gtm: int) -> float:
    """Normalized modified retrieval rank of one query.

    ``relevant_ranks`` are the one-based ranks of the query's ``NG`` relevant
    images; ``gtm`` is the largest ``NG`` over the query set.
    """
    ranks = np.asarray(relevant_ranks, dtype=np.float64)
    ng = ranks.size
    if ng == 0:
        raise ValueError("query has no relevant images")
    k = min(4 * ng, 2 * gtm)
    penalised = np.where(ranks <= k, ranks, 1.25 * k)
    avr = penalised.sum() / ng
    mrr = avr - 0.5 - 0.5 * ng
    return float(mrr / (1.25 * k - 0.5 - 0.5 * ng))


def _nmrr_all(cs: _ClosedSet, queries: np.ndarray) -> np.ndarray:
    gtm = int(cs.ng[queries].max())
    return np.array([nmrr(np.flatnonzero(cs.relevant[q]) + 1, gtm) for q in queries])


def anmrr(features, labels=None, workers: Optional[int] = None) -> float:
    """Average NMRR over all queries that have at least one relevant image."""
    cs = features if isinstance(features, _ClosedSet) else _ClosedSet(features, labels, workers=workers)
    queries = cs.usable_queries()
    return float(_nmrr_all(cs, queries).mean())


def retrieval_report(features, labels=None, ids=None, n_max: int = 10,
                     averaging: str = "macro", workers: Optional[int] = None,
                     provenance: Optional[dict] = None) -> EvaluationReport:
    """Per-query precision/recall/NMRR rows and their ARP, ARR and ANMRR aggregates."""
    cs = _ClosedSet(features, labels, ids, workers)
    _check_n_max(cs, n_max)
    queries = cs.usable_queries()
    prec, rec = _precision_recall_table(cs, queries, n_max)
    scores = _nmrr_all(cs, queries)
    rows = [QueryRow(cs.ids[q], cs.labels[q], prec[k], rec[k], float(scores[k]))
            for k, q in enumerate(queries)]
    n = np.arange(1, n_max + 1)
    qlabels = cs.labels[queries]
    return EvaluationReport(
        rows=rows,
        arp=RetrievalCurve("arp", n, _class_mean(prec, qlabels, averaging)),
        arr=RetrievalCurve("arr", n, _class_mean(rec, qlabels, averaging)),
        anmrr=float(scores.mean()),
        averaging=averaging,
        provenance=dict(provenance or {}),
    )


# ---------------------------------------------------------------------------
# recognition

def _first_match_ranks(cs: _ClosedSet) -> np.ndarray:
    """One-based rank of the first same-class gallery image per probe (0 if none)."""
    has = cs.relevant.any(axis=1)
    return np.where(has, cs.relevant.argmax(axis=1) + 1, 0)


def recognition_rate(features, labels=None, workers: Optional[int] = None) -> float:
    """Leave-one-out 1NN recognition rate in percent: ``matches / N * 100``."""
    cs = features if isinstance(features, _ClosedSet) else _ClosedSet(features, labels, workers=workers)
    matches = int(np.count_nonzero(cs.relevant[:, 0]))
    return matches / cs.n * 100.0


def cmc(features, labels=None, max_rank: int = 10, workers: Optional[int] = None) -> CmcCurve:
    """Cumulative match curve: fraction of probes with a same-class image within rank ``r``."""
    cs = features if isinstance(features, _ClosedSet) else _ClosedSet(features, labels, workers=workers)
    if not 1 <= max_rank <= cs.n - 1:
        raise ValueError(f"max_rank={max_rank} outside 1..{cs.n - 1}")
    first = _first_match_ranks(cs)
    ranks = np.arange(1, max_rank + 1)
    counts = np.array([np.count_nonzero((first > 0) & (first <= r)) for r in ranks])
    return CmcCurve(ranks, counts / cs.n)


def _draw_split(rng: np.random.Generator, labels: np.ndarray, n_probe: int, max_tries: int = 100):
    n = labels.size
    for _ in range(max_tries):
        perm = rng.permutation(n)
        probes, gallery = np.sort(perm[:n_probe]), np.sort(perm[n_probe:])
        if set(labels[probes].tolist()) <= set(labels[gallery].tolist()):
            return probes, gallery
    warnings.warn(f"no split with every probe class present in the gallery after {max_tries} "
                  "draws; using the last draw", stacklevel=3)
    return probes, gallery


def cross_validate(features, labels=None, cfg: CrossValConfig = None,
                   workers: Optional[int] = None) -> CrossValResult:
    """Repeated random probe/gallery splits scored by 1NN recognition.

    Each fold draws ``round(probe_fraction * N)`` probes uniformly without
    replacement from ``numpy.random.Generator(PCG64(seed))``; folds share one
    generator, drawn in sequence. Draws in which some probe's class is missing
    from the gallery are rejected and redrawn. Returns the per-fold rates
    (percent) and their mean.
    """
    if cfg is None:
        raise ValueError("a CrossValConfig is required")
    mat, labs, _ = _unpack(features, labels)
    n = labs.size
    if n < 2:
        raise ValueError("need at least two images")
    n_probe = min(max(int(math.floor(cfg.probe_fraction * n + 0.5)), 1), n - 1)
    dist = distance_matrix(mat, workers)
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed) % 2**64))
    rates, splits = [], []
    for _ in range(cfg.folds):
        probes, gallery = _draw_split(rng, labs, n_probe)
        # argmin returns the first minimum, i.e. ties go to the earlier gallery image
        nearest = gallery[np.argmin(dist[np.ix_(probes, gallery)], axis=1)]
        matches = int(np.count_nonzero(labs[nearest] == labs[probes]))
        rates.append(matches / probes.size * 100.0)
        splits.append(tuple(int(p) for p in probes))
    return CrossValResult(cfg, tuple(rates), tuple(splits))


# ---------------------------------------------------------------------------
# entropy

def entropy_bits(codes) -> float:
    """Shannon entropy (bits) of the empirical distribution of integer codes."""
    codes = np.asarray(codes).ravel()
    if codes.size == 0:
        raise ValueError("empty code image")
    counts = np.bincount(codes.astype(np.int64))
    p = counts[counts > 0] / codes.size
    return float(max(0.0, -np.sum(p * np.log2(p))))


def feature_entropy(fis) -> float:
    """Mean entropy of the code images in a :class:`FeatureImageSet`."""
    images = fis.images if isinstance(fis, FeatureImageSet) else fis
    return float(np.mean([entropy_bits(im) for im in images]))


# ---------------------------------------------------------------------------
# CSV output

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return CSV_FLOAT.format(float(x))


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, int, np.number)) else v for v in row])


def write_curve(path, curve) -> None:
    if isinstance(curve, CmcCurve):
        write_csv(path, ("rank", "cmc"), curve.points)
    else:
        write_csv(path, ("n", curve.kind), curve.points)


def write_summary(path, metrics: Mapping[str, float]) -> None:
    write_csv(path, ("metric", "value"), [(k, float(v)) for k, v in metrics.items()])


def write_query_rows(path, report: EvaluationReport) -> None:
    n_max = len(report.arp.n)
    header = (["query_id", "class"] + [f"p@{k}" for k in range(1, n_max + 1)]
              + [f"r@{k}" for k in range(1, n_max + 1)] + ["nmrr"])
    rows = ([str(r.query_id), str(r.label), *map(float, r.precision), *map(float, r.recall), r.nmrr]
            for r in report.rows)
    write_csv(path, header, rows)
