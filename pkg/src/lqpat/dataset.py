"""
Labeled image collections and the feature CSV store.

A collection lives on disk as ``root/<class_label>/<image files>``. Flat
trees can instead carry a ``labels.csv`` manifest with ``path,label`` rows,
paths relative to ``root``.

The feature store is a CSV file::

    # lqpat-features 1 descriptor=lqpat
    id,label,normalized,b0,b1,...,b511
    s01/img1.pgm,s01,true,0.00123,...
"""

from __future__ import annotations

import csv
import hashlib
import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._parallel import parallel_map
from .descriptors import ComparisonCounter, DescriptorSpec, FeatureVector, extract
from .image_core import GrayImage, ImageDecodeError, read_image

FORMAT_NAME = "lqpat-features"
FORMAT_VERSION = 1
MANIFEST_NAME = "labels.csv"


class FeatureFileError(ValueError):
    """Base class for feature store load failures."""


class FormatVersionError(FeatureFileError):
    pass


class TruncatedFileError(FeatureFileError):
    pass


class InconsistentBinCountError(FeatureFileError):
    pass


@dataclass(frozen=True)
class Record:
    id: str
    label: str
    payload: Union[GrayImage, FeatureVector]


@dataclass
class LabeledDataset:
    """Ordered ``(id, label, payload)`` records."""

    records: list
    descriptor: Optional[str] = None
    class_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.records = list(self.records)
        seen = set()
        index: dict[str, list[str]] = {}
        for r in self.records:
            if r.id in seen:
                raise ValueError(f"duplicate record id {r.id!r}")
            if not r.label:
                raise ValueError(f"record {r.id!r} has an empty label")
            seen.add(r.id)
            index.setdefault(r.label, []).append(r.id)
        self.class_index = index

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.records]

    @property
    def classes(self) -> list[str]:
        return list(self.class_index)

    def matrix(self) -> np.ndarray:
        """Feature vectors stacked row-wise."""
        return np.vstack([r.payload.bins for r in self.records])

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return self.records == other.records


def _image_files(root: Path):
    manifest = root / MANIFEST_NAME
    if manifest.is_file():
        with open(manifest, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
        if rows and [c.strip().lower() for c in rows[0][:2]] == ["path", "label"]:
            rows = rows[1:]
        entries = sorted((Path(p.strip()).as_posix(), lab.strip()) for p, lab, *_ in rows)
        return [(root / p, p, lab) for p, lab in entries]
    out = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        for f in sorted(class_dir.iterdir()):
            if f.is_file() and not f.name.startswith("."):
                out.append((f, f.relative_to(root).as_posix(), class_dir.name))
    return sorted(out, key=lambda t: t[1])


def scan(root) -> LabeledDataset:
    """Read every decodable image under ``root``.

    Labels come from the immediate class directory (or ``labels.csv``), ids
    are POSIX paths relative to ``root``, and records are in lexicographic
    path order. Files that fail to decode are skipped with a warning.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    records = []
    for path, rel, label in _image_files(root):
        try:
            img = read_image(path)
        except (ImageDecodeError, FileNotFoundError) as exc:
            warnings.warn(f"skipping {rel}: {exc}", stacklevel=2)
            continue
        records.append(Record(rel, label, img))
    if not records:
        raise ValueError(f"no images found under {root}")
    return LabeledDataset(records)


def extract_all(ds: LabeledDataset, spec: DescriptorSpec,
                counter: Optional[ComparisonCounter] = None,
                workers: Optional[int] = None) -> LabeledDataset:
    """Apply :func:`~lqpat.descriptors.extract` to every record, keeping order.

    Images below the descriptor's minimum size are dropped with a warning.
    """
    if isinstance(spec, str):
        spec = DescriptorSpec(spec)
    need = spec.min_size
    keep = []
    for r in ds.records:
        h, w = r.payload.shape
        if h < need or w < need:
            warnings.warn(f"excluding {r.id}: {h}x{w} is below the {need}x{need} minimum "
                          f"for {spec.kind}", stacklevel=2)
        else:
            keep.append(r)
    if not keep:
        raise ValueError("every record was excluded; nothing to extract")
    vecs = parallel_map(lambda r: extract(r.payload, spec, counter), keep, workers)
    return LabeledDataset([Record(r.id, r.label, v) for r, v in zip(keep, vecs)], spec.kind)


def _fmt_bin(x: float, normalized: bool) -> str:
    if not normalized and float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def dumps_features(ds: LabeledDataset) -> str:
    """Serialise a feature dataset to the CSV store format."""
    if len(ds) == 0:
        raise ValueError("refusing to save an empty feature store")
    k = ds.records[0].payload.bin_count
    buf = io.StringIO()
    buf.write(f"# {FORMAT_NAME} {FORMAT_VERSION} descriptor={ds.descriptor or ''}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "label", "normalized"] + [f"b{i}" for i in range(k)])
    for r in ds.records:
        v = r.payload
        if v.bin_count != k:
            raise InconsistentBinCountError(f"inconsistent bin count: {r.id} has {v.bin_count}, expected {k}")
        writer.writerow([r.id, r.label, "true" if v.normalized else "false"]
                        + [_fmt_bin(x, v.normalized) for x in v.bins])
    return buf.getvalue()


def save_features(ds: LabeledDataset, path) -> None:
    text = dumps_features(ds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def loads_features(text: str) -> LabeledDataset:
    """Parse the CSV store format; raises a :class:`FeatureFileError` subclass on bad input."""
    lines = text.split("\n")
    head = lines[0].split() if lines else []
    if len(head) < 3 or head[0] != "#" or head[1] != FORMAT_NAME:
        raise FormatVersionError("missing feature store header line")
    if head[2] != str(FORMAT_VERSION):
        raise FormatVersionError(f"unsupported feature store version {head[2]} (expected {FORMAT_VERSION})")
    opts = dict(h.split("=", 1) for h in head[3:] if "=" in h)
    if not text.endswith("\n") or len(lines) < 3:
        raise TruncatedFileError("feature store is truncated")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    header, body = rows[0], rows[1:]
    if header[:3] != ["id", "label", "normalized"]:
        raise FeatureFileError(f"unexpected column header {header[:3]}")
    k = len(header) - 3
    if k < 1 or header[3:] != [f"b{i}" for i in range(k)]:
        raise InconsistentBinCountError("inconsistent bin count in column header")
    if not body:
        raise TruncatedFileError("feature store has no records")
    records = []
    for line_no, row in enumerate(body, start=3):
        if len(row) != k + 3:
            raise InconsistentBinCountError(
                f"inconsistent bin count on line {line_no}: {len(row) - 3} bins, expected {k}")
        if row[2] not in ("true", "false"):
            raise FeatureFileError(f"line {line_no}: normalized must be true or false")
        try:
            bins = np.array([float(x) for x in row[3:]])
        except ValueError as exc:
            raise FeatureFileError(f"line {line_no}: {exc}") from None
        records.append(Record(row[0], row[1], FeatureVector(bins, opts.get("descriptor") or "",
                                                            row[2] == "true")))
    return LabeledDataset(records, opts.get("descriptor") or None)


def load_features(path) -> LabeledDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return loads_features(fh.read())


def digest(path) -> str:
    """SHA-256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
