"""Command-line entry point: ``lqpat {extract,retrieve,recognize,entropy}``."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import digest, extract_all, load_features, save_features, scan
from .descriptors import DESCRIPTORS, ComparisonCounter, DescriptorSpec, feature_images
from .evaluation import (
    CrossValConfig,
    cmc,
    cross_validate,
    feature_entropy,
    recognition_rate,
    retrieval_report,
    validate_cmc,
    write_csv,
    write_curve,
    write_query_rows,
    write_summary,
)


class ValidationFailed(RuntimeError):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path: Path, argv, started: str, **fields) -> None:
    manifest = {
        "command_line": ["lqpat", *argv],
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
        **fields,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _spec_dict(spec: DescriptorSpec) -> dict:
    return {"kind": spec.kind, "threshold": spec.threshold, "normalize": spec.normalize}


def _descriptor(name: str) -> str:
    if name not in DESCRIPTORS:
        raise argparse.ArgumentTypeError(
            f"unknown descriptor {name!r} (valid: {', '.join(DESCRIPTORS)})")
    return name


def _fractions(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad probe fraction list {text!r}") from None
    if not vals or any(not 0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("probe fractions must lie in (0, 1)")
    return vals


def cmd_extract(args, argv) -> int:
    started = _now()
    spec = DescriptorSpec(args.descriptor, args.threshold, not args.no_normalize)
    ds = scan(args.dataset)
    counter = ComparisonCounter()
    feats = extract_all(ds, spec, counter)
    out = Path(args.out)
    save_features(feats, out)
    print(f"records: {len(feats)}  classes: {len(feats.classes)}  "
          f"mean comparisons per image: {counter.total / len(feats):.1f}")
    _write_manifest(Path(f"{out}.manifest.json"), argv, started,
                    descriptor=_spec_dict(spec), seed=None, dataset_digest=digest(out),
                    outputs=[out.name])
    return 0


def cmd_retrieve(args, argv) -> int:
    started = _now()
    feats = load_features(args.features)
    report = retrieval_report(feats, n_max=args.top, averaging=args.averaging)
    problems = report.validate()
    if problems:
        raise ValidationFailed("; ".join(problems))
    p = args.out_prefix
    write_curve(f"{p}.arp.csv", report.arp)
    write_curve(f"{p}.arr.csv", report.arr)
    write_summary(f"{p}.summary.csv", {"anmrr": report.anmrr})
    write_query_rows(f"{p}.queries.csv", report)
    print(f"queries: {len(report.rows)}  ARP@{args.top}: {report.arp[args.top]:.4f}  "
          f"ARR@{args.top}: {report.arr[args.top]:.4f}  ANMRR: {report.anmrr:.4f}")
    _write_manifest(Path(f"{p}.manifest.json"), argv, started, descriptor=feats.descriptor,
                    seed=None, dataset_digest=digest(args.features), averaging=args.averaging)
    return 0


def cmd_recognize(args, argv) -> int:
    if args.cv and args.seed is None:
        raise SystemExit("error: --cv requires an explicit --seed")
    started = _now()
    feats = load_features(args.features)
    p = args.out_prefix
    if args.cv:
        rows, fold_rows = [], []
        for frac in args.probe_fraction:
            res = cross_validate(feats, cfg=CrossValConfig(frac, args.folds, args.seed))
            rows.append((frac, res.mean_rate))
            fold_rows += [(frac, k, r) for k, r in enumerate(res.fold_rates, start=1)]
            print(f"probe fraction {frac:g}: mean recognition rate {res.mean_rate:.2f}%")
        write_csv(f"{p}.cv.csv", ("probe_fraction", "mean_rate"), rows)
        write_csv(f"{p}.cv_folds.csv", ("probe_fraction", "fold", "rate"), fold_rows)
    else:
        rate = recognition_rate(feats)
        if args.cmc is not None:
            curve = cmc(feats, max_rank=args.cmc)
            problems = validate_cmc(curve, rate)
            if problems:
                raise ValidationFailed("; ".join(problems))
            write_curve(f"{p}.cmc.csv", curve)
        write_summary(f"{p}.summary.csv", {"recognition_rate": rate})
        print(f"recognition rate: {rate:.2f}%")
    _write_manifest(Path(f"{p}.manifest.json"), argv, started, descriptor=feats.descriptor,
                    seed=args.seed, dataset_digest=digest(args.features))
    return 0


def cmd_entropy(args, argv) -> int:
    started = _now()
    spec = DescriptorSpec(args.descriptor, args.threshold)
    ds = scan(args.dataset)
    rows = []
    for r in ds.records:
        if min(r.payload.shape) < spec.min_size:
            warnings.warn(f"excluding {r.id}: below the {spec.min_size}x{spec.min_size} minimum")
            continue
        rows.append((r.id, r.label, feature_entropy(feature_images(r.payload, spec))))
    if not rows:
        raise ValueError("every record was excluded")
    values = np.array([h for _, _, h in rows])
    if np.any(values < 0) or np.any(values > 8):
        raise ValidationFailed("entropy outside [0, 8]")
    out = Path(args.out)
    write_csv(out, ("id", "label", "entropy"), rows + [("__mean__", "", float(values.mean()))])
    print(f"images: {len(rows)}  mean entropy: {values.mean():.4f} bits")
    _write_manifest(Path(f"{out}.manifest.json"), argv, started, descriptor=_spec_dict(spec),
                    seed=None, dataset_digest=digest(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lqpat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature vectors for a labeled image tree")
    p.add_argument("--dataset", required=True)
    p.add_argument("--descriptor", required=True, type=_descriptor)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("retrieve", help="ARP/ARR curves and ANMRR")
    p.add_argument("--features", required=True)
    p.add_argument("--top", required=True, type=int)
    p.add_argument("--averaging", choices=("macro", "micro"), default="macro")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("recognize", help="1NN recognition rate, CMC, cross-validation")
    p.add_argument("--features", required=True)
    p.add_argument("--cmc", type=int, metavar="MAXRANK")
    p.add_argument("--cv", action="store_true")
    p.add_argument("--probe-fraction", type=_fractions, default=[0.2, 0.3, 0.4, 0.5, 0.6])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("entropy", help="mean feature-image entropy per image")
    p.add_argument("--dataset", required=True)
    p.add_argument("--descriptor", required=True, type=_descriptor)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (ValidationFailed, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
