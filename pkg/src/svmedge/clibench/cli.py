"""``svmedge`` command line: train, detect, compare, bench, gen-patches.

Exit codes: 0 success, 2 invalid arguments, 3 unreadable/unwritable or
malformed input file, 4 solver did not converge.
"""
from __future__ import annotations

import argparse
import glob
import os
import sys
import time

import numpy as np

from ..edgedetect import (METHODS, DetectorConfig, EdgeMap, detect, edge_metrics,
                          save_edge_map, save_raw_text)
from ..imagecore import ImageFormatError, load_image, save_pgm
from ..kernels import KernelSpec
from ..svmcore import ConvergenceError, decision_values, train
from ..synthdata import ORIENTATIONS, PatchSpec, build_training_set, default_patch_specs, generate_patch
from .modelfile import ModelFormatError, load_model, save_model
from .report import TABLE_METHODS, run_bench

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _methods(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad or text!r}; choose from {','.join(METHODS)}")
    return names


def _add_patch_args(p):
    p.add_argument("--patch-size", type=int, default=16)
    p.add_argument("--mean-diff", type=float, default=0.25)
    p.add_argument("--noise-amp", type=float, default=0.03)
    p.add_argument("--dark-mean", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)


def _add_train_args(p):
    p.add_argument("--c", type=_positive(float), default=10.0, help="box constraint C (default 10)")
    p.add_argument("--sigma", type=_positive(float), default=0.6, help="kernel width (default 0.6)")
    p.add_argument("--kernel", choices=("rbf3", "centroid"), default="rbf3")
    p.add_argument("--tol", type=_positive(float), default=1e-3)
    p.add_argument("--neg-ratio", type=_positive(float), default=3.0)
    _add_patch_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svmedge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on synthetic patches")
    _add_train_args(p)
    p.add_argument("--output", "--model", dest="output", required=True, help="model file to write")

    p = sub.add_parser("detect", help="run the SVM detector on one image")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="edge map PGM")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--truth", help="ground-truth edge PGM; prints F1")
    p.add_argument("--raw", help="also write raw decision values as text")
    p.add_argument("--workers", type=_positive(int), default=1)

    p = sub.add_parser("compare", help="run several detectors on one image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output prefix; writes <prefix>_<method>.pgm")
    p.add_argument("--methods", type=_methods, default=list(TABLE_METHODS))
    p.add_argument("--model", help="model file (trained with defaults if omitted)")
    p.add_argument("--threshold", type=float, help="svm cutoff / sobel fraction")
    p.add_argument("--truth")
    p.add_argument("--workers", type=_positive(int), default=1)
    _add_train_args(p)

    p = sub.add_parser("bench", help="time detectors over images")
    p.add_argument("--input", nargs="+", required=True, help="image files or glob patterns")
    p.add_argument("--output", required=True, help="report prefix; writes <prefix>.csv and <prefix>.txt")
    p.add_argument("--methods", type=_methods, default=list(TABLE_METHODS))
    p.add_argument("--model")
    p.add_argument("--truth", nargs="+", help="ground-truth PGMs, one per input")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=_positive(int), default=1)
    _add_train_args(p)

    p = sub.add_parser("gen-patches", help="write synthetic patches and their ground truth")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--orientations", default=",".join(ORIENTATIONS))
    p.add_argument("--inverted", action="store_true")
    _add_patch_args(p)
    return parser


def _patch_overrides(args):
    return dict(size=args.patch_size, dark_mean=args.dark_mean,
                mean_diff=args.mean_diff, noise_amp=args.noise_amp)


def _validate_patch_args(args):
    try:
        PatchSpec(**_patch_overrides(args))
    except ValueError as exc:
        raise CliError(f"invalid patch parameters: {exc}", EXIT_VALIDATION) from None


def _train_model(args, out=None):
    out = out or sys.stdout
    specs = default_patch_specs(args.seed, **_patch_overrides(args))
    ts = build_training_set(specs, neg_ratio=args.neg_ratio, seed=args.seed)
    meta = dict(seed=args.seed, neg_ratio=args.neg_ratio, tol=args.tol,
                **{f"patch_{k}": v for k, v in _patch_overrides(args).items()})
    try:
        model = train(ts, KernelSpec(args.kernel, args.sigma), args.c, args.tol, meta=meta)
    except ConvergenceError as exc:
        raise CliError(f"training failed: {exc} (KKT residual {exc.solution.kkt_residual:.3g})",
                       EXIT_CONVERGENCE) from None
    acc = float(np.mean(np.where(decision_values(model, ts.vectors) > 0, 1, -1) == ts.labels))
    print(f"training samples: {len(ts)} ({ts.n_positive} edge, {ts.n_negative} non-edge)", file=out)
    print(f"support vectors: {model.n_support}", file=out)
    print(f"training accuracy: {acc:.4f}", file=out)
    print(f"KKT residual: {model.training_meta['kkt_residual']:.3g}", file=out)
    return model


def _load_model(path):
    try:
        return load_model(path)
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc.strerror or exc}", EXIT_IO) from None
    except ModelFormatError as exc:
        raise CliError(f"bad model file {path}: {exc}", EXIT_IO) from None


def _load_image(path):
    try:
        return load_image(path)
    except OSError as exc:
        raise CliError(f"cannot read image {path}: {exc.strerror or exc}", EXIT_IO) from None
    except (ImageFormatError, ValueError) as exc:
        raise CliError(f"bad image {path}: {exc}", EXIT_IO) from None


def _load_truth(path, shape):
    truth = EdgeMap.from_image(_load_image(path))
    if truth.edges.shape != shape:
        raise CliError(f"truth {path} has size {truth.width}x{truth.height}, image differs", EXIT_VALIDATION)
    return truth


def _detector_config(method, threshold):
    try:
        if method == "canny" or threshold is None:
            return DetectorConfig(method)
        return DetectorConfig(method, threshold=threshold)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from None


def cmd_train(args):
    _validate_patch_args(args)
    model = _train_model(args)
    save_model(model, args.output)
    print(f"model written to {args.output}")


def cmd_detect(args):
    model = _load_model(args.model)
    image = _load_image(args.input)
    cfg = _detector_config("svm", args.threshold)
    t0 = time.perf_counter()
    emap = detect(image, cfg, model=model, workers=args.workers)
    elapsed = time.perf_counter() - t0
    save_edge_map(emap, args.output)
    if args.raw:
        save_raw_text(emap, args.raw)
    print(f"elapsed: {elapsed:.4f} s")
    print(f"edge pixels: {emap.count}")
    if args.truth:
        s = edge_metrics(emap, _load_truth(args.truth, emap.edges.shape), 1)
        print(f"precision {s.precision:.4f}  recall {s.recall:.4f}  f1 {s.f1:.4f}")


def cmd_compare(args):
    _validate_patch_args(args)
    image = _load_image(args.input)
    truth = _load_truth(args.truth, image.shape) if args.truth else None
    model = None
    if "svm" in args.methods:
        model = _load_model(args.model) if args.model else _train_model(args)
    print(f"{'method':<6}  {'seconds':>8}  {'edges':>7}" + ("  precision  recall      f1" if truth else ""))
    for method in args.methods:
        cfg = _detector_config(method, args.threshold)
        t0 = time.perf_counter()
        emap = detect(image, cfg, model=model, workers=args.workers)
        elapsed = time.perf_counter() - t0
        save_edge_map(emap, f"{args.output}_{method}.pgm")
        line = f"{method:<6}  {elapsed:>8.4f}  {emap.count:>7d}"
        if truth is not None:
            s = edge_metrics(emap, truth, 1)
            line += f"  {s.precision:>9.4f}  {s.recall:>6.4f}  {s.f1:>6.4f}"
        print(line)


def cmd_bench(args):
    _validate_patch_args(args)
    if args.repeats < 3:
        raise CliError("--repeats must be at least 3", EXIT_VALIDATION)
    paths = []
    for pattern in args.input:
        matches = sorted(glob.glob(pattern))
        paths.extend(matches or [pattern])
    if args.truth and len(args.truth) != len(paths):
        raise CliError("--truth needs one file per input image", EXIT_VALIDATION)
    images = {}
    for path in paths:
        name = os.path.splitext(os.path.basename(path))[0]
        images[name] = _load_image(path)
    truths = {}
    for (name, img), tpath in zip(images.items(), args.truth or []):
        truths[name] = _load_truth(tpath, img.shape)
    model = None
    if "svm" in args.methods:
        model = _load_model(args.model) if args.model else _train_model(args)
    report = run_bench(images, args.methods, model=model, repeats=args.repeats,
                       truths=truths, workers=args.workers)
    text = report.to_text()
    with open(args.output + ".csv", "w") as fh:
        fh.write(report.to_csv())
    with open(args.output + ".txt", "w") as fh:
        fh.write(text)
    sys.stdout.write(text)


def cmd_gen_patches(args):
    _validate_patch_args(args)
    orients = [o.strip() for o in args.orientations.split(",") if o.strip()]
    bad = [o for o in orients if o not in ORIENTATIONS]
    if bad:
        raise CliError(f"unknown orientation(s) {bad}", EXIT_VALIDATION)
    os.makedirs(args.output, exist_ok=True)
    for k, orient in enumerate(orients):
        spec = PatchSpec(orientation=orient, seed=args.seed + k, inverted=args.inverted,
                         **_patch_overrides(args))
        patch = generate_patch(spec)
        save_pgm(patch.image, os.path.join(args.output, f"{orient}.pgm"))
        save_edge_map(EdgeMap(patch.edge_mask), os.path.join(args.output, f"{orient}_truth.pgm"))
        print(f"{orient}: {int(patch.edge_mask.sum())} edge pixels")


COMMANDS = {"train": cmd_train, "detect": cmd_detect, "compare": cmd_compare,
            "bench": cmd_bench, "gen-patches": cmd_gen_patches}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except CliError as exc:
        print(f"svmedge {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"svmedge {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
