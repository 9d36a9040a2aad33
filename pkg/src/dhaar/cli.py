"""Command-line surface: train, classify, detect, eval, synth, inspect.

Exit codes: 0 success, 2 usage or input error, 3 data-shape error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import detection, evaluation, locality, models, reports, synth, training
from .filters import feature_value
from .imaging import ImageFormatError, load_gray, load_rgb, prepare

IMAGE_EXTENSIONS = {".png", ".pgm", ".jpg", ".jpeg"}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SHAPE = 3


class UsageError(Exception):
    pass


class ShapeError(Exception):
    pass


def discover_images(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    return sorted(
        p for p in directory.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS
    )


def load_directory(directory, side: int, apply_equalize: bool) -> list:
    """Load every discoverable image, skipping undecodable files with a warning."""
    paths = discover_images(directory)
    if not paths:
        raise UsageError(f"no images found in {directory}")
    vectors = []
    for p in paths:
        try:
            vectors.append(prepare(load_gray(p), side, apply_equalize))
        except (ImageFormatError, OSError) as exc:
            print(f"warning: skipping {p}: {exc}", file=sys.stderr)
    if not vectors:
        raise UsageError(f"no decodable images in {directory}")
    return vectors


def _training_config(args, n_black=None, n_white=None) -> training.TrainingConfig:
    if args.n is not None:
        if args.n % 2:
            raise UsageError("--n must be even (split equally black/white)")
        n_black = n_white = args.n // 2
    return training.TrainingConfig(
        n_black=n_black,
        n_white=n_white,
        update_rule=args.rule,
        epsilon=args.eps,
        max_iterations=args.max_iter,
    )


def _train_outputs(classifier, history, out_path: Path, metadata: dict) -> None:
    models.save_model(classifier, out_path, metadata)
    history_csv = out_path.with_name(out_path.stem + "_history.csv")
    reports.save_history_csv(history, history_csv)
    reports.save_history_plot(history, history_csv.with_suffix(".png"))


def cmd_train(args) -> int:
    faces = load_directory(args.faces, args.side, not args.no_equalize)
    clutters = load_directory(args.clutter, args.side, not args.no_equalize)
    out = Path(args.out)
    base_meta = {
        "rule": args.rule,
        "epsilon": args.eps,
        "max_iterations": args.max_iter,
        "equalize": not args.no_equalize,
    }

    if args.region:
        region = locality.parse_region_spec(args.region, args.side, args.side)
        if isinstance(region, list):
            # grid spec: one model per cell plus a per-region error table
            rows = []
            for reg in region:
                cfg = _training_config(args)
                classifier, history = locality.train_local(faces, clutters, reg, cfg)
                cell_out = out.with_name(f"{out.stem}_{reg.name}{out.suffix}")
                meta = dict(base_meta, region=f"{args.region}:{reg.name}",
                            iterations=len(history))
                _train_outputs(classifier, history, cell_out, meta)
                last = history[-1]
                rows.append((reg.name, last.fp_rate, last.fn_rate))
            table = out.with_name(out.stem + "_regions.csv")
            with open(table, "w") as fh:
                fh.write("region,fp_rate,fn_rate\n")
                for name, fp, fn in rows:
                    fh.write(f"{name},{fp!r},{fn!r}\n")
            print(f"wrote {len(rows)} regional models next to {out}")
            return EXIT_OK
        cfg = _training_config(args)
        classifier, history = locality.train_local(faces, clutters, region, cfg)
        meta = dict(base_meta, region=args.region, iterations=len(history))
    else:
        cfg = _training_config(args)
        classifier, history = training.train(faces, clutters, cfg)
        meta = dict(base_meta, region=None, iterations=len(history))

    _train_outputs(classifier, history, out, meta)
    last = history[-1]
    print(
        f"trained N={classifier.mask.n_engaged} filter in {len(history)} iterations "
        f"(fp={last.fp_rate:.4f}, fn={last.fn_rate:.4f}); model -> {out}"
    )
    return EXIT_OK


def cmd_classify(args) -> int:
    if len(args.models) not in (1, 3):
        raise UsageError("classify takes exactly 1 or 3 model files")
    loaded = [models.load_model(p)[0] for p in args.models]
    vec = prepare(load_gray(args.image), args.side, not args.no_equalize)
    dim = loaded[0].mask.width * loaded[0].mask.height
    if len(vec) != dim:
        raise ShapeError(f"pipeline output length {len(vec)} != model dim {dim}")

    margins = [feature_value(c.mask, c.weights, vec) - c.theta for c in loaded]
    label = "face" if all(m > 0 for m in margins) else "clutter"
    print(label)
    for c, m in zip(loaded, margins):
        print(f"N={c.mask.n_engaged}: margin {m:+.6f}")
    return EXIT_OK


def cmd_detect(args) -> int:
    for p in args.models:
        if not Path(p).is_file():
            raise UsageError(f"model file not found: {p}")
    classifiers = tuple(models.load_model(p)[0] for p in args.models)
    gray = load_gray(args.picture)
    rgb = None if args.no_skin else load_rgb(args.picture)
    dets = detection.detect(
        gray,
        classifiers,
        rgb=rgb,
        min_side=args.min_side,
        max_side=args.max_side,
        scale_step=args.scale_step,
        stride_frac=args.stride_frac,
        support_frac=args.support_frac,
        apply_equalize=not args.no_equalize,
        use_skin=not args.no_skin,
    )
    payload = json.dumps(
        [{"side": d.side, "support": d.support, "x": d.x, "y": d.y} for d in dets],
        indent=2,
        sort_keys=True,
    ) + "\n"
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)
    if args.annotate:
        reports.save_annotated_png(gray.pixels, dets, args.annotate, rgb=rgb)
    return EXIT_OK


def cmd_eval(args) -> int:
    face_vecs = load_directory(args.faces, args.side, not args.no_equalize)
    clutter_vecs = load_directory(args.clutter, args.side, not args.no_equalize)
    ds = evaluation.LabeledDataset(
        list(face_vecs) + list(clutter_vecs),
        [evaluation.FACE] * len(face_vecs) + [evaluation.CLUTTER] * len(clutter_vecs),
    )
    train_ds, test_ds = evaluation.split(ds, args.train_frac, args.seed)

    cfg = _training_config(args)
    classifier, history = training.train(train_ds.faces, train_ds.clutters, cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    models.save_model(classifier, out_dir / "model.json", {
        "rule": args.rule, "epsilon": args.eps, "iterations": len(history),
        "train_frac": args.train_frac, "seed": args.seed, "region": None,
    })
    reports.save_history_csv(history, out_dir / "history.csv")
    reports.save_history_plot(history, out_dir / "history.png")

    g = evaluation.scores(classifier, test_ds)
    points = evaluation.roc(g, test_ds.labels)
    reports.save_roc_csv(points, out_dir / "roc.csv")
    reports.save_roc_plot(points, out_dir / "roc.png")

    result = evaluation.confusion(classifier, test_ds)
    summary = {
        "accuracy": result.accuracy,
        "auc": evaluation.auc(points),
        "fn_rate": result.fn_rate,
        "fp_rate": result.fp_rate,
    }
    reports.save_summary_json(summary, out_dir / "summary.json")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_synth(args) -> int:
    face_dir, clutter_dir = synth.write_dataset(
        args.kind, args.count, args.seed, args.out_dir
    )
    print(f"wrote {args.count} faces to {face_dir} and {args.count} clutters "
          f"to {clutter_dir}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    classifier, _ = models.load_model(args.model)
    reports.save_filter_png(classifier, args.out)
    print(f"rendered N={classifier.mask.n_engaged} filter -> {args.out}")
    return EXIT_OK


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=512,
                   help="total engaged pixels, split equally (default 512)")
    p.add_argument("--rule", choices=training.UPDATE_RULES, default="sigmoid")
    p.add_argument("--eps", type=float, default=20.0,
                   help="sigmoid shape parameter (default 20)")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--side", type=int, default=64,
                   help="working image side length (default 64)")
    p.add_argument("--no-equalize", action="store_true",
                   help="skip histogram equalization")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dhaar",
        description="Fully dispersed Haar-like filters: train, classify, detect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a dispersed filter on two image dirs")
    p.add_argument("--faces", required=True)
    p.add_argument("--clutter", required=True)
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--region", help="grid:RxC, band:r0:r1 or rects:x0,y0,x1,y1[;...]")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify one image with 1 or 3 models")
    p.add_argument("models", nargs="+", help="1 model, or 3 for the composite rule")
    p.add_argument("image")
    p.add_argument("--side", type=int, default=64)
    p.add_argument("--no-equalize", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("detect", help="find faces in a picture with 3 models")
    p.add_argument("models", nargs=3, metavar="MODEL")
    p.add_argument("picture")
    p.add_argument("--min-side", type=int, default=48)
    p.add_argument("--max-side", type=int, default=None)
    p.add_argument("--scale-step", type=float, default=1.25)
    p.add_argument("--stride-frac", type=float, default=0.1)
    p.add_argument("--support-frac", type=float, default=0.02)
    p.add_argument("--no-skin", action="store_true", help="disable skin prescreen")
    p.add_argument("--no-equalize", action="store_true")
    p.add_argument("--out", help="detections JSON path (default: stdout)")
    p.add_argument("--annotate", help="write annotated PNG here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="70/30-style split, train, ROC and summary")
    p.add_argument("--faces", required=True)
    p.add_argument("--clutter", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic face/clutter dataset")
    p.add_argument("kind", choices=synth.KINDS)
    p.add_argument("count", type=int)
    p.add_argument("seed", type=int)
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("inspect", help="render a model's filter mask as a PNG")
    p.add_argument("model")
    p.add_argument("out")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (ImageFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
