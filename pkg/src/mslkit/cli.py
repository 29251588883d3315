"""Command-line entry point: dataset, detect, and eval workflows.

Machine-readable output goes to stdout or files; progress and summaries
go to stderr, so the JSON side of any command can be piped safely.
Exit codes: 0 ok, 1 error, 2 validation findings, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import cv2
import yaml

from mslkit.dataset.augment import AugmentSpec
from mslkit.dataset.builder import augment_pool, build_dataset, split_pool
from mslkit.dataset.corpus import dataset_stats
from mslkit.dataset.labels import label_path_for_image, parse_label_file
from mslkit.dataset.manifest import DEFAULT_CLASS_NAMES, list_split_images, load_manifest
from mslkit.decode import DecodeConfig, Detection
from mslkit.errors import BackendFailureError, LabelError, MslkitError
from mslkit.evaluation.curves import parse_training_log
from mslkit.evaluation.report import emit_curves, emit_report, evaluate
from mslkit.geometry import PixelBox, norm_to_pixel
from mslkit.pipeline.annotate import AnnotatedFrameWriter
from mslkit.pipeline.backends import load_backend
from mslkit.pipeline.captions import CaptionTracker
from mslkit.pipeline.sources import DirectorySource, SingleImageSource
from mslkit.pipeline.stream import JsonlSink, run_stream

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 2
EXIT_USAGE = 64

MODEL_ENV_VAR = "MSLKIT_MODEL"
VIDEO_SUFFIXES = {".mp4", ".mov", ".avi", ".mkv", ".webm"}


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def info(message: str) -> None:
    print(message, file=sys.stderr)


def parse_size(value: str) -> tuple[int, int]:
    try:
        w, h = value.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {value!r}") from None


def parse_ratios(value: str) -> tuple[float, float, float]:
    parts = value.split(",")
    if len(parts) == 2:
        parts.append("0")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected train,val,test ratios, got {value!r}")
    return tuple(float(p) for p in parts)


def parse_names(value: str) -> list[str]:
    path = Path(value)
    if path.is_file():
        return [line.strip() for line in path.read_text().splitlines() if line.strip()]
    return [part.strip() for part in value.split(",") if part.strip()]


def build_parser() -> Parser:
    parser = Parser(prog="mslkit", description=__doc__)
    parser.add_argument("--config", default=None, help="JSON/YAML file of flag defaults; explicit flags win")
    commands = parser.add_subparsers(dest="command", required=True)

    dataset = commands.add_parser("dataset", help="dataset construction and checks")
    dataset_cmds = dataset.add_subparsers(dest="dataset_command", required=True)

    build = dataset_cmds.add_parser(
        "build",
        help="resize + augment + split into a YOLO tree",
        epilog="videos are decoded out of process: ffmpeg -i sign.mp4 -vf fps=60 frames/frame_%%05d.png",
    )
    build.add_argument("--images", required=True)
    build.add_argument("--labels", default=None, help="flat label dir; default follows images->labels convention")
    build.add_argument("--out", required=True)
    build.add_argument("--names", type=parse_names, default=None, help="comma list or file of class names")
    build.add_argument("--target-size", type=parse_size, default=(432, 256))
    build.add_argument("--noise", type=float, default=0.05)
    build.add_argument("--rotate", type=float, default=10.0)
    build.add_argument("--ratios", type=parse_ratios, default=(0.8, 0.2, 0.0))
    build.add_argument("--seed", type=int, default=42)
    build.add_argument("--stride", type=int, default=1, help="keep every stride-th frame")

    augment = dataset_cmds.add_parser("augment", help="write augmented copies of a pool")
    augment.add_argument("--images", required=True)
    augment.add_argument("--labels", default=None)
    augment.add_argument("--out", required=True)
    augment.add_argument("--nc", type=int, default=20)
    augment.add_argument("--noise", type=float, default=0.05)
    augment.add_argument("--rotate", type=float, default=10.0)
    augment.add_argument("--seed", type=int, default=42)

    split = dataset_cmds.add_parser("split", help="split a pool into train/val/test")
    split.add_argument("--images", required=True)
    split.add_argument("--labels", default=None)
    split.add_argument("--out", required=True)
    split.add_argument("--names", type=parse_names, default=None)
    split.add_argument("--ratios", type=parse_ratios, default=(0.8, 0.2, 0.0))
    split.add_argument("--seed", type=int, default=42)

    stats = dataset_cmds.add_parser("stats", help="per-class counts and totals")
    stats.add_argument("--manifest", default=None)
    stats.add_argument("--out", default=None, help="also write the JSON report here")

    validate = dataset_cmds.add_parser("validate", help="lint labels against the manifest")
    validate.add_argument("--manifest", default=None)

    detect = commands.add_parser("detect", help="run detection over an image or directory")
    detect.add_argument("--source", required=True, help="image file or frame directory")
    detect.add_argument("--model", default=os.environ.get(MODEL_ENV_VAR), help=f"model path (default ${MODEL_ENV_VAR})")
    detect.add_argument("--imgsz", type=parse_size, default=(640, 640), help="replay-backend input size")
    detect.add_argument("--conf", type=float, default=0.25)
    detect.add_argument("--nms-iou", type=float, default=0.45)
    detect.add_argument("--max-det", type=int, default=300)
    detect.add_argument("--class-agnostic", action="store_true", help="NMS across classes")
    detect.add_argument("--captions", action="store_true", help="emit debounced caption events")
    detect.add_argument("--caption-window", type=int, default=15)
    detect.add_argument("--caption-hits", type=int, default=10)
    detect.add_argument("--annotate", default=None, help="write annotated frames to this directory")
    detect.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    detect.add_argument("--output", default="-", help="JSON-lines path, - for stdout")
    detect.add_argument("--names", type=parse_names, default=None)
    detect.add_argument("--stride", type=int, default=1)

    evaluate_cmd = commands.add_parser("eval", help="score predictions against a manifest split")
    evaluate_cmd.add_argument("--predictions", required=True, help="JSON-lines from `mslkit detect`")
    evaluate_cmd.add_argument("--manifest", required=True)
    evaluate_cmd.add_argument("--split", default="val")
    evaluate_cmd.add_argument("--conf", type=float, default=0.25)
    evaluate_cmd.add_argument("--iou", type=float, default=0.45)
    evaluate_cmd.add_argument("--out", default="eval_out")
    evaluate_cmd.add_argument("--curves", default=None, help="training-log CSV to convert to curve series")

    parser.all_parsers = [
        parser, dataset, build, augment, split, stats, validate, detect, evaluate_cmd,
    ]
    return parser


# flags that must be present, via the command line or a config file
REQUIRED_FLAGS = {
    ("dataset", "stats"): ("manifest",),
    ("dataset", "validate"): ("manifest",),
}


def apply_config(parser: Parser, argv: list[str]) -> argparse.Namespace:
    """Parse args; a --config file supplies defaults, explicit flags win."""
    # find --config by scanning tokens so subparser requirements don't trip
    config_path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif token.startswith("--config="):
            config_path = token.split("=", 1)[1]
    if config_path:
        try:
            loaded = yaml.safe_load(Path(config_path).read_text())
        except (OSError, yaml.YAMLError) as e:
            parser.error(f"cannot read config {config_path}: {e}")
        if not isinstance(loaded, dict):
            parser.error(f"config {config_path} must be a mapping")
        for sub in getattr(parser, "all_parsers", [parser]):
            sub.set_defaults(**loaded)

    args = parser.parse_args(argv)
    key = (args.command, getattr(args, "dataset_command", None))
    for flag in REQUIRED_FLAGS.get(key, ()):
        if getattr(args, flag, None) is None:
            parser.error(f"the following arguments are required: --{flag}")
    return args


# ------------------------------------------------------------------ dataset


def cmd_dataset(args) -> int:
    if args.dataset_command == "build":
        names = args.names or DEFAULT_CLASS_NAMES
        spec = AugmentSpec(
            noise_fraction=args.noise,
            rotation_degrees=args.rotate,
            target_w=args.target_size[0],
            target_h=args.target_size[1],
            seed=args.seed,
        )
        result = build_dataset(
            args.images, args.labels, args.out, names, spec, ratios=args.ratios, stride=args.stride
        )
        print(json.dumps(result))
        info(f"built {sum(result['examples'].values())} examples under {result['out']}")
        return EXIT_OK

    if args.dataset_command == "augment":
        spec = AugmentSpec(noise_fraction=args.noise, rotation_degrees=args.rotate, seed=args.seed)
        result = augment_pool(args.images, args.labels, args.out, spec, nc=args.nc)
        print(json.dumps(result))
        return EXIT_OK

    if args.dataset_command == "split":
        names = args.names or DEFAULT_CLASS_NAMES
        result = split_pool(args.images, args.labels, args.out, names, args.ratios, args.seed)
        print(json.dumps(result))
        return EXIT_OK

    if args.dataset_command == "stats":
        stats = dataset_stats(load_manifest(args.manifest))
        text = json.dumps(stats, indent=2)
        print(text)
        if args.out:
            Path(args.out).write_text(text + "\n")
        info(f"total {stats['total_images']} images, {stats['total_boxes']} boxes")
        return EXIT_OK

    if args.dataset_command == "validate":
        return cmd_validate(args)
    raise AssertionError(args.dataset_command)


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    findings = []
    for split in manifest.splits:
        for image_path in list_split_images(manifest, split):
            label_path = label_path_for_image(image_path)
            if not label_path.is_file():
                continue
            try:
                entries = parse_label_file(label_path.read_text(), manifest.nc)
            except LabelError as e:
                findings.append(
                    {"file": str(label_path), "line": e.line, "kind": type(e).__name__, "message": e.message}
                )
                continue
            for lineno, (_, box) in enumerate(entries, start=1):
                if (
                    box.cx - box.w / 2 < -1e-9
                    or box.cx + box.w / 2 > 1 + 1e-9
                    or box.cy - box.h / 2 < -1e-9
                    or box.cy + box.h / 2 > 1 + 1e-9
                ):
                    findings.append(
                        {
                            "file": str(label_path),
                            "line": lineno,
                            "kind": "BoxOutsideImage",
                            "message": "box extent exceeds [0, 1]",
                        }
                    )
    for finding in findings:
        print(json.dumps(finding))
    info(f"{len(findings)} finding(s)")
    return EXIT_FINDINGS if findings else EXIT_OK


# ------------------------------------------------------------------ detect


class TeeSource:
    """Wraps a frame source, keeping images until the collector uses them."""

    def __init__(self, source, store: dict):
        self.source = source
        self.store = store

    def __iter__(self):
        for frame in self.source:
            self.store[frame.index] = frame.image
            yield frame


class AnnotatingSink:
    def __init__(self, inner, writer: AnnotatedFrameWriter, store: dict):
        self.inner = inner
        self.writer = writer
        self.store = store

    def write_frame(self, frame_index, detections):
        image = self.store.pop(frame_index)
        self.writer.write(frame_index, image, detections)
        self.inner.write_frame(frame_index, detections)

    def write_event(self, event):
        self.inner.write_event(event)


def cmd_detect(args) -> int:
    if not args.model:
        info(f"no model given: pass --model or set ${MODEL_ENV_VAR}")
        return EXIT_ERROR
    source_path = Path(args.source)
    if source_path.suffix.lower() in VIDEO_SUFFIXES:
        info(
            "video decoding is out of process; extract frames first, e.g.\n"
            f"  ffmpeg -i {source_path} -vf fps=60 frames/frame_%05d.png\n"
            "then run detect on the frames directory"
        )
        return EXIT_ERROR

    backend = load_backend(args.model, input_w=args.imgsz[0], input_h=args.imgsz[1])
    names = args.names or backend.names
    if source_path.is_dir():
        source = DirectorySource(source_path, stride=args.stride)
    else:
        source = SingleImageSource(source_path)

    config = DecodeConfig(
        conf_threshold=args.conf,
        nms_iou_threshold=args.nms_iou,
        max_detections=args.max_det,
        class_aware=not args.class_agnostic,
    )
    tracker = (
        CaptionTracker(nc=backend.nc, names=names, window=args.caption_window, hits=args.caption_hits)
        if args.captions
        else None
    )

    out_stream = sys.stdout if args.output == "-" else open(args.output, "w")
    try:
        sink = JsonlSink(out_stream, names=names)
        if args.annotate:
            store: dict = {}
            source = TeeSource(source, store)
            sink = AnnotatingSink(sink, AnnotatedFrameWriter(args.annotate, names), store)
        summary = run_stream(
            source, backend, config, sink=sink, captions=tracker, workers=max(1, args.workers)
        )
    finally:
        if out_stream is not sys.stdout:
            out_stream.close()
    info(json.dumps(summary.to_dict()))
    return EXIT_OK


# ------------------------------------------------------------------ eval


def load_predictions_jsonl(path: str | Path) -> dict[int, list[Detection]]:
    by_frame: dict[int, list[Detection]] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "frame" not in record:
            continue  # event records
        dets = [
            Detection(PixelBox(*d["box"]), int(d["class"]), float(d["score"]))
            for d in record["detections"]
        ]
        by_frame[int(record["frame"])] = dets
    return by_frame


def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    images = list_split_images(manifest, args.split)
    by_frame = load_predictions_jsonl(args.predictions)

    if len(by_frame) != len(images):
        info(
            f"prediction/image mismatch: {len(by_frame)} frames vs {len(images)} "
            f"images in split {args.split!r} (detect runs frames in sorted order)"
        )
        return EXIT_ERROR

    preds_by_image, gts_by_image = [], []
    for index, image_path in enumerate(images):
        if index not in by_frame:
            info(f"missing frame {index} in predictions")
            return EXIT_ERROR
        image = cv2.imread(str(image_path))
        if image is None:
            info(f"cannot read image {image_path}")
            return EXIT_ERROR
        h, w = image.shape[:2]
        gts = []
        label_path = label_path_for_image(image_path)
        if label_path.is_file():
            try:
                entries = parse_label_file(label_path.read_text(), manifest.nc)
            except LabelError as e:
                raise e.at_path(label_path) from None
            gts = [(c, norm_to_pixel(b, w, h)) for c, b in entries]
        preds_by_image.append(by_frame[index])
        gts_by_image.append(gts)

    report = evaluate(
        preds_by_image,
        gts_by_image,
        nc=manifest.nc,
        names=manifest.names,
        conf=args.conf,
        confusion_iou=args.iou,
    )
    emit_report(report, args.out)
    if args.curves:
        curve = parse_training_log(Path(args.curves).read_text())
        emit_curves(curve, args.out)
    print(f"mAP50 {report.map50:.3f}")
    info(f"report written to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    try:
        if args.command == "dataset":
            return cmd_dataset(args)
        if args.command == "detect":
            return cmd_detect(args)
        if args.command == "eval":
            return cmd_eval(args)
        raise AssertionError(args.command)
    except BackendFailureError as e:
        info(f"backend failure: {e}")
        return EXIT_ERROR
    except MslkitError as e:
        info(f"error: {e}")
        return EXIT_ERROR
    except FileNotFoundError as e:
        info(f"error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
