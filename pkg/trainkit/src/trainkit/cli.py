"""trainkit command line: train, export, and synthetic-data generation."""

from __future__ import annotations

import argparse
import sys

from trainkit.export import export
from trainkit.synth import generate_shapes_dataset
from trainkit.train import TrainSpec, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trainkit", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    t = commands.add_parser("train", help="fine-tune/train a detector on a manifest")
    t.add_argument("--data", required=True, help="dataset manifest (data.yaml)")
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--patience", type=int, default=10)
    t.add_argument("--imgsz", type=int, default=160)
    t.add_argument("--batch", type=int, default=8)
    t.add_argument("--lr", type=float, default=5e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", default="runs/train")
    t.add_argument("--width", type=int, default=32, help="backbone width multiplier")
    t.add_argument("--weights", default=None, help="init checkpoint for transfer learning")

    e = commands.add_parser("export", help="export a run as TorchScript + metadata")
    e.add_argument("--run", required=True, help="training run directory")
    e.add_argument("--mode", choices=("pretransformed", "raw"), default="pretransformed")
    e.add_argument("--out", default=None)

    s = commands.add_parser("synth", help="generate a synthetic shapes dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--images", type=int, default=20)
    s.add_argument("--nc", type=int, default=2)
    s.add_argument("--size", type=int, default=160)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--val-fraction", type=float, default=0.25)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        spec = TrainSpec(
            data=args.data,
            epochs=args.epochs,
            patience=args.patience,
            imgsz=args.imgsz,
            batch_size=args.batch,
            lr=args.lr,
            seed=args.seed,
            out=args.out,
            width=args.width,
            weights=args.weights,
        )
        run_dir = train(spec)
        print(f"run complete: {run_dir}")
        return 0
    if args.command == "export":
        export(args.run, mode=args.mode, out_dir=args.out)
        return 0
    if args.command == "synth":
        manifest = generate_shapes_dataset(
            args.out,
            n_images=args.images,
            nc=args.nc,
            size=args.size,
            seed=args.seed,
            val_fraction=args.val_fraction,
        )
        print(f"manifest: {manifest}")
        return 0
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
