"""Train the toy WGAN-GP on a directory of WAV files and export samples.

Example:
    python3 scripts/train_toy.py corpus/ --steps 500 --out runs/toy
"""
import argparse
import logging
from pathlib import Path

from ganharness.data import load_corpus
from ganharness.export import export_generated
from ganharness.train import Trainer, TrainerConfig, wasserstein_slope


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("corpus", help="directory of training WAV files")
    parser.add_argument("--out", default="runs/toy", help="output directory")
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--width", type=int, default=64)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=100,
                        help="number of WAVs to export after training")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out)
    corpus = load_corpus(args.corpus)
    print(f"loaded {corpus.shape[0]} clips from {args.corpus}")

    trainer = Trainer(TrainerConfig(width=args.width, steps=args.steps,
                                    batch_size=args.batch_size,
                                    sample_count=args.samples,
                                    seed=args.seed))
    history = trainer.train(corpus, checkpoint_dir=out / "checkpoints")
    print(f"wasserstein slope over {args.steps} steps: "
          f"{wasserstein_slope(history):+.6f}")
    print(f"q bit accuracy (256 samples): {trainer.q_bit_accuracy(256):.3f}")

    paths = export_generated(trainer, args.samples, out / "generated",
                             seed=args.seed)
    print(f"exported {len(paths)} WAVs to {out / 'generated'}")


if __name__ == "__main__":
    main()
