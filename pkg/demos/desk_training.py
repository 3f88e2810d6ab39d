"""Train a date model on a synthetic corpus and look at where it is unsure.

Generates a train and a test corpus, trains with the desk recipe, prints
per-epoch progress and finally a coverage table: accuracy on the most
confident share of the test images.

    python demos/desk_training.py --format DDM --epochs 5 --n-train 2000
"""
from __future__ import annotations

import argparse
import time

from datelink.corpus import generate_dataset
from datelink.dates import SequenceFormat, format_label
from datelink.metrics import coverage_curve, seq_acc
from datelink.nn import ModelConfig, TrainConfig, init_model, predict_batch, train
from datelink.nn.optim import DESK_EPOCHS


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--format", default="DDM", choices=[f.value for f in SequenceFormat])
    parser.add_argument("--n-train", type=int, default=10_000)
    parser.add_argument("--n-test", type=int, default=1_000)
    parser.add_argument("--epochs", type=int, default=None, help="default: the desk epoch count for the format")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    fmt = SequenceFormat.parse(args.format)
    epochs = args.epochs or DESK_EPOCHS[fmt]
    t0 = time.process_time()
    train_set = generate_dataset(args.n_train, fmt, 0.1, seed=args.seed)
    test_set = generate_dataset(args.n_test, fmt, 0.1, seed=args.seed + 1)
    print(f"generated {len(train_set)} + {len(test_set)} images in {time.process_time() - t0:.0f} CPU-s")

    model = init_model(ModelConfig.for_format(fmt, seed=args.seed))
    cfg = TrainConfig.desk(epochs=epochs, warmup_epochs=min(1, epochs - 1), seed=args.seed)

    def show(rec):
        print(f"epoch {rec.epoch:3d}  lr {rec.lr:.4f}  loss {rec.train_loss:.4f}  "
              f"train {rec.train_seqacc:.3f}  test {rec.val_seqacc:.3f}  "
              f"[{(time.process_time() - t0) / 60:.1f} CPU-min]")

    train(model, train_set, cfg, val=test_set, on_epoch=show)

    preds = predict_batch(model, test_set.images)
    result = seq_acc(preds.labels(), test_set.labels)
    print(f"\nSeqAcc {result.seq_acc:.4f}  day {result.day_acc:.4f}  month {result.month_acc:.4f}"
          + (f"  year {result.year_acc:.4f}" if result.year_acc is not None else ""))

    print("\ncoverage  accuracy")
    for point in coverage_curve(preds, test_set.labels, grid=(0.25, 0.5, 0.75, 0.9, 1.0)):
        print(f"{point.coverage:8.2f}  {point.accuracy:.4f}")

    print("\nleast confident test images:")
    for i in preds.confidence.argsort()[:8]:
        print(f"  {test_set.source_ids[i]}  read {format_label(preds[i].label)!r:>10}  "
              f"truth {format_label(test_set.labels[i])!r:>10}  confidence {preds.confidence[i]:.3f}")


if __name__ == "__main__":
    main()
