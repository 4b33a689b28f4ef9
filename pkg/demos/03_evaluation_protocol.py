"""Class-wise IoU / mIoU evaluation, the way the challenge scores it.

Builds a confusion matrix from streamed prediction chunks, shows how
absent classes and the IGNORE sentinel are handled, and renders the
same per-class report the `scanmix eval` subcommand prints.

Run:
    python3 demos/03_evaluation_protocol.py
"""

import numpy as np

from scanmix import ConfusionMatrix, IGNORE_LABEL, iou_per_class, mean_iou
from scanmix.io import CHALLENGE_CLASS_NAMES, format_report_table


def main():
    rng = np.random.default_rng(12)
    num_classes = len(CHALLENGE_CLASS_NAMES)

    # simulate a predictor that is right ~70% of the time on six classes
    active = np.array([0, 6, 13, 14, 17, 21])  # car .. sidewalk
    gt = rng.choice(active, 50_000).astype(np.uint32)
    pred = gt.copy()
    wrong = rng.random(gt.size) < 0.3
    pred[wrong] = rng.choice(active, int(wrong.sum())).astype(np.uint32)
    gt[rng.random(gt.size) < 0.02] = IGNORE_LABEL  # unlabeled points

    # accumulate in chunks, as an evaluation loop over files would
    matrix = ConfusionMatrix(num_classes)
    for lo in range(0, gt.size, 8_192):
        matrix.accumulate(gt[lo:lo + 8_192], pred[lo:lo + 8_192])
    print(f"scored points: {matrix.counts.sum()} "
          f"(ignored {int((gt == IGNORE_LABEL).sum())})")

    ious = iou_per_class(matrix)
    absent = int(np.isnan(ious).sum())
    print(f"absent classes (no ground truth, no predictions): {absent}")
    print(f"mIoU over present classes: {100 * mean_iou(ious):.2f}\n")

    print(format_report_table(ious, mean_iou(ious), CHALLENGE_CLASS_NAMES))

    # merging partial matrices from parallel workers is exact
    left = ConfusionMatrix(num_classes).accumulate(gt[:25_000], pred[:25_000])
    right = ConfusionMatrix(num_classes).accumulate(gt[25_000:], pred[25_000:])
    merged = left.merge(right)
    print(f"\nparallel merge equals sequential: "
          f"{np.array_equal(merged.counts, matrix.counts)}")


if __name__ == "__main__":
    main()
