"""Report emission: delimited output plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .evaluation import RocPoint
from .filters import TrainedClassifier
from .training import IterationRecord

HISTORY_COLUMNS = ["iteration", "fp_rate", "fn_rate", "theta", "s_star"]


def save_history_csv(history: list[IterationRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_COLUMNS)
        for rec in history:
            writer.writerow(
                [rec.iteration, repr(rec.fp_rate), repr(rec.fn_rate),
                 repr(rec.theta), repr(rec.s_star)]
            )


def save_history_plot(history: list[IterationRecord], path) -> None:
    its = [r.iteration for r in history]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(its, [r.fp_rate for r in history], label="false positive rate")
    ax.plot(its, [r.fn_rate for r in history], label="false negative rate")
    ax.set_xlabel("iteration")
    ax.set_ylabel("error rate")
    ax.set_ylim(bottom=0)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_roc_csv(points: list[RocPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fpr", "tpr"])
        for p in points:
            writer.writerow([repr(p.threshold), repr(p.fpr), repr(p.tpr)])


def save_roc_plot(points: list[RocPoint], path) -> None:
    fpr = [p.fpr for p in points]
    tpr = [p.tpr for p in points]
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(fpr, tpr, marker=".", markersize=3)
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_filter(c: TrainedClassifier) -> np.ndarray:
    """Filter image: black pixels 0, white pixels 255, unengaged 128."""
    flat = np.full(c.mask.width * c.mask.height, 128, dtype=np.uint8)
    flat[c.mask.black_indices] = 0
    flat[c.mask.white_indices] = 255
    return flat.reshape(c.mask.height, c.mask.width)


def save_filter_png(c: TrainedClassifier, path) -> None:
    Image.fromarray(render_filter(c), mode="L").save(path)


def save_annotated_png(gray_pixels: np.ndarray, detections, path,
                       rgb: np.ndarray | None = None) -> None:
    """Write the source image with red rectangles around detections."""
    if rgb is not None:
        canvas = rgb.copy()
    else:
        g = np.rint(np.asarray(gray_pixels) * 255.0).astype(np.uint8)
        canvas = np.stack([g, g, g], axis=-1)
    red = np.array([255, 0, 0], dtype=np.uint8)
    h, w = canvas.shape[:2]
    for d in detections:
        x0, y0 = d.x, d.y
        x1, y1 = min(d.x + d.side, w) - 1, min(d.y + d.side, h) - 1
        canvas[y0, x0:x1 + 1] = red
        canvas[y1, x0:x1 + 1] = red
        canvas[y0:y1 + 1, x0] = red
        canvas[y0:y1 + 1, x1] = red
    Image.fromarray(canvas, mode="RGB").save(path)


def save_summary_json(summary: dict, path) -> None:
    import json

    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
