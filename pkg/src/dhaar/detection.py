"""In-the-wild detection: sliding windows, skin prescreen, composite
three-filter decision, neighbor-agreement verification and box merging."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .filters import TrainedClassifier, feature_value
from .imaging import GrayImage, ImageVector, equalize, resize, vectorize

MIN_WINDOW_SIDE = 16
WINDOW_SIZE = 64

# fraction of skin pixels below which a window is skipped
SKIN_WINDOW_FRAC = 0.3

IOU_MERGE_THRESHOLD = 0.3


@dataclass(frozen=True)
class DetectionWindow:
    """One square candidate window inside a source image."""

    x: int
    y: int
    side: int
    score_by_filter: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.side < MIN_WINDOW_SIDE:
            raise ValueError(f"window side must be >= {MIN_WINDOW_SIDE}")


@dataclass(frozen=True)
class Detection:
    """An accepted window with its neighbor-agreement support count."""

    x: int
    y: int
    side: int
    support: int


def composite_classify(x: ImageVector, c256: TrainedClassifier,
                       c512: TrainedClassifier, c1024: TrainedClassifier) -> int:
    """+1 iff all three classifiers agree on +1 (the min rule)."""
    for c in (c256, c512, c1024):
        if feature_value(c.mask, c.weights, x) <= c.theta:
            return -1
    return 1


def window_sides(min_side: int, max_side: int, scale_step: float) -> list[int]:
    """Geometric side progression min_side * scale_step^k, capped at max_side."""
    if min_side > max_side:
        raise ValueError("min_side must be <= max_side")
    if scale_step <= 1.0:
        raise ValueError("scale_step must be > 1")
    sides, s = [], float(min_side)
    while round(s) <= max_side:
        if not sides or round(s) != sides[-1]:
            sides.append(round(s))
        s *= scale_step
    return sides


def window_stride(side: int, stride_frac: float) -> int:
    return max(1, round(stride_frac * side))


def _axis_positions(extent: int, side: int, stride: int) -> list[int]:
    positions = list(range(0, extent - side + 1, stride))
    # cover the far edge even when the stride does not land on it
    if positions and positions[-1] != extent - side:
        positions.append(extent - side)
    return positions


def sliding_windows(img: GrayImage, min_side: int, max_side: int,
                    scale_step: float, stride_frac: float) -> list[DetectionWindow]:
    """All candidate windows over all scales; empty if the image is too small."""
    if not 0.0 < stride_frac <= 1.0:
        raise ValueError("stride_frac must be in (0, 1]")
    out = []
    for side in window_sides(min_side, max_side, scale_step):
        if side > img.width or side > img.height:
            continue
        stride = window_stride(side, stride_frac)
        for y in _axis_positions(img.height, side, stride):
            for x in _axis_positions(img.width, side, stride):
                out.append(DetectionWindow(x, y, side))
    return out


def skin_prescreen(rgb: np.ndarray | None) -> np.ndarray | None:
    """Per-pixel skin mask from a simple RGB rule; None disables the screen.

    Rule (0..255 scale): R>95, G>40, B>20, max-min>15, |R-G|>15, R>G, R>B.
    """
    if rgb is None:
        return None
    rgb = np.asarray(rgb, dtype=np.int64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return (
        (r > 95) & (g > 40) & (b > 20)
        & (rgb.max(axis=-1) - rgb.min(axis=-1) > 15)
        & (np.abs(r - g) > 15) & (r > g) & (r > b)
    )


def required_support(side: int, support_frac: float = 0.02) -> int:
    """Neighbor count needed to accept a positive window."""
    return max(1, math.ceil(support_frac * side))


def verify_adjacency(positives: list[DetectionWindow], stride: int,
                     support_frac: float = 0.02) -> list[Detection]:
    """Keep positives confirmed by enough nearby positives at the same scale.

    A neighbor is another positive window of the same side whose top-left
    corner lies within +-2*stride on each axis.
    """
    if not positives:
        return []
    radius = 2 * stride
    xs = np.array([w.x for w in positives])
    ys = np.array([w.y for w in positives])
    out = []
    for i, w in enumerate(positives):
        near = (np.abs(xs - w.x) <= radius) & (np.abs(ys - w.y) <= radius)
        support = int(near.sum()) - 1  # exclude the window itself
        if support >= required_support(w.side, support_frac):
            out.append(Detection(w.x, w.y, w.side, support))
    return out


def iou(a: Detection, b: Detection) -> float:
    ix = max(0, min(a.x + a.side, b.x + b.side) - max(a.x, b.x))
    iy = max(0, min(a.y + a.side, b.y + b.side) - max(a.y, b.y))
    inter = ix * iy
    union = a.side**2 + b.side**2 - inter
    return inter / union if union else 0.0


def merge_detections(dets: list[Detection]) -> list[Detection]:
    """Greedy merge: overlapping groups collapse to their best-supported box.

    Ordering: highest support first, then larger side, then smaller (x, y).
    """
    pending = sorted(dets, key=lambda d: (-d.support, -d.side, d.x, d.y))
    kept: list[Detection] = []
    while pending:
        best = pending.pop(0)
        kept.append(best)
        pending = [d for d in pending if iou(best, d) <= IOU_MERGE_THRESHOLD]
    return kept


def _worker_count() -> int:
    env = os.environ.get("DHAAR_THREADS")
    if env:
        return max(1, int(env))
    return 1


def detect(gray: GrayImage, classifiers, rgb: np.ndarray | None = None, *,
           min_side: int = 48, max_side: int | None = None,
           scale_step: float = 1.25, stride_frac: float = 0.1,
           support_frac: float = 0.02, apply_equalize: bool = True,
           use_skin: bool = True) -> list[Detection]:
    """Full pipeline: windows -> prescreen -> composite classify -> verify -> merge.

    `classifiers` is the (c256, c512, c1024) triple of Algorithm-style
    composed filters; `rgb` enables the skin prescreen when the source was a
    color image.
    """
    if min_side < MIN_WINDOW_SIDE:
        raise ValueError(f"min_side must be >= {MIN_WINDOW_SIDE}")
    if max_side is None:
        # a too-small image yields no windows rather than an error
        max_side = max(min_side, min(gray.width, gray.height))
    skin = skin_prescreen(rgb) if use_skin else None

    c256, c512, c1024 = classifiers

    def evaluate(w: DetectionWindow):
        if skin is not None:
            patch = skin[w.y:w.y + w.side, w.x:w.x + w.side]
            if patch.mean() < SKIN_WINDOW_FRAC:
                return None
        crop = GrayImage(gray.pixels[w.y:w.y + w.side, w.x:w.x + w.side])
        if w.side != WINDOW_SIZE:
            crop = resize(crop, WINDOW_SIZE, WINDOW_SIZE)
        if apply_equalize:
            crop = equalize(crop)
        vec = vectorize(crop)
        margins = {
            c.mask.n_engaged: feature_value(c.mask, c.weights, vec) - c.theta
            for c in (c256, c512, c1024)
        }
        if all(m > 0 for m in margins.values()):
            return replace(w, score_by_filter=margins)
        return None

    windows = sliding_windows(gray, min_side, max_side, scale_step, stride_frac)
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, windows, chunksize=64))
    else:
        results = [evaluate(w) for w in windows]
    positives = [r for r in results if r is not None]

    detections: list[Detection] = []
    for side in sorted({w.side for w in positives}):
        level = [w for w in positives if w.side == side]
        stride = window_stride(side, stride_frac)
        detections.extend(verify_adjacency(level, stride, support_frac))
    return merge_detections(detections)
