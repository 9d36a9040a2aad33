"""Dataset splitting, confusion metrics and ROC curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import TrainedClassifier, feature_value
from .imaging import ImageVector

FACE, CLUTTER = 1, -1


@dataclass(frozen=True)
class LabeledDataset:
    """Image vectors with +1 (face) / -1 (clutter) labels."""

    samples: tuple
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.size != len(self.samples):
            raise ValueError("labels and samples differ in length")
        if not np.isin(labels, (FACE, CLUTTER)).all():
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.samples)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset([self.samples[i] for i in idx], self.labels[idx])

    @property
    def faces(self) -> list:
        return [s for s, l in zip(self.samples, self.labels) if l == FACE]

    @property
    def clutters(self) -> list:
        return [s for s, l in zip(self.samples, self.labels) if l == CLUTTER]


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    threshold: float


@dataclass(frozen=True)
class ConfusionResult:
    fp_rate: float
    fn_rate: float
    accuracy: float
    # set when a class was empty and its rate defaulted to 0
    face_class_empty: bool = False
    clutter_class_empty: bool = False


def split(ds: LabeledDataset, train_frac: float, seed: int):
    """Stratified shuffle split; round(train_frac * count) per class to train."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for label in (FACE, CLUTTER):
        idx = np.flatnonzero(ds.labels == label)
        if idx.size < 2:
            raise ValueError("each class needs at least 2 samples to split")
        perm = rng.permutation(idx)
        n_train = round(train_frac * idx.size)
        train_idx.extend(perm[:n_train])
        test_idx.extend(perm[n_train:])
    return ds.subset(train_idx), ds.subset(test_idx)


def scores(c: TrainedClassifier, ds: LabeledDataset) -> np.ndarray:
    """Raw feature values g for every sample."""
    return np.array([feature_value(c.mask, c.weights, s) for s in ds.samples])


def confusion(c: TrainedClassifier, ds: LabeledDataset) -> ConfusionResult:
    """False positive rate, false negative rate and overall accuracy."""
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    g = scores(c, ds)
    pred = np.where(g > c.theta, FACE, CLUTTER)
    is_face = ds.labels == FACE
    n_faces = int(is_face.sum())
    n_clutters = len(ds) - n_faces
    fn = int(np.count_nonzero(is_face & (pred == CLUTTER)))
    fp = int(np.count_nonzero(~is_face & (pred == FACE)))
    return ConfusionResult(
        fp_rate=fp / n_clutters if n_clutters else 0.0,
        fn_rate=fn / n_faces if n_faces else 0.0,
        accuracy=float(np.count_nonzero(pred == ds.labels) / len(ds)),
        face_class_empty=n_faces == 0,
        clutter_class_empty=n_clutters == 0,
    )


def roc(score_values, labels) -> list[RocPoint]:
    """ROC sweep over all distinct scores plus the two infinite sentinels.

    A sample counts positive when score > threshold, so the curve starts at
    (0, 0) for +inf and ends at (1, 1) for -inf.  Runs of identical
    (fpr, tpr) points collapse to the smallest threshold of the run, which
    keeps roc_point_at an exact lookup.
    """
    g = np.asarray(score_values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_faces = int(np.count_nonzero(labels == FACE))
    n_clutters = int(np.count_nonzero(labels == CLUTTER))
    if n_faces == 0 or n_clutters == 0:
        raise ValueError("roc needs at least one sample of each label")

    thresholds = np.concatenate([[np.inf], np.unique(g)[::-1], [-np.inf]])
    points: list[RocPoint] = []
    for t in thresholds:
        pos = g > t
        tpr = np.count_nonzero(pos & (labels == FACE)) / n_faces
        fpr = np.count_nonzero(pos & (labels == CLUTTER)) / n_clutters
        point = RocPoint(float(fpr), float(tpr), float(t))
        if points and (points[-1].fpr, points[-1].tpr) == (fpr, tpr):
            points[-1] = point
        else:
            points.append(point)
    return points


def roc_point_at(points: list[RocPoint], theta: float) -> RocPoint:
    """Operating point of the ROC step function at an arbitrary threshold.

    Returns the point with the largest swept threshold <= theta; the -inf
    sentinel guarantees one exists.
    """
    for p in points:
        if p.threshold <= theta:
            return p
    return points[-1]


def auc(points: list[RocPoint]) -> float:
    """Trapezoidal area under the ROC curve."""
    fpr = np.array([p.fpr for p in points])
    tpr = np.array([p.tpr for p in points])
    return float(np.trapezoid(tpr, fpr))
