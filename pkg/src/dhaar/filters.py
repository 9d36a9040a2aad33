"""Dispersed filter model: masks, feature values, thresholds, classification.

A fully dispersed filter is a pair of disjoint pixel-index sets (black and
white) over a vectorized image.  The feature value is the weighted sum of
the two region means; classification compares it to a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .imaging import ImageVector


@dataclass(frozen=True)
class FilterMask:
    """Disjoint black/white pixel-index sets over a width x height canvas."""

    width: int
    height: int
    black_indices: np.ndarray
    white_indices: np.ndarray

    def __post_init__(self):
        b = np.unique(np.asarray(self.black_indices, dtype=np.int64))
        w = np.unique(np.asarray(self.white_indices, dtype=np.int64))
        if b.size == 0 or w.size == 0:
            raise ValueError("both regions must contain at least one pixel")
        if np.intersect1d(b, w).size:
            raise ValueError("black and white regions must be disjoint")
        n = self.width * self.height
        if b[0] < 0 or w[0] < 0 or b[-1] >= n or w[-1] >= n:
            raise ValueError("indices out of canvas bounds")
        object.__setattr__(self, "black_indices", b)
        object.__setattr__(self, "white_indices", w)

    @property
    def n_black(self) -> int:
        return self.black_indices.size

    @property
    def n_white(self) -> int:
        return self.white_indices.size

    @property
    def n_engaged(self) -> int:
        return self.n_black + self.n_white


@dataclass(frozen=True)
class RegionWeights:
    """Region weights; the default (-1, 1) sums to zero."""

    v1: float = -1.0
    v2: float = 1.0


DEFAULT_WEIGHTS = RegionWeights()


@dataclass(frozen=True)
class TrainedClassifier:
    """A filter mask, its region weights and a decision threshold."""

    mask: FilterMask
    weights: RegionWeights = field(default_factory=RegionWeights)
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


def _check_dims(mask: FilterMask, x: ImageVector) -> None:
    if len(x) != mask.width * mask.height:
        raise ValueError(
            f"image vector length {len(x)} does not match "
            f"{mask.width}x{mask.height} mask"
        )


def mean_intensities(mask: FilterMask, x: ImageVector) -> tuple[float, float]:
    """Mean intensity of the black region and of the white region."""
    _check_dims(mask, x)
    v = x.values
    return float(v[mask.black_indices].mean()), float(v[mask.white_indices].mean())


def feature_value(mask: FilterMask, weights: RegionWeights, x: ImageVector) -> float:
    """g = v1 * mean(black) + v2 * mean(white)."""
    m1, m2 = mean_intensities(mask, x)
    return weights.v1 * m1 + weights.v2 * m2


def build_mask(m_fc: ImageVector, n_black: int, n_white: int) -> FilterMask:
    """Place the filter on the extremes of a difference image.

    The n_black smallest entries of m_fc become the black region and the
    n_white largest become the white region.  A stable ascending sort
    breaks ties by lower vector index, making the result deterministic.
    """
    if n_black < 1 or n_white < 1:
        raise ValueError("region sizes must be >= 1")
    if n_black + n_white > len(m_fc):
        raise ValueError("n_black + n_white exceeds vector length")
    order = np.argsort(m_fc.values, kind="stable")
    return FilterMask(
        m_fc.source_width,
        m_fc.source_height,
        order[:n_black],
        order[len(m_fc) - n_white:],
    )


def separation_score(mask: FilterMask, weights: RegionWeights, m_fc: ImageVector) -> float:
    """Feature value of the class-difference image; the gap between class means."""
    return feature_value(mask, weights, m_fc)


def optimal_threshold(face_scores, clutter_scores) -> tuple[float, float, float]:
    """Threshold minimizing misclassifications with faces on the g > theta side.

    Returns (theta, fp_rate, fn_rate).  Every half-open interval between
    consecutive distinct score values yields one candidate error count;
    among the minimizers the widest interval wins (ends count as infinitely
    wide, leftmost wins ties) and theta is placed at its midpoint.
    """
    faces = np.sort(np.asarray(face_scores, dtype=np.float64))
    clutters = np.sort(np.asarray(clutter_scores, dtype=np.float64))
    if faces.size == 0 or clutters.size == 0:
        raise ValueError("both score sequences must be non-empty")

    vals = np.unique(np.concatenate([faces, clutters]))
    # Candidate cuts: theta in (-inf, vals[0]) then [vals[i], vals[i+1]).
    fn = np.concatenate([[0], np.searchsorted(faces, vals, side="right")])
    fp = clutters.size - np.concatenate(
        [[0], np.searchsorted(clutters, vals, side="right")]
    )
    errors = fn + fp

    best = errors.min()
    widths = np.concatenate([[np.inf], np.diff(vals), [np.inf]])
    candidates = np.flatnonzero(errors == best)
    idx = candidates[np.argmax(widths[candidates])]

    if idx == 0:
        theta = float(vals[0] - 1.0)
    elif idx == vals.size:
        theta = float(vals[-1] + 1.0)
    else:
        theta = float((vals[idx - 1] + vals[idx]) / 2.0)
    return theta, float(fp[idx] / clutters.size), float(fn[idx] / faces.size)


def classify(c: TrainedClassifier, x: ImageVector) -> int:
    """+1 (face) iff g > theta, else -1; the boundary g == theta is clutter."""
    return 1 if feature_value(c.mask, c.weights, x) > c.theta else -1
