"""Iterative sample reweighting that optimizes a fully dispersed filter.

Each iteration rebuilds the filter from the weighted class-mean difference,
finds the error-minimizing threshold and bumps the weights of samples the
classifier got wrong (step update) or nearly wrong (sigmoid update).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .filters import (
    DEFAULT_WEIGHTS,
    FilterMask,
    TrainedClassifier,
    optimal_threshold,
)
from .imaging import ImageVector

UPDATE_RULES = ("hardlim", "sigmoid")

# Filters this small are noise-sensitive and rarely capture stable features.
SMALL_FILTER_LIMIT = 128


@dataclass(frozen=True)
class SampleWeights:
    """Per-image weights, nonnegative and summing to 1 within each class."""

    face_weights: np.ndarray
    clutter_weights: np.ndarray

    def __post_init__(self):
        for name in ("face_weights", "clutter_weights"):
            w = np.asarray(getattr(self, name), dtype=np.float64)
            if w.size == 0 or w.min() < 0:
                raise ValueError(f"{name} must be non-empty and nonnegative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} must sum to 1")
            object.__setattr__(self, name, w)

    @classmethod
    def uniform(cls, n_faces: int, n_clutters: int) -> "SampleWeights":
        return cls(np.full(n_faces, 1.0 / n_faces), np.full(n_clutters, 1.0 / n_clutters))


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for the reweighting loop.

    n_black/n_white of None means one sixteenth of the candidate pixel set
    each, i.e. the usual 512-of-4096 engagement density at 64x64.
    """

    n_black: int | None = None
    n_white: int | None = None
    update_rule: str = "sigmoid"
    epsilon: float = 20.0
    max_iterations: int = 500
    region_restriction: np.ndarray | None = None

    def __post_init__(self):
        if self.update_rule not in UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {UPDATE_RULES}")
        if self.update_rule == "sigmoid" and not self.epsilon > 0:
            raise ValueError("epsilon must be > 0 for the sigmoid rule")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    fp_rate: float
    fn_rate: float
    theta: float
    s_star: float


@dataclass(frozen=True)
class WeightedMeans:
    """Weighted class means and their difference."""

    m_f: ImageVector
    m_c: ImageVector
    m_fc: ImageVector


def hardlim(y):
    """Step function: 1 for y >= 0, else 0."""
    return np.where(np.asarray(y, dtype=np.float64) >= 0, 1.0, 0.0)


def sigmoid(y, epsilon: float):
    """1 / (1 + exp(-epsilon * y)), branch on sign to avoid overflow."""
    z = epsilon * np.asarray(y, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def weighted_means(faces, clutters, sw: SampleWeights) -> WeightedMeans:
    """m_F = sum w_i^f f_i and m_C = sum w_i^c c_i, plus their difference."""
    f_mat = _stack(faces)
    c_mat = _stack(clutters)
    if f_mat.shape[1] != c_mat.shape[1]:
        raise ValueError("face and clutter vectors differ in length")
    if f_mat.shape[0] != sw.face_weights.size or c_mat.shape[0] != sw.clutter_weights.size:
        raise ValueError("weight count does not match image count")
    w, h = faces[0].source_width, faces[0].source_height
    m_f = sw.face_weights @ f_mat
    m_c = sw.clutter_weights @ c_mat
    return WeightedMeans(
        ImageVector(m_f, w, h), ImageVector(m_c, w, h), ImageVector(m_f - m_c, w, h)
    )


def update_weights(sw: SampleWeights, face_margins, clutter_margins,
                   cfg: TrainingConfig) -> SampleWeights:
    """Bump weights of misclassified samples and renormalize per class.

    Margins are y_i = g(x_i) - theta; faces are penalized for negative
    margins, clutters for positive ones.
    """
    if cfg.update_rule == "hardlim":
        u = hardlim
    else:
        def u(y):
            return sigmoid(y, cfg.epsilon)
    wf = sw.face_weights + u(-np.asarray(face_margins, dtype=np.float64))
    wc = sw.clutter_weights + u(+np.asarray(clutter_margins, dtype=np.float64))
    sf, sc = wf.sum(), wc.sum()
    if sf <= 0 or sc <= 0:
        raise RuntimeError("degenerate weight update: zero class sum")
    return SampleWeights(wf / sf, wc / sc)


def _stack(vectors) -> np.ndarray:
    if len(vectors) == 0:
        raise ValueError("need at least one image per class")
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise ValueError("inconsistent image vector lengths")
    return np.stack([v.values for v in vectors])


def train(faces, clutters, cfg: TrainingConfig = TrainingConfig(),
          trace: list | None = None):
    """Run the reweighting loop and return the best classifier found.

    Starts from uniform weights; each iteration builds the filter from the
    weighted mean difference, thresholds it, records the errors and updates
    the weights.  Stops at zero training error or after max_iterations, and
    returns the snapshot from the lowest-total-error iteration (earliest on
    ties) plus the full per-iteration history.

    When a list is passed as ``trace``, a dict with the margins and
    post-update weights of every iteration is appended to it.
    """
    f_mat = _stack(faces)
    c_mat = _stack(clutters)
    if f_mat.shape[1] != c_mat.shape[1]:
        raise ValueError("face and clutter vectors differ in length")
    width, height = faces[0].source_width, faces[0].source_height
    n_f, n_c = f_mat.shape[0], c_mat.shape[0]
    dim = f_mat.shape[1]

    if cfg.region_restriction is not None:
        cand = np.unique(np.asarray(cfg.region_restriction, dtype=np.int64))
        if cand[0] < 0 or cand[-1] >= dim:
            raise ValueError("region indices out of bounds")
    else:
        cand = np.arange(dim)

    n_black = cfg.n_black if cfg.n_black is not None else max(1, round(cand.size / 16))
    n_white = cfg.n_white if cfg.n_white is not None else max(1, round(cand.size / 16))
    if n_black + n_white > cand.size:
        raise ValueError("candidate region smaller than n_black + n_white")
    if n_black + n_white <= SMALL_FILTER_LIMIT:
        warnings.warn(
            f"filter with N = {n_black + n_white} <= {SMALL_FILTER_LIMIT} engaged "
            "pixels is sensitive to noise",
            stacklevel=2,
        )

    wf = np.full(n_f, 1.0 / n_f)
    wc = np.full(n_c, 1.0 / n_c)
    history: list[IterationRecord] = []
    best_err = None
    best: TrainedClassifier | None = None

    for it in range(1, cfg.max_iterations + 1):
        m_fc = wf @ f_mat - wc @ c_mat
        sub_order = np.argsort(m_fc[cand], kind="stable")
        black = cand[sub_order[:n_black]]
        white = cand[sub_order[cand.size - n_white:]]

        g_f = f_mat[:, white].mean(axis=1) - f_mat[:, black].mean(axis=1)
        g_c = c_mat[:, white].mean(axis=1) - c_mat[:, black].mean(axis=1)
        theta, _, _ = optimal_threshold(g_f, g_c)
        fn = int(np.count_nonzero(g_f <= theta))
        fp = int(np.count_nonzero(g_c > theta))
        s_star = float(m_fc[white].mean() - m_fc[black].mean())
        history.append(IterationRecord(it, fp / n_c, fn / n_f, theta, s_star))

        total = fp + fn
        if best_err is None or total < best_err:
            best_err = total
            mask = FilterMask(width, height, black, white)
            best = TrainedClassifier(mask, DEFAULT_WEIGHTS, theta)
        if total == 0 or it == cfg.max_iterations:
            if trace is not None:
                trace.append({
                    "iteration": it,
                    "face_margins": g_f - theta,
                    "clutter_margins": g_c - theta,
                    "face_weights": wf.copy(),
                    "clutter_weights": wc.copy(),
                })
            break

        sw = update_weights(
            SampleWeights(wf, wc), g_f - theta, g_c - theta, cfg
        )
        wf, wc = sw.face_weights, sw.clutter_weights
        if trace is not None:
            trace.append({
                "iteration": it,
                "face_margins": g_f - theta,
                "clutter_margins": g_c - theta,
                "face_weights": wf.copy(),
                "clutter_weights": wc.copy(),
            })

    return best, history


def with_region(cfg: TrainingConfig, indices: np.ndarray) -> TrainingConfig:
    """Copy of cfg restricted to the given candidate pixel set."""
    return replace(cfg, region_restriction=np.asarray(indices, dtype=np.int64))
