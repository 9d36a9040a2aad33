"""Fully dispersed Haar-like filters for face/clutter classification."""

from .filters import (
    FilterMask,
    RegionWeights,
    TrainedClassifier,
    build_mask,
    classify,
    feature_value,
    mean_intensities,
    optimal_threshold,
    separation_score,
)
from .imaging import GrayImage, ImageVector, devectorize, equalize, load_gray, resize, vectorize
from .training import SampleWeights, TrainingConfig, train

__version__ = "0.1.0"

__all__ = [
    "FilterMask",
    "GrayImage",
    "ImageVector",
    "RegionWeights",
    "SampleWeights",
    "TrainedClassifier",
    "TrainingConfig",
    "build_mask",
    "classify",
    "devectorize",
    "equalize",
    "feature_value",
    "load_gray",
    "mean_intensities",
    "optimal_threshold",
    "resize",
    "separation_score",
    "train",
    "vectorize",
]
