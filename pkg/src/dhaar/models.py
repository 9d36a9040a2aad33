"""Model persistence: a single self-describing JSON document per classifier."""

from __future__ import annotations

import json
from pathlib import Path

from .filters import FilterMask, RegionWeights, TrainedClassifier

FORMAT_VERSION = 1


def save_model(c: TrainedClassifier, path, metadata: dict | None = None) -> None:
    """Serialize a classifier; indices are stored sorted for canonical form."""
    doc = {
        "format_version": FORMAT_VERSION,
        "width": c.mask.width,
        "height": c.mask.height,
        "black_indices": [int(i) for i in c.mask.black_indices],
        "white_indices": [int(i) for i in c.mask.white_indices],
        "v1": c.weights.v1,
        "v2": c.weights.v2,
        "theta": c.theta,
        "metadata": metadata or {},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path) -> tuple[TrainedClassifier, dict]:
    """Inverse of save_model; round-trips indices bit-exactly."""
    doc = json.loads(Path(path).read_text())
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version: {version}")
    mask = FilterMask(
        doc["width"], doc["height"], doc["black_indices"], doc["white_indices"]
    )
    c = TrainedClassifier(mask, RegionWeights(doc["v1"], doc["v2"]), doc["theta"])
    return c, doc.get("metadata", {})
