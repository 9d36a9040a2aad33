"""Synthetic face/clutter image generator for demos and tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import GrayImage

KINDS = ("separable", "noisy")
SIDE = 64

# Face template: dark blocks at the two top corners, light band mid-face.
CORNER = 8
BAND_ROWS = (24, 40)
DARK, LIGHT, BASE = 0.05, 0.9, 0.5


def face_template(side: int = SIDE) -> np.ndarray:
    t = np.full((side, side), BASE)
    c = max(1, round(CORNER * side / SIDE))
    r0 = round(BAND_ROWS[0] * side / SIDE)
    r1 = round(BAND_ROWS[1] * side / SIDE)
    t[:c, :c] = DARK
    t[:c, side - c:] = DARK
    t[r0:r1, :] = LIGHT
    return t


def generate(kind: str, count: int, seed: int, side: int = SIDE):
    """Deterministically generate `count` faces and `count` clutters.

    Faces are the fixed template plus uniform noise; clutters are pure
    uniform noise.  The `noisy` kind uses a much larger noise amplitude so
    the classes overlap.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    amplitude = 0.1 if kind == "separable" else 0.8
    rng = np.random.default_rng(seed)
    template = face_template(side)
    faces, clutters = [], []
    for _ in range(count):
        noise = rng.uniform(-amplitude / 2, amplitude / 2, size=(side, side))
        faces.append(GrayImage(np.clip(template + noise, 0.0, 1.0)))
    for _ in range(count):
        clutters.append(GrayImage(rng.uniform(0.0, 1.0, size=(side, side))))
    return faces, clutters


def save_png(img: GrayImage, path) -> None:
    Image.fromarray(np.rint(img.pixels * 255.0).astype(np.uint8), mode="L").save(path)


def write_dataset(kind: str, count: int, seed: int, out_dir, side: int = SIDE):
    """Write faces/ and clutters/ PNG trees under out_dir; returns the two dirs."""
    out_dir = Path(out_dir)
    face_dir = out_dir / "faces"
    clutter_dir = out_dir / "clutters"
    face_dir.mkdir(parents=True, exist_ok=True)
    clutter_dir.mkdir(parents=True, exist_ok=True)
    faces, clutters = generate(kind, count, seed, side)
    for i, img in enumerate(faces):
        save_png(img, face_dir / f"face_{i:04d}.png")
    for i, img in enumerate(clutters):
        save_png(img, clutter_dir / f"clutter_{i:04d}.png")
    return face_dir, clutter_dir
