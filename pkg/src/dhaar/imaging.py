"""Image ingestion: load, normalize, resize, equalize, vectorize.

All stages are pure functions on immutable data and keep intensities in
[0, 1].  The canonical pipeline order is load -> resize -> equalize ->
vectorize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

# Rec.601 luma weights for color-to-gray conversion.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageFormatError(Exception):
    """Raised when a file cannot be decoded as a supported image."""


@dataclass(frozen=True)
class GrayImage:
    """A 2-D grid of intensities in [0, 1], stored row-major."""

    pixels: np.ndarray  # shape (height, width), float64

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 2 or p.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ImageVector:
    """Row-major flattening of a GrayImage."""

    values: np.ndarray  # shape (source_width * source_height,)
    source_width: int
    source_height: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size != self.source_width * self.source_height:
            raise ValueError("values length must equal width * height")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def load_gray(path) -> GrayImage:
    """Load a PNG/PGM/JPEG file as a normalized grayscale image.

    Color inputs are converted to luma with Rec.601 weights before the
    division by 255, so a pure-red pixel maps to exactly 0.299.
    """
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("1", "L", "I", "I;16", "F"):
                arr = np.asarray(im.convert("F"), dtype=np.float64)
                if im.mode in ("I", "I;16"):
                    # 16-bit grayscale scales by its own full range
                    arr = arr / 257.0
                gray = np.clip(arr / 255.0, 0.0, 1.0)
            else:
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                gray = (rgb @ LUMA_WEIGHTS) / 255.0
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unsupported image format: {path}") from exc
    return GrayImage(np.clip(gray, 0.0, 1.0))


def load_rgb(path) -> np.ndarray | None:
    """Load the color channels of an image, or None if it is grayscale.

    Returns an (H, W, 3) uint8 array for color inputs; used by the skin
    prescreen, which is disabled for grayscale sources.
    """
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("1", "L", "I", "I;16", "F"):
                return None
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unsupported image format: {path}") from exc


def quantize_levels(img: GrayImage) -> np.ndarray:
    """Map intensities to integer levels 0..255."""
    return np.rint(img.pixels * 255.0).astype(np.int64)


def equalize(img: GrayImage) -> GrayImage:
    """Histogram equalization over 256 levels.

    Intensities are quantized to 256 levels and remapped through the
    cumulative histogram, h(v) = (cdf(v) - cdf_min) / (total - cdf_min).
    A constant image is returned unchanged (the denominator degenerates).
    """
    levels = quantize_levels(img)
    hist = np.bincount(levels.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    total = cdf[-1]
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    if total == cdf_min:
        return img
    mapped = (cdf - cdf_min) / float(total - cdf_min)
    return GrayImage(np.clip(mapped[levels], 0.0, 1.0))


def _axis_coords(src: int, dst: int) -> np.ndarray:
    # Corner-aligned sampling: endpoints of source and target coincide.
    if dst == 1:
        return np.array([(src - 1) / 2.0])
    return np.linspace(0.0, src - 1, dst)


def resize(img: GrayImage, w: int, h: int) -> GrayImage:
    """Bilinear resize with corner-aligned coordinates."""
    if w < 1 or h < 1:
        raise ValueError("target dimensions must be >= 1")
    src = img.pixels
    ys = _axis_coords(img.height, h)
    xs = _axis_coords(img.width, w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, img.height - 1)
    x1 = np.minimum(x0 + 1, img.width - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = src[np.ix_(y0, x0)] * (1 - wx) + src[np.ix_(y0, x1)] * wx
    bot = src[np.ix_(y1, x0)] * (1 - wx) + src[np.ix_(y1, x1)] * wx
    return GrayImage(np.clip(top * (1 - wy) + bot * wy, 0.0, 1.0))


def vectorize(img: GrayImage) -> ImageVector:
    """Flatten to a row-major vector (index p = row * width + col)."""
    return ImageVector(img.pixels.ravel().copy(), img.width, img.height)


def devectorize(vec: ImageVector) -> GrayImage:
    """Inverse of vectorize."""
    return GrayImage(vec.values.reshape(vec.source_height, vec.source_width).copy())


def prepare(img: GrayImage, side: int = 64, apply_equalize: bool = True) -> ImageVector:
    """Standard pipeline: resize to side x side, equalize, vectorize."""
    out = img if (img.width == side and img.height == side) else resize(img, side, side)
    if apply_equalize:
        out = equalize(out)
    return vectorize(out)
