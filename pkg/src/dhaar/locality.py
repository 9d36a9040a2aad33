"""Region-restricted (local and semi-local) filter training."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .training import TrainingConfig, train, with_region

# Rows of the default semi-local band on a 64-row canvas: eyes, eyebrows,
# nose and cheeks.
SEMI_LOCAL_ROWS = (16, 40)


@dataclass(frozen=True)
class Region:
    """A named set of pixel positions within a fixed canvas."""

    name: str
    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size == 0:
            raise ValueError("region must contain at least one pixel")
        if idx[0] < 0:
            raise ValueError("region indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.size


def grid_regions(width: int, height: int, rows: int, cols: int) -> list[Region]:
    """Partition the canvas into a rows x cols grid of rectangles, row-major."""
    if rows < 1 or cols < 1 or height % rows or width % cols:
        raise ValueError("grid must divide the canvas dimensions exactly")
    cell_h, cell_w = height // rows, width // cols
    out = []
    for r in range(rows):
        for c in range(cols):
            rr = np.arange(r * cell_h, (r + 1) * cell_h)
            cc = np.arange(c * cell_w, (c + 1) * cell_w)
            idx = (rr[:, None] * width + cc[None, :]).ravel()
            out.append(Region(f"r{r}c{c}", idx))
    return out


def band_region(width: int, height: int, row_start: int, row_end: int) -> Region:
    """All pixels whose row lies in [row_start, row_end)."""
    if not (0 <= row_start < row_end <= height):
        raise ValueError("invalid row range")
    idx = np.arange(row_start * width, row_end * width)
    return Region(f"band{row_start}-{row_end}", idx)


def rect_union_region(width: int, height: int, rects) -> Region:
    """Union of inclusive-exclusive rectangles given as (x0, y0, x1, y1)."""
    parts = []
    for x0, y0, x1, y1 in rects:
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise ValueError(f"rectangle {(x0, y0, x1, y1)} out of canvas")
        rr = np.arange(y0, y1)
        cc = np.arange(x0, x1)
        parts.append((rr[:, None] * width + cc[None, :]).ravel())
    return Region("rects", np.concatenate(parts))


def parse_region_spec(spec: str, width: int, height: int):
    """Parse a CLI region string.

    ``grid:RxC`` yields the full list of grid cells; ``band:r0:r1`` and
    ``rects:x0,y0,x1,y1[;...]`` yield a single region.
    """
    kind, _, rest = spec.partition(":")
    if kind == "grid":
        r, _, c = rest.partition("x")
        return grid_regions(width, height, int(r), int(c))
    if kind == "band":
        r0, _, r1 = rest.partition(":")
        return band_region(width, height, int(r0), int(r1))
    if kind == "rects":
        rects = [tuple(int(v) for v in part.split(",")) for part in rest.split(";")]
        if any(len(r) != 4 for r in rects):
            raise ValueError("each rect needs x0,y0,x1,y1")
        return rect_union_region(width, height, rects)
    raise ValueError(f"unknown region spec: {spec!r}")


def train_local(faces, clutters, region: Region, cfg: TrainingConfig = TrainingConfig()):
    """Train a filter whose pixels are confined to one region.

    Default region sizes keep the global engagement density: each region
    gets round(|region| / 16) black and white pixels apiece.
    """
    dim = faces[0].source_width * faces[0].source_height
    if region.indices[-1] >= dim:
        raise ValueError("region does not fit the image dimensions")
    return train(faces, clutters, with_region(cfg, region.indices))
