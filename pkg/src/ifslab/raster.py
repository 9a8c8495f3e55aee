"""Hit-count rasters of 2-D clouds, written as binary PGM (P5)."""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .metricsets import PointCloud


def hit_counts(cloud: PointCloud, width: int, height: int) -> np.ndarray:
    """Histogram the cloud on a width x height grid spanning its bounding box.

    Row 0 is the top of the image (largest y).
    """
    if cloud.dimension != 2:
        raise ValueError("rasters need a 2-D cloud")
    if width < 1 or height < 1:
        raise ValueError("raster size must be positive")
    lo, hi = cloud.bounding_box()
    span = np.where(hi > lo, hi - lo, 1.0)
    px = np.clip(((cloud.points[:, 0] - lo[0]) / span[0] * (width - 1)).round().astype(int), 0, width - 1)
    py = np.clip(((cloud.points[:, 1] - lo[1]) / span[1] * (height - 1)).round().astype(int), 0, height - 1)
    counts = np.zeros((height, width), dtype=np.int64)
    np.add.at(counts, (height - 1 - py, px), 1)
    return counts


def to_gray(counts: np.ndarray) -> np.ndarray:
    """Log-scaled grayscale: empty pixels are 0, any hit is at least 1."""
    out = np.zeros(counts.shape, dtype=np.uint8)
    top = counts.max()
    if top == 0:
        return out
    hit = counts > 0
    if top == 1:
        out[hit] = 255
        return out
    scaled = 1 + 254 * np.log(counts[hit]) / np.log(top)
    out[hit] = np.clip(scaled.round(), 1, 255).astype(np.uint8)
    return out


def pgm_bytes(gray: np.ndarray) -> bytes:
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(gray, dtype=np.uint8).tobytes()


def write_pgm(path, gray: np.ndarray) -> None:
    Path(path).write_bytes(pgm_bytes(gray))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError("not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError("only 8-bit PGM supported")
    return np.frombuffer(data[m.end(): m.end() + w * h], dtype=np.uint8).reshape(h, w)
