"""Binary PGM (P5) rasterisation of point clouds.

A pixel is 255 when at least one point lands in it, else 0. Points map to
columns by floor((x - lo)/pitch) with the hi edge clamped into the last
column; points outside the bounds are dropped. Rows are top-down with the
top row holding the maximal second coordinate. 1D clouds render as a
strip of height 16.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .maps import Box
from .metric import CompactSet

STRIP_HEIGHT = 16


def _axis_cells(coords: np.ndarray, lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    inside = (coords >= lo) & (coords <= hi)
    cells = np.floor((coords - lo) / ((hi - lo) / n)).astype(int)
    return np.minimum(cells, n - 1), inside


def render_pgm(cloud: CompactSet, width: int, height: int, bounds: Box) -> bytes:
    """Rasterise to P5 bytes: header `P5\\n<w> <h>\\n255\\n` + row-major pixels."""
    if width < 1 or height < 1:
        raise InvalidInputError("width and height must be >= 1")
    if bounds.dim != cloud.dim:
        raise InvalidInputError(f"bounds are {bounds.dim}D but the cloud is {cloud.dim}D")
    if cloud.dim == 1:
        height = STRIP_HEIGHT
    img = np.zeros((height, width), dtype=np.uint8)
    cols, in_x = _axis_cells(cloud.points[:, 0], float(bounds.lo[0]), float(bounds.hi[0]), width)
    if cloud.dim == 1:
        img[:, cols[in_x]] = 255
    else:
        rows, in_y = _axis_cells(cloud.points[:, 1], float(bounds.lo[1]), float(bounds.hi[1]), height)
        keep = in_x & in_y
        img[(height - 1) - rows[keep], cols[keep]] = 255
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + img.tobytes()


def write_pgm(path, cloud: CompactSet, width: int, height: int, bounds: Box) -> None:
    Path(path).write_bytes(render_pgm(cloud, width, height, bounds))
