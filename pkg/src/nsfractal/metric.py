"""Point clouds in R^d (d = 1 or 2) and Hausdorff distances between them.

Compact sets are represented as finite point clouds: intervals and boxes
are sampled at a caller-chosen pitch, and every distance computed here is
exact for the clouds themselves (sampling error of the underlying
continuous set is bounded by the pitch).

The directed/Hausdorff distances use the O(n*m) full pairwise sweep as
the reference path; it is vectorised in row blocks but performs no
spatial pruning, so it matches a plain double loop to rounding error.
All functions are pure; ties in max/min resolve to the first index in
storage order.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError

DEDUP_TOL = 1e-12
_BLOCK_ROWS = 256  # row block for the pairwise-distance sweep


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Validate and return a point as a float64 vector of length 1 or 2."""
    arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if arr.ndim != 1:
        raise InvalidInputError(f"point must be a flat coordinate vector, got shape {arr.shape}")
    if arr.size not in (1, 2):
        raise InvalidInputError(f"only dimensions 1 and 2 are supported, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("point coordinates must be finite")
    if dim is not None and arr.size != dim:
        raise InvalidInputError(f"dimension mismatch: expected {dim}, got {arr.size}")
    return arr


def metric_distance(p, q) -> float:
    """Euclidean distance between two points of equal dimension."""
    a = as_point(p)
    b = as_point(q, dim=a.size)
    return float(np.sqrt(np.sum((a - b) ** 2)))


def dedup_points(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop points that duplicate an earlier point within `tol` (Euclidean).

    Keeps the first occurrence; clusters chained through intermediate
    points collapse onto their first member.
    """
    if len(points) <= 1:
        return points
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return points
    keep = np.ones(len(points), dtype=bool)
    keep[pairs[:, 1]] = False
    return points[keep]


def decimate_points(points: np.ndarray, pitch: float) -> np.ndarray:
    """Snap points to the grid pitch*Z^d and drop duplicates.

    Output is lexicographically sorted. Each point moves by at most
    pitch*sqrt(d)/2.
    """
    if not (np.isfinite(pitch) and pitch > 0):
        raise InvalidInputError(f"decimation pitch must be positive, got {pitch}")
    scaled = points / pitch
    if np.any(np.abs(scaled) >= 2**62):
        raise InvalidInputError("decimation pitch too small for the coordinate range")
    keys = np.unique(np.rint(scaled).astype(np.int64), axis=0)
    return keys.astype(np.float64) * pitch


class CompactSet:
    """Nonempty finite point cloud; the computable surrogate for a compact set.

    `resolution` records the sampling pitch that generated the cloud
    (0 means the set is exact/finite). Construction normalises the cloud:
    near-duplicate points (within 1e-12) are dropped, first occurrence kept.
    """

    __slots__ = ("points", "resolution")

    def __init__(self, points, resolution: float = 0.0):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidInputError("a compact set needs at least one point")
        if pts.shape[1] not in (1, 2):
            raise InvalidInputError(f"only dimensions 1 and 2 are supported, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point coordinates must be finite")
        if not (np.isfinite(resolution) and resolution >= 0):
            raise InvalidInputError(f"resolution must be a nonnegative real, got {resolution}")
        self.points = dedup_points(pts)
        self.points.setflags(write=False)
        self.resolution = float(resolution)

    @classmethod
    def _trusted(cls, points: np.ndarray, resolution: float) -> "CompactSet":
        # internal fast path: caller guarantees the invariants
        obj = object.__new__(cls)
        points.setflags(write=False)
        object.__setattr__(obj, "points", points)
        object.__setattr__(obj, "resolution", float(resolution))
        return obj

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __repr__(self) -> str:
        return f"CompactSet({len(self)} points, dim={self.dim}, resolution={self.resolution:g})"

    def decimated(self, pitch: float) -> "CompactSet":
        return CompactSet._trusted(decimate_points(self.points, pitch), pitch)

    def same_points(self, other: "CompactSet", tol: float = DEDUP_TOL) -> bool:
        """True if both clouds agree up to `tol` in Hausdorff distance."""
        if self.dim != other.dim:
            return False
        return hausdorff_distance(self, other) <= tol


def sample_interval(lo: float, hi: float, pitch: float) -> CompactSet:
    """Uniform 1D sample of [lo, hi]; the pitch is rounded so the endpoints land exactly."""
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise InvalidInputError(f"need finite lo < hi, got [{lo}, {hi}]")
    if not (np.isfinite(pitch) and pitch > 0):
        raise InvalidInputError(f"pitch must be positive, got {pitch}")
    n = max(1, int(round((hi - lo) / pitch)))
    xs = np.linspace(lo, hi, n + 1)
    return CompactSet._trusted(xs[:, None], (hi - lo) / n)


def sample_box(lo, hi, pitch: float) -> CompactSet:
    """Uniform 2D grid sample of the box [lo, hi]."""
    lo = as_point(lo, dim=2)
    hi = as_point(hi, dim=2)
    if not np.all(hi > lo):
        raise InvalidInputError("box needs lo < hi in every coordinate")
    axes = []
    for a, b in zip(lo, hi):
        n = max(1, int(round((b - a) / pitch)))
        axes.append(np.linspace(a, b, n + 1))
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return CompactSet._trusted(pts, pitch)


def _check_pair(A: CompactSet, B: CompactSet) -> None:
    if not isinstance(A, CompactSet) or not isinstance(B, CompactSet):
        raise InvalidInputError("expected CompactSet operands")
    if A.dim != B.dim:
        raise InvalidInputError(f"dimension mismatch: {A.dim} vs {B.dim}")


def _min_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each row of `a`, Euclidean distance to the nearest row of `b`."""
    out = np.empty(len(a))
    for s in range(0, len(a), _BLOCK_ROWS):
        blk = a[s : s + _BLOCK_ROWS]
        d2 = ((blk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        out[s : s + len(blk)] = np.sqrt(d2.min(axis=1))
    return out


def directed_distance(A: CompactSet, B: CompactSet) -> float:
    """max over a in A of the distance from a to the nearest point of B.

    Not symmetric.
    """
    _check_pair(A, B)
    return float(_min_dists(A.points, B.points).max())


def hausdorff_distance(A: CompactSet, B: CompactSet) -> float:
    """Hausdorff distance: max of the two directed distances. Symmetric."""
    _check_pair(A, B)
    return max(directed_distance(A, B), directed_distance(B, A))


def write_points_csv(path, cloud: CompactSet) -> None:
    """One point per row, comma-separated coordinates, 17 significant digits."""
    lines = [f"# resolution = {cloud.resolution:.17g}"]
    for row in cloud.points:
        lines.append(",".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_points_csv(path) -> CompactSet:
    """Parse a point-cloud CSV; `#` lines are comments (resolution recovered if present)."""
    resolution = 0.0
    rows: list[list[float]] = []
    for ln, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("resolution"):
                try:
                    resolution = float(body.split("=", 1)[1])
                except (IndexError, ValueError) as exc:
                    raise InvalidInputError(f"{path}:{ln}: bad resolution comment") from exc
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise InvalidInputError(f"{path}:{ln}: unparseable row {line!r}") from exc
    if not rows:
        raise InvalidInputError(f"{path}: no points found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InvalidInputError(f"{path}: inconsistent column counts")
    return CompactSet(np.asarray(rows), resolution=resolution)
