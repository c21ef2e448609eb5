"""Forward and backward trajectories of map sequences.

Forward: x_k = T_k(x_{k-1}) — the new map is applied outermost, so the
trajectory is computed incrementally. Backward: Psi_k = T_1 o ... o T_k(x0)
— the new map enters innermost, so no incremental update exists and each
Psi_k is recomputed from scratch (O(k^2) total, vectorised over k).
Backward trajectories converge to an x0-independent limit whenever the
composition series of the gauges is summable; forward trajectories may
instead oscillate between several accumulation points.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .comparison import chain_series_sum
from .errors import DivergenceError, DomainError, InvalidInputError, SummabilityWarning
from .maps import MapSequence
from .metric import as_point

DEFAULT_TOL = 1e-9
DEFAULT_KMAX = 10_000
CONSECUTIVE_HITS = 5          # sub-tol steps required before declaring convergence
CLUSTER_RADIUS_FACTOR = 10.0  # accumulation-point clustering radius, in tols
TAIL_FRACTION = 4             # cluster over the last 1/4 of the iterates
SIMILARITY_GAP_TOL = 1e-9
SIMILARITY_SLACK = 1e-12
SUMMABILITY_PROBE_KMAX = 512


@dataclass
class TrajectoryResult:
    iterates: np.ndarray            # (n+1, d), row 0 is the start point
    gaps: np.ndarray                # (n,), gaps[k-1] = d(x_k, x_{k-1})
    converged: bool
    limit: np.ndarray | None
    accumulation_points: list = field(default_factory=list)
    iterations_used: int = 0


def _greedy_clusters(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """First-fit clustering by distance to each cluster's first member;
    returns member means in order of cluster creation."""
    members: list[list[int]] = []
    for idx in range(len(points)):
        p = points[idx]
        for group in members:
            if np.sqrt(((p - points[group[0]]) ** 2).sum()) <= radius:
                group.append(idx)
                break
        else:
            members.append([idx])
    return [points[g].mean(axis=0) for g in members]


def _finish(iterates: list[np.ndarray] | np.ndarray, gaps: list[float] | np.ndarray,
            converged: bool, tol: float) -> TrajectoryResult:
    pts = np.asarray(iterates)
    gaps = np.asarray(gaps, dtype=np.float64)
    if converged:
        return TrajectoryResult(pts, gaps, True, pts[-1].copy(), [], len(gaps))
    tail = pts[-max(1, len(pts) // TAIL_FRACTION):]
    clusters = _greedy_clusters(tail, CLUSTER_RADIUS_FACTOR * tol)
    return TrajectoryResult(pts, gaps, False, None, clusters, len(gaps))


def _check_run_args(seq: MapSequence, x0, tol: float, kmax: int) -> np.ndarray:
    x0 = as_point(x0, dim=seq.dim)
    if not seq.domain.contains(x0[None, :]):
        raise DomainError(f"start point {x0.tolist()} outside domain {seq.domain}")
    if not (np.isfinite(tol) and tol > 0):
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if kmax < 1:
        raise InvalidInputError(f"kmax must be >= 1, got {kmax}")
    return x0


def forward_trajectory(seq: MapSequence, x0, tol: float = DEFAULT_TOL,
                       kmax: int = DEFAULT_KMAX) -> TrajectoryResult:
    """Iterate x_k = T_k(x_{k-1}) until the step stays below tol for 5
    consecutive k, or kmax is reached.

    Non-converged runs report cluster centres of the last quarter of the
    iterates (clustering radius 10*tol) as accumulation points.
    """
    x0 = _check_run_args(seq, x0, tol, kmax)
    iterates = [x0]
    gaps: list[float] = []
    hits = 0
    for k in range(1, kmax + 1):
        x = seq.map_at(k).apply(iterates[-1])
        gaps.append(float(np.sqrt(((x - iterates[-1]) ** 2).sum())))
        iterates.append(x)
        hits = hits + 1 if gaps[-1] < tol else 0
        if hits >= CONSECUTIVE_HITS:
            return _finish(iterates, gaps, True, tol)
    return _finish(iterates, gaps, False, tol)


def _backward_sweep(seq: MapSequence, x0: np.ndarray, depth: int) -> np.ndarray:
    """All of Psi_1(x0) ... Psi_depth(x0) in one O(depth^2) vectorised pass.

    Row k-1 holds Psi_k: sweeping j from depth down to 1 and applying T_j
    to rows >= j-1 gives row k exactly the maps j <= k, innermost first.
    """
    pts = np.repeat(x0[None, :], depth, axis=0)
    for j in range(depth, 0, -1):
        pts[j - 1 :] = seq.map_at(j).apply_array(pts[j - 1 :])
    return pts


def backward_value(seq: MapSequence, x0, depth: int) -> np.ndarray:
    """Single composition Psi_depth(x0) = T_1(...T_depth(x0)), O(depth)."""
    x0 = as_point(x0, dim=seq.dim)
    if not seq.domain.contains(x0[None, :]):
        raise DomainError(f"start point {x0.tolist()} outside domain {seq.domain}")
    if depth < 1:
        raise InvalidInputError(f"depth must be >= 1, got {depth}")
    p = x0[None, :]
    for j in range(depth, 0, -1):
        p = seq.map_at(j).apply_array(p)
    return p[0]


def _first_convergence(gaps: np.ndarray, tol: float) -> int | None:
    """Smallest k (1-based) such that gaps k-4..k are all below tol."""
    hit = gaps < tol
    if len(hit) < CONSECUTIVE_HITS:
        return None
    runs = np.convolve(hit.astype(int), np.ones(CONSECUTIVE_HITS, dtype=int), mode="valid")
    idx = np.flatnonzero(runs == CONSECUTIVE_HITS)
    return int(idx[0]) + CONSECUTIVE_HITS if idx.size else None


def check_summability(seq: MapSequence, kmax: int = SUMMABILITY_PROBE_KMAX) -> bool:
    """Empirical probe of the gauge-composition series at t = 1."""
    return chain_series_sum(seq.chain, 1.0, kmax).converged


def backward_trajectory(seq: MapSequence, x0, tol: float = DEFAULT_TOL,
                        kmax: int = DEFAULT_KMAX, warn_on_divergent_series: bool = True) -> TrajectoryResult:
    """Compute Psi_k = T_1 o ... o T_k(x0), recomputed per k, until the
    Hausdorff-of-steps Cauchy criterion (5 consecutive gaps < tol) holds.

    Depth grows in doubling blocks so an early-converging run does not pay
    the full kmax^2 sweep; every Psi_k value is identical regardless of
    block size because each is a fresh composition.
    """
    x0 = _check_run_args(seq, x0, tol, kmax)
    if warn_on_divergent_series and not check_summability(seq, min(kmax, SUMMABILITY_PROBE_KMAX)):
        warnings.warn(
            "gauge-composition series did not pass the summability probe; "
            "backward trajectory may not converge",
            SummabilityWarning,
            stacklevel=2,
        )
    depth = min(64, kmax)
    while True:
        vals = _backward_sweep(seq, x0, depth)
        steps = np.vstack([x0[None, :], vals])
        gaps = np.sqrt(((steps[1:] - steps[:-1]) ** 2).sum(axis=1))
        k_stop = _first_convergence(gaps, tol)
        if k_stop is not None:
            return _finish(steps[: k_stop + 1], gaps[:k_stop], True, tol)
        if depth >= kmax:
            return _finish(steps, gaps, False, tol)
        depth = min(depth * 2, kmax)


@dataclass
class SimilarityResult:
    similar: bool
    gaps: np.ndarray            # gaps[k-1] = d(traj_k(x0), traj_k(y0))
    bounds: np.ndarray          # chain composition applied to d(x0, y0)
    dominated_from: int | None  # first k from which gaps <= bounds + slack holds onward

    def to_dict(self) -> dict:
        return {
            "similar": self.similar,
            "final_gap": float(self.gaps[-1]),
            "dominated_from": self.dominated_from,
        }


def asymptotically_similar(seq: MapSequence, x0, y0, direction: str = "backward",
                           kmax: int = 200) -> SimilarityResult:
    """Gap sequence between the trajectories of two start points, plus the
    similarity verdict: the final gap must be below 1e-9 and the gaps must
    eventually be dominated by the chain composition of d(x0, y0)."""
    x0 = as_point(x0, dim=seq.dim)
    y0 = as_point(y0, dim=seq.dim)
    if direction not in ("forward", "backward"):
        raise InvalidInputError(f"direction must be 'forward' or 'backward', got {direction!r}")
    if kmax < 1:
        raise InvalidInputError(f"kmax must be >= 1, got {kmax}")
    for p in (x0, y0):
        if not seq.domain.contains(p[None, :]):
            raise DomainError(f"start point {p.tolist()} outside domain {seq.domain}")

    if direction == "forward":
        xs, ys = [x0], [y0]
        for k in range(1, kmax + 1):
            xs.append(seq.map_at(k).apply(xs[-1]))
            ys.append(seq.map_at(k).apply(ys[-1]))
        ax, ay = np.asarray(xs[1:]), np.asarray(ys[1:])
    else:
        ax = _backward_sweep(seq, x0, kmax)
        ay = _backward_sweep(seq, y0, kmax)
    gaps = np.sqrt(((ax - ay) ** 2).sum(axis=1))

    d0 = float(np.sqrt(((x0 - y0) ** 2).sum()))
    if d0 == 0.0:
        bounds = np.zeros(kmax)
    else:
        bounds = seq.chain.compose_all(kmax, d0)
    ok = gaps <= bounds + SIMILARITY_SLACK
    ok_from_here = np.logical_and.accumulate(ok[::-1])[::-1]
    dominated_from = int(np.argmax(ok_from_here)) + 1 if ok_from_here.any() else None
    similar = bool(gaps[-1] < SIMILARITY_GAP_TOL and dominated_from is not None)
    return SimilarityResult(similar, gaps, bounds, dominated_from)


def write_trajectory_csv(path, result: TrajectoryResult) -> None:
    """Dump iterates as CSV rows (k, coords..., gap-to-previous)."""
    dim = result.iterates.shape[1]
    header = "# k," + ",".join(f"x{i}" for i in range(dim)) + ",gap"
    lines = [header]
    for k, row in enumerate(result.iterates):
        gap = "" if k == 0 else f"{result.gaps[k - 1]:.17g}"
        coords = ",".join(f"{c:.17g}" for c in row)
        lines.append(f"{k},{coords},{gap}")
    from pathlib import Path

    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
