"""Non-stationary fractal interpolation on a uniform grid.

Given data (x_0, y_0), ..., (x_N, y_N) with increasing abscissae, each
operator stage holds N affine homeomorphisms l_i mapping the whole
interval I = [x_0, x_N] onto [x_{i-1}, x_i] and N vertical maps
F_i(x, y) = q_i(x) + alpha_i(y), where alpha_i is a contractive map in y
and q_i is the affine function of x solving the join conditions
F_i(x_0, y_0) = y_{i-1} and F_i(x_N, y_N) = y_i. The joins make the
transfer operator

    (T g)(x) = F_i(l_i^{-1}(x), g(l_i^{-1}(x)))   for x in [x_{i-1}, x_i]

preserve continuity and the interpolation pinning, and T contracts in the
sup metric with the gauge of the alphas. The limit of the backward
trajectory T_1 o ... o T_k(g) over a stage schedule is the non-stationary
interpolant; all iterates stay pinned to the data.

Functions live on a uniform grid whose nodes include every x_i; g is
evaluated at l_i^{-1}(x) by linear interpolation between grid samples
(error O(pitch), folded into verification slack). Node values are
re-asserted after every operator application so pinning is exact in
floating point, not just up to rounding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .comparison import ComparisonFunction, chain_series_sum, combine_max, ComparisonChain, Linear
from .errors import InvalidInputError, SummabilityWarning
from .maps import Affine1D, Box, ContractiveMap
from .trajectories import CONSECUTIVE_HITS

DEFAULT_TOL = 1e-9
DEFAULT_KMAX = 1000
MIN_GRID_INTERVALS = 1024
MAX_GRID_BASE = 4096
JOIN_TOL = 1e-12
BOUNDS_SLACK = 1e-9
MATKOWSKI_TOL = 1e-10
SUMMABILITY_PROBE_KMAX = 512


class InterpolationData:
    """Interpolation nodes with a working range [a, b] containing the ordinates.

    Default range: [min y - margin, max y + margin] with margin equal to
    the data span, generous enough that affine stages map into it; every
    constructed grid function validates containment a posteriori.
    """

    def __init__(self, xs, ys, bounds: tuple[float, float] | None = None,
                 margin: float | None = None):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise InvalidInputError("xs and ys must be equal-length 1D arrays")
        if xs.size < 3:
            raise InvalidInputError(f"need at least 3 interpolation nodes, got {xs.size}")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise InvalidInputError("interpolation nodes must be finite")
        if not np.all(np.diff(xs) > 0):
            raise InvalidInputError("abscissae must be strictly increasing")
        if bounds is None:
            span = float(ys.max() - ys.min())
            m = float(margin) if margin is not None else max(span, 1.0)
            bounds = (float(ys.min()) - m, float(ys.max()) + m)
        a, b = float(bounds[0]), float(bounds[1])
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise InvalidInputError(f"range bounds must satisfy a < b, got [{a}, {b}]")
        if np.any(ys < a) or np.any(ys > b):
            raise InvalidInputError("ordinates must lie within the range bounds")
        self.xs, self.ys = xs, ys
        self.xs.setflags(write=False)
        self.ys.setflags(write=False)
        self.bounds = (a, b)

    @classmethod
    def from_pairs(cls, pairs, bounds=None, margin=None) -> "InterpolationData":
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidInputError("expected rows of (x, y) pairs")
        return cls(arr[:, 0], arr[:, 1], bounds=bounds, margin=margin)

    @classmethod
    def from_csv(cls, path, bounds=None, margin=None) -> "InterpolationData":
        rows = []
        for ln, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split(",")
            if len(toks) != 2:
                raise InvalidInputError(f"{path}:{ln}: expected 'x,y', got {line!r}")
            rows.append([float(toks[0]), float(toks[1])])
        if not rows:
            raise InvalidInputError(f"{path}: no data rows")
        return cls.from_pairs(rows, bounds=bounds, margin=margin)

    @property
    def segments(self) -> int:
        return self.xs.size - 1

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def same_as(self, other: "InterpolationData") -> bool:
        return (
            np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
            and self.bounds == other.bounds
        )


class UniformGrid:
    """Uniform sample grid over [x0, xN]; every data node must land on it."""

    def __init__(self, x0: float, xN: float, intervals: int):
        if not (np.isfinite(x0) and np.isfinite(xN) and xN > x0):
            raise InvalidInputError("grid needs x0 < xN")
        if intervals < 1:
            raise InvalidInputError(f"grid needs >= 1 interval, got {intervals}")
        self.x0, self.xN, self.intervals = float(x0), float(xN), int(intervals)

    @classmethod
    def for_data(cls, data: InterpolationData, min_intervals: int = MIN_GRID_INTERVALS,
                 intervals: int | None = None) -> "UniformGrid":
        """Least uniform refinement holding all nodes, scaled past
        min_intervals (or validated at an explicit interval count)."""
        x0, xN = data.interval
        rel = (data.xs - x0) / (xN - x0)
        if intervals is not None:
            grid = cls(x0, xN, intervals)
            grid.node_indices(data)  # raises if the nodes miss the grid
            return grid
        for base in range(1, MAX_GRID_BASE + 1):
            if np.all(np.abs(rel * base - np.rint(rel * base)) <= 1e-9 * base):
                mult = int(np.ceil(min_intervals / base))
                return cls(x0, xN, base * mult)
        raise InvalidInputError(
            f"no uniform grid with <= {MAX_GRID_BASE} base intervals holds all nodes; "
            "node abscissae are not commensurate"
        )

    @cached_property
    def xs(self) -> np.ndarray:
        arr = np.linspace(self.x0, self.xN, self.intervals + 1)
        arr.setflags(write=False)
        return arr

    @property
    def pitch(self) -> float:
        return (self.xN - self.x0) / self.intervals

    def node_indices(self, data: InterpolationData) -> np.ndarray:
        rel = (data.xs - self.x0) / (self.xN - self.x0) * self.intervals
        idx = np.rint(rel).astype(int)
        if np.any(np.abs(rel - idx) > 1e-9 * self.intervals):
            raise InvalidInputError("data nodes do not lie on the grid")
        return idx


def _alpha_box(data: InterpolationData) -> Box:
    a, b = data.bounds
    w = 2.0 * max(1.0, abs(a), abs(b))
    return Box([-w], [w])


class FifOperatorStage:
    """One transfer operator: l_i, q_i coefficients, and vertical maps alpha_i."""

    def __init__(self, data: InterpolationData, alphas):
        if isinstance(alphas, ContractiveMap):
            alphas = (alphas,) * data.segments
        alphas = tuple(alphas)
        if len(alphas) != data.segments:
            raise InvalidInputError(
                f"need one vertical map per segment ({data.segments}), got {len(alphas)}"
            )
        for al in alphas:
            if not isinstance(al, ContractiveMap) or al.dim != 1:
                raise InvalidInputError("vertical maps must be 1D contractive maps")
        self.data = data
        self.alphas = alphas
        xs, ys = data.xs, data.ys
        x0, xN = data.interval
        # l_i(x) = a_i x + b_i with l_i(x0) = x_{i-1}, l_i(xN) = x_i
        self.l_a = (xs[1:] - xs[:-1]) / (xN - x0)
        self.l_b = xs[:-1] - self.l_a * x0
        # q_i(x) = c_i x + e_i solving F_i(x0, y0) = y_{i-1}, F_i(xN, yN) = y_i
        a0 = np.array([al.apply([ys[0]])[0] for al in alphas])
        aN = np.array([al.apply([ys[-1]])[0] for al in alphas])
        self.q_c = ((ys[1:] - aN) - (ys[:-1] - a0)) / (xN - x0)
        self.q_e = ys[:-1] - a0 - self.q_c * x0
        self.phi = combine_max(al.phi for al in alphas)
        self._check_joins()

    @classmethod
    def affine(cls, data: InterpolationData, scales) -> "FifOperatorStage":
        """Classical stage with alpha_i(y) = s_i * y, |s_i| < 1."""
        if np.isscalar(scales):
            scales = [float(scales)] * data.segments
        box = _alpha_box(data)
        return cls(data, tuple(Affine1D(float(s), 0.0, domain=box) for s in scales))

    def _check_joins(self) -> None:
        xs, ys = self.data.xs, self.data.ys
        x0, xN = self.data.interval
        l_left = self.l_a * x0 + self.l_b
        l_right = self.l_a * xN + self.l_b
        if np.max(np.abs(l_left - xs[:-1])) > JOIN_TOL or np.max(np.abs(l_right - xs[1:])) > JOIN_TOL:
            raise InvalidInputError("subinterval homeomorphisms miss their endpoints")
        scale = max(1.0, float(np.max(np.abs(ys))))
        a0 = np.array([al.apply([ys[0]])[0] for al in self.alphas])
        aN = np.array([al.apply([ys[-1]])[0] for al in self.alphas])
        left = self.q_c * x0 + self.q_e + a0
        right = self.q_c * xN + self.q_e + aN
        if np.max(np.abs(left - ys[:-1])) > JOIN_TOL * scale or np.max(np.abs(right - ys[1:])) > JOIN_TOL * scale:
            raise InvalidInputError("vertical maps violate the endpoint join conditions")

    def x_lipschitz(self) -> float:
        """Lipschitz constant of F_i in its first argument (max |q_i| slope)."""
        return float(np.max(np.abs(self.q_c)))


class StageSequence:
    """Indexed family k -> stage (1-based): prefix + periodic tail, one data set."""

    def __init__(self, prefix=(), tail=()):
        prefix, tail = tuple(prefix), tuple(tail)
        if not tail:
            raise InvalidInputError("stage sequence tail must be nonempty")
        stages = prefix + tail
        for s in stages:
            if not isinstance(s, FifOperatorStage):
                raise InvalidInputError("sequence elements must be operator stages")
        if any(not s.data.same_as(stages[0].data) for s in stages[1:]):
            raise InvalidInputError("all stages must share one data set")
        self.prefix, self.tail = prefix, tail
        self.data = stages[0].data
        self.chain = ComparisonChain(
            prefix=tuple(s.phi for s in prefix), tail=tuple(s.phi for s in tail)
        )

    @classmethod
    def constant(cls, stage: FifOperatorStage) -> "StageSequence":
        return cls(prefix=(), tail=(stage,))

    @classmethod
    def affine_schedule(cls, data: InterpolationData, prefix_scales=(), tail_scales=()) -> "StageSequence":
        """Stages from a vertical-scale schedule; each entry is a scalar or
        a per-segment list."""
        return cls(
            prefix=tuple(FifOperatorStage.affine(data, s) for s in prefix_scales),
            tail=tuple(FifOperatorStage.affine(data, s) for s in tail_scales),
        )

    def stage_at(self, k: int) -> FifOperatorStage:
        if k < 1:
            raise InvalidInputError(f"sequence indices are 1-based, got {k}")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail[(k - len(self.prefix) - 1) % len(self.tail)]


class GridFunction:
    """Samples of a continuous function on a uniform grid, pinned to the data."""

    def __init__(self, grid: UniformGrid, values, data: InterpolationData):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.intervals + 1,):
            raise InvalidInputError(
                f"expected {grid.intervals + 1} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("grid-function samples must be finite")
        a, b = data.bounds
        if values.min() < a - BOUNDS_SLACK or values.max() > b + BOUNDS_SLACK:
            raise InvalidInputError(
                f"samples leave the range bounds [{a}, {b}]; widen the data margin"
            )
        idx = grid.node_indices(data)
        if not np.array_equal(values[idx], data.ys):
            raise InvalidInputError("grid function is not pinned to the interpolation data")
        self.grid, self.values, self.data = grid, values, data
        self.values.setflags(write=False)

    def sup_distance(self, other: "GridFunction") -> float:
        if self.grid.intervals != other.grid.intervals:
            raise InvalidInputError("sup distance needs matching grids")
        return float(np.max(np.abs(self.values - other.values)))


def pl_interpolant(data: InterpolationData, grid: UniformGrid) -> GridFunction:
    """Piecewise-linear interpolant of the data, pinned exactly at the nodes."""
    vals = np.interp(grid.xs, data.xs, data.ys)
    vals[grid.node_indices(data)] = data.ys
    return GridFunction(grid, vals, data)


def random_pinned(data: InterpolationData, grid: UniformGrid,
                  rng: np.random.Generator) -> GridFunction:
    """Uniformly random samples within the range bounds, pinned at the nodes."""
    a, b = data.bounds
    vals = rng.uniform(a, b, size=grid.intervals + 1)
    vals[grid.node_indices(data)] = data.ys
    return GridFunction(grid, vals, data)


def apply_T(stage: FifOperatorStage, g: GridFunction) -> GridFunction:
    """One transfer-operator application on the grid.

    For each grid point x in [x_{i-1}, x_i]: pull back u = l_i^{-1}(x),
    evaluate g(u) by linear interpolation, and emit q_i(u) + alpha_i(g(u)).
    Node samples are re-asserted to the data values afterwards (they equal
    them analytically; re-pinning removes rounding drift).
    """
    if not stage.data.same_as(g.data):
        raise InvalidInputError("stage and grid function use different data sets")
    grid = g.grid
    data = stage.data
    idx = grid.node_indices(data)
    x0, xN = data.interval
    out = np.empty_like(g.values)
    for i in range(data.segments):
        lo, hi = idx[i], idx[i + 1]
        u = (grid.xs[lo : hi + 1] - stage.l_b[i]) / stage.l_a[i]
        u = np.clip(u, x0, xN)
        gu = np.interp(u, grid.xs, g.values)
        alpha_gu = stage.alphas[i].apply_array(gu[:, None])[:, 0]
        out[lo : hi + 1] = stage.q_c[i] * u + stage.q_e[i] + alpha_gu
    out[idx] = data.ys
    return GridFunction(grid, out, data)


@dataclass
class FifResult:
    function: GridFunction
    converged: bool
    gaps: np.ndarray
    iterations_used: int

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations_used": self.iterations_used,
            "final_gap": float(self.gaps[-1]) if len(self.gaps) else 0.0,
        }


def fif_backward(stages: StageSequence, g0: GridFunction, tol: float = DEFAULT_TOL,
                 kmax: int = DEFAULT_KMAX, warn_on_divergent_series: bool = True) -> FifResult:
    """Backward trajectory Psi_k = T_1 o ... o T_k(g0), recomputed per k,
    until the sup-norm step stays below tol for 5 consecutive k.

    Non-convergence by kmax is reported in the result, not raised.
    """
    if not stages.data.same_as(g0.data):
        raise InvalidInputError("stages and start function use different data sets")
    if not (np.isfinite(tol) and tol > 0):
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if kmax < 1:
        raise InvalidInputError(f"kmax must be >= 1, got {kmax}")
    if warn_on_divergent_series and not chain_series_sum(
        stages.chain, 1.0, min(kmax, SUMMABILITY_PROBE_KMAX)
    ).converged:
        warnings.warn(
            "gauge-composition series did not pass the summability probe; "
            "the interpolant trajectory may not converge",
            SummabilityWarning,
            stacklevel=2,
        )
    prev = g0
    gaps: list[float] = []
    hits = 0
    for k in range(1, kmax + 1):
        cur = g0
        for j in range(k, 0, -1):
            cur = apply_T(stages.stage_at(j), cur)
        gaps.append(cur.sup_distance(prev))
        prev = cur
        hits = hits + 1 if gaps[-1] < tol else 0
        if hits >= CONSECUTIVE_HITS:
            return FifResult(cur, True, np.asarray(gaps), k)
    return FifResult(prev, False, np.asarray(gaps), kmax)


@dataclass
class MatkowskiReport:
    max_violation: float
    slack: float
    passed: bool
    trials: int
    rng_seed: int
    threshold: float

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "slack": self.slack,
            "passed": self.passed,
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "threshold": self.threshold,
        }


def verify_matkowski(stage: FifOperatorStage, trials: int = 100, rng_seed: int = 0,
                     grid: UniformGrid | None = None) -> MatkowskiReport:
    """Spot-check sup|Tg - Th| <= phi(sup|g - h|) on seeded random pinned pairs.

    Passes iff the max violation is <= 1e-10 plus the linear-interpolation
    slack (Lipschitz constant of F in x times the grid pitch).
    """
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    if grid is None:
        grid = UniformGrid.for_data(stage.data)
    rng = np.random.default_rng(rng_seed)
    worst = -np.inf
    for _ in range(trials):
        g = random_pinned(stage.data, grid, rng)
        h = random_pinned(stage.data, grid, rng)
        d_in = g.sup_distance(h)
        d_out = apply_T(stage, g).sup_distance(apply_T(stage, h))
        worst = max(worst, d_out - stage.phi(d_in))
    slack = stage.x_lipschitz() * grid.pitch
    threshold = MATKOWSKI_TOL + slack
    return MatkowskiReport(float(worst), slack, worst <= threshold, trials, rng_seed, threshold)


def write_grid_function_csv(path, g: GridFunction) -> None:
    """Rows of (x, f(x)) at 17 significant digits; `#` header comment."""
    lines = ["# x,f(x)"]
    for x, v in zip(g.grid.xs, g.values):
        lines.append(f"{x:.17g},{v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
