"""Set-lifted dynamics: Hutchinson operators, SFS trajectories, CIFS truncation.

A function system lifts to an operator on point clouds, F(A) = union of
f_r(A); the lift contracts in the Hausdorff metric with gauge equal to
the pointwise max of the members' gauges. Sequences of function systems
iterate these lifts forward (new system outermost) or backward (new
system innermost, recomputed per depth); the backward limit is the
non-stationary attractor.

Cloud-size control: |F(A)| = n_maps * |A| grows geometrically, so an
optional decimation pitch snaps each image cloud to a grid (Hausdorff
error at most pitch*sqrt(d)/2) and a hard cap raises a resource error.
The combined image cloud is lexicographically sorted before dedup or
decimation, so results do not depend on evaluation order.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .comparison import ComparisonFunction, chain_series_sum, combine_max, ComparisonChain, Linear
from .errors import InvalidInputError, ResourceLimitError, SummabilityWarning
from .maps import Affine1D, Box, ContractiveMap
from .metric import (
    DEDUP_TOL,
    CompactSet,
    decimate_points,
    dedup_points,
    hausdorff_distance,
)
from .trajectories import CLUSTER_RADIUS_FACTOR, CONSECUTIVE_HITS, TAIL_FRACTION

DEFAULT_TOL = 1e-9
DEFAULT_KMAX = 1000
CLOUD_CAP = 1_000_000
MAP_CAP = 10_000
SET_LIFT_TOL = 1e-10
CERTIFICATE_EXTRA_TERMS = 10
SUMMABILITY_PROBE_KMAX = 512


class FunctionSystem:
    """Finite list of contractive maps sharing one domain, with the
    induced system gauge (pointwise max of member gauges)."""

    def __init__(self, maps, phi_system: ComparisonFunction | None = None):
        maps = tuple(maps)
        if not maps:
            raise InvalidInputError("a function system needs at least one map")
        for m in maps:
            if not isinstance(m, ContractiveMap):
                raise InvalidInputError("system members must be contractive maps")
        if any(m.domain != maps[0].domain for m in maps[1:]):
            raise InvalidInputError("all maps in a system must share one domain")
        self.maps = maps
        self.domain = maps[0].domain
        self.phi_system = phi_system if phi_system is not None else combine_max(m.phi for m in maps)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __len__(self) -> int:
        return len(self.maps)

    def to_config(self) -> dict:
        return {"maps": [m.to_config() for m in self.maps]}


def hutchinson(system: FunctionSystem, A: CompactSet, resolution: float | None = None,
               cloud_cap: int = CLOUD_CAP) -> CompactSet:
    """Union cloud {f_r(a) : a in A, r = 1..n}, deduplicated at 1e-12 and
    optionally decimated to `resolution`."""
    if A.dim != system.dim:
        raise InvalidInputError(f"dimension mismatch: set is {A.dim}D, system is {system.dim}D")
    n_out = len(A) * len(system.maps)
    if n_out > cloud_cap:
        raise ResourceLimitError(f"image cloud would hold {n_out} points (cap {cloud_cap})")
    images = np.vstack([m.apply_array(A.points) for m in system.maps])
    images = images[np.lexsort(images.T[::-1])]
    if resolution is not None:
        return CompactSet._trusted(decimate_points(images, resolution), resolution)
    return CompactSet._trusted(dedup_points(images, DEDUP_TOL), A.resolution)


class SfsSequence:
    """Indexed family i -> function system (1-based): prefix + periodic tail."""

    def __init__(self, prefix=(), tail=()):
        prefix, tail = tuple(prefix), tuple(tail)
        if not tail:
            raise InvalidInputError("system sequence tail must be nonempty")
        systems = prefix + tail
        for s in systems:
            if not isinstance(s, FunctionSystem):
                raise InvalidInputError("sequence elements must be function systems")
        if any(s.domain != systems[0].domain for s in systems[1:]):
            raise InvalidInputError("all systems in a sequence must share one domain")
        self.prefix, self.tail = prefix, tail
        self.domain = systems[0].domain
        self.chain = ComparisonChain(
            prefix=tuple(s.phi_system for s in prefix),
            tail=tuple(s.phi_system for s in tail),
        )

    @classmethod
    def constant(cls, system: FunctionSystem) -> "SfsSequence":
        return cls(prefix=(), tail=(system,))

    @property
    def dim(self) -> int:
        return self.domain.dim

    def system_at(self, i: int) -> FunctionSystem:
        if i < 1:
            raise InvalidInputError(f"sequence indices are 1-based, got {i}")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]


@dataclass
class SetTrajectoryResult:
    iterates: list                  # CompactSet per step, element 0 is the start
    gaps: np.ndarray                # Hausdorff step sizes
    converged: bool
    limit: CompactSet | None
    accumulation_sets: list = field(default_factory=list)
    iterations_used: int = 0


def _finish_sets(iterates: list, gaps: list, converged: bool, tol: float) -> SetTrajectoryResult:
    gaps = np.asarray(gaps, dtype=np.float64)
    if converged:
        return SetTrajectoryResult(iterates, gaps, True, iterates[-1], [], len(gaps))
    tail = iterates[-max(1, len(iterates) // TAIL_FRACTION):]
    clusters: list[CompactSet] = []
    radius = CLUSTER_RADIUS_FACTOR * tol
    for A in tail:
        for rep in clusters:
            if hausdorff_distance(A, rep) <= radius:
                break
        else:
            clusters.append(A)
    return SetTrajectoryResult(iterates, gaps, False, None, clusters, len(gaps))


def _check_sfs_args(seq: SfsSequence, A0: CompactSet, tol: float, kmax: int) -> None:
    if not isinstance(A0, CompactSet):
        raise InvalidInputError("initial set must be a CompactSet")
    if A0.dim != seq.dim:
        raise InvalidInputError(f"dimension mismatch: set is {A0.dim}D, systems are {seq.dim}D")
    if not (np.isfinite(tol) and tol > 0):
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if kmax < 1:
        raise InvalidInputError(f"kmax must be >= 1, got {kmax}")


def sfs_forward(seq: SfsSequence, A0: CompactSet, tol: float = DEFAULT_TOL,
                kmax: int = DEFAULT_KMAX, resolution: float | None = None,
                cloud_cap: int = CLOUD_CAP) -> SetTrajectoryResult:
    """Iterate A_k = F_k(A_{k-1}); Hausdorff-Cauchy convergence (5
    consecutive steps below tol). Non-converged runs report accumulation
    sets clustered at radius 10*tol over the last quarter of iterates."""
    _check_sfs_args(seq, A0, tol, kmax)
    iterates = [A0]
    gaps: list[float] = []
    hits = 0
    for k in range(1, kmax + 1):
        A = hutchinson(seq.system_at(k), iterates[-1], resolution, cloud_cap)
        gaps.append(hausdorff_distance(A, iterates[-1]))
        iterates.append(A)
        hits = hits + 1 if gaps[-1] < tol else 0
        if hits >= CONSECUTIVE_HITS:
            return _finish_sets(iterates, gaps, True, tol)
    return _finish_sets(iterates, gaps, False, tol)


def sfs_backward(seq: SfsSequence, A0: CompactSet, tol: float = DEFAULT_TOL,
                 kmax: int = DEFAULT_KMAX, resolution: float | None = None,
                 cloud_cap: int = CLOUD_CAP, warn_on_divergent_series: bool = True) -> SetTrajectoryResult:
    """Psi_k = F_1 o ... o F_k(A0), recomputed fresh per k (the new system
    enters innermost). The converged limit is the non-stationary attractor
    and is independent of A0 up to 10*tol."""
    _check_sfs_args(seq, A0, tol, kmax)
    if warn_on_divergent_series and not chain_series_sum(
        seq.chain, 1.0, min(kmax, SUMMABILITY_PROBE_KMAX)
    ).converged:
        warnings.warn(
            "gauge-composition series did not pass the summability probe; "
            "backward set trajectory may not converge",
            SummabilityWarning,
            stacklevel=2,
        )
    iterates = [A0]
    gaps: list[float] = []
    hits = 0
    for k in range(1, kmax + 1):
        A = A0
        for j in range(k, 0, -1):
            A = hutchinson(seq.system_at(j), A, resolution, cloud_cap)
        gaps.append(hausdorff_distance(A, iterates[-1]))
        iterates.append(A)
        hits = hits + 1 if gaps[-1] < tol else 0
        if hits >= CONSECUTIVE_HITS:
            return _finish_sets(iterates, gaps, True, tol)
    return _finish_sets(iterates, gaps, False, tol)


class CifsSystem:
    """Countable family of contractions given by a generator rule, plus a
    truncation rule eps -> N(eps) bounding the prefix whose union
    approximates the closed countable union within eps."""

    def __init__(self, map_generator: Callable[[int], ContractiveMap],
                 truncation_bound: Callable[[float], int],
                 domain: Box, phi_system: ComparisonFunction,
                 map_cap: int = MAP_CAP):
        self.map_generator = map_generator
        self.truncation_bound = truncation_bound
        self.domain = domain
        self.phi_system = phi_system
        self.map_cap = int(map_cap)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @classmethod
    def geometric(cls, scale: float, scale_ratio: float, shift: float = 0.0,
                  shift_ratio: float = 0.0, domain: Box | None = None,
                  map_cap: int = MAP_CAP) -> "CifsSystem":
        """1D family f_i(x) = scale*scale_ratio^(i-1)*x + shift*shift_ratio^(i-1).

        Requires |scale| < 1 and |scale_ratio|, |shift_ratio| < 1 so the
        omitted-tail displacement bound
        2*(|scale|*R*|scale_ratio|^(N-1) + |shift|*|shift_ratio|^(N-1))
        decays and yields the default truncation rule.
        """
        if not abs(scale) < 1:
            raise InvalidInputError(f"|scale| must be < 1, got {scale}")
        if not (abs(scale_ratio) < 1 and abs(shift_ratio) < 1):
            raise InvalidInputError("|scale_ratio| and |shift_ratio| must be < 1 for truncation")
        if domain is None:
            domain = Box([0.0], [1.0])
        radius = float(np.max(np.abs(np.concatenate([domain.lo, domain.hi]))))

        def gen(i: int) -> ContractiveMap:
            a = scale * scale_ratio ** (i - 1)
            b = shift * shift_ratio ** (i - 1)
            return Affine1D(a, b, domain=domain, phi=Linear(abs(a)))

        def bound(eps: float) -> int:
            if not (np.isfinite(eps) and eps > 0):
                raise InvalidInputError(f"eps must be positive, got {eps}")
            n = 1
            while 2 * (abs(scale) * radius * abs(scale_ratio) ** (n - 1)
                       + abs(shift) * abs(shift_ratio) ** (n - 1)) >= eps:
                n += 1
                if n > map_cap:
                    return n
            return n

        return cls(gen, bound, domain, Linear(abs(scale)), map_cap)


@dataclass
class TruncationCertificate:
    n_terms: int
    extra_terms: int
    extra_shift: float
    eps: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "extra_terms": self.extra_terms,
            "extra_shift": self.extra_shift,
            "eps": self.eps,
            "ok": self.ok,
        }


def _union_images(C: CifsSystem, A: CompactSet, lo: int, hi: int,
                  cloud_cap: int) -> np.ndarray:
    n_out = len(A) * (hi - lo + 1)
    if n_out > cloud_cap:
        raise ResourceLimitError(f"union cloud would hold {n_out} points (cap {cloud_cap})")
    return np.vstack([C.map_generator(i).apply_array(A.points) for i in range(lo, hi + 1)])


def cifs_operator(C: CifsSystem, A: CompactSet, eps: float,
                  resolution: float | None = None,
                  cloud_cap: int = CLOUD_CAP) -> tuple[CompactSet, TruncationCertificate]:
    """Truncated countable union: f_1(A) u ... u f_N(eps)(A), plus a
    certificate that the next 10 terms move the set by less than eps in
    Hausdorff distance."""
    if A.dim != C.dim:
        raise InvalidInputError(f"dimension mismatch: set is {A.dim}D, system is {C.dim}D")
    n = max(1, int(C.truncation_bound(eps)))
    if n > C.map_cap:
        raise ResourceLimitError(f"truncation rule requires {n} maps (cap {C.map_cap})")
    raw = _union_images(C, A, 1, n, cloud_cap)
    raw = raw[np.lexsort(raw.T[::-1])]
    if resolution is not None:
        truncated = CompactSet._trusted(decimate_points(raw, resolution), resolution)
    else:
        truncated = CompactSet._trusted(dedup_points(raw, DEDUP_TOL), A.resolution)

    extra_raw = _union_images(C, A, n + 1, n + CERTIFICATE_EXTRA_TERMS, cloud_cap)
    both = np.vstack([truncated.points, extra_raw])
    both = both[np.lexsort(both.T[::-1])]
    extended = CompactSet._trusted(dedup_points(both, DEDUP_TOL), truncated.resolution)
    shift = hausdorff_distance(extended, truncated)
    cert = TruncationCertificate(n, CERTIFICATE_EXTRA_TERMS, shift, float(eps), shift < eps)
    return truncated, cert


@dataclass
class SetLiftReport:
    max_violation: float
    passed: bool
    trials: int
    rng_seed: int
    threshold: float

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "passed": self.passed,
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "threshold": self.threshold,
        }


def check_set_lift(system: FunctionSystem | CifsSystem, trials: int = 200,
                   rng_seed: int = 0, max_set_size: int = 100,
                   threshold: float = SET_LIFT_TOL) -> SetLiftReport:
    """Spot-check h(F(A), F(B)) <= phi_system(h(A, B)) on seeded random
    set pairs drawn from the domain; passes iff the max violation is
    <= 1e-10. CIFS operators are truncated at eps = threshold/100 (the
    truncation depth depends only on eps, so both sides share it and the
    finite-union inequality is exact)."""
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(rng_seed)
    if isinstance(system, FunctionSystem):
        lift = lambda S: hutchinson(system, S)
    else:
        lift = lambda S: cifs_operator(system, S, eps=threshold / 100.0)[0]
    worst = -np.inf
    for _ in range(trials):
        na, nb = rng.integers(1, max_set_size + 1, size=2)
        A = CompactSet(system.domain.uniform(rng, int(na)))
        B = CompactSet(system.domain.uniform(rng, int(nb)))
        violation = hausdorff_distance(lift(A), lift(B)) - system.phi_system(hausdorff_distance(A, B))
        worst = max(worst, violation)
    return SetLiftReport(float(worst), worst <= threshold, trials, rng_seed, threshold)
