"""Comparison functions and comparison chains.

A comparison function phi is a non-decreasing self-map of [0, inf) with
phi(0) = 0, phi(t) < t for t > 0, and iterates vanishing pointwise. It
replaces the Lipschitz constant in generalised contractions: the three
constructible families are

  Linear(rate)            phi(t) = rate * t,            rate in [0, 1)
  RatioShift(shift)       phi(t) = t / (t + shift),     shift >= 1
  RakotchFactor(a0, b)    phi(t) = a0 * t / (1 + b*t),  a0 in [0, 1), b >= 0

RakotchFactor has ratio phi(t)/t = a0/(1 + b*t), non-increasing, i.e. a
Rakotch-type gauge bounded away from 1. RatioShift's ratio 1/(t + shift)
touches 1 at t = 0 when shift = 1: that member is a genuine non-Banach
comparison function, and its iterates t/(1 + p*t/shift...) decay
subgeometrically, which matters for the finite iterate-decay certificate
(see verify_comparison).

A chain is an indexed family i -> phi_i given by a materialised prefix
plus a periodic tail, supporting the heterogeneous compositions
phi_1 o ... o phi_k that govern trajectory convergence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInputError

# grid used by verify_comparison: {0} + log-spaced [1e-6, 1e3]
GRID_POINTS = 10_000
GRID_LO = 1e-6
GRID_HI = 1e3
ITERATE_DEPTH = 64
ITERATE_FACTOR = 1e-6

SERIES_INCREMENT_TOL = 1e-12
SERIES_TAIL_LEN = 10


def _as_time(t) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidInputError(f"comparison functions are defined on [0, inf), got {t}")
    return t


class ComparisonFunction:
    """Base class; subclasses implement the closed-form evaluation."""

    def __call__(self, t) -> float:
        return float(self._eval_array(np.array([_as_time(t)]))[0])

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        if not np.all(np.isfinite(ts)) or np.any(ts < 0):
            raise InvalidInputError("comparison functions are defined on [0, inf)")
        return self._eval_array(ts)

    def _eval_array(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(ComparisonFunction):
    """phi(t) = rate * t (the Banach case)."""

    rate: float

    def __post_init__(self):
        if not (np.isfinite(self.rate) and 0.0 <= self.rate < 1.0):
            raise InvalidInputError(f"linear rate must lie in [0, 1), got {self.rate}")

    def _eval_array(self, ts):
        return self.rate * ts

    def to_config(self):
        return {"family": "linear", "params": [self.rate]}


@dataclass(frozen=True)
class RatioShift(ComparisonFunction):
    """phi(t) = t / (t + shift).

    shift >= 1 is required: for shift < 1, phi(t) > t on (0, 1 - shift),
    so the map is not a comparison function.
    """

    shift: float

    def __post_init__(self):
        if not (np.isfinite(self.shift) and self.shift >= 1.0):
            raise InvalidInputError(f"ratio-shift parameter must be >= 1, got {self.shift}")

    def _eval_array(self, ts):
        return ts / (ts + self.shift)

    def to_config(self):
        return {"family": "ratio_shift", "params": [self.shift]}


@dataclass(frozen=True)
class RakotchFactor(ComparisonFunction):
    """phi(t) = alpha(t) * t with alpha(t) = alpha0 / (1 + decay*t).

    alpha is non-increasing with values in [0, alpha0], alpha0 < 1.
    """

    alpha0: float
    decay: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha0) and 0.0 <= self.alpha0 < 1.0):
            raise InvalidInputError(f"alpha0 must lie in [0, 1), got {self.alpha0}")
        if not (np.isfinite(self.decay) and self.decay >= 0.0):
            raise InvalidInputError(f"decay must be >= 0, got {self.decay}")

    def _eval_array(self, ts):
        return self.alpha0 * ts / (1.0 + self.decay * ts)

    def to_config(self):
        return {"family": "rakotch", "params": [self.alpha0, self.decay]}


@dataclass(frozen=True)
class PointwiseMax(ComparisonFunction):
    """max of finitely many comparison functions (itself a comparison function).

    Used as the system gauge of a function system: the set-lifted operator
    contracts with the pointwise max of its members' gauges.
    """

    members: tuple

    def __post_init__(self):
        if not self.members:
            raise InvalidInputError("pointwise max needs at least one member")
        for m in self.members:
            if not isinstance(m, ComparisonFunction):
                raise InvalidInputError("pointwise max members must be comparison functions")

    def _eval_array(self, ts):
        return np.maximum.reduce([m._eval_array(ts) for m in self.members])

    def to_config(self):
        return {"family": "max", "params": [m.to_config() for m in self.members]}


def combine_max(phis) -> ComparisonFunction:
    """Pointwise max of gauges, collapsed to the single member when all equal."""
    phis = tuple(phis)
    if not phis:
        raise InvalidInputError("need at least one comparison function")
    if all(p == phis[0] for p in phis[1:]):
        return phis[0]
    return PointwiseMax(phis)


@dataclass(frozen=True)
class ComparisonChain:
    """Indexed family i -> phi_i (1-based): materialised prefix + periodic tail.

    The tail must be nonempty so the chain defines arbitrarily many
    elements; a constant chain is an empty prefix with a length-1 tail.
    """

    prefix: tuple = ()
    tail: tuple = ()

    def __post_init__(self):
        if not self.tail:
            raise InvalidInputError("chain tail must be nonempty (use a length-1 tail for a constant chain)")
        for p in self.prefix + self.tail:
            if not isinstance(p, ComparisonFunction):
                raise InvalidInputError("chain elements must be comparison functions")

    @classmethod
    def constant(cls, phi: ComparisonFunction) -> "ComparisonChain":
        return cls(prefix=(), tail=(phi,))

    def phi_at(self, i: int) -> ComparisonFunction:
        if i < 1:
            raise InvalidInputError(f"chain indices are 1-based, got {i}")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]

    def compose(self, k: int, t) -> float:
        """phi_1(phi_2(...phi_k(t)...)); k = 0 is the identity."""
        t = _as_time(t)
        if k < 0:
            raise InvalidInputError(f"composition depth must be >= 0, got {k}")
        for i in range(k, 0, -1):
            t = self.phi_at(i)(t)
        return t

    def compose_all(self, kmax: int, t) -> np.ndarray:
        """Vector of compositions [compose(1, t), ..., compose(kmax, t)].

        Single backward sweep: entry k accumulates phi_j for j <= k, the
        new gauge entering innermost. O(kmax^2) flops, vectorised.
        """
        t = _as_time(t)
        if kmax < 1:
            raise InvalidInputError(f"kmax must be >= 1, got {kmax}")
        vals = np.full(kmax, t)
        for j in range(kmax, 0, -1):
            vals[j - 1 :] = self.phi_at(j)._eval_array(vals[j - 1 :])
        return vals

    def to_config(self) -> dict:
        return {
            "prefix": [p.to_config() for p in self.prefix],
            "tail": {"repeat": [p.to_config() for p in self.tail]},
        }


def compose_chain(chain: ComparisonChain, k: int, t) -> float:
    return chain.compose(k, t)


class DecayCheck(NamedTuple):
    decays: bool
    witness: int | None


def chain_decays(chain: ComparisonChain, t, tol: float, kmax: int = ITERATE_DEPTH) -> DecayCheck:
    """Smallest k <= kmax with compose(k, t) < tol, if one exists.

    Compositions are non-increasing in k, so a binary search on top of
    compose_all-free probes finds the minimal witness.
    """
    t = _as_time(t)
    if t <= 0:
        raise InvalidInputError("decay check needs t > 0")
    if not (np.isfinite(tol) and tol > 0):
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if kmax < 1:
        raise InvalidInputError(f"kmax must be >= 1, got {kmax}")
    if not chain.compose(kmax, t) < tol:
        return DecayCheck(False, None)
    lo, hi = 1, kmax  # invariant: compose(hi, t) < tol
    while lo < hi:
        mid = (lo + hi) // 2
        if chain.compose(mid, t) < tol:
            hi = mid
        else:
            lo = mid + 1
    return DecayCheck(True, hi)


class SeriesSum(NamedTuple):
    total: float
    converged: bool


def chain_series_sum(chain: ComparisonChain, t, kmax: int) -> SeriesSum:
    """Partial sum over k <= kmax of compose(k, t), with an empirical
    convergence flag: the final 10 increments must each be < 1e-12."""
    t = _as_time(t)
    if t <= 0:
        raise InvalidInputError("series sum needs t > 0")
    vals = chain.compose_all(kmax, t)
    tail = vals[-min(SERIES_TAIL_LEN, kmax) :]
    return SeriesSum(float(vals.sum()), bool(np.all(tail < SERIES_INCREMENT_TOL)))


@dataclass
class InvariantCheck:
    name: str
    passed: bool
    first_violation: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "first_violation": self.first_violation,
            "detail": self.detail,
        }


@dataclass
class ComparisonReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> InvariantCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _eval_candidate(phi, ts: np.ndarray) -> np.ndarray:
    if isinstance(phi, ComparisonFunction):
        return phi._eval_array(ts)
    return np.array([float(phi(float(t))) for t in ts])


def verify_comparison(phi: ComparisonFunction | Callable[[float], float]) -> ComparisonReport:
    """Evaluate the four comparison-function requirements on the test grid.

    Grid: {0} plus 10^4 log-spaced points in [1e-6, 1e3]. The iterate-decay
    requirement (iterates vanish pointwise) is certified finitely as
    phi^64(t) < 1e-6 * t on the grid. The certificate is sufficient but not
    necessary: subgeometric members such as RatioShift(1), whose iterates
    behave like t/(1 + p*t), fail it near t = 0 at any finite depth even
    though their iterates do vanish.

    Accepts any callable t -> phi(t), so rejected candidates (e.g.
    t -> ln(t + 2), which misses phi(0) = 0) can be reported rather than
    special-cased.
    """
    ts = np.geomspace(GRID_LO, GRID_HI, GRID_POINTS)
    checks: list[InvariantCheck] = []

    v0 = float(_eval_candidate(phi, np.array([0.0]))[0])
    checks.append(
        InvariantCheck("zero_at_zero", v0 == 0.0, None if v0 == 0.0 else 0.0, f"phi(0) = {v0:.6g}")
    )

    with np.errstate(all="ignore"):
        vals = _eval_candidate(phi, ts)
    finite = np.all(np.isfinite(vals))

    full = np.concatenate([[v0], vals])
    diffs = np.diff(full)
    bad = np.flatnonzero(~(diffs >= 0.0))
    ts_full = np.concatenate([[0.0], ts])
    checks.append(
        InvariantCheck(
            "non_decreasing",
            finite and bad.size == 0,
            None if bad.size == 0 else float(ts_full[bad[0] + 1]),
        )
    )

    bad = np.flatnonzero(~(vals < ts))
    checks.append(
        InvariantCheck(
            "below_identity",
            finite and bad.size == 0,
            None if bad.size == 0 else float(ts[bad[0]]),
        )
    )

    iter_vals = ts.copy()
    with np.errstate(all="ignore"):
        for _ in range(ITERATE_DEPTH):
            iter_vals = _eval_candidate(phi, np.maximum(iter_vals, 0.0))
            if not np.all(np.isfinite(iter_vals)):
                break
    ok = np.isfinite(iter_vals) & (iter_vals < ITERATE_FACTOR * ts)
    bad = np.flatnonzero(~ok)
    checks.append(
        InvariantCheck(
            "iterate_decay",
            bad.size == 0,
            None if bad.size == 0 else float(ts[bad[0]]),
            f"phi^{ITERATE_DEPTH}(t) < {ITERATE_FACTOR:g}*t on the grid",
        )
    )
    return ComparisonReport(checks)


def phi_from_config(doc: dict) -> ComparisonFunction:
    """Build a comparison function from {"family": ..., "params": [...]}."""
    if not isinstance(doc, dict):
        raise InvalidInputError(f"comparison-function config must be an object, got {type(doc).__name__}")
    family = doc.get("family")
    params = doc.get("params", [])
    if family == "linear":
        if len(params) != 1:
            raise InvalidInputError("linear takes params [rate]")
        return Linear(float(params[0]))
    if family == "ratio_shift":
        if len(params) != 1:
            raise InvalidInputError("ratio_shift takes params [shift]")
        return RatioShift(float(params[0]))
    if family == "rakotch":
        if len(params) not in (1, 2):
            raise InvalidInputError("rakotch takes params [alpha0] or [alpha0, decay]")
        decay = float(params[1]) if len(params) == 2 else 0.0
        return RakotchFactor(float(params[0]), decay)
    raise InvalidInputError(f"unknown comparison-function family {family!r}")


def chain_from_config(doc: dict) -> ComparisonChain:
    """Build a chain from {"prefix": [...], "tail": {"repeat": [...]}}."""
    if not isinstance(doc, dict):
        raise InvalidInputError("chain config must be an object")
    prefix = tuple(phi_from_config(d) for d in doc.get("prefix", []))
    tail_doc = doc.get("tail")
    if not isinstance(tail_doc, dict) or "repeat" not in tail_doc:
        raise InvalidInputError("chain config needs tail.repeat")
    tail = tuple(phi_from_config(d) for d in tail_doc["repeat"])
    return ComparisonChain(prefix=prefix, tail=tail)
