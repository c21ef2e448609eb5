"""Contractive point maps on box domains and indexed map sequences.

Each map carries an invariant axis-aligned box domain and a certified
comparison function phi with d(f(x), f(y)) <= phi(d(x, y)). Constructors
validate the contraction parameter and domain invariance in closed form;
the phi bound itself is spot-checked by verify_contraction on seeded
random pairs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .comparison import ComparisonChain, ComparisonFunction, Linear, RatioShift
from .errors import DivergenceError, DomainError, InvalidInputError
from .metric import as_point

DEFAULT_HALF_WIDTH = 1024.0
CONTRACTION_TOL = 1e-12


class Box:
    """Axis-aligned box in R^d, d in {1, 2}."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = as_point(lo)
        self.hi = as_point(hi, dim=self.lo.size)
        if not np.all(self.hi > self.lo):
            raise InvalidInputError("box needs lo < hi in every coordinate")
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.lo.size

    def __repr__(self) -> str:
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Box)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )

    def __hash__(self):
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    @property
    def span(self) -> float:
        return float(np.max(self.hi - self.lo))

    def slack(self) -> float:
        # absolute containment slack for rounding drift of in-domain iterates
        return 1e-9 * max(1.0, self.span)

    def contains(self, pts: np.ndarray, slack: float | None = None) -> bool:
        s = self.slack() if slack is None else slack
        return bool(np.all(pts >= self.lo - s) and np.all(pts <= self.hi + s))

    def corners(self) -> np.ndarray:
        if self.dim == 1:
            return np.array([self.lo, self.hi])
        (lx, ly), (hx, hy) = self.lo, self.hi
        return np.array([[lx, ly], [lx, hy], [hx, ly], [hx, hy]])

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [np.linspace(a, b, per_axis) for a, b in zip(self.lo, self.hi)]
        if self.dim == 1:
            return axes[0][:, None]
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def to_config(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


class ContractiveMap:
    """Base point map; subclasses implement the raw image `_image`."""

    def __init__(self, phi: ComparisonFunction, domain: Box):
        if not isinstance(phi, ComparisonFunction):
            raise InvalidInputError("phi must be a comparison function")
        if not isinstance(domain, Box):
            raise InvalidInputError("domain must be a Box")
        self.phi = phi
        self.domain = domain

    @property
    def dim(self) -> int:
        return self.domain.dim

    def _image(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, p) -> np.ndarray:
        return self.apply_array(as_point(p, dim=self.dim)[None, :])[0]

    def apply_array(self, pts: np.ndarray) -> np.ndarray:
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise InvalidInputError(f"expected points of shape (n, {self.dim})")
        if not self.domain.contains(pts):
            raise DomainError(f"point outside invariant domain {self.domain}")
        out = self._image(pts)
        if not np.all(np.isfinite(out)):
            raise DivergenceError("map produced a non-finite image")
        return out

    def to_config(self) -> dict:
        raise NotImplementedError


class Affine1D(ContractiveMap):
    """x -> a*x + b with |a| < 1."""

    def __init__(self, a: float, b: float, domain: Box | None = None, phi: ComparisonFunction | None = None):
        a, b = float(a), float(b)
        if not (np.isfinite(a) and abs(a) < 1.0):
            raise InvalidInputError(f"affine slope must satisfy |a| < 1, got {a}")
        if not np.isfinite(b):
            raise InvalidInputError("affine shift must be finite")
        self.a, self.b = a, b
        if domain is None:
            fp = b / (1.0 - a)
            domain = Box([fp - DEFAULT_HALF_WIDTH], [fp + DEFAULT_HALF_WIDTH])
        if domain.dim != 1:
            raise InvalidInputError("Affine1D needs a 1D domain")
        lo, hi = float(domain.lo[0]), float(domain.hi[0])
        img = sorted((a * lo + b, a * hi + b))
        if img[0] < lo - 1e-12 or img[1] > hi + 1e-12:
            raise InvalidInputError(f"domain [{lo}, {hi}] is not invariant under x -> {a}*x + {b}")
        super().__init__(phi if phi is not None else Linear(abs(a)), domain)

    def _image(self, pts):
        return self.a * pts + self.b

    def to_config(self):
        return {"kind": "affine1d", "a": self.a, "b": self.b, "phi": self.phi.to_config()}


class Affine2D(ContractiveMap):
    """x -> M x + v with spectral norm of M below 1."""

    def __init__(self, matrix, shift, domain: Box | None = None, phi: ComparisonFunction | None = None):
        M = np.asarray(matrix, dtype=np.float64)
        v = as_point(shift, dim=2)
        if M.shape != (2, 2) or not np.all(np.isfinite(M)):
            raise InvalidInputError("matrix must be a finite 2x2 array")
        norm = float(np.linalg.norm(M, 2))
        if not norm < 1.0:
            raise InvalidInputError(f"matrix operator norm must be < 1, got {norm:.6g}")
        self.matrix, self.shift = M, v
        if domain is None:
            fp = np.linalg.solve(np.eye(2) - M, v)
            domain = Box(fp - DEFAULT_HALF_WIDTH, fp + DEFAULT_HALF_WIDTH)
        if domain.dim != 2:
            raise InvalidInputError("Affine2D needs a 2D domain")
        img = domain.corners() @ M.T + v
        if not domain.contains(img, slack=1e-12):
            raise InvalidInputError("domain box is not invariant under the affine map")
        super().__init__(phi if phi is not None else Linear(norm), domain)

    def _image(self, pts):
        return pts @ self.matrix.T + self.shift

    def to_config(self):
        return {
            "kind": "affine2d",
            "matrix": self.matrix.tolist(),
            "shift": self.shift.tolist(),
            "phi": self.phi.to_config(),
        }


class Reciprocal(ContractiveMap):
    """x -> 1/(1 + x) on a box inside [0, inf); Rakotch-type, not Banach."""

    def __init__(self, domain: Box | None = None, phi: ComparisonFunction | None = None):
        if domain is None:
            domain = Box([0.0], [100.0])
        if domain.dim != 1:
            raise InvalidInputError("Reciprocal needs a 1D domain")
        lo, hi = float(domain.lo[0]), float(domain.hi[0])
        # decreasing map: image is [1/(1+hi), 1/(1+lo)]
        if lo < 0 or 1.0 / (1.0 + hi) < lo - 1e-12 or 1.0 / (1.0 + lo) > hi + 1e-12:
            raise InvalidInputError(f"domain [{lo}, {hi}] is not invariant under x -> 1/(1+x)")
        super().__init__(phi if phi is not None else RatioShift(1.0), domain)

    def _image(self, pts):
        return 1.0 / (1.0 + pts)

    def to_config(self):
        return {"kind": "reciprocal", "phi": self.phi.to_config()}


class Mobius(ContractiveMap):
    """x -> x/(1 + x) on [0, hi]; fixes the origin, Rakotch-type."""

    def __init__(self, domain: Box | None = None, phi: ComparisonFunction | None = None):
        if domain is None:
            domain = Box([0.0], [100.0])
        if domain.dim != 1:
            raise InvalidInputError("Mobius needs a 1D domain")
        lo = float(domain.lo[0])
        if lo != 0.0:
            raise InvalidInputError("x -> x/(1+x) needs domain lower bound 0 (f(x) < x for x > 0)")
        super().__init__(phi if phi is not None else RatioShift(1.0), domain)

    def _image(self, pts):
        return pts / (1.0 + pts)

    def to_config(self):
        return {"kind": "mobius", "phi": self.phi.to_config()}


class MapSequence:
    """Indexed family i -> map (1-based): materialised prefix + periodic tail.

    All maps must share one domain; the induced ComparisonChain lines up
    each map's gauge in order.
    """

    def __init__(self, prefix=(), tail=()):
        prefix, tail = tuple(prefix), tuple(tail)
        if not tail:
            raise InvalidInputError("map sequence tail must be nonempty")
        maps = prefix + tail
        for m in maps:
            if not isinstance(m, ContractiveMap):
                raise InvalidInputError("sequence elements must be contractive maps")
        if any(m.domain != maps[0].domain for m in maps[1:]):
            raise InvalidInputError("all maps in a sequence must share one domain")
        self.prefix, self.tail = prefix, tail
        self.domain = maps[0].domain
        self.chain = ComparisonChain(
            prefix=tuple(m.phi for m in prefix), tail=tuple(m.phi for m in tail)
        )

    @classmethod
    def constant(cls, f: ContractiveMap) -> "MapSequence":
        return cls(prefix=(), tail=(f,))

    @property
    def dim(self) -> int:
        return self.domain.dim

    def map_at(self, i: int) -> ContractiveMap:
        if i < 1:
            raise InvalidInputError(f"sequence indices are 1-based, got {i}")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]


@dataclass
class ContractionReport:
    max_violation: float
    passed: bool
    samples: int
    rng_seed: int
    threshold: float

    def to_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "passed": self.passed,
            "samples": self.samples,
            "rng_seed": self.rng_seed,
            "threshold": self.threshold,
        }


def verify_contraction(f: ContractiveMap, samples: int = 1000, rng_seed: int = 0) -> ContractionReport:
    """Spot-check d(f(x), f(y)) <= phi(d(x, y)) on seeded random domain pairs.

    Reports the maximum violation; passes iff it is <= 1e-12.
    """
    if samples < 1:
        raise InvalidInputError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(rng_seed)
    xs = f.domain.uniform(rng, samples)
    ys = f.domain.uniform(rng, samples)
    d_in = np.sqrt(((xs - ys) ** 2).sum(axis=1))
    d_out = np.sqrt(((f.apply_array(xs) - f.apply_array(ys)) ** 2).sum(axis=1))
    violations = d_out - f.phi.eval_array(d_in)
    worst = float(violations.max())
    return ContractionReport(worst, worst <= CONTRACTION_TOL, samples, rng_seed, CONTRACTION_TOL)


def check_domain_invariance(f: ContractiveMap, per_axis: int = 64) -> bool:
    """Grid check that the map sends its domain into itself."""
    return f.domain.contains(f.apply_array(f.domain.grid(per_axis)))


def uniform_deviation(f: ContractiveMap, g: ContractiveMap, per_axis: int = 256) -> float:
    """sup over a domain grid of d(f(x), g(x)).

    Diagnostic for sequences expected to converge uniformly to a limit
    map; no convergence-rate guarantee is attached for nonlinear gauges.
    """
    if f.domain != g.domain:
        raise InvalidInputError("uniform deviation needs maps on one domain")
    pts = f.domain.grid(per_axis)
    diff = f.apply_array(pts) - g.apply_array(pts)
    return float(np.sqrt((diff**2).sum(axis=1)).max())
