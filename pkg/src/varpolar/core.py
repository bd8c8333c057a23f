"""Extended-real arithmetic, regions, function oracles, and sampled operator graphs.

Everything in this package works in R^n (n <= 3 for grid quantifiers) with the
Euclidean dot product as the pairing. Function values live in (-inf, +inf]:
positive infinity is a first-class value used by indicator functions, never an
error condition. Negative infinity and NaN are rejected everywhere.

All container types are immutable after construction and every operation is a
pure function of its inputs, so concurrent evaluation from multiple threads is
safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import total_ordering
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

Array = np.ndarray

#: Comparison tolerance used whenever a computed real is compared against zero.
DEFAULT_TOL = 1e-6

#: Half-width of the box that truncates "full space" quantifiers and covector
#: search grids. Reported alongside every verdict that depends on it.
DEFAULT_BOX_HALF_WIDTH = 10.0

#: Grid-based quantification is capped at this many dimensions (cost is
#: resolution**dim).
GRID_DIM_CAP = 3


class DimensionMismatchError(ValueError):
    """Inputs whose dimensions do not agree."""


class DomainError(ValueError):
    """A point violates a domain precondition (e.g. f(x) is not finite)."""


class UnusableSampleError(ValueError):
    """A graph sample carries no usable pairs for the requested operation."""


# ---------------------------------------------------------------------------
# Extended reals
# ---------------------------------------------------------------------------

@total_ordering
@dataclass(frozen=True, slots=True)
class ExtReal:
    """A value in (-inf, +inf].

    Ordering and addition are total, with +inf absorbing under addition.
    Subtraction is only defined for a finite subtrahend (the difference of two
    infinite values is meaningless here), and scaling is only defined for a
    positive factor, which keeps every result inside (-inf, +inf].
    """

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if math.isnan(v):
            raise ValueError("ExtReal cannot hold NaN")
        if v == -math.inf:
            raise ValueError("ExtReal cannot hold -inf: values live in (-inf, +inf]")
        object.__setattr__(self, "value", v)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @classmethod
    def infinity(cls) -> "ExtReal":
        return cls(math.inf)

    def __float__(self) -> float:
        return self.value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExtReal):
            return self.value == other.value
        if isinstance(other, (int, float)):
            return self.value == float(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __lt__(self, other: "ExtReal | float") -> bool:
        ov = other.value if isinstance(other, ExtReal) else float(other)
        return self.value < ov

    def __add__(self, other: "ExtReal | float") -> "ExtReal":
        ov = other.value if isinstance(other, ExtReal) else float(other)
        if ov == -math.inf or math.isnan(ov):
            raise ValueError("cannot add -inf or NaN to an ExtReal")
        return ExtReal(self.value + ov)

    __radd__ = __add__

    def __sub__(self, other: "ExtReal | float") -> "ExtReal":
        ov = other.value if isinstance(other, ExtReal) else float(other)
        if not math.isfinite(ov):
            raise ValueError("ExtReal subtraction requires a finite subtrahend")
        return ExtReal(self.value - ov)

    def __mul__(self, factor: float) -> "ExtReal":
        c = float(factor)
        if not (c > 0.0) or not math.isfinite(c):
            raise ValueError("ExtReal scaling requires a finite positive factor")
        return ExtReal(self.value * c)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return "ExtReal(+inf)" if self.value == math.inf else f"ExtReal({self.value!r})"


INF = ExtReal(math.inf)


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------

def as_point(x: Sequence[float] | float | Array, dim: int | None = None) -> Array:
    """Validate and normalize a point of R^n to a float64 array.

    Scalars are promoted to 1-D points. All coordinates must be finite.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionMismatchError(f"expected a flat coordinate list, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point coordinates must be finite, got {arr!r}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """A sampleable convex subset of R^n: a box, a ball, or the full space
    truncated to a box for sampling purposes.

    ``lower``/``upper`` always describe the sampling box. Membership is exact:
    boxes test componentwise interval membership, balls test the Euclidean
    norm, and the truncated full space contains every finite point (the box
    only bounds the sample and is reported with every verdict built on it).
    """

    kind: str  # "box" | "ball" | "full"
    dim: int
    lower: Array
    upper: Array
    center: Array | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("box", "ball", "full"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        lo = as_point(self.lower, self.dim)
        hi = as_point(self.upper, self.dim)
        if np.any(lo > hi):
            raise ValueError("region bounds are empty: lower > upper on some axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.kind == "ball":
            if self.center is None or self.radius is None or self.radius <= 0:
                raise ValueError("ball regions need a center and a positive radius")
            object.__setattr__(self, "center", as_point(self.center, self.dim))

    # -- constructors ------------------------------------------------------

    @classmethod
    def box(cls, bounds: Sequence[tuple[float, float]]) -> "Region":
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        return cls(kind="box", dim=len(bounds), lower=lo, upper=hi)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Region":
        return cls.box([(lo, hi)])

    @classmethod
    def ball(cls, center: Sequence[float] | float, radius: float) -> "Region":
        c = as_point(center)
        return cls(
            kind="ball",
            dim=c.shape[0],
            lower=c - radius,
            upper=c + radius,
            center=c,
            radius=float(radius),
        )

    @classmethod
    def full(cls, dim: int, half_width: float = DEFAULT_BOX_HALF_WIDTH) -> "Region":
        w = float(half_width)
        return cls(kind="full", dim=dim, lower=-w * np.ones(dim), upper=w * np.ones(dim))

    # -- membership --------------------------------------------------------

    def contains(self, x: Sequence[float] | float | Array) -> bool:
        p = as_point(x, self.dim)
        if self.kind == "full":
            return True
        if self.kind == "ball":
            return bool(np.linalg.norm(p - self.center) <= self.radius)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def contains_many(self, points: Array) -> Array:
        """Boolean membership mask for an (N, dim) array of points."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "full":
            return np.ones(pts.shape[0], dtype=bool)
        if self.kind == "ball":
            return np.linalg.norm(pts - self.center[None, :], axis=1) <= self.radius
        return np.all((pts >= self.lower[None, :]) & (pts <= self.upper[None, :]), axis=1)

    # -- sampling ----------------------------------------------------------

    def sample(self, resolution: int, interior: bool = False) -> Array:
        """Deterministic uniform grid of member points, shape (N, dim).

        The tensor grid over the sampling box has ``resolution`` points per
        axis (so N <= resolution**dim); box grids include the axis extremes.
        Ball regions keep only member points of the tensor grid. With
        ``interior=True`` the first and last grid index of every axis are
        dropped, which discretizes the open interior of a box.
        """
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        if self.dim > GRID_DIM_CAP:
            raise ValueError(f"grid sampling is capped at dimension {GRID_DIM_CAP}")
        axes = [np.linspace(self.lower[i], self.upper[i], resolution) for i in range(self.dim)]
        if interior:
            if resolution < 3:
                raise ValueError("interior sampling needs resolution >= 3")
            axes = [a[1:-1] for a in axes]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        if self.kind == "ball":
            pts = pts[self.contains_many(pts)]
        return pts

    def spacing(self, resolution: int) -> float:
        """Largest per-axis grid spacing at the given resolution."""
        return float(np.max((self.upper - self.lower) / (resolution - 1)))

    def shrink(self, delta: float) -> "Region":
        """Shrink the region by ``delta`` on every side (used to discretize
        the open interior of a closed region)."""
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        lo, hi = self.lower + delta, self.upper - delta
        if np.any(lo > hi):
            raise ValueError("shrinking by delta empties the region")
        if self.kind == "ball":
            return Region.ball(self.center, self.radius - delta)
        return Region(kind=self.kind, dim=self.dim, lower=lo, upper=hi)

    def describe(self) -> dict:
        d: dict[str, Any] = {
            "kind": self.kind,
            "dim": self.dim,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }
        if self.kind == "ball":
            d["center"] = self.center.tolist()
            d["radius"] = self.radius
        return d


def sample_region(region: Region, resolution: int) -> Array:
    """Deterministic uniform grid of member points of ``region``."""
    return region.sample(resolution)


# ---------------------------------------------------------------------------
# Subdifferential set descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalSet:
    """A 1-D covector interval [lo, hi]; lo may be -inf and hi may be +inf."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    def contains(self, xstar: Array, tol: float = DEFAULT_TOL) -> bool:
        v = float(np.asarray(xstar).reshape(-1)[0])
        return self.lo - tol <= v <= self.hi + tol

    def representatives(self, half_width: float = DEFAULT_BOX_HALF_WIDTH) -> tuple[Array, bool]:
        """Representative covectors {low, mid, high}, clipped to the covector
        box. Returns (reps, truncated)."""
        lo = max(self.lo, -half_width)
        hi = min(self.hi, half_width)
        truncated = self.lo < -half_width or self.hi > half_width
        reps = sorted({lo, 0.5 * (lo + hi), hi})
        return np.array(reps, dtype=float).reshape(-1, 1), truncated


@dataclass(frozen=True)
class PolytopeSet:
    """Covector set given by finitely many vertices (a singleton, a segment,
    or a small polytope); membership is convex-hull membership."""

    vertices: Array

    def __post_init__(self) -> None:
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("polytope vertices must be finite")
        object.__setattr__(self, "vertices", v)

    def contains(self, xstar: Array, tol: float = DEFAULT_TOL) -> bool:
        x = np.asarray(xstar, dtype=float).reshape(-1)
        v = self.vertices
        if v.shape[0] == 1:
            return bool(np.linalg.norm(x - v[0]) <= tol)
        if v.shape[0] == 2:
            a, b = v[0], v[1]
            ab = b - a
            denom = float(np.dot(ab, ab))
            t = 0.0 if denom == 0.0 else float(np.clip(np.dot(x - a, ab) / denom, 0.0, 1.0))
            return bool(np.linalg.norm(a + t * ab - x) <= tol)
        return _hull_contains(v, x, tol)

    def representatives(self, half_width: float = DEFAULT_BOX_HALF_WIDTH) -> tuple[Array, bool]:
        """All vertices plus the vertex centroid."""
        if self.vertices.shape[0] == 1:
            return self.vertices, False
        reps = np.vstack([self.vertices, self.vertices.mean(axis=0, keepdims=True)])
        return _dedupe_rows(reps), False


@dataclass(frozen=True)
class BallSet:
    """A Euclidean covector ball (e.g. the subdifferential of the norm at 0)."""

    center: Array
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius > 0):
            raise ValueError("ball radius must be positive")

    def contains(self, xstar: Array, tol: float = DEFAULT_TOL) -> bool:
        x = np.asarray(xstar, dtype=float).reshape(-1)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def representatives(
        self, half_width: float = DEFAULT_BOX_HALF_WIDTH, boundary_points: int = 16
    ) -> tuple[Array, bool]:
        """The center plus a deterministic fan of boundary points."""
        dim = self.center.shape[0]
        if dim == 1:
            pts = np.array([[-self.radius], [0.0], [self.radius]]) + self.center
            return pts, False
        if dim == 2:
            ang = 2.0 * np.pi * np.arange(boundary_points) / boundary_points
            ring = self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        else:
            ring = self.radius * _fibonacci_sphere(boundary_points)
        return np.vstack([self.center[None, :], self.center[None, :] + ring]), False


SubdiffSet = IntervalSet | PolytopeSet | BallSet


def _hull_contains(vertices: Array, x: Array, tol: float) -> bool:
    # Feasibility LP: x = V^T lam, lam >= 0, sum lam = 1. Tiny problems only.
    from scipy.optimize import linprog

    m, d = vertices.shape
    a_eq = np.vstack([vertices.T, np.ones((1, m))])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    if res.status == 0:
        return True
    # Retry with the tolerance folded in as an inequality band.
    res = linprog(
        np.zeros(m),
        A_ub=np.vstack([vertices.T, -vertices.T]),
        b_ub=np.concatenate([x + tol, tol - x]),
        A_eq=np.ones((1, m)),
        b_eq=[1.0],
        bounds=[(0, None)] * m,
        method="highs",
    )
    return res.status == 0


def _fibonacci_sphere(n: int) -> Array:
    k = np.arange(n, dtype=float)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    z = 1.0 - 2.0 * (k + 0.5) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _dedupe_rows(rows: Array) -> Array:
    """Drop duplicate rows, keeping first occurrences in order."""
    if rows.shape[0] <= 1:
        return rows
    seen: set[bytes] = set()
    keep = []
    for i in range(rows.shape[0]):
        key = rows[i].tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return rows if len(keep) == rows.shape[0] else rows[keep]


# ---------------------------------------------------------------------------
# Function oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionOracle:
    """An evaluable proper lower semicontinuous function on R^n.

    ``fn`` maps a point to a raw float where ``math.inf`` stands for +inf;
    ``eval`` wraps the result into :class:`ExtReal`. ``batch``, when present,
    evaluates an (N, dim) array of points in one call and is what makes grid
    quantifiers cheap. Lower semicontinuity and properness are taken on trust
    from the metadata; the curated library is spot-checked by the test suite.

    ``exact_subderivative(x, d)`` and ``exact_subdifferential(x)`` are
    optional analytic side-oracles. The former returns a raw float (inf
    allowed), the latter a :data:`SubdiffSet` description or None where the
    subdifferential is empty or unknown.
    """

    name: str
    dim: int
    fn: Callable[[Array], float]
    batch: Callable[[Array], Array] | None = None
    is_convex: bool = False
    domain_description: str = "all of R^n"
    exact_subderivative: Callable[[Array, Array], float] | None = None
    exact_subdifferential: Callable[[Array], SubdiffSet | None] | None = None
    default_region: Region | None = None
    finite_point: Array | None = None

    def __post_init__(self) -> None:
        if self.finite_point is not None:
            p = as_point(self.finite_point, self.dim)
            object.__setattr__(self, "finite_point", p)
            if not math.isfinite(self.fn(p)):
                raise ValueError(f"oracle {self.name!r} is not proper at its registered point")

    # -- evaluation --------------------------------------------------------

    def value(self, x: Sequence[float] | float | Array) -> float:
        """Raw float value; math.inf encodes +inf."""
        v = float(self.fn(as_point(x, self.dim)))
        if math.isnan(v) or v == -math.inf:
            raise ValueError(f"oracle {self.name!r} produced a value outside (-inf, +inf]")
        return v

    def values(self, points: Array) -> Array:
        """Vectorized evaluation of an (N, dim) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DimensionMismatchError(f"expected (N, {self.dim}) points, got {pts.shape}")
        if self.batch is not None:
            return np.asarray(self.batch(pts), dtype=float)
        return np.array([self.fn(p) for p in pts], dtype=float)

    def eval(self, x: Sequence[float] | float | Array) -> ExtReal:
        return ExtReal(self.value(x))

    def __call__(self, x: Sequence[float] | float | Array) -> ExtReal:
        return self.eval(x)

    # -- tilting -----------------------------------------------------------

    def shifted(self, xstar: Sequence[float] | float | Array) -> "FunctionOracle":
        """The tilted oracle x -> f(x) - <xstar, x>.

        Tilting shifts subderivatives by -<xstar, d> and translates every
        subdifferential set description by -xstar, so the side-oracles carry
        over exactly.
        """
        s = as_point(xstar, self.dim)
        base_fn, base_batch = self.fn, self.batch
        fn = lambda x: base_fn(x) - float(np.dot(s, x))  # noqa: E731

        if base_batch is not None:
            batch = lambda pts: base_batch(pts) - pts @ s  # noqa: E731
        else:
            batch = None

        exact_sd = None
        if self.exact_subderivative is not None:
            base_sd = self.exact_subderivative
            exact_sd = lambda x, d: base_sd(x, d) - float(np.dot(s, d))  # noqa: E731

        exact_sdiff = None
        if self.exact_subdifferential is not None:
            base_sdiff = self.exact_subdifferential
            exact_sdiff = lambda x: _shift_set(base_sdiff(x), s)  # noqa: E731

        return replace(
            self,
            name=f"{self.name}-tilted",
            fn=fn,
            batch=batch,
            exact_subderivative=exact_sd,
            exact_subdifferential=exact_sdiff,
        )


def _shift_set(desc: SubdiffSet | None, s: Array) -> SubdiffSet | None:
    if desc is None:
        return None
    if isinstance(desc, IntervalSet):
        return IntervalSet(desc.lo - float(s[0]), desc.hi - float(s[0]))
    if isinstance(desc, PolytopeSet):
        return PolytopeSet(desc.vertices - s[None, :])
    return BallSet(desc.center - s, desc.radius)


def eval_shifted(
    f: FunctionOracle,
    xstar: Sequence[float] | float | Array,
    y: Sequence[float] | float | Array,
) -> ExtReal:
    """Evaluate the tilted function (f - xstar) at y, i.e. f(y) - <xstar, y>,
    with +inf preserved."""
    s = as_point(xstar, f.dim)
    p = as_point(y, f.dim)
    v = f.value(p)
    if v == math.inf:
        return INF
    return ExtReal(v - float(np.dot(s, p)))


# ---------------------------------------------------------------------------
# Sampled operator graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphSample:
    """A finite sample of a set-valued operator T in R^n x R^n: a list of
    (point, covector) pairs with no duplicates.

    ``meta`` records how the sample was produced (function id, region,
    resolution, source, truncation flags) and does not take part in equality.
    """

    points: Array
    covectors: Array
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covectors, dtype=float))
        if pts.size == 0:
            pts = pts.reshape(0, cov.shape[1] if cov.size else 1)
        if cov.size == 0:
            cov = cov.reshape(0, pts.shape[1])
        if pts.shape != cov.shape:
            raise DimensionMismatchError(
                f"points {pts.shape} and covectors {cov.shape} must align"
            )
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(cov))):
            raise ValueError("graph samples must have finite coordinates")
        if pts.shape[0] > 1:
            joined = np.hstack([pts, cov])
            _, idx = np.unique(joined, axis=0, return_index=True)
            keep = np.sort(idx)
            pts, cov = pts[keep], cov[keep]
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "covectors", cov)

    @classmethod
    def empty(cls, dim: int) -> "GraphSample":
        return cls(np.zeros((0, dim)), np.zeros((0, dim)))

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[Sequence[float] | float, Sequence[float] | float]],
        meta: Mapping[str, Any] | None = None,
    ) -> "GraphSample":
        if not pairs:
            raise ValueError("from_pairs needs at least one pair; use GraphSample.empty")
        pts = np.vstack([as_point(p) for p, _ in pairs])
        cov = np.vstack([as_point(c) for _, c in pairs])
        return cls(pts, cov, meta or {})

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def pairs(self) -> Iterator[tuple[Array, Array]]:
        for i in range(len(self)):
            yield self.points[i], self.covectors[i]

    def filter(self, mask: Array, meta: Mapping[str, Any] | None = None) -> "GraphSample":
        return GraphSample(self.points[mask], self.covectors[mask], meta or dict(self.meta))

    def restrict_points(self, region: Region) -> "GraphSample":
        return self.filter(region.contains_many(self.points))

    def to_rows(self) -> list[list[float]]:
        """CSV-ready rows: x_1..x_n, xstar_1..xstar_n."""
        return np.hstack([self.points, self.covectors]).tolist()

    def csv_header(self) -> list[str]:
        n = self.dim
        return [f"x_{i + 1}" for i in range(n)] + [f"xstar_{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# Generic verdict
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    """Boolean outcome plus the numerical residual that decided it and a
    witness (point, pair, or parameter) explaining a failure."""

    ok: bool
    residual: float
    witness: Any = None
    flags: tuple[str, ...] = ()
    details: Mapping[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok
