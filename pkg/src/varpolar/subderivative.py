"""Lower Dini subderivatives, the generalized (Clarke-type) directional
derivative, and the mean value witness search.

The liminf over t -> 0+ is estimated on a geometric step grid: the estimate is
the minimum difference quotient over the tail window (the smallest steps), and
the (min, max) spread over that window is reported as a bracket so callers can
detect non-convergence. Steps are measured along the unit vector of the
requested direction, which makes the estimate exactly positively homogeneous
(scaling d rescales quotients without moving the evaluation points).

The generalized derivative sup_{delta>0} limsup inf_{d' in d + delta B} is
discretized with a shrinking ring of base points around xbar (both the ring
radius and the function-value window are tied to the step grid, which encodes
convergence of x to xbar with f(x) -> f(xbar)), a deterministic direction ball
grid, and a final linear extrapolation of the finite-delta values to delta=0;
the extrapolation removes the O(delta)*Lipschitz bias of the inner infimum and
is exact on piecewise affine functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Array,
    DEFAULT_TOL,
    DomainError,
    ExtReal,
    FunctionOracle,
    as_point,
)

#: Ring radius around the base point, as a multiple of the current step.
RADIUS_FACTOR = 10.0

#: Default delta ladder for the direction-ball infimum (decreasing).
DEFAULT_DELTAS: tuple[float, ...] = (0.2, 0.1, 0.05, 0.02)

#: Smallest admissible step of a scheme; below this the difference quotients
#: drown in float64 cancellation noise.
MIN_STEP = 1e-12


@dataclass(frozen=True)
class LiminfScheme:
    """Geometric step grid t0 * ratio**k, k = 0..steps-1, plus the fraction of
    smallest steps that forms the liminf tail window."""

    t0: float = 0.1
    ratio: float = 0.7
    steps: int = 40
    tail_fraction: float = 0.25

    def __post_init__(self) -> None:
        if not (self.t0 > 0 and math.isfinite(self.t0)):
            raise ValueError("t0 must be a positive real")
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("ratio must lie in (0, 1)")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not (0.0 < self.tail_fraction <= 1.0):
            raise ValueError("tail_fraction must lie in (0, 1]")
        if self.t0 * self.ratio ** (self.steps - 1) < MIN_STEP:
            raise ValueError(f"smallest step falls below {MIN_STEP:g}; shorten the grid")
        if self.tail_count < 1:
            raise ValueError("tail window is empty")

    @property
    def tail_count(self) -> int:
        return max(1, math.ceil(self.tail_fraction * self.steps))

    def step_grid(self) -> Array:
        """All steps, decreasing."""
        return self.t0 * self.ratio ** np.arange(self.steps, dtype=float)

    def tail_grid(self) -> Array:
        """The tail window: the smallest ``tail_count`` steps, decreasing."""
        return self.step_grid()[self.steps - self.tail_count :]

    def as_dict(self) -> dict:
        return {
            "t0": self.t0,
            "ratio": self.ratio,
            "steps": self.steps,
            "tail_fraction": self.tail_fraction,
        }


DEFAULT_SCHEME = LiminfScheme()


@dataclass(frozen=True)
class SubderivEstimate:
    """A directional derivative estimate with its tail-window bracket."""

    value: ExtReal
    bracket: tuple[ExtReal, ExtReal]
    scheme_used: LiminfScheme

    def __post_init__(self) -> None:
        low, high = self.bracket
        if not (low <= self.value <= high):
            raise ValueError("estimate must lie inside its bracket")

    @property
    def as_float(self) -> float:
        return float(self.value)


class WitnessNotFoundError(RuntimeError):
    """The mean value witness search exhausted its refinement budget.

    Carries the best candidate seen; signals either resolution exhaustion or
    an oracle that is not lower semicontinuous.
    """

    def __init__(self, message: str, best_point: Array, best_value: float):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value


# ---------------------------------------------------------------------------
# Lower Dini subderivative
# ---------------------------------------------------------------------------

def lower_dini_values(
    f: FunctionOracle,
    xbars: Array,
    ds: Array,
    scheme: LiminfScheme = DEFAULT_SCHEME,
) -> Array:
    """Tail-minimum difference quotients for a batch of (base, direction)
    rows; raw floats with math.inf for +inf.

    Callers must ensure f is finite at every base point.
    """
    xb = np.atleast_2d(np.asarray(xbars, dtype=float))
    dd = np.atleast_2d(np.asarray(ds, dtype=float))
    quot = _tail_quotients(f, xb, dd, scheme)
    return quot.min(axis=1)


def _tail_quotients(
    f: FunctionOracle, xb: Array, dd: Array, scheme: LiminfScheme
) -> Array:
    """(N, T) difference quotients over the tail window, largest step first."""
    ts = scheme.tail_grid()
    norms = np.linalg.norm(dd, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    units = dd / safe[:, None]
    f0 = f.values(xb)
    if np.any(~np.isfinite(f0)):
        raise DomainError("subderivatives are only defined at points where f is finite")
    pts = xb[:, None, :] + ts[None, :, None] * units[:, None, :]
    vals = f.values(pts.reshape(-1, xb.shape[1])).reshape(xb.shape[0], ts.shape[0])
    with np.errstate(invalid="ignore"):
        quot = (vals - f0[:, None]) * norms[:, None] / ts[None, :]
    # A zero direction keeps every point at the base, so its quotients are 0.
    return np.where(norms[:, None] > 0.0, quot, 0.0)


def lower_dini(
    f: FunctionOracle,
    xbar: Sequence[float] | float | Array,
    d: Sequence[float] | float | Array,
    scheme: LiminfScheme = DEFAULT_SCHEME,
) -> SubderivEstimate:
    """Lower Dini subderivative estimate of f at xbar in direction d.

    The value is the minimum difference quotient over the tail window of the
    geometric step grid; it is +inf exactly when every tail quotient is +inf.
    Raises :class:`DomainError` when f(xbar) is not finite.
    """
    xb = as_point(xbar, f.dim)
    dd = as_point(d, f.dim)
    quot = _tail_quotients(f, xb[None, :], dd[None, :], scheme)[0]
    low, high = float(quot.min()), float(quot.max())
    return SubderivEstimate(
        value=ExtReal(low), bracket=(ExtReal(low), ExtReal(high)), scheme_used=scheme
    )


# ---------------------------------------------------------------------------
# Generalized directional derivative
# ---------------------------------------------------------------------------

def clarke_directional_values(
    f: FunctionOracle,
    xbars: Array,
    d: Sequence[float] | float | Array,
    scheme: LiminfScheme = DEFAULT_SCHEME,
    delta_list: Sequence[float] = DEFAULT_DELTAS,
    nbhd_resolution: int = 3,
) -> tuple[Array, Array]:
    """Generalized directional derivative estimates for a batch of base
    points, all in direction d.

    Returns (values, per_delta) where per_delta has shape (N, D) with the
    finite-delta estimates in delta_list order. Values include the delta -> 0
    extrapolation. Raw floats; +inf allowed.
    """
    xb = np.atleast_2d(np.asarray(xbars, dtype=float))
    dd = as_point(d, f.dim)
    deltas = np.asarray(sorted(delta_list, reverse=True), dtype=float)
    if deltas.size == 0 or np.any(deltas <= 0):
        raise ValueError("delta_list must be a nonempty list of positive reals")
    if nbhd_resolution < 1:
        raise ValueError("nbhd_resolution must be a positive integer")

    n, dim = xb.shape
    dnorm = float(np.linalg.norm(dd))
    scale = dnorm if dnorm > 0 else 1.0
    ts = scheme.tail_grid() / scale  # effective steps along d
    radii = RADIUS_FACTOR * ts

    # Ring of base-point offsets: the center plus axis shells. Shape (M, dim)
    # as unit offsets, scaled per step by the shrinking radius.
    eye = np.eye(dim)
    shells = np.arange(1, nbhd_resolution + 1, dtype=float) / nbhd_resolution
    offsets = [np.zeros(dim)]
    for s in shells:
        for i in range(dim):
            offsets.append(s * eye[i])
            offsets.append(-s * eye[i])
    offs = np.asarray(offsets)  # (M, dim)

    # Direction-ball grid d + delta * w for w in {0, +-e_i}: shape (D, K, dim).
    ball = np.vstack([np.zeros((1, dim)), eye, -eye])  # (K, dim)
    dprime = dd[None, None, :] + deltas[:, None, None] * ball[None, :, :]

    f0 = f.values(xb)
    if np.any(~np.isfinite(f0)):
        raise DomainError("the generalized derivative needs f(xbar) finite")

    # Ring points: (N, T, M, dim); then quotient points (N, T, M, D, K, dim).
    ring = xb[:, None, None, :] + radii[None, :, None, None] * offs[None, None, :, :]
    fring = f.values(ring.reshape(-1, dim)).reshape(n, ts.size, offs.shape[0])
    near = np.isfinite(fring) & (np.abs(fring - f0[:, None, None]) <= radii[None, :, None])

    qpts = (
        ring[:, :, :, None, None, :]
        + ts[None, :, None, None, None, None] * dprime[None, None, None, :, :, :]
    )
    fq = f.values(qpts.reshape(-1, dim)).reshape(
        n, ts.size, offs.shape[0], deltas.size, ball.shape[0]
    )
    with np.errstate(invalid="ignore"):
        quot = (fq - fring[:, :, :, None, None]) * scale / ts[None, :, None, None, None]
    quot = np.where(np.isnan(quot), math.inf, quot)

    inner = quot.min(axis=4)  # inf over the direction ball -> (N, T, M, D)
    inner = np.where(near[:, :, :, None], inner, -math.inf)
    per_delta = inner.max(axis=(1, 2))  # limsup as tail max over (t, ring) -> (N, D)

    values = per_delta.max(axis=1)
    if deltas.size >= 2:
        # The finite-delta values underestimate by O(delta); extrapolate the
        # two smallest deltas linearly to delta = 0 (slope clamped to >= 0,
        # since shrinking the ball can only raise the infimum).
        d_hi, d_lo = deltas[-2], deltas[-1]
        v_hi, v_lo = per_delta[:, -2], per_delta[:, -1]
        both = np.isfinite(v_hi) & np.isfinite(v_lo)
        if np.any(both):
            slope = np.maximum(v_lo[both] - v_hi[both], 0.0) / (d_hi - d_lo)
            values[both] = np.maximum(values[both], v_lo[both] + slope * d_lo)
    return values, per_delta


def clarke_directional(
    f: FunctionOracle,
    xbar: Sequence[float] | float | Array,
    d: Sequence[float] | float | Array,
    scheme: LiminfScheme = DEFAULT_SCHEME,
    delta_list: Sequence[float] = DEFAULT_DELTAS,
    nbhd_resolution: int = 3,
) -> SubderivEstimate:
    """Generalized directional derivative estimate of f at xbar along d.

    Dominates the lower Dini estimate up to tolerance by construction.
    """
    xb = as_point(xbar, f.dim)
    as_point(d, f.dim)
    values, per_delta = clarke_directional_values(
        f, xb[None, :], d, scheme, delta_list, nbhd_resolution
    )
    value = float(values[0])
    high = max(value, float(per_delta[0].max()))
    return SubderivEstimate(
        value=ExtReal(value),
        bracket=(ExtReal(value), ExtReal(high)),
        scheme_used=scheme,
    )


# ---------------------------------------------------------------------------
# Mean value witness
# ---------------------------------------------------------------------------

def mean_value_witness(
    f: FunctionOracle,
    x: Sequence[float] | float | Array,
    xbar: Sequence[float] | float | Array,
    lam: float,
    scheme: LiminfScheme = DEFAULT_SCHEME,
    ray_resolution: int = 33,
    tol: float = DEFAULT_TOL,
) -> Array:
    """Find x0 on [x, xbar) whose subderivative along xbar - x is >= lam - tol.

    Scans a uniform grid of the half-open segment, then refines once around
    the best candidate; when the segment leaves dom f, the domain boundary is
    bisected and probed as well (for indicator-like functions the witness sits
    exactly there). Raises :class:`WitnessNotFoundError` with the best
    candidate when the refinement budget is exhausted.
    """
    p = as_point(x, f.dim)
    q = as_point(xbar, f.dim)
    if np.array_equal(p, q):
        raise ValueError("x and xbar must be distinct: the segment [x, xbar) is empty")
    fx = f.value(p)
    if not math.isfinite(fx):
        raise DomainError("mean value witness needs f(x) finite")
    gap = f.value(q) - fx  # may be +inf
    if lam > gap + tol:
        raise ValueError(f"lambda={lam} exceeds f(xbar) - f(x) = {gap}")
    d = q - p

    def probe(ss: Array) -> Array | None:
        pts = p[None, :] + ss[:, None] * d[None, :]
        finite = np.isfinite(f.values(pts))
        if not np.any(finite):
            return None
        vals = lower_dini_values(f, pts[finite], np.tile(d, (int(finite.sum()), 1)), scheme)
        ok = vals >= lam - tol
        if np.any(ok):
            return pts[finite][int(np.argmax(ok))]
        idx = int(np.argmax(vals))
        probe.best = (pts[finite][idx], float(vals[idx]))  # type: ignore[attr-defined]
        return None

    probe.best = (p, -math.inf)  # type: ignore[attr-defined]

    ss = np.linspace(0.0, 1.0, ray_resolution, endpoint=False)
    hit = probe(ss)
    if hit is not None:
        return hit

    # One refinement pass around the most promising grid point.
    fvals = f.values(p[None, :] + ss[:, None] * d[None, :])
    finite_mask = np.isfinite(fvals)
    best_s = None
    if np.any(finite_mask):
        cand_pts = (p[None, :] + ss[:, None] * d[None, :])[finite_mask]
        cand_vals = lower_dini_values(
            f, cand_pts, np.tile(d, (cand_pts.shape[0], 1)), scheme
        )
        best_s = float(ss[finite_mask][int(np.argmax(cand_vals))])
        h = 1.0 / ray_resolution
        fine = np.linspace(max(0.0, best_s - h), min(1.0 - 1e-12, best_s + h), 4 * ray_resolution)
        hit = probe(fine)
        if hit is not None:
            return hit

    # If the segment leaves dom f, the witness may sit exactly on the domain
    # boundary: bisect the first finite/infinite transition.
    trans = np.where(finite_mask[:-1] & ~finite_mask[1:])[0]
    if trans.size > 0:
        s_lo, s_hi = float(ss[trans[0]]), float(ss[trans[0] + 1])
        for _ in range(80):
            mid = 0.5 * (s_lo + s_hi)
            if math.isfinite(f.value(p + mid * d)):
                s_lo = mid
            else:
                s_hi = mid
        hit = probe(np.array([s_lo]))
        if hit is not None:
            return hit

    best_pt, best_val = probe.best  # type: ignore[attr-defined]
    raise WitnessNotFoundError(
        f"no witness found for lambda={lam}: best subderivative {best_val} at {best_pt}",
        best_point=best_pt,
        best_value=best_val,
    )
