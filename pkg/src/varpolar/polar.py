"""Monotone polar of finite graphs, monotonicity predicates, and the
increase-along-rays route to polar membership.

A pair (x, x*) is monotonically related to a sampled operator T when
<y* - x*, y - x> >= 0 for every sampled pair (y, y*); the polar collects all
such pairs. Because a finite sample imposes finitely many constraints, the
sampled polar over-approximates the true one; the dual route below tests the
same membership through the tilted function f - x* instead and is used for
cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Array,
    DEFAULT_TOL,
    FunctionOracle,
    GraphSample,
    Region,
    Verdict,
    as_point,
)

#: Tolerance for exact-arithmetic-representable samples.
EXACT_TOL = 1e-9


@dataclass(frozen=True)
class PolarVerdict:
    """Outcome of a monotone-relatedness test: the minimum pairing product
    over the graph and the element (or pair of elements) achieving it."""

    related: bool
    min_product: float
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.related


def _min_products(T: GraphSample, points: Array, covectors: Array) -> tuple[Array, Array]:
    """For each candidate row, min over T of <y* - x*, y - x> and argmin."""
    py, cy = T.points, T.covectors
    a = np.einsum("ij,ij->i", cy, py)  # <y*, y>
    m = (
        a[None, :]
        - points @ cy.T
        - covectors @ py.T
        + np.einsum("ij,ij->i", covectors, points)[:, None]
    )
    return m.min(axis=1), m.argmin(axis=1)


def polar_contains(
    T: GraphSample,
    x: Sequence[float] | float | Array,
    xstar: Sequence[float] | float | Array,
    tol: float = DEFAULT_TOL,
) -> PolarVerdict:
    """Is (x, xstar) monotonically related to every sampled pair of T?

    An empty sample relates everything (vacuous quantifier): min_product is
    +inf by convention and no witness is reported.
    """
    p = as_point(x, T.dim if len(T) else None)
    c = as_point(xstar, p.shape[0])
    if len(T) == 0:
        return PolarVerdict(related=True, min_product=math.inf, witness=None)
    mins, args = _min_products(T, p[None, :], c[None, :])
    k = int(args[0])
    return PolarVerdict(
        related=bool(mins[0] >= -tol),
        min_product=float(mins[0]),
        witness=(T.points[k], T.covectors[k]),
    )


def is_monotone(T: GraphSample, tol: float = DEFAULT_TOL) -> PolarVerdict:
    """Does every pair of elements of T satisfy <y* - x*, y - x> >= -tol?

    The witness is the violating pair of graph elements (as two (point,
    covector) tuples) achieving the minimum product.
    """
    n = len(T)
    if n <= 1:
        return PolarVerdict(related=True, min_product=math.inf, witness=None)
    g = T.covectors @ T.points.T
    diag = np.diag(g)
    m = diag[:, None] + diag[None, :] - g - g.T
    iu = np.triu_indices(n, k=1)
    vals = m[iu]
    k = int(np.argmin(vals))
    i, j = int(iu[0][k]), int(iu[1][k])
    mp = float(vals[k])
    return PolarVerdict(
        related=mp >= -tol,
        min_product=mp,
        witness=((T.points[i], T.covectors[i]), (T.points[j], T.covectors[j])),
    )


def polar_of_sample(
    T: GraphSample, candidates: GraphSample, tol: float = DEFAULT_TOL
) -> GraphSample:
    """The subset of candidate pairs monotonically related to T."""
    if len(candidates) == 0:
        return candidates
    if len(T) == 0:
        return candidates
    mins, _ = _min_products(T, candidates.points, candidates.covectors)
    return candidates.filter(mins >= -tol)


def is_absorbing(
    T: GraphSample,
    candidates: GraphSample,
    match_radius: float,
    oracle: FunctionOracle | None = None,
    tol: float = DEFAULT_TOL,
) -> Verdict:
    """Is every candidate related to T attributable to T itself?

    A related candidate is attributed when it lies within ``match_radius`` of
    some sampled element in graph distance max(||dx||, ||dx*||), or when the
    oracle's exact subdifferential (if available) certifies membership. The
    verdict's witness is the worst unattributed offender and the residual its
    attribution distance minus the radius.
    """
    related = polar_of_sample(T, candidates, tol)
    if len(related) == 0:
        return Verdict(
            ok=True,
            residual=-match_radius,
            witness=None,
            details={"related": 0, "unattributed": 0},
        )
    if len(T) == 0:
        return Verdict(
            ok=False,
            residual=math.inf,
            witness=(related.points[0], related.covectors[0]),
            details={"reason": "empty sample absorbs nothing"},
        )
    dp = np.linalg.norm(related.points[:, None, :] - T.points[None, :, :], axis=2)
    dc = np.linalg.norm(related.covectors[:, None, :] - T.covectors[None, :, :], axis=2)
    dist = np.maximum(dp, dc).min(axis=1)
    attributed = dist <= match_radius + 1e-12
    if oracle is not None and oracle.exact_subdifferential is not None:
        for i in np.where(~attributed)[0]:
            desc = oracle.exact_subdifferential(related.points[i])
            if desc is not None and desc.contains(related.covectors[i], tol):
                attributed[i] = True
                dist[i] = 0.0
    worst = int(np.argmax(np.where(attributed, -math.inf, dist)))
    ok = bool(np.all(attributed))
    return Verdict(
        ok=ok,
        residual=float(dist.max() - match_radius),
        witness=None if ok else (related.points[worst], related.covectors[worst]),
        details={"related": len(related), "unattributed": int((~attributed).sum())},
    )


def polar_membership_via_iar(
    f: FunctionOracle,
    x: Sequence[float] | float | Array,
    xstar: Sequence[float] | float | Array,
    probe: Region,
    ray_resolution: int = 33,
    probe_resolution: int = 65,
    tol: float = DEFAULT_TOL,
) -> Verdict:
    """Dual route to polar membership: (x, x*) lies in the polar of the
    subdifferential of f exactly when the tilted function f - x* increases
    along every ray starting from x.

    Checked as (f - x*)(y + t(x - y)) <= (f - x*)(y) + tol for all probe-grid
    y with finite value and all t in a uniform [0, 1] grid. The witness is the
    violating (y, t).
    """
    p = as_point(x, f.dim)
    c = as_point(xstar, f.dim)
    g = f.shifted(c)
    ys = probe.sample(probe_resolution)
    gy = g.values(ys)
    finite = np.isfinite(gy)
    if not np.any(finite):
        return Verdict(ok=True, residual=-math.inf, witness=None)
    ys, gy = ys[finite], gy[finite]
    ts = np.linspace(0.0, 1.0, ray_resolution)
    pts = ys[:, None, :] * (1.0 - ts)[None, :, None] + p[None, None, :] * ts[None, :, None]
    vals = g.values(pts.reshape(-1, f.dim)).reshape(ys.shape[0], ts.shape[0])
    with np.errstate(invalid="ignore"):
        diffs = vals - gy[:, None]
    i, j = np.unravel_index(int(np.argmax(diffs)), diffs.shape)
    residual = float(diffs[i, j])
    return Verdict(
        ok=residual <= tol,
        residual=residual,
        witness=(ys[i], float(ts[j])),
        details={"probe": probe.describe(), "probe_resolution": probe_resolution},
    )
