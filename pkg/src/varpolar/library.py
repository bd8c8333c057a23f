"""Curated test-function library.

Every entry is a proper lsc function with a vectorized evaluator, an exact
subderivative oracle, and (for the convex entries) an exact subdifferential
oracle. These supply ground truth for the numerical machinery and for the
cross-validation suites. Functions are addressable by stable string ids.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    Array,
    BallSet,
    FunctionOracle,
    IntervalSet,
    PolytopeSet,
    Region,
    SubdiffSet,
)

_BOX_1D = Region.interval(-2.0, 2.0)
_BOX_TWOWELL = Region.interval(-1.0, 3.0)
_BOX_2D = Region.box([(-2.0, 2.0), (-2.0, 2.0)])


def _sd_abs(x: Array, d: Array) -> float:
    if x[0] > 0:
        return float(d[0])
    if x[0] < 0:
        return float(-d[0])
    return abs(float(d[0]))


def _sdiff_abs(x: Array) -> SubdiffSet:
    if x[0] > 0:
        return IntervalSet(1.0, 1.0)
    if x[0] < 0:
        return IntervalSet(-1.0, -1.0)
    return IntervalSet(-1.0, 1.0)


def _sd_square(x: Array, d: Array) -> float:
    return 2.0 * float(x[0]) * float(d[0])


def _sd_neg_abs(x: Array, d: Array) -> float:
    if x[0] > 0:
        return float(-d[0])
    if x[0] < 0:
        return float(d[0])
    return -abs(float(d[0]))


def _sd_ind_halfline(x: Array, d: Array) -> float:
    if x[0] > 0:
        return 0.0
    if x[0] == 0:
        return 0.0 if d[0] >= 0 else math.inf
    return math.inf  # outside dom f; callers should not get here


def _sdiff_ind_halfline(x: Array) -> SubdiffSet | None:
    if x[0] > 0:
        return IntervalSet(0.0, 0.0)
    if x[0] == 0:
        return IntervalSet(-math.inf, 0.0)
    return None


def _sd_ind_origin(x: Array, d: Array) -> float:
    if x[0] == 0:
        return 0.0 if d[0] == 0 else math.inf
    return math.inf


def _sd_maxzero(x: Array, d: Array) -> float:
    if x[0] > 0:
        return float(d[0])
    if x[0] < 0:
        return 0.0
    return max(float(d[0]), 0.0)


def _sdiff_maxzero(x: Array) -> SubdiffSet:
    if x[0] > 0:
        return IntervalSet(1.0, 1.0)
    if x[0] < 0:
        return IntervalSet(0.0, 0.0)
    return IntervalSet(0.0, 1.0)


# min(|x|, |x-2|+1): two local minima, at 0 (value 0) and 2 (value 1); kinks
# at 0 and 2 (convex) and at the crossover 1.5 (concave).
def _twowell(x: Array) -> float:
    v = float(x[0])
    return min(abs(v), abs(v - 2.0) + 1.0)


def _twowell_slopes(v: float) -> tuple[float, float]:
    """(left slope, right slope) of the two-well function at v."""
    if v < 0.0:
        return -1.0, -1.0
    if v == 0.0:
        return -1.0, 1.0
    if v < 1.5:
        return 1.0, 1.0
    if v == 1.5:
        return 1.0, -1.0
    if v < 2.0:
        return -1.0, -1.0
    if v == 2.0:
        return -1.0, 1.0
    return 1.0, 1.0


def _sd_twowell(x: Array, d: Array) -> float:
    sl, sr = _twowell_slopes(float(x[0]))
    dd = float(d[0])
    return sr * dd if dd >= 0 else sl * dd


def _sd_norm2d(x: Array, d: Array) -> float:
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return float(np.linalg.norm(d))
    return float(np.dot(x, d)) / nx


def _sdiff_norm2d(x: Array) -> SubdiffSet:
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return BallSet(np.zeros(2), 1.0)
    return PolytopeSet((x / nx)[None, :])


def _sd_mixed2d(x: Array, d: Array) -> float:
    smooth = 2.0 * float(x[0]) * float(d[0])
    if x[1] > 0:
        return smooth + float(d[1])
    if x[1] < 0:
        return smooth - float(d[1])
    return smooth + abs(float(d[1]))


def _sdiff_mixed2d(x: Array) -> SubdiffSet:
    g = 2.0 * float(x[0])
    if x[1] > 0:
        return PolytopeSet(np.array([[g, 1.0]]))
    if x[1] < 0:
        return PolytopeSet(np.array([[g, -1.0]]))
    return PolytopeSet(np.array([[g, -1.0], [g, 1.0]]))


def _build_library() -> dict[str, FunctionOracle]:
    entries = [
        FunctionOracle(
            name="abs",
            dim=1,
            fn=lambda x: abs(float(x[0])),
            batch=lambda p: np.abs(p[:, 0]),
            is_convex=True,
            exact_subderivative=_sd_abs,
            exact_subdifferential=_sdiff_abs,
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="square",
            dim=1,
            fn=lambda x: float(x[0]) ** 2,
            batch=lambda p: p[:, 0] ** 2,
            is_convex=True,
            exact_subderivative=_sd_square,
            exact_subdifferential=lambda x: IntervalSet(2.0 * float(x[0]), 2.0 * float(x[0])),
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="neg_abs",
            dim=1,
            fn=lambda x: -abs(float(x[0])),
            batch=lambda p: -np.abs(p[:, 0]),
            is_convex=False,
            exact_subderivative=_sd_neg_abs,
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="ind_halfline",
            dim=1,
            fn=lambda x: 0.0 if x[0] >= 0 else math.inf,
            batch=lambda p: np.where(p[:, 0] >= 0, 0.0, math.inf),
            is_convex=True,
            domain_description="the half-line [0, +inf)",
            exact_subderivative=_sd_ind_halfline,
            exact_subdifferential=_sdiff_ind_halfline,
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="ind_origin",
            dim=1,
            fn=lambda x: 0.0 if x[0] == 0 else math.inf,
            batch=lambda p: np.where(p[:, 0] == 0, 0.0, math.inf),
            is_convex=True,
            domain_description="the single point {0}",
            exact_subderivative=_sd_ind_origin,
            exact_subdifferential=lambda x: IntervalSet(-math.inf, math.inf) if x[0] == 0 else None,
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="maxzero",
            dim=1,
            fn=lambda x: max(float(x[0]), 0.0),
            batch=lambda p: np.maximum(p[:, 0], 0.0),
            is_convex=True,
            exact_subderivative=_sd_maxzero,
            exact_subdifferential=_sdiff_maxzero,
            default_region=_BOX_1D,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="twowell",
            dim=1,
            fn=_twowell,
            batch=lambda p: np.minimum(np.abs(p[:, 0]), np.abs(p[:, 0] - 2.0) + 1.0),
            is_convex=False,
            exact_subderivative=_sd_twowell,
            default_region=_BOX_TWOWELL,
            finite_point=np.array([0.0]),
        ),
        FunctionOracle(
            name="norm2d",
            dim=2,
            fn=lambda x: float(np.linalg.norm(x)),
            batch=lambda p: np.linalg.norm(p, axis=1),
            is_convex=True,
            exact_subderivative=_sd_norm2d,
            exact_subdifferential=_sdiff_norm2d,
            default_region=_BOX_2D,
            finite_point=np.array([0.0, 0.0]),
        ),
        FunctionOracle(
            name="mixed2d",
            dim=2,
            fn=lambda x: float(x[0]) ** 2 + abs(float(x[1])),
            batch=lambda p: p[:, 0] ** 2 + np.abs(p[:, 1]),
            is_convex=True,
            exact_subderivative=_sd_mixed2d,
            exact_subdifferential=_sdiff_mixed2d,
            default_region=_BOX_2D,
            finite_point=np.array([0.0, 0.0]),
        ),
    ]
    return {f.name: f for f in entries}


_LIBRARY = _build_library()

FUNCTION_IDS: tuple[str, ...] = tuple(_LIBRARY)


def test_library() -> list[FunctionOracle]:
    """All curated oracles, in stable id order."""
    return list(_LIBRARY.values())


def get_function(function_id: str) -> FunctionOracle:
    """Look up a library oracle by its stable id."""
    try:
        return _LIBRARY[function_id]
    except KeyError:
        known = ", ".join(FUNCTION_IDS)
        raise KeyError(f"unknown function id {function_id!r}; known ids: {known}") from None
