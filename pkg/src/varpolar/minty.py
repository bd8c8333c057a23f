"""Minty variational inequality residuals and the three-way equivalence
cross-validator.

A point xbar solves the subderivative-type inequality on C when the lower
Dini subderivative of f at every y in C toward xbar is nonpositive; it solves
the subdifferential-type inequality on an open U when every sampled
subgradient pairs nonpositively with xbar - y; and it has the
increase-along-rays property when moving from any y toward xbar never
increases f. The cross-validator evaluates all three verdicts on a grid of
xbar and classifies each comparison as agree / indeterminate / hard, where
"indeterminate" means the two discretizations disagree but the false side's
residual sits inside the documented band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .core import (
    Array,
    DEFAULT_TOL,
    ExtReal,
    FunctionOracle,
    GraphSample,
    Region,
    UnusableSampleError,
    as_point,
)
from .subderivative import DEFAULT_SCHEME, LiminfScheme, lower_dini_values
from .subdifferential import sample_subdiff_graph

#: Residual band inside which equivalence disagreements are logged as
#: indeterminate rather than failures.
DEFAULT_BAND = 1e-3


@dataclass(frozen=True)
class MintyReport:
    """Residual report of one variational-inequality check at one point."""

    residual: ExtReal
    solution: bool
    witness: Any = None
    probe_meta: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.solution


def _finite_grid(f: FunctionOracle, region: Region, resolution: int) -> tuple[Array, Array]:
    ys = region.sample(resolution)
    fy = f.values(ys)
    finite = np.isfinite(fy)
    return ys[finite], fy[finite]


def _iar_residual(
    f: FunctionOracle,
    xbar: Array,
    ys: Array,
    fy: Array,
    t_resolution: int,
) -> tuple[float, tuple[Array, float] | None]:
    """max over (y, t) of f(y + t(xbar - y)) - f(y); +inf allowed."""
    if ys.shape[0] == 0:
        return -math.inf, None
    ts = np.linspace(0.0, 1.0, t_resolution)
    pts = ys[:, None, :] * (1.0 - ts)[None, :, None] + xbar[None, None, :] * ts[None, :, None]
    vals = f.values(pts.reshape(-1, xbar.shape[0])).reshape(ys.shape[0], ts.shape[0])
    with np.errstate(invalid="ignore"):
        diffs = vals - fy[:, None]
    i, j = np.unravel_index(int(np.argmax(diffs)), diffs.shape)
    return float(diffs[i, j]), (ys[i], float(ts[j]))


def iar_check(
    f: FunctionOracle,
    xbar: Sequence[float] | float | Array,
    region: Region,
    resolution: int = 65,
    t_resolution: int = 64,
    tol: float = DEFAULT_TOL,
) -> MintyReport:
    """Does f increase along rays starting from xbar, over the region grid?

    The residual is the largest increase f(y + t(xbar - y)) - f(y) over grid
    points y with finite value and a uniform t grid containing 0 and 1.
    """
    xb = as_point(xbar, f.dim)
    if not region.contains(xb):
        raise ValueError("xbar must belong to the probe region")
    ys, fy = _finite_grid(f, region, resolution)
    meta = {"region": region.describe(), "resolution": resolution,
            "t_resolution": t_resolution, "finite_grid_points": int(ys.shape[0])}
    if ys.shape[0] == 0:
        # no finite-valued grid point: the quantifier is vacuous
        return MintyReport(residual=ExtReal(0.0), solution=True, witness=None, probe_meta=meta)
    residual, witness = _iar_residual(f, xb, ys, fy, t_resolution)
    return MintyReport(
        residual=ExtReal(residual), solution=residual <= tol, witness=witness, probe_meta=meta
    )


def _subderivative_residual(
    f: FunctionOracle,
    xbar: Array,
    ys: Array,
    scheme: LiminfScheme,
) -> tuple[float, Array | None]:
    if ys.shape[0] == 0:
        return -math.inf, None
    vals = lower_dini_values(f, ys, xbar[None, :] - ys, scheme)
    i = int(np.argmax(vals))
    return float(vals[i]), ys[i]


def minty_subderivative(
    f: FunctionOracle,
    xbar: Sequence[float] | float | Array,
    region: Region,
    resolution: int = 65,
    scheme: LiminfScheme = DEFAULT_SCHEME,
    tol: float = DEFAULT_TOL,
) -> MintyReport:
    """Subderivative-type Minty residual: max over grid y in C with finite
    value of the subderivative of f at y toward xbar (y = xbar contributes
    exactly 0)."""
    xb = as_point(xbar, f.dim)
    if not region.contains(xb):
        raise ValueError("xbar must belong to the probe region")
    ys, _ = _finite_grid(f, region, resolution)
    meta = {"region": region.describe(), "resolution": resolution,
            "scheme": scheme.as_dict(), "finite_grid_points": int(ys.shape[0])}
    if ys.shape[0] == 0:
        return MintyReport(residual=ExtReal(0.0), solution=True, witness=None, probe_meta=meta)
    residual, witness = _subderivative_residual(f, xb, ys, scheme)
    return MintyReport(
        residual=ExtReal(residual), solution=residual <= tol, witness=witness, probe_meta=meta
    )


def _subdifferential_residual(
    xbar: Array, graph: GraphSample, region: Region
) -> tuple[float, tuple[Array, Array] | None]:
    inside = region.contains_many(graph.points)
    if not np.any(inside):
        raise UnusableSampleError("the graph sample has no pairs inside the probe region")
    pts, cov = graph.points[inside], graph.covectors[inside]
    vals = np.einsum("ij,ij->i", cov, xbar[None, :] - pts)
    i = int(np.argmax(vals))
    return float(vals[i]), (pts[i], cov[i])


def minty_subdifferential(
    f: FunctionOracle,
    xbar: Sequence[float] | float | Array,
    region: Region,
    graph: GraphSample,
    tol: float = DEFAULT_TOL,
) -> MintyReport:
    """Subdifferential-type Minty residual: max over sampled pairs (y, y*)
    with y in the region of <y*, xbar - y>."""
    xb = as_point(xbar, f.dim)
    if not region.contains(xb):
        raise ValueError("xbar must belong to the probe region")
    residual, witness = _subdifferential_residual(xb, graph, region)
    return MintyReport(
        residual=ExtReal(residual),
        solution=residual <= tol,
        witness=witness,
        probe_meta={"region": region.describe(), "graph": dict(graph.meta)},
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

def classify(
    verdict_a: bool, residual_a: float, verdict_b: bool, residual_b: float, band: float
) -> str:
    """agree / indeterminate / hard for one pair of route verdicts.

    Disagreements are indeterminate when the false side's residual lies inside
    the band (it could be discretization noise); a wrong-sign residual beyond
    the band is a hard disagreement.
    """
    if verdict_a == verdict_b:
        return "agree"
    false_res = residual_b if verdict_a else residual_a
    return "indeterminate" if abs(false_res) <= band else "hard"


@dataclass
class EquivalenceRow:
    xbar: tuple[float, ...]
    interior: bool
    residuals: dict[str, float]
    verdicts: dict[str, bool]
    classes: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "xbar": list(self.xbar),
            "interior": self.interior,
            "residuals": self.residuals,
            "verdicts": self.verdicts,
            "classes": self.classes,
        }


@dataclass
class EquivalenceReport:
    """Per-function aggregation of the three-route comparison."""

    function: str
    region: dict
    resolution: int
    band: float
    probe_meta: dict
    rows: list[EquivalenceRow]

    def counts(self, theorem: str) -> dict[str, int]:
        out = {"agree": 0, "indeterminate": 0, "hard": 0}
        for row in self.rows:
            cls = row.classes.get(theorem)
            if cls is not None:
                out[cls] += 1
        return out

    def disagreements(self, theorem: str) -> list[EquivalenceRow]:
        return [r for r in self.rows if r.classes.get(theorem) in ("indeterminate", "hard")]

    def to_dict(self) -> dict:
        d = {
            "function": self.function,
            "region": self.region,
            "resolution": self.resolution,
            "band": self.band,
            "probe_meta": self.probe_meta,
            "grid_points": len(self.rows),
        }
        for theorem in ("subderivative_vs_iar", "subdifferential_vs_iar"):
            counts = self.counts(theorem)
            d[theorem] = {
                **counts,
                "disagreements": [
                    r.to_dict() for r in self.disagreements(theorem)
                ],
            }
        return d

    def rows_table(self) -> tuple[list[str], list[list]]:
        """Per-xbar rows as a CSV-ready (header, rows) pair, one row per grid
        point, for plotting solution sets externally."""
        dim = len(self.rows[0].xbar) if self.rows else 0
        routes = ("subderivative", "subdifferential", "iar", "iar_open")
        header = (
            [f"xbar_{i + 1}" for i in range(dim)]
            + ["interior"]
            + [f"verdict_{r}" for r in routes]
            + [f"residual_{r}" for r in routes]
            + ["class_prop1", "class_thm2"]
        )
        table = []
        for row in self.rows:
            table.append(
                list(row.xbar)
                + [row.interior]
                + [row.verdicts.get(r, "") for r in routes]
                + [row.residuals.get(r, "") for r in routes]
                + [
                    row.classes.get("subderivative_vs_iar", ""),
                    row.classes.get("subdifferential_vs_iar", ""),
                ]
            )
        return header, table


def cross_validate(
    f: FunctionOracle,
    region: Region | None = None,
    resolution: int = 65,
    probe_factor: int = 2,
    t_resolution: int = 64,
    band: float = DEFAULT_BAND,
    scheme: LiminfScheme = DEFAULT_SCHEME,
    graph_source: str = "auto",
    tol: float = DEFAULT_TOL,
) -> EquivalenceReport:
    """Evaluate the subderivative-Minty, subdifferential-Minty, and
    increase-along-rays verdicts for every grid xbar in the region with finite
    value, and classify the two pairwise comparisons.

    The y-probe grids are sampled at ``probe_factor`` times the xbar
    resolution (nested refinement), which keeps residuals faithful enough for
    the band to separate genuine disagreements from grid artifacts. The
    subdifferential route quantifies over the open interior of the region,
    discretized by shrinking the box by one xbar-grid cell; comparisons
    against it are made at interior xbar only, with the rays route re-run on
    the shrunk region so both sides quantify over the same set.
    """
    if region is None:
        region = f.default_region
    if region is None:
        raise ValueError(f"oracle {f.name!r} has no default region; pass one")
    probe_res = probe_factor * (resolution - 1) + 1
    spacing = region.spacing(resolution)
    interior_region = region.shrink(spacing)

    if graph_source == "auto":
        graph_source = "exact" if f.exact_subdifferential is not None else "clarke-numeric"
    graph = sample_subdiff_graph(f, region, probe_res, source=graph_source)

    xgrid = region.sample(resolution)
    finite_x = np.isfinite(f.values(xgrid))

    ys_c, fy_c = _finite_grid(f, region, probe_res)
    ys_u, fy_u = _finite_grid(f, interior_region, probe_res)
    graph_inside = graph.restrict_points(interior_region)

    rows: list[EquivalenceRow] = []
    for xb, ok in zip(xgrid, finite_x):
        if not ok:
            continue
        interior = bool(interior_region.contains(xb))
        r_sd, _ = _subderivative_residual(f, xb, ys_c, scheme)
        r_iar, _ = _iar_residual(f, xb, ys_c, fy_c, t_resolution)
        v_sd, v_iar = r_sd <= tol, r_iar <= tol
        residuals = {"subderivative": r_sd, "iar": r_iar}
        verdicts = {"subderivative": v_sd, "iar": v_iar}
        classes = {"subderivative_vs_iar": classify(v_sd, r_sd, v_iar, r_iar, band)}
        if interior and len(graph_inside) > 0:
            r_sdiff, _ = _subdifferential_residual(xb, graph_inside, interior_region)
            r_iar_u, _ = _iar_residual(f, xb, ys_u, fy_u, t_resolution)
            v_sdiff, v_iar_u = r_sdiff <= tol, r_iar_u <= tol
            residuals.update({"subdifferential": r_sdiff, "iar_open": r_iar_u})
            verdicts.update({"subdifferential": v_sdiff, "iar_open": v_iar_u})
            classes["subdifferential_vs_iar"] = classify(
                v_sdiff, r_sdiff, v_iar_u, r_iar_u, band
            )
        rows.append(
            EquivalenceRow(
                xbar=tuple(float(c) for c in xb),
                interior=interior,
                residuals=residuals,
                verdicts=verdicts,
                classes=classes,
            )
        )

    return EquivalenceReport(
        function=f.name,
        region=region.describe(),
        resolution=resolution,
        band=band,
        probe_meta={
            "probe_resolution": probe_res,
            "t_resolution": t_resolution,
            "graph_source": graph_source,
            "graph_size": len(graph),
            "interior_region": interior_region.describe(),
            "scheme": scheme.as_dict(),
        },
        rows=rows,
    )
