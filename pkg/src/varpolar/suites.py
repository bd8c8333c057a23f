"""Verification suites: reusable, JSON-ready runs of the equivalence checks,
the dual-route polar comparison, the subderivative/enlargement inequality, and
the monotonicity predicates over the curated library.

Each suite function returns a plain dict with a ``hard_count`` entry; the CLI
sums these for its exit status. All constructions are deterministic, so two
runs with the same parameters produce identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_BOX_HALF_WIDTH, GraphSample, Region
from .library import get_function
from .minty import DEFAULT_BAND, cross_validate
from .polar import is_absorbing, is_monotone, polar_contains, polar_membership_via_iar
from .subderivative import DEFAULT_SCHEME, LiminfScheme
from .subdifferential import EPS_LADDER, cdd_profile, sample_subdiff_graph


@dataclass(frozen=True)
class SuiteParams:
    """Knobs shared by the suites; mirrors the CLI configuration."""

    resolution: int = 65
    resolution_2d: int = 17
    probe_factor: int = 2
    t_resolution: int = 64
    band: float = DEFAULT_BAND
    polar_band: float = 1e-2
    tol: float = 1e-6
    cdd_tol: float = 1e-3
    covector_half_width: float = DEFAULT_BOX_HALF_WIDTH
    covector_resolution: int = 41
    thm3_candidates: int = 15
    thm3_candidates_2d: int = 5
    scheme: LiminfScheme = DEFAULT_SCHEME

    def grid_resolution(self, dim: int) -> int:
        return self.resolution if dim == 1 else self.resolution_2d


def _graph_source(f) -> str:
    return "exact" if f.exact_subdifferential is not None else "clarke-numeric"


# ---------------------------------------------------------------------------
# Equivalence suites (subderivative-Minty and subdifferential-Minty vs rays)
# ---------------------------------------------------------------------------

def equivalence_report(function_id: str, params: SuiteParams):
    f = get_function(function_id)
    return cross_validate(
        f,
        resolution=params.grid_resolution(f.dim),
        probe_factor=params.probe_factor,
        t_resolution=params.t_resolution,
        band=params.band,
        scheme=params.scheme,
        tol=params.tol,
    )


def equivalence_suite(function_id: str, params: SuiteParams) -> dict:
    return equivalence_report(function_id, params).to_dict()


def _theorem_section(equiv: dict, theorem: str) -> dict:
    sec = dict(equiv[theorem])
    counted = sec["agree"] + sec["indeterminate"] + sec["hard"]
    sec.update(
        {
            "function": equiv["function"],
            "region": equiv["region"],
            "resolution": equiv["resolution"],
            "band": equiv["band"],
            "grid_points": counted,
            "indeterminate_fraction": (sec["indeterminate"] / counted) if counted else 0.0,
            "hard_count": sec["hard"],
        }
    )
    return sec


def run_equivalence(function_ids: list[str], params: SuiteParams) -> dict[str, dict]:
    """Cross-validate each function once; split into prop1/thm2 sections."""
    return {fid: equivalence_suite(fid, params) for fid in function_ids}


def prop1_from_equivalence(equiv_by_fn: dict[str, dict]) -> dict:
    funcs = {fid: _theorem_section(e, "subderivative_vs_iar") for fid, e in equiv_by_fn.items()}
    return {
        "functions": funcs,
        "hard_count": sum(s["hard"] for s in funcs.values()),
    }


def thm2_from_equivalence(equiv_by_fn: dict[str, dict]) -> dict:
    funcs = {fid: _theorem_section(e, "subdifferential_vs_iar") for fid, e in equiv_by_fn.items()}
    return {
        "functions": funcs,
        "hard_count": sum(s["hard"] for s in funcs.values()),
    }


# ---------------------------------------------------------------------------
# Dual-route polar suite
# ---------------------------------------------------------------------------

def _candidate_grids(f, params: SuiteParams) -> tuple[np.ndarray, np.ndarray]:
    region = f.default_region
    if f.dim == 1:
        xs = region.sample(params.thm3_candidates)
        cs = np.linspace(-4.0, 4.0, params.thm3_candidates)[:, None]
    else:
        xs = region.sample(params.thm3_candidates_2d)
        axis = np.linspace(-2.0, 2.0, params.thm3_candidates_2d)
        mesh = np.meshgrid(*([axis] * f.dim), indexing="ij")
        cs = np.stack([m.ravel() for m in mesh], axis=-1)
    return xs, cs


def thm3_suite(function_id: str, params: SuiteParams) -> dict:
    """Compare sampled-polar membership against the tilted increase-along-rays
    route on a candidate grid, with the graph sampled four times denser than
    the candidates."""
    f = get_function(function_id)
    region = f.default_region
    xs, cs = _candidate_grids(f, params)
    cand_res = params.thm3_candidates if f.dim == 1 else params.thm3_candidates_2d
    dense_res = 4 * (cand_res - 1) + 1
    graph = sample_subdiff_graph(
        f,
        region,
        dense_res,
        source=_graph_source(f),
        covector_half_width=params.covector_half_width,
        covector_resolution=params.covector_resolution,
        scheme=params.scheme,
    )
    probe_res = (
        params.probe_factor * (params.resolution - 1) + 1
        if f.dim == 1
        else params.probe_factor * (params.resolution_2d - 1) + 1
    )
    agree = indeterminate = hard = 0
    disagreements = []
    for x in xs:
        for c in cs:
            pv = polar_contains(graph, x, c, tol=params.tol)
            iv = polar_membership_via_iar(
                f, x, c, region,
                ray_resolution=33,
                probe_resolution=probe_res,
                tol=params.tol,
            )
            if pv.related == iv.ok:
                agree += 1
                continue
            row = {
                "x": x.tolist(),
                "xstar": c.tolist(),
                "min_product": pv.min_product,
                "iar_residual": iv.residual,
            }
            if abs(pv.min_product) <= params.polar_band:
                indeterminate += 1
                row["class"] = "indeterminate"
            else:
                hard += 1
                row["class"] = "hard"
            disagreements.append(row)
    return {
        "function": function_id,
        "region": region.describe(),
        "candidates": int(xs.shape[0] * cs.shape[0]),
        "graph_resolution": dense_res,
        "graph_size": len(graph),
        "graph_source": _graph_source(f),
        "band": params.polar_band,
        "agree": agree,
        "indeterminate": indeterminate,
        "hard": hard,
        "hard_count": hard,
        "disagreements": disagreements,
    }


# ---------------------------------------------------------------------------
# Subderivative / enlargement inequality suite
# ---------------------------------------------------------------------------

def cdd_suite(function_id: str, params: SuiteParams) -> dict:
    """Check the inequality at every finite grid point along +-e_i."""
    f = get_function(function_id)
    region = f.default_region
    grid = region.sample(params.grid_resolution(f.dim))
    finite = np.isfinite(f.values(grid))
    eye = np.eye(f.dim)
    dirs = np.vstack([eye, -eye])
    checks = passes = 0
    truncated = False
    failures = []
    for xb in grid[finite]:
        for v in cdd_profile(
            f,
            xb,
            dirs,
            eps_list=EPS_LADDER,
            scheme=params.scheme,
            covector_half_width=params.covector_half_width,
            covector_resolution=params.covector_resolution,
            tol=params.cdd_tol,
        ):
            checks += 1
            truncated = truncated or ("covector_truncated" in v.flags)
            if v.ok:
                passes += 1
            else:
                failures.append(
                    {
                        "xbar": xb.tolist(),
                        "direction": v.details["direction"],
                        "lhs": v.details["lhs"],
                        "rhs": v.details["rhs"],
                        "residual": v.residual,
                        "flags": list(v.flags),
                    }
                )
    return {
        "function": function_id,
        "region": region.describe(),
        "checks": checks,
        "pass": passes,
        "fail": len(failures),
        "hard_count": len(failures),
        "covector_truncated": truncated,
        "failures": failures,
    }


# ---------------------------------------------------------------------------
# Predicate suite
# ---------------------------------------------------------------------------

def _absorbing_candidates(f, region: Region, resolution: int) -> tuple[GraphSample, float]:
    """Interior point grid paired with a covector ladder at twice the grid
    spacing (boundary cells dropped: polar constraints are one-sided there,
    a truncation artifact, not a property of the operator)."""
    h = region.spacing(resolution)
    if f.dim == 1:
        xs = region.sample(resolution)[1:-1]
        cov = np.arange(-4.5, 4.5 + 1e-9, 2 * h)[:, None]
    else:
        coarse = max(3, (resolution + 1) // 2)
        xs = region.sample(coarse, interior=True)
        axis = np.arange(-4.0, 4.0 + 1e-9, 2 * h)
        mesh = np.meshgrid(*([axis] * f.dim), indexing="ij")
        cov = np.stack([m.ravel() for m in mesh], axis=-1)
    pts = np.repeat(xs, cov.shape[0], axis=0)
    cvs = np.tile(cov, (xs.shape[0], 1))
    return GraphSample(pts, cvs), h


def predicates_suite(function_id: str, params: SuiteParams) -> dict:
    """Monotonicity of exact graphs (convex entries must pass, the sign-flip
    graph of -|x| must fail with a witness) and monotone absorption of every
    function's dense graph at match radius twice the sampling spacing."""
    f = get_function(function_id)
    region = f.default_region
    resolution = params.grid_resolution(f.dim)
    source = _graph_source(f)
    graph = sample_subdiff_graph(
        f,
        region,
        resolution,
        source=source,
        covector_half_width=params.covector_half_width,
        covector_resolution=params.covector_resolution,
        scheme=params.scheme,
    )
    mono_tol = 1e-9 if source == "exact" else params.tol
    mono = is_monotone(graph, tol=mono_tol)
    mono_expected = bool(f.is_convex)
    mono_ok = mono.related == mono_expected

    cands, h = _absorbing_candidates(f, region, resolution)
    absorb = is_absorbing(graph, cands, match_radius=2 * h, oracle=f, tol=params.tol)

    failures = int(not mono_ok) + int(not absorb.ok)
    result = {
        "function": function_id,
        "graph_source": source,
        "graph_size": len(graph),
        "monotone": mono.related,
        "monotone_expected": mono_expected,
        "monotone_min_product": mono.min_product,
        "absorbing": absorb.ok,
        "absorbing_match_radius": 2 * h,
        "absorbing_related": absorb.details.get("related"),
        "absorbing_unattributed": absorb.details.get("unattributed"),
        "hard_count": failures,
    }
    if not mono.related and mono.witness is not None:
        (p1, c1), (p2, c2) = mono.witness
        result["monotone_witness"] = {
            "first": [p1.tolist(), c1.tolist()],
            "second": [p2.tolist(), c2.tolist()],
        }
    if not absorb.ok and absorb.witness is not None:
        p, c = absorb.witness
        result["absorbing_witness"] = [p.tolist(), c.tolist()]
    return result


# ---------------------------------------------------------------------------
# Suite registry
# ---------------------------------------------------------------------------

SUITE_NAMES = ("prop1", "thm2", "thm3", "cdd", "predicates")


def run_suites(
    function_ids: list[str],
    suites: list[str],
    params: SuiteParams,
    max_workers: int = 1,
    collect_rows: bool = False,
) -> dict:
    """Run the selected suites over the functions and assemble an
    order-stable result tree (sorted by suite, then function id).

    With ``collect_rows`` the result also carries per-xbar equivalence rows
    under ``equivalence_rows`` (a {function: (header, rows)} map) for CSV
    export; these are not part of the report tree itself.
    """
    selected = list(SUITE_NAMES) if "all" in suites else list(dict.fromkeys(suites))
    for name in selected:
        if name not in SUITE_NAMES:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES} or 'all'")
    fids = sorted(function_ids)

    out: dict[str, dict] = {}
    need_equiv = ("prop1" in selected) or ("thm2" in selected)

    def run_one(task: tuple[str, str]):
        kind, fid = task
        if kind == "equiv":
            return equivalence_report(fid, params)
        if kind == "thm3":
            return thm3_suite(fid, params)
        if kind == "cdd":
            return cdd_suite(fid, params)
        return predicates_suite(fid, params)

    tasks: list[tuple[str, str]] = []
    if need_equiv:
        tasks += [("equiv", fid) for fid in fids]
    for name in ("thm3", "cdd", "predicates"):
        if name in selected:
            tasks += [(name, fid) for fid in fids]

    if max_workers > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = dict(zip(tasks, pool.map(run_one, tasks)))
    else:
        results = {task: run_one(task) for task in tasks}

    rows_by_fn: dict[str, tuple] = {}
    if need_equiv:
        reports = {fid: results[("equiv", fid)] for fid in fids}
        equiv = {fid: rep.to_dict() for fid, rep in reports.items()}
        if collect_rows:
            rows_by_fn = {fid: rep.rows_table() for fid, rep in reports.items()}
        if "prop1" in selected:
            out["prop1"] = prop1_from_equivalence(equiv)
        if "thm2" in selected:
            out["thm2"] = thm2_from_equivalence(equiv)
    for name in ("thm3", "cdd", "predicates"):
        if name in selected:
            per_fn = {fid: results[(name, fid)] for fid in fids}
            out[name] = {
                "functions": per_fn,
                "hard_count": sum(s["hard_count"] for s in per_fn.values()),
            }

    truncation = sorted(
        {
            fid
            for name in out
            for fid, sec in out[name].get("functions", {}).items()
            if sec.get("covector_truncated")
        }
    )
    result = {
        "suites": out,
        "hard_total": sum(sec["hard_count"] for sec in out.values()),
        "truncation_flags": truncation,
    }
    if collect_rows and rows_by_fn:
        result["equivalence_rows"] = rows_by_fn
    return result
