"""Command-line frontend: configure runs, execute verification suites, and
emit machine-readable (JSON), tabular (CSV), and human-readable reports.

Exit status: 0 when every selected suite passes, 1 on hard disagreements,
2 on configuration or usage errors. Reports are deterministic: identical
configurations produce byte-identical JSON apart from the ``timing`` block.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import DEFAULT_BOX_HALF_WIDTH
from .library import FUNCTION_IDS, get_function
from .minty import iar_check, minty_subdifferential, minty_subderivative
from .polar import polar_contains, polar_membership_via_iar, polar_of_sample
from .subderivative import LiminfScheme, clarke_directional, lower_dini
from .subdifferential import (
    clarke_subdiff_contains,
    convex_subdiff_contains,
    sample_subdiff_graph,
)
from .suites import SUITE_NAMES, SuiteParams, run_suites


class ConfigError(Exception):
    """Bad configuration or usage; maps to exit status 2."""


@dataclass
class RunConfig:
    """Declarative run description: function ids, suite selection, grid and
    scheme parameters, tolerance overrides, and output destinations."""

    functions: list[str] = field(default_factory=lambda: list(FUNCTION_IDS))
    suites: list[str] = field(default_factory=lambda: ["all"])
    resolution: int = 65
    resolution_2d: int = 17
    probe_factor: int = 2
    t_resolution: int = 64
    band: float = 1e-3
    polar_band: float = 1e-2
    tol: float = 1e-6
    cdd_tol: float = 1e-3
    covector_half_width: float = DEFAULT_BOX_HALF_WIDTH
    covector_resolution: int = 41
    thm3_candidates: int = 15
    thm3_candidates_2d: int = 5
    t0: float = 0.1
    ratio: float = 0.7
    steps: int = 40
    tail_fraction: float = 0.25
    out: str | None = None
    format: str = "json"
    threads: int = 1

    def validate(self) -> None:
        for fid in self.functions:
            if fid not in FUNCTION_IDS:
                raise ConfigError(f"unknown function id {fid!r}; known: {', '.join(FUNCTION_IDS)}")
        for s in self.suites:
            if s != "all" and s not in SUITE_NAMES:
                raise ConfigError(f"unknown suite {s!r}; choose from {SUITE_NAMES} or 'all'")
        if self.resolution < 2 or self.resolution_2d < 2:
            raise ConfigError("resolutions must be >= 2")
        if self.tol <= 0 or self.band <= 0 or self.cdd_tol <= 0 or self.polar_band <= 0:
            raise ConfigError("tolerances must be positive")
        if self.format not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.format!r}")

    def scheme(self) -> LiminfScheme:
        try:
            return LiminfScheme(
                t0=self.t0, ratio=self.ratio, steps=self.steps, tail_fraction=self.tail_fraction
            )
        except ValueError as exc:
            raise ConfigError(f"bad scheme parameters: {exc}") from exc

    def suite_params(self) -> SuiteParams:
        return SuiteParams(
            resolution=self.resolution,
            resolution_2d=self.resolution_2d,
            probe_factor=self.probe_factor,
            t_resolution=self.t_resolution,
            band=self.band,
            polar_band=self.polar_band,
            tol=self.tol,
            cdd_tol=self.cdd_tol,
            covector_half_width=self.covector_half_width,
            covector_resolution=self.covector_resolution,
            thm3_candidates=self.thm3_candidates,
            thm3_candidates_2d=self.thm3_candidates_2d,
            scheme=self.scheme(),
        )

    def echo(self) -> dict:
        d = asdict(self)
        d["functions"] = sorted(self.functions)
        return d


_LIST_KEYS = {"functions", "suites"}


def _coerce(key: str, raw: str, target_type: type):
    if key in _LIST_KEYS:
        return [p.strip() for p in raw.replace(",", " ").split() if p.strip()]
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Build a RunConfig from an INI-style file plus flag overrides."""
    cfg = RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file {path!r} not found or unreadable")
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in known:
                    raise ConfigError(f"unknown config key {key!r} in section [{section}]")
                current = getattr(cfg, key)
                target = type(current) if current is not None else str
                if key in _LIST_KEYS:
                    target = list
                setattr(cfg, key, _coerce(key, raw, target))
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

def report_json(report: dict, include_timing: bool = True) -> str:
    payload = dict(report)
    if not include_timing:
        payload.pop("timing", None)
    return json.dumps(payload, sort_keys=True, indent=2)


def _suite_rows(report: dict) -> list[list]:
    rows: list[list] = [["suite", "function", "metric", "value"]]
    for suite in sorted(report["suites"]):
        sec = report["suites"][suite]
        for fid in sorted(sec.get("functions", {})):
            fn_sec = sec["functions"][fid]
            for key in sorted(fn_sec):
                val = fn_sec[key]
                if isinstance(val, (int, float, bool, str)):
                    rows.append([suite, fid, key, val])
    return rows


def write_reports(report: dict, out_dir: str, fmt: str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    jpath = out / "report.json"
    jpath.write_text(report_json(report) + "\n", encoding="utf-8")
    written.append(jpath)
    if fmt == "csv":
        cpath = out / "report.csv"
        with cpath.open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(_suite_rows(report))
        written.append(cpath)
    return written


def render_text(report: dict) -> str:
    lines = []
    for suite in sorted(report["suites"]):
        sec = report["suites"][suite]
        lines.append(f"[{suite}] hard disagreements: {sec['hard_count']}")
        for fid in sorted(sec.get("functions", {})):
            fn_sec = sec["functions"][fid]
            bits = []
            for key in ("agree", "indeterminate", "hard", "pass", "fail", "checks",
                        "monotone", "absorbing", "candidates"):
                if key in fn_sec:
                    bits.append(f"{key}={fn_sec[key]}")
            lines.append(f"  {fid:13s} " + " ".join(bits))
    lines.append(f"total hard disagreements: {report['hard_total']}")
    if report.get("truncation_flags"):
        lines.append("covector truncation flagged for: " + ", ".join(report["truncation_flags"]))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def cmd_suite(cfg: RunConfig) -> int:
    t_start = time.time()
    want_rows = bool(cfg.out) and cfg.format == "csv"
    result = run_suites(
        cfg.functions,
        cfg.suites,
        cfg.suite_params(),
        max_workers=cfg.threads,
        collect_rows=want_rows,
    )
    report = {
        "config": cfg.echo(),
        "suites": result["suites"],
        "hard_total": result["hard_total"],
        "truncation_flags": result["truncation_flags"],
        "timing": {"seconds_total": round(time.time() - t_start, 3)},
    }
    print(render_text(report))
    if cfg.out:
        for path in write_reports(report, cfg.out, cfg.format):
            print(f"wrote {path}")
        for fid, (header, rows) in result.get("equivalence_rows", {}).items():
            rpath = Path(cfg.out) / f"equivalence_{fid}.csv"
            with rpath.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
            print(f"wrote {rpath}")
    return 0 if report["hard_total"] == 0 else 1


def _parse_point(raw: str, dim: int) -> np.ndarray:
    try:
        vals = [float(p) for p in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse point {raw!r}: {exc}") from exc
    if len(vals) != dim:
        raise ConfigError(f"point {raw!r} has {len(vals)} coordinates, expected {dim}")
    return np.asarray(vals)


def cmd_explain(cfg: RunConfig, function_id: str, x_raw: str, xstar_raw: str | None) -> int:
    f = get_function(function_id)
    params = cfg.suite_params()
    region = f.default_region
    x = _parse_point(x_raw, f.dim)
    print(f"function {function_id} on {region.describe()}")
    fx = f.value(x)
    print(f"f({x.tolist()}) = {fx}")

    if math.isfinite(fx):
        eye = np.eye(f.dim)
        for d in np.vstack([eye, -eye]):
            sd = lower_dini(f, x, d, params.scheme)
            up = clarke_directional(f, x, d, params.scheme)
            print(
                f"  direction {d.tolist()}: subderivative {float(sd.value):.6g} "
                f"(bracket {float(sd.bracket[0]):.6g}..{float(sd.bracket[1]):.6g}), "
                f"generalized {float(up.value):.6g}"
            )

    if xstar_raw is None:
        res = params.grid_resolution(f.dim)
        minty_d = minty_subderivative(f, x, region, resolution=res, scheme=params.scheme)
        rays = iar_check(f, x, region, resolution=res, t_resolution=params.t_resolution)
        graph = sample_subdiff_graph(f, region, res, source="exact" if f.exact_subdifferential else "clarke-numeric")
        minty_g = minty_subdifferential(f, x, region, graph)
        print(f"  minty (subderivative): solution={minty_d.solution} residual={float(minty_d.residual):.6g} witness={minty_d.witness}")
        print(f"  minty (subdifferential): solution={minty_g.solution} residual={float(minty_g.residual):.6g} witness={minty_g.witness}")
        print(f"  increase-along-rays: solution={rays.solution} residual={float(rays.residual):.6g} witness={rays.witness}")
        return 0

    xstar = _parse_point(xstar_raw, f.dim)
    if math.isfinite(fx):
        conv = convex_subdiff_contains(f, x, xstar, resolution=params.grid_resolution(f.dim), tol=params.tol)
        print(f"  convex membership: contains={conv.contains} residual={conv.residual:.6g} witness={None if conv.witness is None else conv.witness.tolist()}")
        clk = clarke_subdiff_contains(f, x, xstar, scheme=params.scheme, tol=params.tol)
        print(f"  generalized membership: contains={clk.contains} residual={clk.residual:.6g} witness={None if clk.witness is None else clk.witness.tolist()}")
    res = params.grid_resolution(f.dim)
    graph = sample_subdiff_graph(f, region, params.probe_factor * (res - 1) + 1,
                                 source="exact" if f.exact_subdifferential else "clarke-numeric")
    pv = polar_contains(graph, x, xstar, tol=params.tol)
    print(f"  polar (graph route): related={pv.related} min_product={pv.min_product:.6g} witness={pv.witness}")
    iv = polar_membership_via_iar(f, x, xstar, region, probe_resolution=res, tol=params.tol)
    print(f"  polar (rays route): member={iv.ok} residual={iv.residual:.6g} witness={iv.witness}")
    return 0


def cmd_graph(cfg: RunConfig, function_id: str, source: str) -> int:
    f = get_function(function_id)
    params = cfg.suite_params()
    res = params.grid_resolution(f.dim)
    if source == "auto":
        source = "exact" if f.exact_subdifferential is not None else "clarke-numeric"
    graph = sample_subdiff_graph(
        f,
        f.default_region,
        res,
        source=source,
        covector_half_width=params.covector_half_width,
        covector_resolution=params.covector_resolution,
        scheme=params.scheme,
    )
    writer = csv.writer(sys.stdout)
    writer.writerow(graph.csv_header())
    writer.writerows(graph.to_rows())
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        cpath = out / f"graph_{function_id}.csv"
        with cpath.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(graph.csv_header())
            w.writerows(graph.to_rows())
        (out / f"graph_{function_id}.meta.json").write_text(
            json.dumps(dict(graph.meta), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {cpath}", file=sys.stderr)
    return 0


def cmd_polar(cfg: RunConfig, function_id: str) -> int:
    from .core import GraphSample

    f = get_function(function_id)
    params = cfg.suite_params()
    res = params.grid_resolution(f.dim)
    graph = sample_subdiff_graph(
        f, f.default_region, res,
        source="exact" if f.exact_subdifferential is not None else "clarke-numeric",
        scheme=params.scheme,
    )
    xs = f.default_region.sample(params.thm3_candidates if f.dim == 1 else params.thm3_candidates_2d)
    if f.dim == 1:
        cov = np.linspace(-4.0, 4.0, params.thm3_candidates)[:, None]
    else:
        axis = np.linspace(-2.0, 2.0, params.thm3_candidates_2d)
        mesh = np.meshgrid(*([axis] * f.dim), indexing="ij")
        cov = np.stack([m.ravel() for m in mesh], axis=-1)
    pts = np.repeat(xs, cov.shape[0], axis=0)
    cvs = np.tile(cov, (xs.shape[0], 1))
    candidates = GraphSample(pts, cvs)
    related = polar_of_sample(graph, candidates, tol=params.tol)
    writer = csv.writer(sys.stdout)
    writer.writerow(related.csv_header())
    writer.writerows(related.to_rows())
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varpolar",
        description="Numerical verification of subderivative, subdifferential, "
        "variational-inequality, and monotone-polar identities on a curated "
        "test-function library.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="INI-style config file")
        p.add_argument("--function", action="append", dest="functions",
                       metavar="ID", help="restrict to this function id (repeatable)")
        p.add_argument("--resolution", type=int, default=None, help="1-D grid resolution")
        p.add_argument("--tol", type=float, default=None, help="comparison tolerance")
        p.add_argument("--out", default=None, help="output directory for reports")
        p.add_argument("--format", choices=("json", "csv", "text"), default=None)

    p_suite = sub.add_parser("suite", help="run configured verification suites")
    add_common(p_suite)
    p_suite.add_argument("--suite", action="append", dest="suites",
                         choices=SUITE_NAMES + ("all",), help="suite to run (repeatable)")

    p_explain = sub.add_parser("explain", help="single-point drill-down across all routes")
    add_common(p_explain)
    p_explain.add_argument("--x", required=True, help="query point, comma-separated coordinates")
    p_explain.add_argument("--xstar", default=None, help="optional covector for membership/polar routes")

    p_graph = sub.add_parser("graph", help="dump a sampled subdifferential graph as CSV")
    add_common(p_graph)
    p_graph.add_argument("--source", choices=("exact", "clarke-numeric", "auto"), default="auto")

    p_polar = sub.add_parser("polar", help="dump monotonically related candidate pairs as CSV")
    add_common(p_polar)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "functions": args.functions,
        "resolution": args.resolution,
        "tol": args.tol,
        "out": args.out,
        "format": args.format,
    }
    if getattr(args, "suites", None):
        overrides["suites"] = args.suites
    cfg = load_config(args.config, overrides)
    env_threads = os.environ.get("VARPOLAR_THREADS")
    if env_threads:
        try:
            cfg.threads = max(1, int(env_threads))
        except ValueError as exc:
            raise ConfigError(f"bad VARPOLAR_THREADS value {env_threads!r}") from exc
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.verb == "suite":
            return cmd_suite(cfg)
        if args.verb == "explain":
            if len(cfg.functions) != 1:
                raise ConfigError("explain needs exactly one --function")
            return cmd_explain(cfg, cfg.functions[0], args.x, args.xstar)
        if args.verb == "graph":
            if len(cfg.functions) != 1:
                raise ConfigError("graph needs exactly one --function")
            return cmd_graph(cfg, cfg.functions[0], args.source)
        if args.verb == "polar":
            if len(cfg.functions) != 1:
                raise ConfigError("polar needs exactly one --function")
            return cmd_polar(cfg, cfg.functions[0])
        raise ConfigError(f"unknown verb {args.verb!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
