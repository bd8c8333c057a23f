"""Membership tests, graph sampling, the enlargement filter, and the
subderivative/enlargement inequality, plus the calculus-level invariants:
the inclusion chain, the tilt rule, and the separation smoke test."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varpolar import (
    DomainError,
    EnlargementParams,
    Region,
    cdd_inequality_check,
    clarke_subdiff_contains,
    convex_subdiff_contains,
    epsilon_enlargement,
    sample_subdiff_graph,
)
from varpolar.library import get_function, test_library as library_oracles


# -- convex membership ---------------------------------------------------------

def test_abs_contains_interior_subgradient():
    v = convex_subdiff_contains(get_function("abs"), 0.0, 0.5)
    assert v.contains and v.residual <= 1e-6


def test_abs_rejects_steep_covector():
    # brute maximization of 2y - |y| over the probe grid peaks at the box edge
    f = get_function("abs")
    v = convex_subdiff_contains(f, 0.0, 2.0)
    assert not v.contains
    grid = Region.full(1).sample(65)[:, 0]
    brute = max(2.0 * y - abs(y) for y in grid)
    assert v.residual == pytest.approx(brute)
    assert v.residual >= 1.0  # e.g. y = 1 already violates by 1


def test_square_gradient_is_member():
    assert convex_subdiff_contains(get_function("square"), 1.0, 2.0).contains


def test_convex_membership_needs_finite_value():
    with pytest.raises(DomainError):
        convex_subdiff_contains(get_function("ind_origin"), 1.0, 0.0)


# -- generalized membership ------------------------------------------------------

def test_neg_abs_generalized_interval_at_kink():
    f = get_function("neg_abs")
    assert clarke_subdiff_contains(f, 0.0, 1.0).contains
    v = clarke_subdiff_contains(f, 0.0, 2.0)
    assert not v.contains
    assert v.witness is not None and v.witness[0] == 1.0  # violated along d = +1
    assert v.residual == pytest.approx(1.0, abs=1e-3)  # <2,1> - 1


def test_square_generalized_membership_smooth():
    assert clarke_subdiff_contains(get_function("square"), 0.0, 0.0).contains


def test_generalized_membership_2d():
    f = get_function("norm2d")
    assert clarke_subdiff_contains(f, [0.0, 0.0], [0.6, 0.6]).contains
    assert not clarke_subdiff_contains(f, [0.0, 0.0], [1.2, 0.0]).contains


# -- graph sampling ---------------------------------------------------------------

def test_exact_graph_of_abs_has_kink_fan():
    g = sample_subdiff_graph(get_function("abs"), Region.interval(-1, 1), 3, source="exact")
    pairs = {(p[0], c[0]) for p, c in g.pairs()}
    assert {(-1.0, -1.0), (1.0, 1.0), (0.0, -1.0), (0.0, 0.0), (0.0, 1.0)} <= pairs


def test_exact_graph_of_square_is_gradient_graph():
    g = sample_subdiff_graph(get_function("square"), Region.interval(-1, 1), 3, source="exact")
    pairs = {(p[0], c[0]) for p, c in g.pairs()}
    assert pairs == {(-1.0, -2.0), (0.0, 0.0), (1.0, 2.0)}


def test_numeric_graph_of_neg_abs_matches_sign_flip():
    g = sample_subdiff_graph(
        get_function("neg_abs"), Region.interval(-1, 1), 3, source="clarke-numeric"
    )
    pairs = {(p[0], c[0]) for p, c in g.pairs()}
    assert (1.0, -1.0) in pairs and (-1.0, 1.0) in pairs
    fan = sorted(c for x, c in pairs if x == 0.0)
    assert fan[0] == -1.0 and fan[-1] == 1.0 and len(fan) >= 3
    assert all(-1.0 <= c <= 1.0 for c in fan)


def test_exact_graph_requires_oracle():
    with pytest.raises(ValueError):
        sample_subdiff_graph(get_function("neg_abs"), Region.interval(-1, 1), 3, source="exact")


def test_unbounded_subdifferential_sets_truncation_flag():
    g = sample_subdiff_graph(
        get_function("ind_halfline"), Region.interval(-1, 1), 5, source="exact"
    )
    assert g.meta["truncated"] is True
    assert all(abs(c[0]) <= 10.0 for _, c in g.pairs())


# -- enlargement -------------------------------------------------------------------

def _abs_exact_graph(resolution=9):
    return sample_subdiff_graph(
        get_function("abs"), Region.interval(-1, 1), resolution, source="exact"
    )


def test_enlargement_keeps_documented_pairs():
    f = get_function("abs")
    g = _abs_exact_graph()
    kept = epsilon_enlargement(g, f, 0.0, EnlargementParams(0.5))
    pairs = {(p[0], c[0]) for p, c in kept.pairs()}
    assert (0.25, 1.0) in pairs
    assert (1.0, 1.0) not in pairs
    assert all(abs(p[0]) <= 0.5 for p, _ in kept.pairs())
    assert all(c[0] * p[0] <= 0.5 for p, c in kept.pairs())


def test_enlargement_is_subset():
    f = get_function("abs")
    g = _abs_exact_graph()
    kept = epsilon_enlargement(g, f, 0.0, EnlargementParams(0.3))
    all_pairs = {(p[0], c[0]) for p, c in g.pairs()}
    assert {(p[0], c[0]) for p, c in kept.pairs()} <= all_pairs


def test_enlargement_tiny_epsilon_pins_the_point():
    f = get_function("square")
    g = sample_subdiff_graph(f, Region.interval(-1, 1), 513, source="exact")
    kept = epsilon_enlargement(g, f, 0.0, EnlargementParams(1e-9))
    assert len(kept) >= 1
    assert all(abs(p[0]) <= 1e-9 for p, _ in kept.pairs())
    assert all(abs(c[0]) <= 2e-9 for _, c in kept.pairs())


@settings(max_examples=30, deadline=None)
@given(
    e1=st.floats(min_value=1e-4, max_value=1.0),
    e2=st.floats(min_value=1e-4, max_value=1.0),
)
def test_enlargement_monotone_in_epsilon(e1, e2):
    lo, hi = sorted((e1, e2))
    f = get_function("abs")
    g = _abs_exact_graph()
    small = epsilon_enlargement(g, f, 0.0, EnlargementParams(lo))
    large = epsilon_enlargement(g, f, 0.0, EnlargementParams(hi))
    small_pairs = {(p[0], c[0]) for p, c in small.pairs()}
    large_pairs = {(p[0], c[0]) for p, c in large.pairs()}
    assert small_pairs <= large_pairs


def test_pair_at_the_base_point_survives_every_epsilon():
    f = get_function("abs")
    g = _abs_exact_graph()
    for eps in (1.0, 1e-3, 1e-9):
        kept = epsilon_enlargement(g, f, 0.0, EnlargementParams(eps))
        assert any(p[0] == 0.0 for p, _ in kept.pairs())


# -- subderivative / enlargement inequality -------------------------------------

def test_cdd_smooth_case():
    v = cdd_inequality_check(get_function("square"), 0.0, 1.0)
    assert v.ok
    assert v.details["lhs"] == pytest.approx(0.0, abs=1e-4)
    assert v.details["rhs"] == pytest.approx(0.0, abs=1e-2)


def test_cdd_kink_keeps_the_surviving_pair():
    v = cdd_inequality_check(get_function("abs"), 0.0, 1.0)
    assert v.ok
    assert v.details["lhs"] == pytest.approx(1.0, abs=1e-6)
    assert v.details["rhs"] == pytest.approx(1.0, abs=1e-6)


def test_cdd_unbounded_subdifferential_passes_under_truncation():
    v = cdd_inequality_check(get_function("ind_origin"), 0.0, 1.0)
    assert v.ok
    assert "covector_truncated" in v.flags
    assert v.details["lhs"] == math.inf
    assert v.details["rhs"] == pytest.approx(10.0)  # the truncated grid maximum


def test_cdd_passes_across_library_spot_checks():
    for fid in ("neg_abs", "twowell", "maxzero", "ind_halfline"):
        f = get_function(fid)
        for x in (0.0, 0.5):
            if not math.isfinite(f.value([x])):
                continue
            for d in (1.0, -1.0):
                assert cdd_inequality_check(f, x, d).ok, (fid, x, d)


# -- inclusion chain and tilt rule -------------------------------------------------

def test_convex_membership_implies_generalized_membership():
    covectors = np.linspace(-2.0, 2.0, 9)
    for f in library_oracles():
        if f.dim != 1:
            continue
        for x in (0.0, 0.5, 1.0):
            if not math.isfinite(f.value([x])):
                continue
            for c in covectors:
                cv = convex_subdiff_contains(f, [x], [c], probe=f.default_region)
                if cv.contains:
                    gv = clarke_subdiff_contains(f, [x], [c], tol=1e-6 + 1e-6)
                    assert gv.contains, (f.name, x, c, gv.residual)


def test_tilt_rule_at_membership_level():
    # membership in the subdifferential of f - s at covector c - s must match
    # membership in the subdifferential of f at c
    for fid in ("abs", "square", "maxzero"):
        f = get_function(fid)
        for s in (-1.0, 0.5):
            g = f.shifted([s])
            for x in (0.0, 0.5):
                for c in (-1.5, 0.0, 0.5, 1.0, 2.0):
                    direct = convex_subdiff_contains(f, [x], [c], probe=f.default_region)
                    tilted = convex_subdiff_contains(g, [x], [c - s], probe=f.default_region)
                    assert direct.contains == tilted.contains, (fid, s, x, c)
                    assert direct.residual == pytest.approx(tilted.residual, abs=1e-9)


def test_tilt_rule_for_generalized_membership():
    f = get_function("neg_abs")
    for s in (-0.5, 1.0):
        g = f.shifted([s])
        for c in (-1.0, 0.0, 1.0, 2.0):
            direct = clarke_subdiff_contains(f, [0.0], [c])
            tilted = clarke_subdiff_contains(g, [0.0], [c - s])
            assert direct.contains == tilted.contains, (s, c)


# -- separation smoke test -----------------------------------------------------------

def _interior_grid_local_minima(h, region, resolution):
    """Interior grid points that remain local minima on a 100x refinement.

    Plain neighbor comparison misreports smooth minima that fall between grid
    points (two equal-valued neighbors of the true dip both look minimal);
    the refinement pass rejects those.
    """
    grid = region.sample(resolution)[:, 0]
    step = grid[1] - grid[0]
    vals = np.array([h(x) for x in grid])
    out = []
    for i in range(1, len(grid) - 1):
        if not (
            math.isfinite(vals[i])
            and vals[i] <= vals[i - 1] + 1e-12
            and vals[i] <= vals[i + 1] + 1e-12
        ):
            continue
        fine = np.array([h(x) for x in np.linspace(grid[i] - step, grid[i] + step, 201)])
        fine = fine[np.isfinite(fine)]
        if vals[i] <= fine.min() + 1e-12:
            out.append(grid[i])
    return out


def test_separation_principle_smoke():
    # for f + phi with a grid-verified interior local minimum at xbar there
    # must exist opposite subgradients from the two subdifferentials
    affine = [(0.5, 0.0), (-0.5, 0.0), (0.25, 1.0)]
    anchors = [0.0, 1.0]
    checked = 0
    for f in library_oracles():
        if f.dim != 1:
            continue
        smooth_phis = [("affine", a, b) for a, b in affine]
        norm_phis = [("dist", a, None) for a in anchors]
        for kind, a, b in smooth_phis + norm_phis:
            if kind == "affine":
                phi = lambda x, a=a, b=b: a * x + b
                phi_subdiff = lambda x, a=a: (a, a)
            else:
                phi = lambda x, a=a: abs(x - a)
                phi_subdiff = lambda x, a=a: (
                    (-1.0, 1.0) if x == a else (math.copysign(1.0, x - a),) * 2
                )
            total = lambda x, phi=phi: f.value([x]) + phi(x)
            for xbar in _interior_grid_local_minima(total, f.default_region, 17):
                lo, hi = phi_subdiff(xbar)
                found = False
                for s in np.linspace(lo, hi, 41):
                    if clarke_subdiff_contains(f, [xbar], [-s]).contains:
                        found = True
                        break
                assert found, (f.name, kind, a, b, xbar)
                checked += 1
    assert checked >= 10
