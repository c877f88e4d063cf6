import json
from fractions import Fraction

import numpy as np
import pytest

from ftsens.continua import (build_cw_unstable, check_backward_shrink, check_growth, controlled_by,
                             flat_box, fu_stage, identify_shift_k, never_increases,
                             product_fu_slice_check, shift_fu_closed_form, shift_limit,
                             stable_segment_box, stage_agreement, verify_fu_limit)
from ftsens.errors import NoConvergence, RadiusWindowEmpty
from ftsens.geometry import HALF, BoxContinuum, Dyadic, HilbertPoint, box_contains_point, box_diam
from ftsens.systems import (CircleCoord, CircleMap, ProductSystem, ShiftSystem, SlowedFlow, TorusPoint,
                            cat_map, random_hilbert_point)

S = ShiftSystem()
EPS = S.epsilon
X = HilbertPoint.constant()


def test_closed_form_zeroth_coordinate():
    C = shift_fu_closed_form(X, 0, EPS)
    assert C.interval(0) == (Dyadic(3, -3), Dyadic(5, -3))


def test_closed_form_diameter_and_limit():
    for k in range(6):
        C = shift_fu_closed_form(X, k, EPS)
        assert box_diam(C) == EPS.ldexp(1 - k)
    # radii shrink to zero: the far parameter is close to the point itself
    far = shift_fu_closed_form(X, 40, EPS)
    assert box_diam(far) < Dyadic(1, -40)
    assert box_contains_point(far, X)


@pytest.mark.parametrize("j", [1, 4, 9])
def test_stage_agrees_inside_window(j):
    x = random_hilbert_point(np.random.default_rng(j))
    assert stage_agreement(x, 2, EPS, j) == []
    assert 0 < verify_fu_limit(x, 2, EPS, j) <= Dyadic(1, 1 - j)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_shift_record_converges_in_window(a):
    g = EPS.ldexp(-a)
    kg, mg = S.k_gamma(g), S.m_gamma(g)
    rec = build_cw_unstable(S, X, g, mg, range(12))
    assert rec.converged and rec.hausdorff_residual < Dyadic(1, -20)
    L, d = shift_limit(rec, EPS)
    k, _ = identify_shift_k(rec.final, X, EPS, range(30))
    assert kg + 1 <= k <= kg + mg
    assert d < Dyadic(1, -20)
    assert json.loads(rec.to_json())["converged"] is True


def test_single_stage_not_converged():
    rec = build_cw_unstable(S, X, EPS.ldexp(-2), 3, [4])
    assert len(rec.stages) == 1 and not rec.converged
    with pytest.raises(NoConvergence):
        build_cw_unstable(S, X, EPS.ldexp(-2), 3, [4], strict=True)
    with pytest.raises(NoConvergence):
        shift_limit(rec, EPS)


def test_stages_must_increase():
    with pytest.raises(ValueError):
        build_cw_unstable(S, X, EPS.ldexp(-2), 3, [3, 2])


def test_growth_on_closed_form():
    g = EPS.ldexp(-2)
    for k in (2, 3):
        rep = check_growth(S, shift_fu_closed_form(X, k, EPS), EPS, m_gamma=S.m_gamma(g))
        assert rep.ok
        # diam sigma^n(C) = 2^(n-k+1) eps first reaches eps at n = k-1
        assert rep.ell == k - 1 <= 2 * S.m_gamma(g)


def test_growth_immediate_for_large_set():
    assert check_growth(S, shift_fu_closed_form(X, 0, EPS), EPS, m_gamma=2).ell == 0


def test_backward_shrink_closed_form_halves():
    C = shift_fu_closed_form(X, 3, EPS)
    rep = check_backward_shrink(S, C, [EPS.ldexp(-a) for a in range(5)])
    assert all(r.ok for r in rep)
    diams = rep[0].diams
    assert all(b * 2 == a for a, b in zip(diams, diams[1:]))


def test_backward_shrink_trivial_alpha():
    C = shift_fu_closed_form(X, 3, EPS)
    rep = check_backward_shrink(S, C, [box_diam(C)], m_of=lambda a: -1)
    assert rep[0].start == 0 and rep[0].ok


def test_flat_box_fails_backward_shrink():
    rep = check_backward_shrink(S, flat_box(X, EPS), [EPS.ldexp(-2)])
    assert not rep[0].ok


def test_stable_segment_never_increases():
    assert never_increases(S, stable_segment_box(EPS), EPS)
    assert not never_increases(S, shift_fu_closed_form(X, 3, EPS), EPS)


def test_ball_controlled_by_its_unstable_box():
    # the stage-0 approximant is the ball itself
    C = fu_stage(X, 3, EPS, 0)
    assert controlled_by(S, X, EPS.ldexp(-3), C, EPS)


def test_product_slice_check():
    P = ProductSystem(cat_map(), CircleMap(None))
    anchor = (TorusPoint((0.0, 0.0)), CircleCoord(0.3))
    rec = build_cw_unstable(P, anchor, 0.02, 8, range(30))
    assert rec.converged
    assert product_fu_slice_check(P, rec, tol=1e-9).ok


def test_product_slice_negative_control():
    P = ProductSystem(cat_map(), CircleMap(None))
    anchor = (TorusPoint((0.0, 0.0)), CircleCoord(0.3))
    rec = build_cw_unstable(P, anchor, 0.02, 8, range(30))
    cloud = np.column_stack([rec.final.base.sample(8), np.full(64, 0.3 + 1e-2)])
    rec.stages[-1].image = cloud
    assert not product_fu_slice_check(P, rec, tol=1e-9).ok


def test_product_single_point_passes():
    P = ProductSystem(cat_map(), CircleMap(None))
    anchor = (TorusPoint((0.0, 0.0)), CircleCoord(0.3))
    rec = build_cw_unstable(P, anchor, 0.02, 8, range(30))
    rec.stages[-1].image = np.array([[0.0, 0.0, 0.3]])
    assert product_fu_slice_check(P, rec).ok


def test_slice_check_needs_identity():
    P = ProductSystem(cat_map(), CircleMap())
    with pytest.raises(ValueError):
        product_fu_slice_check(P, None)


@pytest.mark.slow
def test_flow_stable_orbit_window_empty():
    flow = SlowedFlow(h=0.05, samples=128, refine_gap=4e-3)
    x = flow.stable_orbit_point(0.1)
    with pytest.raises(RadiusWindowEmpty):
        build_cw_unstable(flow, x, 0.025, 2, range(0, 8))


def test_regular_windows_start_at_first_growth():
    # k = 5 first reaches eps at n = 4, so the window [1, 3] is empty
    C = shift_fu_closed_form(X, 5, EPS)
    assert check_growth(S, C, EPS, m_gamma=4).ok
    assert check_growth(S, C, EPS, m_gamma=4, start=1).regular_failures == [1]


def test_product_slice_rational_anchor():
    P = ProductSystem(cat_map(), CircleMap(None))
    anchor = (TorusPoint((Fraction(21, 100), Fraction(47, 100))), CircleCoord(Fraction(3, 10)))
    rec = build_cw_unstable(P, anchor, 0.02, 8, range(30))
    assert rec.converged
    assert product_fu_slice_check(P, rec, tol=1e-9).ok


def test_product_float_anchor_loses_precision():
    # the round trip through 29 preimages amplifies float rounding past the tolerance
    P = ProductSystem(cat_map(), CircleMap(None))
    anchor = (TorusPoint((0.21, 0.47)), CircleCoord(0.3))
    assert not build_cw_unstable(P, anchor, 0.02, 8, range(30)).converged
