from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ftsens.geometry import (HALF, BoxContinuum, Dyadic, HilbertPoint, RadiusLaw, box_contains_point,
                             box_diam, box_hull, box_subset, boxes_intersect, cloud_hausdorff,
                             hausdorff_box, hilbert_dist, torus_dist, widest_coordinate)
from ftsens.continua import fu_stage, shift_fu_closed_form, verify_fu_limit

EPS = Dyadic(1, -3)

dyadics = st.builds(lambda m, e: Dyadic(m, -e), st.integers(-2 ** 40, 2 ** 40), st.integers(0, 40))
unit = st.builds(lambda m, bits: Dyadic(m % (2 ** bits + 1), -bits),
                 st.integers(0, 2 ** 20), st.integers(0, 16))
points = st.builds(lambda d, f: HilbertPoint(d, f),
                   st.dictionaries(st.integers(-8, 8), unit, max_size=6), unit)


# dyadic arithmetic ------------------------------------------------------------

@given(dyadics, dyadics)
def test_dyadic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)


@given(dyadics, st.integers(-30, 30))
def test_ldexp_scales_by_power_of_two(a, k):
    assert a.ldexp(k).to_fraction() == a.to_fraction() * Fraction(2) ** k


def test_non_dyadic_rejected():
    with pytest.raises(ValueError):
        Dyadic.coerce(Fraction(1, 3))
    assert Dyadic.coerce("3/8") == Fraction(3, 8)


# metric ---------------------------------------------------------------------

def test_distance_identity():
    x = HilbertPoint({0: Dyadic(3, -3), 5: Dyadic(1, -4)})
    assert hilbert_dist(x, x) == 0


def test_single_coordinate_difference():
    x = HilbertPoint({}, 0)
    for i0 in (-3, 0, 2, 7):
        y = x.with_coords({i0: Fraction(1, 4)})
        assert hilbert_dist(x, y) == Fraction(1, 4) / 2 ** abs(i0)


@given(points, points)
def test_distance_matches_scan(x, y):
    assert hilbert_dist(x, y).to_fraction() == oracles.dist(oracles.from_point(x), oracles.from_point(y))


@given(points, points, points)
def test_triangle_inequality(x, y, z):
    assert hilbert_dist(x, z) <= hilbert_dist(x, y) + hilbert_dist(y, z)
    assert hilbert_dist(x, y) == hilbert_dist(y, x)


# box diameters ----------------------------------------------------------------

def test_singleton_box_has_zero_diameter():
    assert box_diam(BoxContinuum.point(HilbertPoint({1: Dyadic(1, -2)}))) == 0


@pytest.mark.parametrize("n", [3, 5, 8])
def test_ball_image_closed_form(n):
    x = HilbertPoint.constant()
    r = EPS.ldexp(-n)
    for j in range(n + 3):
        assert box_diam(BoxContinuum.ball_image(x, r, j)) == Fraction(2) ** (j - n - 2)


@given(points, st.integers(2, 12), st.integers(0, 14))
def test_ball_image_diameter_matches_oracle(x, n, j):
    r = EPS.ldexp(-n)
    got = box_diam(BoxContinuum.ball_image(x, r, j)).to_fraction()
    assert got == oracles.ball_image_diam(oracles.from_point(x), r.to_fraction(), j)
    if j <= n + 2:
        assert EPS.ldexp(j - n) <= got <= EPS.ldexp(j - n + 1)


@given(points, st.integers(0, 8), st.integers(-4, 6))
def test_closed_form_box_diameter(x, k, shift):
    C = shift_fu_closed_form(x, k, EPS).shifted(shift)
    assert box_diam(C).to_fraction() == oracles.fu_box_diam(oracles.from_point(x), k, EPS.to_fraction(), shift)


def test_widest_coordinate_of_flat_window():
    C = BoxContinuum({0: (0, Fraction(1, 8)), 2: (0, 1)}, 0)
    assert widest_coordinate(C) == 2


# hausdorff, containment, hull -----------------------------------------------------

def test_hausdorff_identity_and_one_coordinate():
    x = HilbertPoint.constant()
    A = BoxContinuum({0: (0, HALF)}, HALF)
    B = BoxContinuum({0: (Fraction(1, 4), Fraction(3, 4))}, HALF)
    assert hausdorff_box(A, A) == 0
    assert hausdorff_box(A, B) == Fraction(1, 4)
    assert hausdorff_box(B, A) == Fraction(1, 4)
    assert box_contains_point(A, x)


@given(points, st.integers(0, 6), st.integers(0, 6))
def test_hausdorff_symmetric(x, k1, k2):
    A, B = shift_fu_closed_form(x, k1, EPS), shift_fu_closed_form(x, k2, EPS)
    assert hausdorff_box(A, B) == hausdorff_box(B, A)
    if k1 <= k2:
        assert box_subset(B, A)
        assert boxes_intersect(A, B)


@pytest.mark.parametrize("j", [1, 3, 6, 10])
def test_stage_residual_bounded_by_tail_weight(j):
    x = HilbertPoint({0: Dyadic(3, -3), -2: Dyadic(1, -5)})
    res = verify_fu_limit(x, 2, EPS, j)
    assert 0 <= res <= Dyadic(1, -j + 1)


def test_stage_zero_residual_is_plain_hausdorff():
    x = HilbertPoint.constant()
    expected = hausdorff_box(fu_stage(x, 2, EPS, 0), shift_fu_closed_form(x, 2, EPS))
    assert verify_fu_limit(x, 2, EPS, 0) == expected


def test_hull_contains_members():
    x = HilbertPoint.constant()
    A = shift_fu_closed_form(x.with_coords({0: Dyadic(1, -2)}), 3, EPS)
    B = shift_fu_closed_form(x.with_coords({0: Dyadic(3, -2)}), 3, EPS)
    H = box_hull([A, B])
    assert box_subset(A, H) and box_subset(B, H)
    assert box_diam(H) >= max(box_diam(A), box_diam(B))


def test_box_validation():
    with pytest.raises(ValueError):
        BoxContinuum({0: (Fraction(3, 4), Fraction(1, 4))})
    with pytest.raises(ValueError):
        HilbertPoint({0: 2})


def test_law_breakpoint():
    law = RadiusLaw(Dyadic(1, -3), -2, 1, 1)
    assert law.at(2) == Fraction(1, 8)
    assert law.at(5) == 1


# torus ---------------------------------------------------------------------

def test_torus_distance_wraps():
    assert torus_dist((0.95, 0.5), (0.05, 0.5)) == pytest.approx(0.1)
    assert torus_dist((Fraction(1, 8), 0), (Fraction(7, 8), 0)) == Fraction(1, 4)


def test_cloud_hausdorff_translation():
    import numpy as np
    a = np.array([[0.1, 0.1], [0.2, 0.1]])
    assert cloud_hausdorff(a, a + [0.01, 0.0]) == pytest.approx(0.01)

