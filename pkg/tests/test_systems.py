import math
from fractions import Fraction

import numpy as np
import pytest

from ftsens.errors import UnsupportedRadius
from ftsens.geometry import BoxContinuum, Dyadic, HilbertPoint, box_diam
from ftsens.systems import (CircleCoord, CircleMap, ProductSystem, ShiftSystem, SlowedFlow,
                            TorusLinear, cat_map, system_from_config)

EPS = Dyadic(1, -3)


def test_shift_zero_steps_is_identity():
    x = HilbertPoint({0: Dyadic(1, -3), 4: Dyadic(5, -4)})
    assert ShiftSystem().forward(x, 0) == x


def test_shift_moves_coordinates_left():
    x = HilbertPoint({3: Dyadic(1, -2)}, 0)
    assert ShiftSystem().forward(x, 3)[0] == Fraction(1, 4)
    assert ShiftSystem().forward(x, -1)[4] == Fraction(1, 4)


def test_shift_ball_image_zero_is_the_ball():
    x = HilbertPoint.constant()
    S = ShiftSystem()
    assert box_diam(S.ball_image(x, EPS.ldexp(-2), 0)) == box_diam(BoxContinuum.ball_image(x, EPS.ldexp(-2)))


@pytest.mark.parametrize("gamma,k", [(Fraction(1, 8), 0), (Fraction(1, 16), 0), (Fraction(3, 64), 1),
                                     (Fraction(1, 32), 1), (Fraction(1, 1024), 6)])
def test_shift_k_gamma(gamma, k):
    S = ShiftSystem()
    assert S.k_gamma(gamma) == k
    assert S.m_gamma(gamma) == k + 2


def test_shift_rejects_large_epsilon():
    with pytest.raises(ValueError):
        ShiftSystem(Dyadic(1, -1))


def test_cat_fixed_point_and_hand_multiply():
    A = cat_map()
    assert A.forward((0, 0), 5) == (0, 0)
    y = A.forward((Fraction(3, 10), Fraction(7, 10)), 1)
    assert tuple(v % 1 for v in y) == (Fraction(3, 10), Fraction(0))


def test_cat_image_grows_along_unstable_direction():
    A = cat_map()
    r = Fraction(1, 1000)
    lam = (3 + math.sqrt(5)) / 2
    d = float(A.image_diam(A.ball_image((Fraction(1, 5), Fraction(2, 5)), r, 4)))
    # the square's diagonal has unit sup-norm components on both eigenlines
    assert 2 * r * lam ** 4 * 0.5 < d < 2 * r * lam ** 4 * 1.5
    assert A.expansion == pytest.approx(lam)


def test_cat_inverse_power():
    A = cat_map()
    M = A.power(-3)
    P = A.power(3)
    prod = tuple(tuple(sum(M[i][k] * P[k][j] for k in range(2)) for j in range(2)) for i in range(2))
    assert prod == ((1, 0), (0, 1))


def test_torus_rejects_non_hyperbolic():
    with pytest.raises(ValueError):
        TorusLinear(((1, 1), (0, 1)))


def test_radius_bound():
    with pytest.raises(UnsupportedRadius):
        cat_map().ball_image((0, 0), Fraction(1, 4), 0)
    with pytest.raises(UnsupportedRadius):
        ShiftSystem().ball_image(HilbertPoint.constant(), 0, 0)


def test_product_diameter_is_max_of_factors():
    P = ProductSystem(ShiftSystem(), CircleMap())
    x = (HilbertPoint.constant(), CircleCoord(Fraction(1, 3)))
    img = P.ball_image(x, EPS.ldexp(-6), 0)
    assert P.image_diam(img) == max(box_diam(img.base), 2 * EPS.ldexp(-6))


def test_rotation_distance_stays_exact_for_equal_turns():
    c = CircleMap()
    a, b = CircleCoord(Fraction(1, 10), 5), CircleCoord(Fraction(3, 10), 5)
    assert c.dist(a, b) == Fraction(1, 5)


@pytest.fixture(scope="module")
def flow():
    return SlowedFlow(h=0.05, samples=128, refine_gap=4e-3)


def test_flow_speed_vanishes_only_at_rest_point(flow):
    assert flow.validate_speed() > 0
    assert flow.forward(flow.p, 7) == pytest.approx(flow.p)


def test_flow_stable_orbit_approaches_rest_point(flow):
    x = flow.stable_orbit_point(0.2)
    far = flow.forward(x, 40)
    assert flow.dist(far, flow.p) < flow.dist(x, flow.p)


def test_flow_bounds_contain_refined_estimate(flow):
    x = flow.stable_orbit_point(0.15)
    r = 0.02
    coarse = flow.ball_image(x, r, 6)
    fine = SlowedFlow(h=0.05, samples=512, refine_gap=1e-3).ball_image(x, r, 6)
    lo, hi = flow.image_diam(coarse)
    assert lo <= flow.image_diam(fine).lower <= hi + 1e-9


def test_flow_orbit_array_matches_forward(flow):
    pts = np.array([[0.3, 0.6], [0.7, 0.1]])
    orbits = flow.orbit_array(pts, 3)
    # fixed-step orbits against the step-halving reference
    assert orbits[0, 3] == pytest.approx(flow.forward((0.3, 0.6), 3), abs=1e-4)


def test_config_round_trip():
    for sys in (ShiftSystem(), cat_map(), ProductSystem(cat_map(), CircleMap(None))):
        assert system_from_config(sys.config()) == sys
