import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ftsens.continua import shift_fu_closed_form
from ftsens.errors import IncompatibleRepresentation, SplitFailed
from ftsens.geometry import Dyadic, HilbertPoint
from ftsens.hypmetric_entropy import (bowen_separated, entropy_estimate, separated_set,
                                      shift_bowen_dist, split_constants, split_tree, square_pool,
                                      torus_pool)
from ftsens.systems import ShiftSystem, cat_map, random_hilbert_point

S = ShiftSystem()
EPS = S.epsilon
X = HilbertPoint.constant()
DELTA = Dyadic(1, -4)


@given(st.integers(0, 2 ** 31), st.integers(0, 12))
def test_shift_bowen_distance_matches_oracle(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_hilbert_point(rng, 6, 8), random_hilbert_point(rng, 6, 8)
    assert shift_bowen_dist(a, b, n).to_fraction() == oracles.bowen(oracles.from_point(a),
                                                                    oracles.from_point(b), n)


@pytest.mark.parametrize("seed", range(3))
def test_bowen_separated_matches_pairwise(seed):
    rng = np.random.default_rng(seed)
    pts = [random_hilbert_point(rng, 5, 6) for _ in range(12)]
    T, thr = 4, Fraction(1, 48)
    ok, dmin = bowen_separated(pts, T, thr)
    ref = min(shift_bowen_dist(a, b, T) for i, a in enumerate(pts) for b in pts[i + 1:])
    assert dmin == ref
    assert ok == (ref > thr)


def test_bowen_separated_trivial_inputs():
    assert bowen_separated([X], 5, Fraction(1, 8)) == (True, None)
    with pytest.raises(IncompatibleRepresentation):
        bowen_separated([X, HilbertPoint({}, 0)], 5, Fraction(1, 8))


def test_count_one_when_delta_exceeds_diameter():
    pool = torus_pool(500, seed=1)
    assert separated_set(cat_map(), 0, 0.5, pool).count == 1


def test_shift_greedy_uses_exact_distance():
    pts = [X.with_coords({0: Dyadic(k, -3)}) for k in range(9)]
    res = separated_set(S, 2, Dyadic(1, -3), pts)
    # coordinates 1/8 apart are not more than 1/8 apart
    assert res.count == 5


def test_cat_entropy_small_pool():
    res = entropy_estimate(cat_map(), 0.05, 8, square_pool((0.3, 0.6), 0.0125, 20_000, seed=0))
    lam = math.log((3 + math.sqrt(5)) / 2)
    assert abs(res.h - lam) < 0.25 * lam
    assert res.counts[0] >= 1 and all(a <= b for a, b in zip(res.counts, res.counts[1:]))
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == ["n", "s", "log_s"] and len(rows) == 10
    assert json.loads(res.to_json())["pool_size"] == 20_000


def test_entropy_needs_positive_horizon():
    with pytest.raises(ValueError):
        entropy_estimate(cat_map(), 0.05, 0, torus_pool(10, 0))


def test_pools_are_reproducible():
    assert np.array_equal(torus_pool(64, seed=3), torus_pool(64, seed=3))
    sq = square_pool((0.5, 0.5), 0.1, 256, seed=3)
    assert np.all(np.abs(sq - 0.5) <= 0.05)


# split tree -------------------------------------------------------------------

def test_split_constants():
    c = split_constants(S, DELTA)
    assert (c.M, c.k_node, c.m_small) == (19, 5, 5)
    assert c.alpha == Fraction(1, 4) * Fraction(1, 2 ** 5)


def test_depth_zero_is_anchor():
    C0 = shift_fu_closed_form(X, 5, EPS)
    res = split_tree(S, C0, 19, DELTA, 0)
    assert res.points == [X] and res.ok


def test_depth_one_pair():
    C0 = shift_fu_closed_form(X, 5, EPS)
    res = split_tree(S, C0, 19, DELTA, 1)
    a, b = res.points
    assert oracles.bowen(oracles.from_point(a), oracles.from_point(b), 19) > DELTA.to_fraction() / 3
    assert res.separated


def test_depth_three_tree():
    C0 = shift_fu_closed_form(X, 5, EPS)
    res = split_tree(S, C0, 19, DELTA, 3)
    assert res.ok and len(res.points) == 8 and len(set(res.points)) == 8
    assert 3 * res.chain_max < DELTA
    d = res.to_dict(window=4)
    assert d["separation_time"] == 57 and len(d["tree"]) == 15
    assert res.entropy_bound == pytest.approx(math.log(2) / 19)


def test_split_fails_on_small_images():
    C0 = shift_fu_closed_form(X, 5, EPS)
    with pytest.raises(SplitFailed):
        split_tree(S, C0, 1, EPS, 1, k_node=5)


def test_split_tree_needs_shift():
    with pytest.raises(IncompatibleRepresentation):
        split_tree(cat_map(), None, 19, DELTA, 1)
