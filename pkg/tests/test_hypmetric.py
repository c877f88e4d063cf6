"""ft-metric: exact powers of 2^(-1/m), catalog chains and their inequalities."""

import itertools
from decimal import Decimal, getcontext
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ftsens.continua import shift_fu_closed_form
from ftsens.errors import NoChain
from ftsens.geometry import Dyadic, HilbertPoint, box_hull
from ftsens.hypmetric_entropy import (LambdaPoly, chain_D, chain_D_exhaustive, chain_lemma_check,
                                      compatibility_check, lambda_m, linking_point, mark,
                                      random_catalog, random_chain, rho, triangle_check,
                                      verify_hyperbolic, verify_sandwich)
from ftsens.systems import ShiftSystem

S = ShiftSystem()
EPS = S.epsilon
X = HilbertPoint.constant()
M = 2
LAM = LambdaPoly.power(1, M)

getcontext().prec = 60


def dec_lambda_power(n, m):
    return Decimal(2) ** (Decimal(-n) / Decimal(m))


# exact arithmetic -----------------------------------------------------------

@given(st.integers(-20, 40), st.integers(-20, 40), st.integers(1, 5))
def test_powers_multiply(a, b, m):
    assert LambdaPoly.power(a, m) * LambdaPoly.power(b, m) == LambdaPoly.power(a + b, m)
    assert (LambdaPoly.power(a, m) < LambdaPoly.power(b, m)) == (a > b)


@given(st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=64), min_size=1, max_size=4),
       st.integers(1, 4))
def test_sign_matches_high_precision(coeffs, m):
    v = LambdaPoly(m, coeffs)
    ref = sum(Decimal(c.numerator) / Decimal(c.denominator) * dec_lambda_power(j, m)
              for j, c in enumerate(v.coeffs))
    if abs(ref) > Decimal(10) ** -40:
        assert v.sign() == (1 if ref > 0 else -1)
    elif not any(v.coeffs):
        assert v.sign() == 0


def test_sign_of_near_cancellation():
    # 3 sqrt(2)/... : 99/70 approximates sqrt(2) from above
    root2 = LambdaPoly.power(-1, 2)
    assert root2 < Fraction(99, 70)
    assert root2 > Fraction(140, 99)
    assert root2 * root2 == 2


def test_printing():
    assert str(LambdaPoly.power(3, 2)) == "2^(-3/2)"
    assert str(LambdaPoly(2, [])) == "0"
    assert float(LambdaPoly.power(2, 2)) == pytest.approx(0.5)


def test_mixed_m_rejected():
    with pytest.raises(ValueError):
        LambdaPoly.power(1, 2) + LambdaPoly.power(1, 3)


# rho -------------------------------------------------------------------------

def test_lambda_constant_for_shift():
    assert lambda_m(S, EPS) == 2


@pytest.mark.parametrize("k", [0, 2, 5, 9])
def test_rho_closed_form(k):
    assert rho(S, shift_fu_closed_form(X, k, EPS), EPS, M) == LambdaPoly.power(k, M)


def test_rho_of_large_set_is_one():
    assert rho(S, shift_fu_closed_form(X, 0, EPS).shifted(2), EPS, M) == 1


@pytest.mark.parametrize("n", [1, 3, 7])
def test_rho_backward_scaling(n):
    C = shift_fu_closed_form(X, 3, EPS)
    assert rho(S, C.shifted(-n), EPS, M) == LambdaPoly.power(n, M) * rho(S, C, EPS, M)


def test_mark_requires_points_of_the_continuum():
    C = shift_fu_closed_form(X, 4, EPS)
    with pytest.raises(ValueError):
        mark(S, C, X.with_coords({0: 0}), X, EPS, M)
    assert mark(S, C, X, X, EPS, M).n1_eps == 4


# chains ------------------------------------------------------------------------

def offset_pair(k=3, shift=Dyadic(3, -8)):
    A = shift_fu_closed_form(X.with_coords({0: X[0] - shift}), k, EPS)
    B = shift_fu_closed_form(X.with_coords({0: X[0] + shift}), k, EPS)
    return A, B


def test_catalog_of_target_alone():
    C = shift_fu_closed_form(X, 3, EPS)
    res = chain_D(S, [C], C, X, X, EPS, M)
    assert res.D_value == rho(S, C, EPS, M)
    assert res.witness == [0]


def test_two_box_chain():
    A, B = offset_pair()
    C = box_hull([A, B])
    p, q = A.center(), B.center()
    res = chain_D(S, [A, B], C, p, q, EPS, M)
    assert res.D_value == 2 * LambdaPoly.power(3, M)
    assert res.witness == [0, 1]
    link = res.links[1]
    from ftsens.geometry import box_contains_point
    assert box_contains_point(A, link) and box_contains_point(B, link)


def test_sandwich_refines_with_target():
    A, B = offset_pair()
    C = box_hull([A, B])
    rep = verify_sandwich(S, [A, B], C, A.center(), B.center(), EPS, M)
    assert rep.refinements == 1 and rep.ok
    assert rep.result.D_value == rho(S, C, EPS, M)


def test_disconnected_marks():
    A, B = offset_pair(shift=Dyadic(1, -4))
    C = box_hull([A, B])
    with pytest.raises(NoChain):
        chain_D(S, [A, B], C, A.center(), B.center(), EPS, M)


def _oracle_box(B):
    law = B.laws[0]
    return oracles.from_point(B.center()), -law.shift


def _oracle_n1(boxes, eps, budget=60):
    """First n where the coordinatewise hull of sigma^n of the boxes exceeds eps."""
    eps = eps.to_fraction()
    for n in range(budget):
        best = Fraction(0)
        for i in range(-40, 41):
            lo, hi = Fraction(1), Fraction(0)
            for x, k in boxes:
                c = oracles.coord(x, i + n)
                rad = eps * Fraction(2) ** (i + n - k)
                lo, hi = min(lo, max(c - rad, Fraction(0))), max(hi, min(c + rad, Fraction(1)))
            best = max(best, (hi - lo) / 2 ** abs(i))
        if best > eps:
            return n
    return None


def _oracle_D(boxes, target, p, q, m):
    """Brute force over simple paths with Decimal costs and oracle covering."""
    from ftsens.geometry import box_contains_point, boxes_intersect
    ob = [_oracle_box(B) for B in boxes]
    n_target = _oracle_n1([_oracle_box(target)], EPS)
    n1 = [_oracle_n1([b], EPS) for b in ob]
    G = nx.Graph()
    G.add_nodes_from(range(len(boxes)))
    G.add_edges_from((i, j) for i, j in itertools.combinations(range(len(boxes)), 2)
                     if boxes_intersect(boxes[i], boxes[j]))
    starts = [i for i, B in enumerate(boxes) if box_contains_point(B, p)]
    ends = {i for i, B in enumerate(boxes) if box_contains_point(B, q)}
    cover = {}
    best = None
    for s in starts:
        paths = [[s]] + [pth for t in ends if t != s for pth in nx.all_simple_paths(G, s, t)]
        for pth in paths:
            if pth[-1] not in ends:
                continue
            key = frozenset(pth)
            if key not in cover:
                cover[key] = _oracle_n1([ob[i] for i in key], EPS) == n_target
            if cover[key]:
                cost = sum(dec_lambda_power(n1[i], m) for i in pth)
                best = cost if best is None else min(best, cost)
    return best


@pytest.mark.parametrize("seed", range(4))
def test_chain_search_matches_oracles(seed):
    rng = np.random.default_rng(seed)
    target, boxes, p, q = random_catalog(S, rng, X, 3, size=9)
    fast = chain_D(S, boxes, target, p, q, EPS, M)
    slow = chain_D_exhaustive(S, boxes, target, p, q, EPS, M)
    assert fast.D_value == slow.D_value
    ref = _oracle_D(boxes, target, p, q, M)
    assert abs(Decimal(float(fast.D_value)) - ref) < Decimal(10) ** -12
    assert fast.sandwich_ok


@pytest.mark.parametrize("seed", range(3))
def test_chain_search_without_target(seed):
    rng = np.random.default_rng(100 + seed)
    target, boxes, p, q = random_catalog(S, rng, X, 3, size=10, include_target=False)
    try:
        fast = chain_D(S, boxes, target, p, q, EPS, M)
    except NoChain:
        with pytest.raises(NoChain):
            chain_D_exhaustive(S, boxes, target, p, q, EPS, M)
        return
    assert fast.D_value == chain_D_exhaustive(S, boxes, target, p, q, EPS, M).D_value


def test_sandwich_on_fifty_boxes():
    rng = np.random.default_rng(7)
    target, boxes, p, q = random_catalog(S, rng, X, 4, size=50)
    rep = verify_sandwich(S, boxes, target, p, q, EPS, M)
    assert rep.ok and rep.result.catalog_size >= 50


def test_hyperbolicity_single_box_scales_exactly():
    C = shift_fu_closed_form(X, 3, EPS)
    rep = verify_hyperbolic(S, mark(S, C, X, X, EPS, M), [C], 5)
    assert rep.ok
    for n, D in zip(rep.n_values, rep.D_values):
        assert D == LambdaPoly.power(n + 3, M)


def test_hyperbolicity_random_catalog():
    rng = np.random.default_rng(11)
    target, boxes, p, q = random_catalog(S, rng, X, 3, size=10)
    rep = verify_hyperbolic(S, mark(S, target, p, q, EPS, M), boxes, 10)
    assert rep.ok


def test_chain_lemma_single_and_pair():
    A, B = offset_pair()
    one = chain_lemma_check(S, [A], EPS, M)
    assert one.ok and one.rhs == 2 * one.lhs
    two = chain_lemma_check(S, [A, B], EPS, M)
    assert two.lhs == LambdaPoly.power(3, M)
    assert two.rhs == 4 * LambdaPoly.power(3, M)


def test_chain_lemma_random_chains():
    rng = np.random.default_rng(5)
    for _ in range(40):
        assert chain_lemma_check(S, random_chain(S, rng, 5), EPS, M).ok


def test_chain_lemma_rejects_broken_chain():
    A, B = offset_pair(shift=Dyadic(1, -4))
    with pytest.raises(ValueError):
        chain_lemma_check(S, [A, B], EPS, M)


def test_triangle_inequality():
    A, B = offset_pair()
    b = linking_point(A, B)
    rep = triangle_check(S, [A, B], A, B, A.center(), b, B.center(), EPS, M)
    assert rep.ok


def test_compatibility():
    rng = np.random.default_rng(2)
    _, boxes, _, _ = random_catalog(S, rng, X, 3, size=30)
    more = [shift_fu_closed_form(X, k, EPS).shifted(s) for k in range(8) for s in (-2, 0, 1)]
    rows = compatibility_check(S, boxes + more, [Dyadic(1, -a) for a in (3, 4, 5)], EPS, M)
    assert all(not r.failures for r in rows)
    assert rows[-1].gamma_rho == LambdaPoly.power(2 * S.m_gamma(Dyadic(1, -5)), M)
