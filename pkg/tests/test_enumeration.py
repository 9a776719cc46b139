import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tuniv.config import SearchSettings
from tuniv.curves import curve_point, radii, single_spiral
from tuniv.enumeration import (
    GaussianPolynomial,
    anchor_points,
    boundary_point,
    calkin_wilf,
    calkin_wilf_index,
    curve_anchor,
    pair,
    poly,
    poly_index,
    rational_at,
    rational_index,
    scale,
    scale_fraction,
    scale_index,
    scales,
    subfamily_curve,
    subfamily_members,
    subfamily_parameter,
    tuple_at,
    tuple_index,
    unpair,
)
from tuniv.errors import UsageError
from tuniv.polynomials import Polynomial


#!------------------ Scales and boundary points ------------------!#


@pytest.mark.parametrize(
    "k, expected",
    [(1, Fraction(1, 2)), (2, Fraction(1, 4)), (3, Fraction(3, 4)), (32, Fraction(1, 64))],
)
def test_scale(k, expected):
    assert scale_fraction(k) == expected
    assert scale(k) == float(expected)


def test_scales_match_scalar_decoder():
    assert scales(300).tolist() == [scale(k) for k in range(1, 301)]


def test_every_shallow_dyadic_is_enumerated_early():
    for depth in range(1, 11):
        for numerator in range(1, 1 << depth, 2):
            index = scale_index(Fraction(numerator, 1 << depth))
            assert index < 2**11
            assert scale_fraction(index) == Fraction(numerator, 1 << depth)


@pytest.mark.parametrize("k", [0, -3, True])
def test_scale_rejects_non_naturals(k):
    with pytest.raises(UsageError):
        scale_fraction(k)


@pytest.mark.parametrize("p, expected", [(1, 1), (2, -1), (3, 1j)])
def test_boundary_point(p, expected):
    assert abs(boundary_point(p) - expected) < 1e-15



@given(st.integers(min_value=1, max_value=10**9))
def test_boundary_points_lie_on_the_circle(p):
    assert abs(abs(boundary_point(p)) - 1) <= 1e-15


#!------------------ Rationals and pairing ------------------!#


def test_calkin_wilf_prefix():
    assert [calkin_wilf(n) for n in range(1, 8)] == [
        Fraction(1),
        Fraction(1, 2),
        Fraction(2),
        Fraction(1, 3),
        Fraction(3, 2),
        Fraction(2, 3),
        Fraction(3),
    ]


@given(st.integers(min_value=1, max_value=10**9))
def test_calkin_wilf_index_inverts(n):
    assert calkin_wilf_index(calkin_wilf(n)) == n


@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=1000))
def test_rational_index_inverts(x):
    assert rational_at(rational_index(x)) == x


@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=0, max_value=10**6))
def test_pairing_inverts(x, y):
    assert unpair(pair(x, y)) == (x, y)


#!------------------ Polynomials ------------------!#


def test_first_polynomial_is_zero():
    assert poly(1).is_zero
    assert poly_index(GaussianPolynomial()) == 1


@pytest.mark.parametrize("j, value", [(2, 1), (7, -1), (4, 1j)])
def test_constant_polynomials(j, value):
    assert poly(j).to_polynomial() == Polynomial.constant(value)
    assert poly_index(Polynomial.constant(value)) == j


def test_round_trip_of_a_linear_polynomial():
    q = GaussianPolynomial([(3, 0), (Fraction(1, 2), 1)])
    assert poly(poly_index(q)) == q
    assert poly_index([3, 0.5 + 1j]) == poly_index(q)


def test_poly_index_inverts_poly():
    for j in range(1, 201):
        assert poly_index(poly(j)) == j


def test_irrational_coefficient_is_rejected():
    with pytest.raises(UsageError):
        poly_index([math.pi])


def test_leading_coefficient_never_vanishes():
    for j in range(2, 200):
        q = poly(j)
        assert q.coefficients[-1] != (0, 0)


#!------------------ Index tuples ------------------!#


def test_tuple_prefix():
    assert tuple_at(1) == (1, 1, 1, 1, 1, 1)
    assert tuple_at(2) == (1, 1, 1, 1, 1, 2)


def test_tuple_index_inverts_tuple_at():
    for i in range(1, 10_001):
        assert tuple_index(tuple_at(i)) == i


def test_tuple_at_is_bijective_on_small_sums():
    small = {
        values for values in product(range(1, 6), repeat=6) if sum(values) <= 10
    }
    decoded = [tuple_at(i) for i in range(1, len(small) + 1)]
    assert set(decoded) == small
    assert [sum(v) for v in decoded] == sorted(sum(v) for v in decoded)


@given(st.lists(st.integers(min_value=1, max_value=20), min_size=1, max_size=8))
def test_tuple_index_any_width(values):
    assert tuple_at(tuple_index(values), width=len(values)) == tuple(values)


#!------------------ Subfamily curves and anchors ------------------!#


def test_subfamily_starts_with_closed_endpoints():
    members = list(subfamily_members(radii(), 3))
    assert members[0] == 0
    assert len(members) == len(set(members))
    assert all(0 <= m < 2 * math.pi for m in members)


def test_first_curve_to_one_is_the_real_radius():
    assert subfamily_parameter(radii(), 1, 1) == 0
    assert subfamily_curve(radii(), 1, 1).angle == 0


def test_second_curve_near_i():
    alpha = subfamily_parameter(radii(), 3, 2)
    assert abs(np.exp(1j * float(alpha)) - 1j) < 0.5
    assert alpha.denominator & (alpha.denominator - 1) == 0
    assert alpha != subfamily_parameter(radii(), 3, 1)


def test_single_spiral_has_one_curve():
    family = single_spiral()
    assert subfamily_parameter(family, 5, 7) == 0
    assert subfamily_curve(family, 2, 3) == subfamily_curve(family, 1, 1)


@pytest.mark.parametrize("n, expected", [(1, 0.5), (15, 15 / 16)])
def test_radius_anchors(n, expected):
    assert curve_anchor(radii(), 1, 1, n) == pytest.approx(expected, abs=1e-15)


def test_spiral_anchor_is_a_tail_pass():
    b = curve_anchor(single_spiral(), 1, 1, 3)
    assert b == pytest.approx(1 - math.exp(-6 * math.pi), abs=1e-12)
    assert abs(b.imag) < 1e-12


def test_subfamily_depth_is_configurable():
    shallow = SearchSettings(subfamily_depth=2)
    alpha = subfamily_parameter(radii(), 3, 1, shallow)
    assert (alpha * 4).denominator == 1


@pytest.mark.parametrize("p, l", [(1, 1), (3, 2)])
def test_anchors_are_dense_on_their_curve(p, l):
    family = radii()
    alpha = float(subfamily_parameter(family, p, l))
    anchors = anchor_points(family, alpha, boundary_point(p), 2**12)
    assert anchors[14] == pytest.approx(curve_anchor(family, p, l, 15), abs=1e-15)
    rng = np.random.default_rng(7)
    targets = np.array([curve_point(family, alpha, u) for u in rng.uniform(1e-3, 1 - 1e-3, size=100)])
    gaps = np.min(np.abs(targets[:, None] - anchors[None, :]), axis=1)
    assert gaps.max() < 1e-3
