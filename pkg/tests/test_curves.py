import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from tuniv.config import SearchSettings
from tuniv.curves import (
    ACCUMULATING,
    Interval,
    SampledCurve,
    builtin_family,
    certify_continuous,
    curve_point,
    distance_to_curve,
    endpoint,
    endpoints,
    eval_curve,
    log_spirals,
    nearest_subfamily_member,
    parameter_grid,
    polyline_fan,
    r_distance,
    radii,
    rays,
    sample_curve,
    sample_spec,
    single_spiral,
    truncated_r_distance,
)
from tuniv.errors import CertificationError, DomainError, UsageError


#!------------------ Intervals ------------------!#


def test_infinite_endpoint_cannot_be_closed():
    with pytest.raises(ValidationError):
        Interval(lo=-math.inf, hi=0.0)


def test_empty_interval_is_rejected():
    with pytest.raises(ValidationError):
        Interval(lo=1.0, hi=1.0)


def test_infinite_bounds_survive_json():
    interval = Interval(lo=0.0, hi=math.inf)
    data = interval.model_dump(mode="json")
    assert data["hi"] == "inf"
    assert Interval.model_validate(data) == interval


@pytest.mark.parametrize(
    "interval",
    [
        Interval(lo=0.0, hi=1.0),
        Interval(lo=0.0, hi=math.inf),
        Interval(lo=-math.inf, hi=0.0, lo_closed=False),
        Interval(lo=-math.inf, hi=math.inf, lo_closed=False),
    ],
)
def test_sigma_is_increasing_and_stays_inside(interval):
    values = interval.sigma(np.linspace(0.01, 0.99, 99))
    assert np.all(np.diff(values) > 0)
    assert np.all(interval.contains(values))


#!------------------ Evaluation ------------------!#


@pytest.mark.parametrize(
    "family, alpha, t, expected",
    [
        (radii(), 0.0, 0.5, 0.5),
        (radii(), math.pi, 0.25, -0.25),
        (log_spirals(), 0.0, -math.log(2), 0.5),
    ],
)
def test_eval_curve(family, alpha, t, expected):
    assert eval_curve(family, alpha, t) == pytest.approx(expected, abs=1e-15)


def test_eval_curve_checks_domains():
    with pytest.raises(DomainError):
        eval_curve(radii(), 7.0, 0.5)
    with pytest.raises(DomainError):
        eval_curve(radii(), 0.0, 1.0)


def test_curve_point():
    assert curve_point(radii(), 0.0, 0.75) == pytest.approx(0.75)
    assert curve_point(log_spirals(), 0.0, 0.5) == pytest.approx(0.5, abs=1e-15)
    u = -math.expm1(-6 * math.pi)
    assert curve_point(single_spiral(), 0.0, u) == pytest.approx(1 - math.exp(-6 * math.pi), abs=1e-7)
    with pytest.raises(DomainError):
        curve_point(radii(), 0.0, 1.0)


def test_unknown_family_kind():
    with pytest.raises(UsageError):
        builtin_family("circles")


#!------------------ Boundary limits ------------------!#


def test_radius_ends_at_its_angle():
    assert endpoint(radii(), math.pi / 2) == pytest.approx(1j, abs=1e-12)


@pytest.mark.parametrize("alpha", [-3.0, 0.0, 0.5, 2.0])
def test_every_log_spiral_ends_at_one(alpha):
    assert endpoint(log_spirals(), alpha) == pytest.approx(1, abs=1e-9)


def test_single_spiral_accumulates():
    assert endpoint(single_spiral(), 0.0) is ACCUMULATING


def test_vectorised_endpoints_agree():
    alphas = np.linspace(0, 6, 13)
    limits = endpoints(radii(), alphas)
    assert np.allclose(limits, [endpoint(radii(), a) for a in alphas], atol=1e-15)


def test_endpoints_need_a_disc_family():
    with pytest.raises(UsageError):
        endpoints(rays(), [0.0])


def test_polyline_fan_ends_on_the_rotated_endpoint():
    fan = polyline_fan([0.0, 0.5, 1.0], [0, 0.3 + 0.3j, 1])
    assert endpoint(fan, math.pi / 2) == pytest.approx(1j, abs=1e-9)


def test_polyline_fan_must_reach_the_circle():
    with pytest.raises(UsageError):
        polyline_fan([0.0, 1.0], [0, 0.5])


#!------------------ r-distance ------------------!#


GRID = np.linspace(0.0, 1 - 2**-10, 1025)


def test_r_distance_of_perpendicular_radii():
    c1 = sample_curve(radii(), 0.0, GRID)
    c2 = sample_curve(radii(), math.pi / 2, GRID)
    assert r_distance(c1, c2) == pytest.approx(math.sqrt(2) * (1 - 2**-10), abs=1e-12)
    assert r_distance(c1, c1) == 0


def test_r_distance_of_an_offset_copy():
    c1 = sample_curve(radii(), 0.0, GRID)
    c2 = SampledCurve(parameters=GRID, points=c1.points + 0.01)
    assert r_distance(c1, c2) == pytest.approx(0.01, abs=1e-15)


def test_r_distance_needs_matching_grids():
    c1 = sample_curve(radii(), 0.0, GRID)
    c2 = sample_curve(radii(), 0.0, GRID[:-1])
    with pytest.raises(UsageError):
        r_distance(c1, c2)


def test_metric_axioms_on_random_curves():
    rng = np.random.default_rng(7)
    parameters = np.linspace(0, 1, 64)
    for _ in range(100):
        c1, c2, c3 = (
            SampledCurve(parameters=parameters, points=rng.normal(size=64) + 1j * rng.normal(size=64))
            for _ in range(3)
        )
        assert r_distance(c1, c2) == r_distance(c2, c1)
        assert r_distance(c1, c1) == 0
        assert r_distance(c1, c3) <= r_distance(c1, c2) + r_distance(c2, c3) + 1e-12


@given(st.floats(min_value=0.01, max_value=3.0))
def test_truncated_distance_on_rays(delta):
    grid = np.linspace(0.0, 4.0, 401)
    c1 = sample_curve(rays(), 0.0, grid)
    c2 = sample_curve(rays(), delta, grid)
    assert truncated_r_distance(c1, c2, 2) == pytest.approx(4 * math.sin(delta / 2), abs=1e-12)
    distances = [truncated_r_distance(c1, c2, j) for j in range(1, 6)]
    assert distances == sorted(distances)
    assert distances[-1] <= r_distance(c1, c2)


def test_truncated_distance_of_far_curves_is_zero():
    grid = np.linspace(3.0, 4.0, 11)
    c1 = sample_curve(rays(), 0.0, grid)
    c2 = sample_curve(rays(), 1.0, grid)
    assert truncated_r_distance(c1, c2, 2) == 0



def test_generator_samples_match_family_samples():
    grid = parameter_grid(radii().curve_interval, 32)
    spec = radii().generator(0.3)
    assert np.array_equal(sample_spec(spec, grid).points, sample_curve(radii(), 0.3, grid).points)
    with pytest.raises(DomainError):
        sample_spec(spec, [0.5, 1.5])


def test_only_accumulating_curves_have_tail_passes():
    assert abs(single_spiral().generator(0.0).tail_pass(0.0, 3)) == pytest.approx(1 - math.exp(-6 * math.pi))
    with pytest.raises(UsageError):
        radii().generator(0.0).tail_pass(0.0, 3)


def test_distance_to_a_straight_curve():
    grid = parameter_grid(radii().curve_interval, 8)
    assert distance_to_curve(radii(), 0.0, 0.5 + 0.1j, grid) == pytest.approx(0.1, abs=1e-12)


def test_distance_to_a_point_between_samples_of_a_spiral():
    family = log_spirals()
    grid = parameter_grid(family.curve_interval, 8)
    t = 0.5 * (grid[3] + grid[4])
    point = eval_curve(family, 3.0, t)
    chord = abs(point - 0.5 * (eval_curve(family, 3.0, grid[3]) + eval_curve(family, 3.0, grid[4])))
    assert chord > 1e-3
    assert distance_to_curve(family, 3.0, point, grid) < 1e-9


#!------------------ Continuity ------------------!#


def test_dyadic_parameter_is_its_own_witness():
    assert nearest_subfamily_member(radii(), 0.5, 0.05) == Fraction(1, 2)


def test_witness_for_an_irrational_angle():
    witness = nearest_subfamily_member(radii(), math.pi / 4, 0.05)
    assert 2 * abs(math.sin((float(witness) - math.pi / 4) / 2)) < 0.05
    assert witness.denominator & (witness.denominator - 1) == 0


def test_tiny_delta_exhausts_the_search():
    with pytest.raises(CertificationError):
        nearest_subfamily_member(radii(), math.pi / 4, 1e-12)


def test_radii_are_continuous():
    alphas = 2 * math.pi * np.arange(64) / 64
    report = certify_continuous(radii(), 0.05, 1, alphas)
    assert report.passed
    assert len(report.witnesses) == 64
    t_max = parameter_grid(radii().curve_interval, SearchSettings().curve_samples).max()
    for entry in report.entries:
        closed_form = 2 * abs(math.sin((entry.alpha - float(entry.witness)) / 2)) * t_max
        assert entry.distance == pytest.approx(closed_form, abs=1e-12)


def test_single_spiral_is_vacuously_continuous():
    report = certify_continuous(single_spiral(), 1e-9, 1, [0.0, 0.3, 1.0])
    assert report.passed
    assert report.witnesses == [0, 0, 0]


def test_rays_use_the_truncated_distance():
    report = certify_continuous(rays(), 0.05, 3, [0.1, 1.0, 5.0])
    assert report.passed
    assert all(entry.distance < 0.05 for entry in report.entries)


def test_radii_are_continuous_at_a_tiny_delta():
    alphas = 2 * math.pi * (np.arange(16) + 0.37) / 16
    report = certify_continuous(radii(), 1e-6, 1, alphas)
    assert report.passed
    assert all(entry.distance < 1e-6 for entry in report.entries)


def test_parameter_outside_the_family_is_recorded():
    report = certify_continuous(radii(), 0.05, 1, [0.5, 2 * math.pi + 0.1])
    assert not report.passed
    inside, outside = report.entries
    assert inside.passed and inside.witness == Fraction(1, 2)
    assert not outside.passed
    assert "outside the parameter interval" in outside.reason
