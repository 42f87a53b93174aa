"""
Test script to verify constraint residuals, the relaxed barrier and activity reports
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rendezvous.constraints import (CONSTRAINT_NAMES, BarrierParams, ConstraintSet, barrier_cost,
                                    constraint_report, docking_residual, eval_constraints, relaxed_barrier,
                                    relaxed_barrier_prime, relaxed_barrier_second)
from rendezvous.error_space import CoupledInput, CoupledState, Curve, integrate, time_grid
from rendezvous.models import DEFAULT_LIMITS, ZAGI, Wind, aero_forces, trim_level, wind_triangle
from rendezvous.path import Path, Segment, straight_path


def level_state():
    return CoupledState(0.0, 0.0, -50.0, 0.0, 0.0, 0.0, 0.0, 18.0, 0.0)


def test_trim_point_is_strictly_feasible(road):
    u1, u3 = trim_level(18.0)
    residuals = eval_constraints(level_state(), CoupledInput(u1, 0.0, u3, 0.0), Wind(), road)
    assert list(residuals) == list(CONSTRAINT_NAMES)
    assert all(value < 0 for value in residuals.values())


def test_thrust_bound_is_active_at_u1_max(road):
    _, u3 = trim_level(18.0)
    residuals = eval_constraints(level_state(), CoupledInput(2.0, 0.0, u3, 0.0), Wind(), road)
    assert residuals["thrust_max"] == 0.0


def test_friction_circle_violation():
    arc = Path((Segment(600.0, 1.0 / 35.0),))
    x = CoupledState(0.0, 0.0, -50.0, 8.0, 0.0, 0.0, 0.0, 10.0, 100.0)
    residuals = eval_constraints(x, CoupledInput(1.0, 0.0, 0.3, 0.92), Wind(), arc)
    assert residuals["friction_circle"] == pytest.approx(0.92 ** 2 + (100 / 35) ** 2 - 9, abs=1e-12)
    assert residuals["friction_circle"] > 0


def test_docking_residual():
    assert docking_residual(0.0, 0.0, 0.0, 0.0) == (0.0, 0.0)
    r_plus, r_minus = docking_residual(300.0, 0.0, 0.0, 0.5)
    assert r_plus < -50 and r_minus < -50
    one_degree = np.deg2rad(1.0)
    r_plus, r_minus = docking_residual(0.0, 0.0, 0.0, one_degree)
    assert r_plus == pytest.approx(one_degree - 0.25)
    assert r_plus < 0 and r_minus < 0


def test_barrier_values():
    assert barrier_cost(np.array([-1.0]), 1.0, 0.1)[0] == pytest.approx(0.0, abs=1e-15)
    assert barrier_cost(np.array([0.0]), 1.0, 0.1)[0] == pytest.approx(1.5 + np.log(10.0), abs=1e-12)
    assert barrier_cost(np.array([0.0]), 1.0, 0.1)[0] == pytest.approx(3.8026, abs=1e-4)
    # finite for violated residuals
    assert np.isfinite(barrier_cost(np.array([2.0, 5.0]), 0.5, 0.01)[0])


@pytest.mark.parametrize("delta", [0.5, 0.1, 0.05, 1e-3])
def test_barrier_gluing(delta):
    below = np.nextafter(delta, 0.0)
    assert abs(relaxed_barrier(below, delta) - relaxed_barrier(delta, delta)) < 1e-12
    assert abs(relaxed_barrier_prime(below, delta) - relaxed_barrier_prime(delta, delta)) < 1e-12 / delta ** 2
    assert relaxed_barrier_second(delta, delta) == pytest.approx(relaxed_barrier_second(below, delta))


@settings(max_examples=100, deadline=None)
@given(c=st.floats(-2.0, 0.5), mu=st.floats(0.01, 2.0))
def test_barrier_derivatives_match_finite_differences(c, mu):
    delta, eps = 0.1, 1e-6
    _, grad, hess = barrier_cost(np.array([c]), mu, delta)
    plus = barrier_cost(np.array([c + eps]), mu, delta)
    minus = barrier_cost(np.array([c - eps]), mu, delta)
    assert grad[0] == pytest.approx((plus[0] - minus[0]) / (2 * eps), rel=1e-5, abs=1e-5)
    assert hess[0] == pytest.approx((plus[1][0] - minus[1][0]) / (2 * eps), rel=1e-5, abs=1e-4)


def test_barrier_stages():
    bp = BarrierParams()
    assert bp.stage(0) == (0.1, 0.05)
    assert bp.stage(2) == pytest.approx((0.1 * 0.04, 0.05 * 0.04))
    assert bp.stage(4)[1] == 1e-3
    with pytest.raises(ValueError):
        BarrierParams(shrink=1.0)
    with pytest.raises(ValueError):
        BarrierParams(delta=0.01, delta_final=0.1)


@settings(max_examples=100, deadline=None)
@given(e_gamma=st.floats(-0.2, 0.2), e_phi=st.floats(-0.6, 0.6), e_v=st.floats(-4.0, 4.0),
       u1=st.floats(-0.5, 2.5), u3=st.floats(-0.8, 0.8), u4=st.floats(-3.5, 3.5), e_z=st.floats(-20.0, 5.0))
def test_residual_signs_match_inequalities(e_gamma, e_phi, e_v, u1, u3, u4, e_z):
    wind = Wind(-4.33, 2.5, 0.0)
    road = straight_path(1000.0, chi0=0.7)
    lim = DEFAULT_LIMITS
    x = CoupledState(1.0, -2.0, e_z, e_v, e_gamma, 0.01, e_phi, 16.0, 10.0)
    r = eval_constraints(x, CoupledInput(u1, 0.0, u3, u4), wind, road)
    air = wind_triangle(16.0 + e_v, 0.71, e_gamma, wind)
    n_lf = aero_forces(air.v_a, u3)[0] / ZAGI.weight
    holds = {
        "airspeed_max": air.v_a <= lim.v_max, "airspeed_min": air.v_a >= lim.v_min,
        "load_factor_max": n_lf <= lim.nlf_max, "load_factor_min": n_lf >= lim.nlf_min,
        "gamma_max": e_gamma <= lim.gamma_max, "gamma_min": e_gamma >= lim.gamma_min,
        "thrust_min": u1 >= 0, "thrust_max": u1 <= lim.u1_max,
        "roll_max": e_phi <= lim.phi_max, "roll_min": e_phi >= -lim.phi_max,
        "lift_coeff_max": u3 <= lim.u3_max, "lift_coeff_min": u3 >= -lim.u3_max,
        "friction_circle": u4 ** 2 <= lim.a_max ** 2, "ground": e_z <= 0,
    }
    for name, ok in holds.items():
        # skip points sitting on a boundary up to round-off
        if abs(r[name]) > 1e-9:
            assert (r[name] <= 0) == ok, name


def test_report_of_interior_trajectory_is_empty(road):
    u1, u3 = trim_level(18.0)
    traj = integrate(level_state(), CoupledInput(u1, 0.0, u3, 0.0), time_grid(5.0, 0.1), Wind(), road)
    report = constraint_report(traj, Wind(), road)
    assert report.active == []
    assert report.to_list() == []
    assert report.worst_residual < 0


def test_report_finds_active_interval(road):
    t = np.arange(11.0)
    states = np.zeros((11, 9))
    states[:, 2] = -50.0
    states[:, 7] = 18.0
    states[:, 8] = 18.0 * t
    _, u3 = trim_level(18.0)
    inputs = np.tile([1.0, 0.0, u3, 0.0], (11, 1))
    inputs[3:7, 0] = 0.0
    report = constraint_report(Curve(t, states, inputs), Wind(), road)
    thrust = report.get("thrust_min")
    assert thrust.intervals == [(3.0, 6.0)]
    assert thrust.worst_residual == 0.0
    assert report.active_time_within("thrust_min", 0.0, 5.0) == pytest.approx(2.0)
    assert [entry["constraint"] for entry in report.to_list()] == ["thrust_min"]
    late = constraint_report(Curve(t, states, inputs), Wind(), road, t_from=7.0)
    assert late.get("thrust_min").intervals == []


def test_normalized_residuals_are_vectorized(road):
    cset = ConstraintSet(Wind(), road)
    xs = np.tile(level_state().to_array(), (4, 1)).T
    us = np.tile([1.0, 0.0, 0.3, 0.0], (4, 1)).T
    normalized = cset.normalized(xs, us)
    assert normalized.shape == (len(CONSTRAINT_NAMES), 4)
    assert normalized[CONSTRAINT_NAMES.index("thrust_max"), 0] == pytest.approx(-0.5)
