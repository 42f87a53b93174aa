"""
Test script to verify the vehicle models: wind triangle, forces, dynamics and trims
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rendezvous.errors import DomainError, InfeasibleTrim
from rendezvous.models import (ZAGI, UavInput, UavState, UgvState, VehicleParams, Wind, aero_forces,
                               effective_roll_limit, gamma_one, lateral_acceleration, load_factor,
                               load_factor_roll_limit, trim_descent, trim_envelope, trim_level,
                               ugv_dynamics, uav_dynamics, wind_triangle, wrap_angle)


def test_wind_triangle_calm_is_identity():
    air = wind_triangle(18.0, 0.3, 0.05, Wind())
    assert (air.v_a, air.gamma_a, air.psi_A) == (18.0, 0.05, 0.3)


def test_wind_triangle_tailwind_subtracts():
    air = wind_triangle(18.0, 0.0, 0.0, Wind(5.0, 0.0, 0.0))
    assert air.v_a == pytest.approx(13.0, abs=1e-12)
    assert air.gamma_a == pytest.approx(0.0, abs=1e-12)
    assert air.psi_A == pytest.approx(0.0, abs=1e-12)


def test_wind_triangle_field_wind(field_wind):
    air = wind_triangle(18.0, np.pi / 4, 0.0, field_wind)
    assert air.v_a == pytest.approx(19.889, abs=1e-3)


@settings(max_examples=200, deadline=None)
@given(v=st.floats(12.0, 20.0), chi=st.floats(-np.pi, np.pi), gamma=st.floats(-0.1, 0.1),
       wx=st.floats(-5.0, 5.0), wy=st.floats(-5.0, 5.0), wz=st.floats(-0.5, 0.5))
def test_wind_triangle_round_trip(v, chi, gamma, wx, wy, wz):
    wind = Wind(wx, wy, wz)
    air = wind_triangle(v, chi, gamma, wind)
    ground = np.array([v * np.cos(gamma) * np.cos(chi), v * np.cos(gamma) * np.sin(chi), -v * np.sin(gamma)])
    rebuilt = np.array([air.v_a * np.cos(air.gamma_a) * np.cos(air.psi_A) + wx,
                        air.v_a * np.cos(air.gamma_a) * np.sin(air.psi_A) + wy,
                        -air.v_a * np.sin(air.gamma_a) + wz])
    assert np.max(np.abs(rebuilt - ground)) < 1e-9


def test_wind_triangle_domain_errors():
    with pytest.raises(DomainError):
        wind_triangle(0.0, 0.0, 0.0, Wind(1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        wind_triangle(5.0, 0.0, 0.0, Wind(5.0, 0.0, 0.0))


def test_aero_forces():
    assert aero_forces(0.0, 0.5) == (0.0, 0.0)
    lift, _ = aero_forces(18.0, 0.2978)
    assert lift == pytest.approx(ZAGI.weight, rel=1e-3)
    _, drag = aero_forces(20.0, 0.0)
    assert drag == pytest.approx(0.5 * 1.225 * 400 * 0.2589 * 0.01631, rel=1e-12)
    assert drag == pytest.approx(1.0346, abs=1e-4)


def test_load_factor():
    assert load_factor(ZAGI.weight) == pytest.approx(1.0)
    assert load_factor(0.0) == 0.0
    u1, u3 = trim_level(18.0)
    lift, _ = aero_forces(18.0, u3)
    assert abs(load_factor(lift) - 1.0) < 1e-12


def test_trim_level_values():
    u1, u3 = trim_level(18.0)
    assert u3 == pytest.approx(0.2978, abs=1e-4)
    assert u1 == pytest.approx(1.044, abs=1e-3)
    assert trim_level(20.0)[1] == pytest.approx(0.2413, abs=1e-4)


def test_trim_level_rejects_slow_flight():
    # C_L beyond 0.7 below about 11.74 m/s
    with pytest.raises(InfeasibleTrim):
        trim_level(11.0)
    trim_level(12.0)


def test_trim_level_is_fixed_point():
    u1, u3 = trim_level(18.0)
    x = UavState(0.0, 0.0, -50.0, 18.0, 0.0, 0.0, 0.0)
    rates = uav_dynamics(x, UavInput(u1, 0.0, u3), Wind())
    assert np.allclose(rates[3:], 0.0, atol=1e-12)
    assert rates[0] == pytest.approx(18.0)


def test_trim_descent_values():
    u1, u3 = trim_descent(20.0, 0.0)
    qS = 0.5 * 1.225 * 400 * 0.2589
    assert u3 == pytest.approx(0.2413, abs=1e-4)
    assert u1 == pytest.approx(qS * (0.01631 + 0.04525 * u3 ** 2), rel=1e-12)
    with pytest.raises(InfeasibleTrim):
        trim_descent(20.0, np.deg2rad(-10.0))
    with pytest.raises(DomainError):
        trim_descent(20.0, 0.1)


def test_trim_descent_is_fixed_point():
    gamma = gamma_one()
    u1, u3 = trim_descent(20.0, gamma)
    x = UavState(0.0, 0.0, -50.0, 20.0, gamma, 0.0, 0.0)
    rates = uav_dynamics(x, UavInput(u1, 0.0, u3), Wind())
    assert abs(rates[3]) < 1e-9
    assert abs(rates[4]) < 1e-9


def test_gamma_one():
    assert gamma_one() == pytest.approx(-0.0785, abs=5e-4)
    assert gamma_one(refine=False) == pytest.approx(-0.0785, abs=5e-4)
    u1, _ = trim_descent(20.0, gamma_one())
    assert abs(u1) < 1e-9
    draggy = VehicleParams(C_D0=2 * ZAGI.C_D0)
    assert gamma_one(draggy) < gamma_one()


def test_roll_rate_is_input():
    x = UavState(0.0, 0.0, -50.0, 17.0, 0.02, 0.4, 0.1)
    rates = uav_dynamics(x, UavInput(1.0, 0.05, 0.3), Wind(-4.33, 2.5, 0.0))
    assert rates[6] == pytest.approx(0.05)


def test_ugv_dynamics():
    assert np.allclose(ugv_dynamics(UgvState(0.0, 0.0, 18.0, 0.0), 0.0, 0.0), [18.0, 0.0, 0.0, 0.0])
    assert np.allclose(ugv_dynamics(UgvState(0.0, 0.0, 10.0, np.pi / 2), 1.0, 1.0 / 35.0),
                       [0.0, 10.0, 1.0, 10.0 / 35.0], atol=1e-12)
    assert lateral_acceleration(10.0, 1.0 / 35.0) == pytest.approx(2.857, abs=1e-3)


def test_wrap_angle():
    assert wrap_angle(-np.pi / 2) == pytest.approx(-np.pi / 2)
    assert np.allclose(wrap_angle(np.array([2 * np.pi, -3 * np.pi / 2])), [0.0, np.pi / 2])


def test_roll_limits_and_envelope():
    limit = load_factor_roll_limit(0.0)
    assert limit == pytest.approx(np.arccos(1 / 1.05))
    assert effective_roll_limit(0.0) == pytest.approx(limit)
    env = trim_envelope([20.0], [0.0, gamma_one() - 0.01])
    assert env["feasible"].tolist() == [[True, False]]
    assert env["C_L"][0, 0] == pytest.approx(trim_level(20.0)[1])
    # the zero-thrust boundary itself counts as trimmable
    assert trim_envelope([20.0], [gamma_one()])["feasible"][0, 0]


def test_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(m=0.0)
    with pytest.raises(ValueError):
        UavState(0.0, 0.0, -50.0, -1.0, 0.0, 0.0, 0.0)
