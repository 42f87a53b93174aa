"""
Vehicle models: parameters, aerodynamic forces, wind triangle, decoupled UAV/UGV
equations of motion and trim analysis.

Every function accepts scalars or numpy arrays (broadcast elementwise) and is
complex-step safe: domain checks look at real parts only.
"""
from dataclasses import dataclass, fields
from typing import Dict, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleTrim

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class VehicleParams:
    """Point-mass airframe parameters (defaults: Zagi flying wing)"""
    m: float = 1.56
    S: float = 0.2589
    rho: float = 1.225
    g: float = 9.81
    C_D0: float = 0.01631
    k_DL: float = 0.04525

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"VehicleParams.{f.name} must be strictly positive")

    @property
    def weight(self) -> float:
        return self.m * self.g

    def to_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Limits:
    """State, input and docking bounds (SI units, radians)"""
    v_min: float = 12.0
    v_max: float = 20.0
    nlf_min: float = 0.95
    nlf_max: float = 1.05
    gamma_min: float = float(np.deg2rad(-6.0))
    gamma_max: float = float(np.deg2rad(10.0))
    u1_max: float = 2.0
    phi_max: float = float(np.deg2rad(24.0))
    u2_max: float = float(np.deg2rad(5.0))
    u3_max: float = 0.7
    a_max: float = 3.0
    ebar_x: float = 30.0
    ebar_y: float = 30.0
    ebar_z: float = 30.0
    ebar_chi: float = float(np.deg2rad(2.0))

    def __post_init__(self):
        if not self.v_min < self.v_max:
            raise ValueError("Limits: v_min must be below v_max")
        if not self.nlf_min < self.nlf_max:
            raise ValueError("Limits: nlf_min must be below nlf_max")
        if not self.gamma_min < 0 < self.gamma_max:
            raise ValueError("Limits: need gamma_min < 0 < gamma_max")
        for name in ("v_min", "u1_max", "phi_max", "u2_max", "u3_max", "a_max",
                     "ebar_x", "ebar_y", "ebar_z", "ebar_chi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Limits.{name} must be strictly positive")

    def to_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Wind:
    """Constant inertial wind velocity"""
    w_x: float = 0.0
    w_y: float = 0.0
    w_z: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.w_x, self.w_y, self.w_z])):
            raise ValueError("Wind components must be finite")

    @property
    def speed(self) -> float:
        return float(np.sqrt(self.w_x ** 2 + self.w_y ** 2 + self.w_z ** 2))

    @property
    def is_calm(self) -> bool:
        return self.w_x == 0.0 and self.w_y == 0.0 and self.w_z == 0.0

    def to_dict(self) -> Dict[str, float]:
        return {"wx": self.w_x, "wy": self.w_y, "wz": self.w_z}


@dataclass(frozen=True)
class UavState:
    x_A: float
    y_A: float
    z_A: float
    v_A: float
    gamma_A: float
    chi_A: float
    phi_A: float

    def __post_init__(self):
        if not self.v_A > 0:
            raise ValueError("UavState.v_A must be positive")

    def to_array(self) -> np.ndarray:
        return np.array([self.x_A, self.y_A, self.z_A, self.v_A, self.gamma_A, self.chi_A, self.phi_A])

    @classmethod
    def from_array(cls, a) -> "UavState":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class UavInput:
    u1: float
    u2: float
    u3: float

    def to_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.u3])


@dataclass(frozen=True)
class UgvState:
    x_G: float
    y_G: float
    v_G: float
    chi_G: float

    def to_array(self) -> np.ndarray:
        return np.array([self.x_G, self.y_G, self.v_G, self.chi_G])

    @classmethod
    def from_array(cls, a) -> "UgvState":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class AirData:
    """Air-relative quantities from the wind triangle (may hold arrays)"""
    v_a: Scalar
    gamma_a: Scalar
    psi_A: Scalar


ZAGI = VehicleParams()
DEFAULT_LIMITS = Limits()

# thrust round-off tolerated at the zero-thrust trim boundary
THRUST_ROUNDOFF = 1e-9


def wrap_angle(angle: Scalar) -> Scalar:
    """Map an angle to (-pi, pi]"""
    wrapped = -((-np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def wind_triangle(v_A: Scalar, chi_A: Scalar, gamma_A: Scalar, wind: Wind) -> AirData:
    """Airspeed, air-mass flight-path angle and heading from ground velocity and wind"""
    if np.any(np.real(v_A) <= 0):
        raise DomainError("wind triangle needs a positive ground speed")
    if wind.is_calm:
        return AirData(v_a=v_A, gamma_a=gamma_A, psi_A=chi_A)

    cg, sg = np.cos(gamma_A), np.sin(gamma_A)
    cc, sc = np.cos(chi_A), np.sin(chi_A)
    v_w2 = wind.w_x ** 2 + wind.w_y ** 2 + wind.w_z ** 2
    v_a2 = v_A ** 2 - 2.0 * v_A * (wind.w_x * cc * cg + wind.w_y * sc * cg - wind.w_z * sg) + v_w2
    if np.any(np.real(v_a2) <= 0):
        raise DomainError("wind triangle: zero airspeed")
    v_a = np.sqrt(v_a2)

    arg_gamma = (v_A * sg + wind.w_z) / v_a
    if np.any(np.abs(np.real(arg_gamma)) > 1.0):
        raise DomainError("wind triangle: vertical wind exceeds airspeed")
    gamma_a = np.arcsin(arg_gamma)

    arg_crab = (-wind.w_x * sc + wind.w_y * cc) / (v_a * np.cos(gamma_a))
    if np.any(np.abs(np.real(arg_crab)) > 1.0):
        raise DomainError("wind triangle: crosswind exceeds horizontal airspeed")
    psi_A = chi_A - np.arcsin(arg_crab)
    return AirData(v_a=v_a, gamma_a=gamma_a, psi_A=psi_A)


def aero_forces(v_a: Scalar, C_L: Scalar, params: VehicleParams = ZAGI) -> Tuple[Scalar, Scalar]:
    """Lift and drag (N) for airspeed v_a and lift coefficient C_L"""
    qS = 0.5 * params.rho * v_a ** 2 * params.S
    lift = qS * C_L
    drag = qS * (params.C_D0 + params.k_DL * C_L ** 2)
    return lift, drag


def load_factor(lift: Scalar, params: VehicleParams = ZAGI) -> Scalar:
    return lift / params.weight


def uav_rhs(x: np.ndarray, u: np.ndarray, wind: Wind, params: VehicleParams = ZAGI) -> np.ndarray:
    """Right-hand side of the 7-state UAV model on raw arrays (state along axis 0)"""
    _, _, _, v_A, gamma_A, chi_A, phi_A = x
    u1, u2, u3 = u
    cg = np.cos(gamma_A)
    if np.any(np.real(v_A * cg) == 0):
        raise DomainError("course rate singular: v_A cos(gamma_A) = 0")
    air = wind_triangle(v_A, chi_A, gamma_A, wind)
    lift, drag = aero_forces(air.v_a, u3, params)
    m, g = params.m, params.g
    rates = [
        v_A * np.cos(chi_A) * cg,
        v_A * np.sin(chi_A) * cg,
        -v_A * np.sin(gamma_A),
        (u1 - drag) / m - g * np.sin(gamma_A),
        (lift * np.cos(phi_A) / m - g * cg) / v_A,
        lift * np.sin(phi_A) * np.cos(chi_A - air.psi_A) / (m * v_A * cg),
        u2 + 0.0 * v_A,
    ]
    return np.stack(np.broadcast_arrays(*rates))


def uav_dynamics(x: UavState, u: UavInput, wind: Wind, params: VehicleParams = ZAGI) -> np.ndarray:
    """Time derivative of the UAV state (7 components)"""
    return uav_rhs(x.to_array(), u.to_array(), wind, params)


def ugv_rhs(x: np.ndarray, u4: Scalar, sigma: Scalar) -> np.ndarray:
    _, _, v_G, chi_G = x
    rates = [v_G * np.cos(chi_G), v_G * np.sin(chi_G), u4 + 0.0 * v_G, v_G * sigma]
    return np.stack(np.broadcast_arrays(*rates))


def ugv_dynamics(x: UgvState, u4: float, sigma: float) -> np.ndarray:
    """Time derivative of the UGV state (4 components)"""
    return ugv_rhs(x.to_array(), u4, sigma)


def lateral_acceleration(v_G: Scalar, sigma: Scalar) -> Scalar:
    return v_G ** 2 * sigma


def trim_level(v_a: float, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS) -> Tuple[float, float]:
    """Thrust and lift coefficient holding wings-level, constant-altitude flight at airspeed v_a"""
    if v_a <= 0:
        raise DomainError("trim needs a positive airspeed")
    u3 = 2.0 * params.weight / (params.rho * params.S * v_a ** 2)
    u1 = 0.5 * params.rho * v_a ** 2 * params.S * (params.C_D0 + params.k_DL * u3 ** 2)
    if u1 > limits.u1_max:
        raise InfeasibleTrim(f"level trim at v_a={v_a:.3f} m/s needs thrust {u1:.4f} N > u1_max")
    if u3 > limits.u3_max:
        raise InfeasibleTrim(f"level trim at v_a={v_a:.3f} m/s needs C_L {u3:.4f} > u3_max")
    return float(u1), float(u3)


def level_trim_for_ground_speed(v_A: float, chi_A: float, wind: Wind, params: VehicleParams = ZAGI,
                                limits: Limits = DEFAULT_LIMITS) -> Tuple[float, float, float]:
    """Level trim under wind: returns (u1, u3, v_a) for ground speed v_A on course chi_A"""
    v_a = float(np.real(wind_triangle(v_A, chi_A, 0.0, wind).v_a))
    u1, u3 = trim_level(v_a, params, limits)
    return u1, u3, v_a


def trim_descent(v_a: float, gamma_A: float, params: VehicleParams = ZAGI) -> Tuple[float, float]:
    """Thrust and lift coefficient for a wings-level constant descent at airspeed v_a"""
    if gamma_A > 0:
        raise DomainError("trim_descent expects a non-positive flight-path angle")
    qS = 0.5 * params.rho * params.S * v_a ** 2
    u3 = params.weight * np.cos(gamma_A) / qS
    u1 = params.weight * np.sin(gamma_A) + qS * (params.C_D0 + params.k_DL * u3 ** 2)
    if u1 < -THRUST_ROUNDOFF:
        raise InfeasibleTrim(f"descent at gamma={np.rad2deg(gamma_A):.3f} deg needs negative thrust {u1:.4f} N")
    # round-off at the zero-thrust boundary
    return float(max(u1, 0.0)), float(u3)


def descent_trim_thrust(gamma_A: Scalar, v_a: Scalar, params: VehicleParams = ZAGI) -> Scalar:
    """Signed thrust of a wings-level descent trim (negative where the descent is too steep)"""
    qS = 0.5 * params.rho * params.S * v_a ** 2
    u3 = params.weight * np.cos(gamma_A) / qS
    return params.weight * np.sin(gamma_A) + qS * (params.C_D0 + params.k_DL * u3 ** 2)


def gamma_one(params: VehicleParams = ZAGI, v_max: float = DEFAULT_LIMITS.v_max, refine: bool = True) -> float:
    """Steepest descent flight-path angle reachable with zero thrust at v_max.

    refine=False returns the small-angle closed form; refine=True polishes it to the
    exact zero of the descent-trim thrust.
    """
    qS = 0.5 * params.rho * params.S * v_max ** 2
    c_lift = params.weight / qS
    closed_form = -(qS / params.weight) * (params.C_D0 + params.k_DL * c_lift ** 2)
    if not refine:
        return float(closed_form)
    return float(brentq(descent_trim_thrust, closed_form - 0.1, 0.0, args=(v_max, params), xtol=1e-15, rtol=1e-15))


def load_factor_roll_limit(gamma_A: float, limits: Limits = DEFAULT_LIMITS) -> float:
    """Largest roll compatible with a constant descent at n_lf_max: arccos(cos(gamma)/n_lf_max)"""
    return float(np.arccos(np.clip(np.cos(gamma_A) / limits.nlf_max, -1.0, 1.0)))


def effective_roll_limit(gamma_A: float, limits: Limits = DEFAULT_LIMITS) -> float:
    return min(limits.phi_max, load_factor_roll_limit(gamma_A, limits))


def trim_envelope(airspeeds, gammas, params: VehicleParams = ZAGI) -> Dict[str, np.ndarray]:
    """Descent-trim lift coefficient and thrust over an airspeed x flight-path grid"""
    v = np.asarray(airspeeds, dtype=float)[:, None]
    gam = np.asarray(gammas, dtype=float)[None, :]
    qS = 0.5 * params.rho * params.S * v ** 2
    c_lift = params.weight * np.cos(gam) / qS
    thrust = params.weight * np.sin(gam) + qS * (params.C_D0 + params.k_DL * c_lift ** 2)
    return {"C_L": c_lift, "u1": thrust, "feasible": thrust >= -THRUST_ROUNDOFF}
