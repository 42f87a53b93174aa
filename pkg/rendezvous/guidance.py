"""
Rendezvous guidance: aggressiveness-indexed descent angle, rendezvous space,
desired speed and altitude profiles, the space-to-time map, the closed-form
rendezvous time, the desired curve and the feasible initial trajectory.
"""
import logging
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np

from .error_space import N_U, N_X, CoupledState, Curve, Trajectory, inertial_to_error, integrate, time_grid
from .errors import DomainError, ValidationError
from .models import (DEFAULT_LIMITS, ZAGI, Limits, UgvState, VehicleParams, Wind, descent_trim_thrust,
                     gamma_one, level_trim_for_ground_speed, wrap_angle)
from .path import Path

logger = logging.getLogger(__name__)

# horizon margin over the gentlest maneuver
HORIZON_FACTOR = 1.3


@dataclass(frozen=True)
class RendezvousSpec:
    k_aggr: float = 0.0
    z0: float = -50.0
    s_f: float = 2000.0
    v0: float = 18.0
    vf: float = 13.8
    t0: float = 50.0
    T: Optional[float] = None

    def validate(self, limits: Limits = DEFAULT_LIMITS) -> "RendezvousSpec":
        if not 0.0 <= self.k_aggr <= 1.0:
            raise ValidationError("k_aggr", "k_aggr out of [0,1]")
        if not self.z0 < 0:
            raise ValidationError("z0", "initial altitude coordinate must be negative (above ground)")
        if not self.s_f > 0:
            raise ValidationError("s_f", "maximum rendezvous space must be positive")
        if abs(self.z0) > self.s_f:
            raise ValidationError("z0", f"|z0|={abs(self.z0)} exceeds s_f={self.s_f}")
        if not self.v0 > 0:
            raise ValidationError("v0", "initial ground speed must be positive")
        if self.vf < limits.v_min:
            raise ValidationError("vf", f"vf={self.vf} is below v_min={limits.v_min}")
        if self.vf > self.v0:
            raise ValidationError("vf", f"vf={self.vf} must not exceed v0={self.v0}")
        if self.t0 < 0:
            raise ValidationError("t0", "maneuver start must be non-negative")
        if self.T is not None and not self.t0 < self.T:
            raise ValidationError("T", f"horizon end {self.T} must follow t0={self.t0}")
        return self

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


def gamma_zero(z0: float, s_f: float) -> float:
    """Gentlest descent angle reaching the ground exactly at s_f"""
    if abs(z0) > s_f:
        raise DomainError(f"gamma_zero needs |z0| <= s_f (got z0={z0}, s_f={s_f})")
    return float(np.arcsin(z0 / s_f))


def desired_gamma(k_aggr: float, gamma0: float, gamma1: float) -> float:
    if not 0.0 <= k_aggr <= 1.0:
        raise ValidationError("k_aggr", "k_aggr out of [0,1]")
    return k_aggr * gamma1 + (1.0 - k_aggr) * gamma0


def rendezvous_space(z0: float, gamma_d: float) -> float:
    """UGV arc length over which the desired descent reaches e_z = 0"""
    if gamma_d >= 0:
        raise DomainError("rendezvous_space needs a descending flight-path angle")
    if z0 >= 0:
        raise DomainError("rendezvous_space needs z0 < 0")
    return float(z0 / np.sin(gamma_d))


@dataclass(frozen=True)
class DesiredProfiles:
    """Space-indexed altitude and speed targets and their time parametrization"""
    gamma0: float
    gamma1: float
    gamma_d: float
    s_r: float
    z0: float
    v0: float
    vf: float

    @property
    def degenerate(self) -> bool:
        return abs(self.vf - self.v0) < 1e-12

    @property
    def rate(self) -> float:
        """dv/ds of the affine speed profile"""
        return (self.vf - self.v0) / self.s_r

    def e_z_d(self, s_G):
        s = np.minimum(s_G, self.s_r)
        return self.z0 - s * np.sin(self.gamma_d)

    def v_d(self, s_G):
        s = np.minimum(s_G, self.s_r)
        return self.v0 + self.rate * s

    def t_of_s(self, s_G):
        s = np.asarray(s_G, dtype=float)
        if self.degenerate:
            return s / self.v0
        return np.log(self.v_d(s) / self.v0) / self.rate

    def s_of_t(self, t):
        """Inverse of t_of_s on [0, T_r_d]"""
        tau = np.asarray(t, dtype=float)
        if self.degenerate:
            return self.v0 * tau
        return self.v0 * (np.exp(self.rate * tau) - 1.0) / self.rate

    def v_of_t(self, t):
        tau = np.asarray(t, dtype=float)
        if self.degenerate:
            return np.full_like(tau, self.v0)
        return self.v0 * np.exp(self.rate * tau)

    @property
    def T_r_d(self) -> float:
        if self.degenerate:
            return self.s_r / self.v0
        return float(self.s_r / (self.vf - self.v0) * np.log(self.vf / self.v0))

    def to_dict(self) -> Dict[str, float]:
        return {"gamma0": self.gamma0, "gamma1": self.gamma1, "gamma_d": self.gamma_d,
                "s_r": self.s_r, "T_r_d": self.T_r_d}


def desired_profiles(spec: RendezvousSpec, params: VehicleParams = ZAGI,
                     limits: Limits = DEFAULT_LIMITS) -> DesiredProfiles:
    g0 = gamma_zero(spec.z0, spec.s_f)
    g1 = gamma_one(params, limits.v_max)
    gd = desired_gamma(spec.k_aggr, g0, g1)
    return DesiredProfiles(gamma0=g0, gamma1=g1, gamma_d=gd, s_r=rendezvous_space(spec.z0, gd),
                           z0=spec.z0, v0=spec.v0, vf=spec.vf)


def desired_speed(s_G, spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS):
    return desired_profiles(spec, params, limits).v_d(s_G)


def space_to_time(s_G, spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS):
    """Maneuver time at which the desired profile reaches arc length s_G (measured from t0)"""
    return desired_profiles(spec, params, limits).t_of_s(s_G)


def time_to_space(t, spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS):
    return desired_profiles(spec, params, limits).s_of_t(t)


def predicted_time(spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS) -> float:
    """Closed-form desired rendezvous time T_r^d"""
    return desired_profiles(spec, params, limits).T_r_d


def descent_thrust(spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS) -> float:
    """Trim thrust of the desired descent at airspeed v0 (negative when the descent cannot be held)"""
    gd = desired_profiles(spec, params, limits).gamma_d
    return float(descent_trim_thrust(gd, spec.v0, params))


def resolved_horizon(spec: RendezvousSpec, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS) -> float:
    """Horizon end: explicit T, or t0 plus a margin over the k_aggr = 0 rendezvous time"""
    if spec.T is not None:
        return spec.T
    gentlest = RendezvousSpec(0.0, spec.z0, spec.s_f, spec.v0, spec.vf, spec.t0)
    return spec.t0 + HORIZON_FACTOR * predicted_time(gentlest, params, limits)


def horizon_grid(spec: RendezvousSpec, h: float, params: VehicleParams = ZAGI,
                 limits: Limits = DEFAULT_LIMITS) -> np.ndarray:
    return time_grid(resolved_horizon(spec, params, limits), h)


def desired_schedule(t: np.ndarray, spec: RendezvousSpec, profiles: DesiredProfiles) -> Dict[str, np.ndarray]:
    """Time-indexed e_z^d, v_G^d and maneuver arc length (from the start of the maneuver)"""
    tau = np.asarray(t, dtype=float) - spec.t0
    T_r = profiles.T_r_d
    during = np.clip(tau, 0.0, T_r)
    s_man = np.where(tau < 0.0, 0.0, profiles.s_of_t(during))
    s_man = np.where(tau > T_r, profiles.s_r + spec.vf * (tau - T_r), s_man)
    v = np.where(tau < 0.0, spec.v0, profiles.v_of_t(during))
    v = np.where(tau > T_r, spec.vf, v)
    s_lead = spec.v0 * np.minimum(np.asarray(t, dtype=float), spec.t0)
    return {
        "e_z": np.where(tau < 0.0, spec.z0, profiles.e_z_d(s_man)),
        "v_G": v,
        "s_G": s_lead + s_man,
    }


def desired_curve(spec: RendezvousSpec, path: Path, wind: Wind, params: VehicleParams = ZAGI,
                  limits: Limits = DEFAULT_LIMITS, grid: Optional[np.ndarray] = None, h: float = 0.05) -> Curve:
    """Desired state-input curve over the horizon grid (not a trajectory)"""
    t = horizon_grid(spec, h, params, limits) if grid is None else np.asarray(grid, dtype=float)
    profiles = desired_profiles(spec, params, limits)
    sched = desired_schedule(t, spec, profiles)
    path = path.extended(float(sched["s_G"][-1]))

    states = np.zeros((t.size, N_X))
    states[:, 2] = sched["e_z"]
    states[:, 7] = sched["v_G"]
    states[:, 8] = sched["s_G"]

    _, chi_G = path.heading(sched["s_G"])
    inputs = np.zeros((t.size, N_U))
    airspeeds = np.empty(t.size)
    for k, (v, chi) in enumerate(zip(sched["v_G"], chi_G)):
        inputs[k, 0], inputs[k, 2], airspeeds[k] = level_trim_for_ground_speed(float(v), float(chi), wind,
                                                                               params, limits)

    if np.any(airspeeds > limits.v_max) or np.any(airspeeds < limits.v_min):
        logger.warning("WARNING: desired airspeed leaves [%.1f, %.1f] m/s (range %.2f..%.2f)",
                       limits.v_min, limits.v_max, airspeeds.min(), airspeeds.max())
    _, chi0, x0, y0 = path.lookup(0.0)
    return Curve(t, states, inputs, ugv0=UgvState(float(x0), float(y0), spec.v0, float(chi0)))


def initial_trajectory(spec: RendezvousSpec, path: Path, wind: Wind, params: VehicleParams = ZAGI,
                       limits: Limits = DEFAULT_LIMITS, uav_pose: Tuple[float, float, Optional[float]] = (0.0, 0.0, None),
                       grid: Optional[np.ndarray] = None, h: float = 0.05) -> Trajectory:
    """Level flight at z0 and constant course for the UAV, constant speed v0 along the path for the UGV.

    uav_pose is (x_A, y_A, chi_A); chi_A=None uses the path heading at its start.
    """
    t = horizon_grid(spec, h, params, limits) if grid is None else np.asarray(grid, dtype=float)
    path = path.extended(spec.v0 * float(t[-1]))
    _, chi_G0, x_G0, y_G0 = path.lookup(0.0)
    x_A, y_A, chi_A = uav_pose
    chi_A = float(chi_G0) if chi_A is None else float(chi_A)

    ugv0 = UgvState(float(x_G0), float(y_G0), spec.v0, float(chi_G0))
    e = inertial_to_error([x_A, y_A, spec.z0], ugv0)
    x0 = CoupledState(e[0], e[1], e[2], 0.0, 0.0, wrap_angle(chi_A - ugv0.chi_G), 0.0, spec.v0, 0.0)

    u1, u3, v_a = level_trim_for_ground_speed(spec.v0, chi_A, wind, params, limits)
    logger.info("Initial trajectory: level trim u1=%.4f N, C_L=%.4f at airspeed %.2f m/s", u1, u3, v_a)
    return integrate(x0, np.array([u1, 0.0, u3, 0.0]), t, wind, path, params)
