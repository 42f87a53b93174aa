"""
Inequality constraints c(x, u) <= 0 for the UAV, the UGV and the docking
cone, the relaxed log barrier that enforces them inside the solver, and
activity reporting along a trajectory.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .error_space import Curve, CoupledInput, CoupledState
from .models import (DEFAULT_LIMITS, ZAGI, Limits, VehicleParams, Wind, aero_forces, lateral_acceleration,
                     load_factor, wind_triangle)
from .path import Path

logger = logging.getLogger(__name__)

CONSTRAINT_NAMES: Tuple[str, ...] = (
    "airspeed_max", "airspeed_min",
    "load_factor_max", "load_factor_min",
    "gamma_max", "gamma_min",
    "thrust_min", "thrust_max",
    "roll_max", "roll_min",
    "roll_rate_max", "roll_rate_min",
    "lift_coeff_max", "lift_coeff_min",
    "friction_circle",
    "ground",
    "docking_plus", "docking_minus",
)

# fraction of a constraint's span below zero that still counts as active
ACTIVE_EPS = 1e-3


@dataclass(frozen=True)
class BarrierParams:
    delta: float = 0.05
    mu: float = 0.1
    shrink: float = 0.2
    stages: int = 5
    delta_final: float = 1e-3

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("BarrierParams.delta must be positive")
        if not self.mu > 0:
            raise ValueError("BarrierParams.mu must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("BarrierParams.shrink must lie in (0, 1)")
        if self.stages < 1:
            raise ValueError("BarrierParams.stages must be at least 1")
        if not 0 < self.delta_final <= self.delta:
            raise ValueError("BarrierParams.delta_final must lie in (0, delta]")

    def stage(self, index: int) -> Tuple[float, float]:
        """(mu, delta) used in continuation stage `index` (0-based)"""
        factor = self.shrink ** index
        return self.mu * factor, max(self.delta * factor, self.delta_final)

    def to_dict(self) -> Dict[str, float]:
        return {"delta": self.delta, "mu": self.mu, "shrink": self.shrink,
                "stages": self.stages, "delta_final": self.delta_final}


def docking_residual(e_x, e_y, e_z, e_chi, limits: Limits = DEFAULT_LIMITS):
    """(r_plus, r_minus) = +-e_chi - q(e), all in radians"""
    q = ((e_x / limits.ebar_x) ** 2 + (e_y / limits.ebar_y) ** 2
         + (e_z / limits.ebar_z) ** 2 + (e_chi / limits.ebar_chi) ** 2)
    return e_chi - q, -e_chi - q


class ConstraintSet:
    """Ordered, named constraint residuals with their normalization spans"""

    names = CONSTRAINT_NAMES

    def __init__(self, wind: Wind, path: Path, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS):
        self.wind = wind
        self.path = path
        self.params = params
        self.limits = limits
        lim = limits
        self.spans = np.array([
            lim.v_max - lim.v_min, lim.v_max - lim.v_min,
            lim.nlf_max - lim.nlf_min, lim.nlf_max - lim.nlf_min,
            lim.gamma_max - lim.gamma_min, lim.gamma_max - lim.gamma_min,
            lim.u1_max, lim.u1_max,
            2.0 * lim.phi_max, 2.0 * lim.phi_max,
            2.0 * lim.u2_max, 2.0 * lim.u2_max,
            2.0 * lim.u3_max, 2.0 * lim.u3_max,
            lim.a_max ** 2,
            lim.ebar_z,
            1.0, 1.0,
        ])

    def __len__(self) -> int:
        return len(self.names)

    def residuals(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Raw residuals (18, ...) on arrays with the state along axis 0; complex-step safe"""
        e_x, e_y, e_z, e_v, e_gamma, e_chi, e_phi, v_G, s_G = x
        u1, u2, u3, u4 = u
        lim = self.limits
        sigma, chi_G = self.path.heading(s_G)
        air = wind_triangle(e_v + v_G, e_chi + chi_G, e_gamma, self.wind)
        lift, _ = aero_forces(air.v_a, u3, self.params)
        n_lf = load_factor(lift, self.params)
        a_lat = lateral_acceleration(v_G, sigma)
        r_plus, r_minus = docking_residual(e_x, e_y, e_z, e_chi, lim)
        rows = [
            air.v_a - lim.v_max, lim.v_min - air.v_a,
            n_lf - lim.nlf_max, lim.nlf_min - n_lf,
            e_gamma - lim.gamma_max, lim.gamma_min - e_gamma,
            -u1, u1 - lim.u1_max,
            e_phi - lim.phi_max, -e_phi - lim.phi_max,
            u2 - lim.u2_max, -u2 - lim.u2_max,
            u3 - lim.u3_max, -u3 - lim.u3_max,
            u4 ** 2 + a_lat ** 2 - lim.a_max ** 2,
            e_z,
            r_plus, r_minus,
        ]
        return np.stack(np.broadcast_arrays(*rows))

    def normalized(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        spans = self.spans.reshape((-1,) + (1,) * (np.ndim(x) - 1))
        return self.residuals(x, u) / spans


def eval_constraints(x: CoupledState, u: CoupledInput, wind: Wind, path: Path,
                     params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS) -> Dict[str, float]:
    """Named raw residuals at a single point; each is <= 0 iff its inequality holds"""
    values = ConstraintSet(wind, path, params, limits).residuals(x.to_array(), u.to_array())
    return {name: float(v) for name, v in zip(CONSTRAINT_NAMES, values)}


def _log_branch(z, delta):
    return np.where(np.real(z) >= delta, z, delta)


def relaxed_barrier(z, delta: float):
    """beta_delta(z): -log z for z >= delta, quadratic extension below"""
    quad = 0.5 * (((z - 2.0 * delta) / delta) ** 2 - 1.0) - np.log(delta)
    return np.where(np.real(z) >= delta, -np.log(_log_branch(z, delta)), quad)


def relaxed_barrier_prime(z, delta: float):
    quad = (z - 2.0 * delta) / delta ** 2
    return np.where(np.real(z) >= delta, -1.0 / _log_branch(z, delta), quad)


def relaxed_barrier_second(z, delta: float):
    quad = np.full(np.shape(z), 1.0 / delta ** 2)
    return np.where(np.real(z) >= delta, 1.0 / _log_branch(z, delta) ** 2, quad)


def barrier_cost(residuals, mu: float, delta: float) -> Tuple[float, np.ndarray, np.ndarray]:
    """mu * sum beta_delta(-c) and its first and second derivatives with respect to each c"""
    c = np.asarray(residuals, dtype=float)
    value = mu * float(np.sum(relaxed_barrier(-c, delta)))
    grad = -mu * relaxed_barrier_prime(-c, delta)
    hess = mu * relaxed_barrier_second(-c, delta)
    return value, grad, hess


@dataclass(frozen=True)
class ConstraintActivity:
    constraint: str
    intervals: List[Tuple[float, float]]
    worst_residual: float
    worst_time: float

    @property
    def duration(self) -> float:
        return float(sum(t1 - t0 for t0, t1 in self.intervals))

    def to_dict(self) -> dict:
        return {"constraint": self.constraint,
                "intervals": [[float(t0), float(t1)] for t0, t1 in self.intervals],
                "worst_residual": self.worst_residual,
                "worst_time": self.worst_time}


@dataclass(frozen=True)
class ConstraintReport:
    entries: List[ConstraintActivity]

    @property
    def active(self) -> List[ConstraintActivity]:
        return [entry for entry in self.entries if entry.intervals]

    def get(self, name: str) -> ConstraintActivity:
        for entry in self.entries:
            if entry.constraint == name:
                return entry
        raise KeyError(name)

    def active_time_within(self, name: str, t_start: float, t_end: float) -> float:
        """Seconds of [t_start, t_end] during which `name` is active"""
        total = 0.0
        for t0, t1 in self.get(name).intervals:
            total += max(0.0, min(t1, t_end) - max(t0, t_start))
        return total

    @property
    def worst_residual(self) -> float:
        return max(entry.worst_residual for entry in self.entries)

    def to_list(self) -> List[dict]:
        return [entry.to_dict() for entry in self.active]


def _active_intervals(t: np.ndarray, mask: np.ndarray) -> List[Tuple[float, float]]:
    if not np.any(mask):
        return []
    edges = np.diff(mask.astype(int))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(mask.size - 1)
    return [(float(t[i]), float(t[j])) for i, j in zip(starts, ends)]


def constraint_report(traj: Curve, wind: Wind, path: Path, params: VehicleParams = ZAGI,
                      limits: Limits = DEFAULT_LIMITS, eps_active: float = ACTIVE_EPS,
                      t_from: Optional[float] = None) -> ConstraintReport:
    """Active intervals (normalized residual > -eps_active) and the worst normalized residual per constraint"""
    cset = ConstraintSet(wind, path, params, limits)
    normalized = cset.normalized(traj.states.T, traj.inputs.T)
    t = traj.t
    keep = np.ones(t.size, dtype=bool) if t_from is None else t >= t_from
    entries = []
    for name, row in zip(cset.names, normalized):
        row_kept = np.where(keep, row, -np.inf)
        worst = int(np.argmax(row_kept))
        entries.append(ConstraintActivity(
            constraint=name,
            intervals=_active_intervals(t, row_kept > -eps_active),
            worst_residual=float(row_kept[worst]),
            worst_time=float(t[worst]),
        ))
    report = ConstraintReport(entries)
    if report.active:
        logger.info("Active constraints: %s", ", ".join(e.constraint for e in report.active))
    return report
