"""
Error coordinates attached to the UGV velocity frame, the coupled 9-state
UAV-UGV dynamics, linearization and fixed-step RK4 integration.

Raw arrays carry the state along axis 0 inside the right-hand sides
(shape (9,) or (9, N)) and along the last axis in stored sequences
(shape (N+1, 9)).
"""
import logging
from dataclasses import dataclass, field, fields
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, RangeError
from .models import (ZAGI, UgvState, VehicleParams, Wind, aero_forces, lateral_acceleration, load_factor, uav_rhs,
                     ugv_rhs, wind_triangle, wrap_angle)
from .path import Path

logger = logging.getLogger(__name__)

STATE_NAMES = ("e_x", "e_y", "e_z", "e_v", "e_gamma", "e_chi", "e_phi", "v_G", "s_G")
INPUT_NAMES = ("u1", "u2", "u3", "u4")
N_X = len(STATE_NAMES)
N_U = len(INPUT_NAMES)
CSV_COLUMNS = ("t",) + STATE_NAMES + INPUT_NAMES + ("x_A", "y_A", "z_A", "v_a", "n_lf")

Rhs = Callable[[np.ndarray, np.ndarray], np.ndarray]
InputSignal = Union[np.ndarray, Callable[[float], np.ndarray], "CoupledInput"]


@dataclass(frozen=True)
class CoupledState:
    e_x: float
    e_y: float
    e_z: float
    e_v: float
    e_gamma: float
    e_chi: float
    e_phi: float
    v_G: float
    s_G: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    @classmethod
    def from_array(cls, a) -> "CoupledState":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class CoupledInput:
    u1: float
    u2: float
    u3: float
    u4: float

    def to_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.u3, self.u4], dtype=float)

    @classmethod
    def from_array(cls, a) -> "CoupledInput":
        return cls(*(float(v) for v in a))


def _frozen(values, shape_tail: Tuple[int, ...], name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape[1:] != shape_tail:
        raise ValueError(f"{name} must have shape (N+1, {shape_tail[0]}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Curve:
    """State-input pair on a uniform time grid with no feasibility requirement"""
    t: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    ugv0: Optional[UgvState] = field(default=None, compare=False)

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least two nodes")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "states", _frozen(self.states, (N_X,), "states"))
        object.__setattr__(self, "inputs", _frozen(self.inputs, (N_U,), "inputs"))
        if self.states.shape[0] != t.size or self.inputs.shape[0] != t.size:
            raise ValueError("state and input sequences must match the time grid")

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def n_nodes(self) -> int:
        return self.t.size

    def state(self, k: int) -> CoupledState:
        return CoupledState.from_array(self.states[k])

    def input(self, k: int) -> CoupledInput:
        return CoupledInput.from_array(self.inputs[k])

    def column(self, name: str) -> np.ndarray:
        if name in STATE_NAMES:
            return self.states[:, STATE_NAMES.index(name)]
        return self.inputs[:, INPUT_NAMES.index(name)]


@dataclass(frozen=True)
class Trajectory(Curve):
    """Curve whose states satisfy the coupled dynamics under the stored inputs"""


def time_grid(T: float, h: float, t_start: float = 0.0) -> np.ndarray:
    """Uniform grid from t_start covering T (end rounded up to the grid)"""
    if h <= 0:
        raise ValueError("grid step must be positive")
    n_steps = int(np.ceil((T - t_start) / h - 1e-9))
    return t_start + h * np.arange(n_steps + 1)


def rotation_z(chi: float) -> np.ndarray:
    c, s = np.cos(chi), np.sin(chi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def error_to_inertial(e, ugv: UgvState) -> np.ndarray:
    """Inertial UAV position p_A = p_G + R_z(chi_G) e (the UGV rides at z = 0)"""
    return np.array([ugv.x_G, ugv.y_G, 0.0]) + rotation_z(ugv.chi_G) @ np.asarray(e, dtype=float)


def inertial_to_error(p_A, ugv: UgvState) -> np.ndarray:
    """Error vector e = R_z(chi_G)^T (p_A - p_G)"""
    return rotation_z(ugv.chi_G).T @ (np.asarray(p_A, dtype=float) - np.array([ugv.x_G, ugv.y_G, 0.0]))


def coupled_rhs(x: np.ndarray, u: np.ndarray, wind: Wind, path: Path, params: VehicleParams = ZAGI) -> np.ndarray:
    """Coupled error-space dynamics on raw arrays (state along axis 0)"""
    e_x, e_y, _, e_v, e_gamma, e_chi, e_phi, v_G, s_G = x
    u1, u2, u3, u4 = u
    v_A = e_v + v_G
    cg = np.cos(e_gamma)
    if np.any(np.real(v_A) <= 0):
        raise DomainError("UAV ground speed e_v + v_G must stay positive")
    if np.any(np.real(cg) == 0):
        raise DomainError("flight-path error at +-pi/2 makes the course rate singular")

    sigma, chi_G = path.heading(s_G)
    chi_A = e_chi + chi_G
    air = wind_triangle(v_A, chi_A, e_gamma, wind)
    lift, drag = aero_forces(air.v_a, u3, params)
    m, g = params.m, params.g
    # crab factor: cos(chi_A - psi_A)
    crab = np.cos(chi_A - air.psi_A)

    rates = [
        v_A * np.cos(e_chi) * cg - (1.0 - sigma * e_y) * v_G,
        v_A * np.sin(e_chi) * cg - e_x * sigma * v_G,
        -v_A * np.sin(e_gamma),
        (u1 - drag) / m - g * np.sin(e_gamma) - u4,
        (lift * np.cos(e_phi) / m - g * cg) / v_A,
        lift * np.sin(e_phi) * crab / (m * v_A * cg) - sigma * v_G,
        u2 + 0.0 * v_A,
        u4 + 0.0 * v_A,
        v_G + 0.0 * v_A,
    ]
    return np.stack(np.broadcast_arrays(*rates))


def coupled_dynamics(x: CoupledState, u: CoupledInput, wind: Wind, path: Path,
                     params: VehicleParams = ZAGI) -> np.ndarray:
    """Time derivative of the coupled state (9 components)"""
    return coupled_rhs(x.to_array(), u.to_array(), wind, path, params)


def rk4_step(rhs: Rhs, x: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    """Classical RK4 step with the input held over the step"""
    k1 = rhs(x, u)
    k2 = rhs(x + 0.5 * h * k1, u)
    k3 = rhs(x + 0.5 * h * k2, u)
    k4 = rhs(x + h * k3, u)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _sample_inputs(inputs: InputSignal, t: np.ndarray) -> np.ndarray:
    if isinstance(inputs, CoupledInput):
        return np.tile(inputs.to_array(), (t.size, 1))
    if callable(inputs):
        return np.array([np.asarray(inputs(tk), dtype=float) for tk in t])
    arr = np.asarray(inputs, dtype=float)
    if arr.shape == (N_U,):
        return np.tile(arr, (t.size, 1))
    if arr.shape != (t.size, N_U):
        raise ValueError(f"input sequence must have shape ({t.size}, {N_U}), got {arr.shape}")
    return arr


def integrate_rhs(rhs: Rhs, x0: np.ndarray, inputs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Roll a right-hand side forward over the grid; returns states of shape (N+1, n)"""
    h = float(t[1] - t[0])
    states = np.empty((t.size, np.size(x0)))
    states[0] = x0
    for k in range(t.size - 1):
        try:
            states[k + 1] = rk4_step(rhs, states[k], inputs[k], h)
        except DomainError as e:
            raise DomainError(f"integration failed: {e}", time=float(t[k])) from e
        except RangeError as e:
            raise RangeError(f"integration failed at t={t[k]:.3f}s: {e}") from e
    return states


def integrate(x0: CoupledState, inputs: InputSignal, grid: np.ndarray, wind: Wind, path: Path,
              params: VehicleParams = ZAGI) -> Trajectory:
    """Fixed-step RK4 integration of the coupled dynamics over `grid`"""
    t = np.asarray(grid, dtype=float)
    u = _sample_inputs(inputs, t)
    x0_arr = x0.to_array() if isinstance(x0, CoupledState) else np.asarray(x0, dtype=float)
    states = integrate_rhs(lambda x, uu: coupled_rhs(x, uu, wind, path, params), x0_arr, u, t)
    sigma, chi, x_G, y_G = path.lookup(float(x0_arr[8]))
    return Trajectory(t, states, u, ugv0=UgvState(float(x_G), float(y_G), float(x0_arr[7]), float(chi)))


def complex_step_jacobian(fun: Rhs, x: np.ndarray, u: np.ndarray, eps: float = 1e-20) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobians of fun(x, u) by complex-step differentiation.

    x has shape (n,) or (N, n) and u (m,) or (N, m); fun takes the
    transposed layout (state along axis 0). Returns (dF/dx, dF/du) with
    shapes (..., p, n) and (..., p, m).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    n = x.shape[-1]
    z = np.concatenate([x, u], axis=-1).astype(complex)
    columns = []
    for j in range(z.shape[-1]):
        zp = z.copy()
        zp[..., j] += 1j * eps
        columns.append(np.imag(fun(zp[..., :n].T, zp[..., n:].T)).T / eps)
    jac = np.stack(columns, axis=-1)
    return jac[..., :n], jac[..., n:]


def central_difference_jacobian(fun: Rhs, x: np.ndarray, u: np.ndarray, step: float = 1e-6) -> Tuple[np.ndarray, np.ndarray]:
    """Central finite-difference Jacobians of fun(x, u) at a single point"""
    x = np.asarray(x, dtype=float)
    z = np.concatenate([x, np.asarray(u, dtype=float)])
    n = x.size
    columns = []
    for j in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[j] += step
        zm[j] -= step
        columns.append((fun(zp[:n], zp[n:]) - fun(zm[:n], zm[n:])) / (2.0 * step))
    jac = np.stack(columns, axis=-1)
    return jac[:, :n], jac[:, n:]


def linearize(x: CoupledState, u: CoupledInput, wind: Wind, path: Path,
              params: VehicleParams = ZAGI) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous-time Jacobians (A: 9x9, B: 9x4) of the coupled dynamics"""
    return complex_step_jacobian(lambda xx, uu: coupled_rhs(xx, uu, wind, path, params),
                                 x.to_array(), u.to_array())


def reintegration_defect(curve: Curve, wind: Wind, path: Path, params: VehicleParams = ZAGI) -> np.ndarray:
    """Per-step max-norm defect |RK4(x_k, u_k) - x_{k+1}|"""
    xs = curve.states[:-1].T
    us = curve.inputs[:-1].T
    predicted = rk4_step(lambda x, u: coupled_rhs(x, u, wind, path, params), xs, us, curve.h).T
    return np.max(np.abs(predicted - curve.states[1:]), axis=1)


def reconstruct(curve: Curve, wind: Wind, path: Path, params: VehicleParams = ZAGI) -> dict:
    """Inertial UAV position, airspeed and load factor at every node"""
    x = curve.states.T
    sigma, chi_G, x_G, y_G = path.lookup(x[8])
    c, s = np.cos(chi_G), np.sin(chi_G)
    x_A = x_G + c * x[0] - s * x[1]
    y_A = y_G + s * x[0] + c * x[1]
    air = wind_triangle(x[3] + x[7], x[5] + chi_G, x[4], wind)
    lift, _ = aero_forces(air.v_a, curve.inputs[:, 2], params)
    return {
        "x_A": x_A, "y_A": y_A, "z_A": x[2].copy(),
        "x_G": x_G, "y_G": y_G, "chi_G": chi_G, "sigma": sigma,
        "v_a": air.v_a, "n_lf": load_factor(lift, params),
        "chi_A": x[5] + chi_G, "psi_A": air.psi_A,
    }


def trajectory_table(curve: Curve, wind: Wind, path: Path, params: VehicleParams = ZAGI) -> Tuple[List[str], np.ndarray]:
    """CSV header and rows: t, states, inputs, reconstructed diagnostics"""
    diag = reconstruct(curve, wind, path, params)
    rows = np.column_stack([curve.t, curve.states, curve.inputs,
                            diag["x_A"], diag["y_A"], diag["z_A"], diag["v_a"], diag["n_lf"]])
    return list(CSV_COLUMNS), rows


def decoupled_initial_states(x0: CoupledState, path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """UAV (7) and UGV (x_G, y_G, v_G, chi_G, s_G) states matching a coupled state"""
    _, chi_G, x_G, y_G = path.lookup(x0.s_G)
    ugv = UgvState(float(x_G), float(y_G), x0.v_G, float(chi_G))
    p_A = error_to_inertial([x0.e_x, x0.e_y, x0.e_z], ugv)
    uav = np.array([p_A[0], p_A[1], p_A[2], x0.e_v + x0.v_G, x0.e_gamma, x0.e_chi + ugv.chi_G, x0.e_phi])
    return uav, np.array([ugv.x_G, ugv.y_G, ugv.v_G, ugv.chi_G, x0.s_G])


def decoupled_to_error(uav: np.ndarray, ugv: np.ndarray) -> np.ndarray:
    """Map decoupled sequences (N, 7) and (N, 5) into error coordinates (N, 9)"""
    chi_G = ugv[:, 3]
    c, s = np.cos(chi_G), np.sin(chi_G)
    dx, dy = uav[:, 0] - ugv[:, 0], uav[:, 1] - ugv[:, 1]
    return np.column_stack([
        c * dx + s * dy, -s * dx + c * dy, uav[:, 2],
        uav[:, 3] - ugv[:, 2], uav[:, 4], wrap_angle(uav[:, 5] - chi_G), uav[:, 6],
        ugv[:, 2], ugv[:, 4],
    ])


def equivalence_check(x0: CoupledState, inputs: InputSignal, duration: float, wind: Wind, path: Path,
                      params: VehicleParams = ZAGI, h: float = 0.01) -> float:
    """Max deviation between the coupled model and the transformed decoupled UAV + UGV models"""
    if duration <= 0:
        return 0.0
    t = time_grid(duration, h)
    u = _sample_inputs(inputs, t)
    coupled = integrate(x0, u, t, wind, path, params).states

    uav0, ugv0 = decoupled_initial_states(x0, path)

    def decoupled_rhs(z, uu):
        sigma, _ = path.heading(z[11])
        uav_rates = uav_rhs(z[:7], uu[:3], wind, params)
        ugv_rates = ugv_rhs(z[7:11], uu[3], sigma)
        return np.concatenate([uav_rates, ugv_rates, [z[9]]])

    joint = integrate_rhs(decoupled_rhs, np.concatenate([uav0, ugv0]), u, t)
    deviation = decoupled_to_error(joint[:, :7], joint[:, 7:]) - coupled
    deviation[:, 5] = wrap_angle(deviation[:, 5])
    return float(np.max(np.abs(deviation)))


PLOT_COLUMNS = ("t [s]", "height [m]", "e_v [m/s]", "e_gamma [deg]", "u1 [N]", "u3 [-]", "n_lf [-]",
                "e_y [m]", "phi_A [deg]", "a_lon [m/s^2]", "a_lat [m/s^2]")


def plot_table(curve: Curve, wind: Wind, path: Path, params: VehicleParams = ZAGI) -> Tuple[List[str], np.ndarray]:
    """Plot-ready series with unit-carrying headers; angles in degrees"""
    diag = reconstruct(curve, wind, path, params)
    x, u = curve.states, curve.inputs
    rows = np.column_stack([
        curve.t, -x[:, 2], x[:, 3], np.rad2deg(x[:, 4]), u[:, 0], u[:, 2], diag["n_lf"],
        x[:, 1], np.rad2deg(x[:, 6]), u[:, 3], lateral_acceleration(x[:, 7], diag["sigma"]),
    ])
    return list(PLOT_COLUMNS), rows
