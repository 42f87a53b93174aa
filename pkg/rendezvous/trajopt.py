"""
Constrained trajectory-tracking optimizer.

Newton descent in the space of trajectories: an LQR feedback closes the
projection operator that maps any state-input curve onto the dynamics, a
discrete LQ subproblem gives the search direction, Armijo backtracking picks
the step, and a relaxed log barrier with continuation enforces the
inequality constraints. Everything is posed on the RK4 step map of the
chosen model, so accepted iterates are exact discrete trajectories.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .constraints import BarrierParams, ConstraintSet, barrier_cost, constraint_report, relaxed_barrier
from .error_space import (N_U, N_X, STATE_NAMES, Curve, Trajectory, complex_step_jacobian, coupled_rhs,
                          rk4_step)
from .errors import DomainError, MaxIterations, RangeError, SolverError
from .guidance import desired_curve, horizon_grid, initial_trajectory, predicted_time
from .models import DEFAULT_LIMITS, ZAGI, Limits, VehicleParams, Wind
from .path import Path

if TYPE_CHECKING:
    from .scenarios import Scenario

logger = logging.getLogger(__name__)

# tracking weights over (e_x .. s_G) and (u1 .. u4); their overall scale sets how much the
# barrier outweighs tracking once a constraint is reached
DEFAULT_Q = (0.01, 0.01, 0.04, 0.005, 0.1, 0.1, 0.01, 0.001, 0.0)
DEFAULT_R = (0.005, 0.5, 0.5, 0.005)

# projection feedback weights, independent of the tracking weights
PROJECTION_Q = (1.1, 1.1, 4.1, 0.6, 10.1, 10.1, 1.1, 0.2, 0.0)
PROJECTION_R = (0.5, 50.0, 50.0, 0.5)

# below this height error the UAV counts as landed
RENDEZVOUS_TOL = 0.1

S_G = STATE_NAMES.index("s_G")


def _diagonal(values, size: int, name: str, positive: bool = False) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) != size:
        raise ValueError(f"{name} needs {size} diagonal entries, got {len(values)}")
    if positive and not all(v > 0 for v in values):
        raise ValueError(f"{name} entries must be strictly positive")
    if not all(v >= 0 for v in values):
        raise ValueError(f"{name} entries must be nonnegative")
    return values


@dataclass(frozen=True)
class Weights:
    """Diagonal tracking weights; fixed for every scenario of a run"""
    Q: Tuple[float, ...] = DEFAULT_Q
    R: Tuple[float, ...] = DEFAULT_R
    P1: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "Q", _diagonal(self.Q, N_X, "Q"))
        object.__setattr__(self, "R", _diagonal(self.R, N_U, "R", positive=True))
        P1 = tuple(10.0 * q for q in self.Q) if self.P1 is None else self.P1
        object.__setattr__(self, "P1", _diagonal(P1, N_X, "P1"))

    def to_dict(self) -> Dict[str, List[float]]:
        return {"Q": list(self.Q), "R": list(self.R), "P1": list(self.P1)}


@dataclass(frozen=True)
class LqrWeights:
    """Regularization weights of the projection feedback"""
    Q: Tuple[float, ...]
    R: Tuple[float, ...]
    P1: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        n = len(self.Q)
        object.__setattr__(self, "Q", _diagonal(self.Q, n, "lqr_reg.Q"))
        object.__setattr__(self, "R", _diagonal(self.R, len(self.R), "lqr_reg.R", positive=True))
        P1 = self.Q if self.P1 is None else self.P1
        object.__setattr__(self, "P1", _diagonal(P1, n, "lqr_reg.P1"))

    @classmethod
    def default(cls) -> "LqrWeights":
        return cls(PROJECTION_Q, PROJECTION_R)

    def to_dict(self) -> Dict[str, List[float]]:
        return {"Q": list(self.Q), "R": list(self.R), "P1": list(self.P1)}


@dataclass(frozen=True)
class SolverOptions:
    max_newton: int = 100
    grad_tol: float = 1e-6
    step_tol: float = 1e-6
    barrier: BarrierParams = field(default_factory=BarrierParams)
    lqr_reg: Optional[LqrWeights] = None
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_regularization: float = 1e6

    def __post_init__(self):
        if self.max_newton < 1:
            raise ValueError("max_newton must be at least 1")
        if not (self.grad_tol > 0 and self.step_tol > 0):
            raise ValueError("solver tolerances must be positive")
        if not 0 < self.armijo < 0.5:
            raise ValueError("armijo parameter must lie in (0, 0.5)")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")

    def regularization(self) -> LqrWeights:
        return self.lqr_reg if self.lqr_reg is not None else LqrWeights.default()

    def to_dict(self) -> dict:
        return {
            "max_newton": self.max_newton, "grad_tol": self.grad_tol, "step_tol": self.step_tol,
            "barrier": self.barrier.to_dict(),
            "lqr_reg": None if self.lqr_reg is None else self.lqr_reg.to_dict(),
        }


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    barrier: float
    decrement: float
    step: float
    regularization: float = 0.0

    def to_dict(self) -> dict:
        return {"iteration": self.iteration, "cost": self.cost, "barrier": self.barrier,
                "grad_norm": self.decrement, "step": self.step, "regularization": self.regularization}


@dataclass
class StageRecord:
    index: int
    mu: float
    delta: float
    iterations: List[IterationRecord] = field(default_factory=list)
    status: str = "running"
    final_cost: float = float("nan")
    final_decrement: float = float("nan")

    @property
    def decrement_ratios(self) -> List[float]:
        """Ratios of successive Newton decrements over the last three iterations"""
        dec = [r.decrement for r in self.iterations] + [self.final_decrement]
        dec = [d for d in dec if np.isfinite(d)][-4:]
        return [b / a for a, b in zip(dec, dec[1:]) if a > 0]

    def to_dict(self) -> dict:
        return {"stage": self.index, "barrier_mu": self.mu, "barrier_delta": self.delta, "status": self.status,
                "final_cost": self.final_cost, "final_grad_norm": self.final_decrement,
                "decrement_ratios": self.decrement_ratios,
                "iterations": [dict(r.to_dict(), barrier_mu=self.mu) for r in self.iterations]}


@dataclass
class SolverReport:
    stages: List[StageRecord] = field(default_factory=list)
    status: str = "running"
    final_cost: float = float("nan")
    max_defect: float = float("nan")
    max_violation: float = float("nan")
    rendezvous_time: Optional[float] = None
    predicted_time: Optional[float] = None
    activity: List[dict] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return sum(len(s.iterations) for s in self.stages)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "final_cost": self.final_cost,
            "max_defect": self.max_defect,
            "max_violation": self.max_violation,
            "rendezvous_time": self.rendezvous_time,
            "predicted_time": self.predicted_time,
            "stages": [s.to_dict() for s in self.stages],
            "activity": self.activity,
        }


class DynamicsModel(ABC):
    """Discrete model seen by the optimizer: RK4 step map plus optional normalized constraints"""
    n_x: int = N_X
    n_u: int = N_U
    n_constraints: int = 0

    @abstractmethod
    def rhs(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Continuous right-hand side, state along axis 0"""
        pass

    def step(self, x: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
        return rk4_step(self.rhs, x, u, h)

    def step_jacobians(self, xs: np.ndarray, us: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
        """Step-map Jacobians at every node: A (N, n, n), B (N, n, m)"""
        return complex_step_jacobian(lambda x, u: self.step(x, u, h), xs, us)

    def constraints(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        """Normalized residuals (N, n_constraints)"""
        return np.zeros((xs.shape[0], 0))

    def constraint_jacobians(self, xs: np.ndarray, us: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n = xs.shape[0]
        return np.zeros((n, 0, self.n_x)), np.zeros((n, 0, self.n_u))

    def constraint_curvature(self, xs: np.ndarray, us: np.ndarray, multipliers: np.ndarray) -> np.ndarray:
        """Hessian of sum_i multipliers_i * c_i with respect to (x, u) at every node"""
        n = self.n_x + self.n_u
        return np.zeros((xs.shape[0], n, n))

    def defect(self, traj: Curve) -> np.ndarray:
        predicted = self.step(traj.states[:-1].T, traj.inputs[:-1].T, traj.h).T
        return np.max(np.abs(predicted - traj.states[1:]), axis=1)


class CoupledModel(DynamicsModel):
    """Coupled UAV-UGV error dynamics with the full constraint set"""

    def __init__(self, wind: Wind, path: Path, params: VehicleParams = ZAGI, limits: Limits = DEFAULT_LIMITS,
                 fd_step: float = 1e-5):
        self.wind = wind
        self.path = path
        self.params = params
        self.limits = limits
        self.fd_step = fd_step
        self.cset = ConstraintSet(wind, path, params, limits)
        self.n_constraints = len(self.cset)

    def rhs(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return coupled_rhs(x, u, self.wind, self.path, self.params)

    def constraints(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return self.cset.normalized(xs.T, us.T).T

    def constraint_jacobians(self, xs: np.ndarray, us: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return complex_step_jacobian(self.cset.normalized, xs, us)

    def constraint_curvature(self, xs: np.ndarray, us: np.ndarray, multipliers: np.ndarray) -> np.ndarray:
        z = np.concatenate([xs, us], axis=1)
        n = self.n_x

        def weighted_gradient(zz):
            cx, cu = complex_step_jacobian(self.cset.normalized, zz[:, :n], zz[:, n:])
            return np.einsum("ki,kij->kj", multipliers, np.concatenate([cx, cu], axis=2))

        hess = np.empty((z.shape[0], z.shape[1], z.shape[1]))
        for j in range(z.shape[1]):
            zp, zm = z.copy(), z.copy()
            zp[:, j] += self.fd_step
            zm[:, j] -= self.fd_step
            if j == S_G:
                # one-sided at the path ends
                zp[:, j] = np.minimum(zp[:, j], self.path.total_length)
                zm[:, j] = np.maximum(zm[:, j], 0.0)
            spacing = (zp[:, j] - zm[:, j])[:, None]
            hess[:, :, j] = (weighted_gradient(zp) - weighted_gradient(zm)) / spacing
        return 0.5 * (hess + hess.transpose(0, 2, 1))


class LinearModel(DynamicsModel):
    """Frozen linear dynamics x' = A x + B u without constraints"""

    def __init__(self, A: np.ndarray, B: np.ndarray):
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.n_x, self.n_u = self.B.shape

    def rhs(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A @ x + self.B @ u


@dataclass(frozen=True)
class GainSchedule:
    """Projection feedback K_k (N+1, m, n) and the Riccati matrices P_k behind it"""
    K: np.ndarray
    P: np.ndarray

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.P - self.P.transpose(0, 2, 1))))


@dataclass(frozen=True)
class SearchDirection:
    z: np.ndarray
    v: np.ndarray
    slope: float
    regularization: float = 0.0

    @property
    def decrement(self) -> float:
        return float(np.sqrt(max(-self.slope, 0.0)))


def trapezoid_weights(n_nodes: int, h: float) -> np.ndarray:
    w = np.full(n_nodes, h)
    w[0] = w[-1] = 0.5 * h
    return w


def riccati_gains(A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray, P_final: np.ndarray,
                  t: Optional[np.ndarray] = None, blowup: float = 1e12) -> GainSchedule:
    """Backward discrete Riccati sweep over the step Jacobians A (N, n, n), B (N, n, m)"""
    n_steps, n, m = B.shape
    K = np.zeros((n_steps + 1, m, n))
    P = np.empty((n_steps + 1, n, n))
    P[-1] = P_final
    for k in range(n_steps - 1, -1, -1):
        Pn = P[k + 1]
        BtP = B[k].T @ Pn
        try:
            K[k] = np.linalg.solve(R + BtP @ B[k], BtP @ A[k])
        except np.linalg.LinAlgError as e:
            raise SolverError(f"Riccati sweep singular: {e}", time=None if t is None else float(t[k])) from e
        Pk = Q + A[k].T @ Pn @ (A[k] - B[k] @ K[k])
        Pk = 0.5 * (Pk + Pk.T)
        if not np.all(np.isfinite(Pk)) or np.max(np.abs(Pk)) > blowup:
            raise SolverError("Riccati sweep blew up", time=None if t is None else float(t[k]))
        P[k] = Pk
    K[-1] = K[-2] if n_steps > 0 else 0.0
    return GainSchedule(K=K, P=P)


def lqr_gain(model: DynamicsModel, traj: Trajectory, reg: LqrWeights,
             jacobians: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> GainSchedule:
    """Time-varying LQR gains about traj with regularization weights scaled by the grid step"""
    h = traj.h
    A, B = jacobians if jacobians is not None else model.step_jacobians(traj.states[:-1], traj.inputs[:-1], h)
    return riccati_gains(A, B, np.diag(reg.Q) * h, np.diag(reg.R) * h, np.diag(reg.P1), traj.t)


def project(model: DynamicsModel, curve: Curve, gains: GainSchedule, x0: Optional[np.ndarray] = None) -> Trajectory:
    """Close the feedback u = mu + K (alpha - x) around the curve (alpha, mu) and integrate"""
    t, alpha, mu = curve.t, curve.states, curve.inputs
    h = curve.h
    xs = np.empty_like(alpha)
    us = np.empty_like(mu)
    xs[0] = alpha[0] if x0 is None else x0
    for k in range(t.size):
        us[k] = mu[k] + gains.K[k] @ (alpha[k] - xs[k])
        if k + 1 == t.size:
            break
        try:
            xs[k + 1] = model.step(xs[k], us[k], h)
        except DomainError as e:
            raise DomainError(f"projection failed: {e}", time=float(t[k])) from e
        except RangeError as e:
            raise RangeError(f"projection failed at t={t[k]:.3f}s: {e}") from e
    return Trajectory(t, xs, us, ugv0=curve.ugv0)


def _weight_arrays(weights: Weights) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.asarray(weights.Q), np.asarray(weights.R), np.asarray(weights.P1)


def cost_terms(model: DynamicsModel, curve: Curve, desired: Curve, weights: Weights,
               mu: float = 0.0, delta: float = 0.05) -> Dict[str, float]:
    """Trapezoidal tracking, barrier and terminal cost components"""
    if curve.states.shape != desired.states.shape:
        raise ValueError("curve and desired curve live on different grids")
    Q, R, P1 = _weight_arrays(weights)
    w = trapezoid_weights(curve.n_nodes, curve.h)
    dx = curve.states - desired.states
    du = curve.inputs - desired.inputs
    state = 0.5 * float(np.sum(w * np.sum(Q * dx ** 2, axis=1)))
    inputs = 0.5 * float(np.sum(w * np.sum(R * du ** 2, axis=1)))
    terminal = 0.5 * float(np.sum(P1 * dx[-1] ** 2))
    barrier = 0.0
    if mu > 0 and model.n_constraints:
        residuals = model.constraints(curve.states, curve.inputs)
        barrier = mu * float(np.sum(w * np.sum(relaxed_barrier(-residuals, delta), axis=1)))
    return {"state": state, "input": inputs, "terminal": terminal, "barrier": barrier,
            "total": state + inputs + terminal + barrier}


def total_cost(model: DynamicsModel, curve: Curve, desired: Curve, weights: Weights,
               mu: float = 0.0, delta: float = 0.05) -> float:
    return cost_terms(model, curve, desired, weights, mu, delta)["total"]


def _psd_part(H: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(H)
    return (vecs * np.maximum(vals, 0.0)[:, None, :]) @ vecs.transpose(0, 2, 1)


def local_model(model: DynamicsModel, traj: Trajectory, desired: Curve, weights: Weights,
                mu: float = 0.0, delta: float = 0.05) -> Tuple[np.ndarray, np.ndarray]:
    """Per-node gradient (N+1, n+m) and positive semidefinite Hessian (N+1, n+m, n+m) of the cost"""
    n, m = traj.states.shape[1], traj.inputs.shape[1]
    Q, R, P1 = _weight_arrays(weights)
    w = trapezoid_weights(traj.n_nodes, traj.h)
    dx = traj.states - desired.states
    du = traj.inputs - desired.inputs

    grad = np.concatenate([dx * Q, du * R], axis=1) * w[:, None]
    H = np.zeros((traj.n_nodes, n + m, n + m))
    H[:, :n, :n] = np.diag(Q)
    H[:, n:, n:] = np.diag(R)
    H *= w[:, None, None]

    if mu > 0 and model.n_constraints:
        xs, us = traj.states, traj.inputs
        residuals = model.constraints(xs, us)
        _, g, hb = barrier_cost(residuals, mu, delta)
        cx, cu = model.constraint_jacobians(xs, us)
        C = np.concatenate([cx, cu], axis=2)
        grad += w[:, None] * np.einsum("ki,kij->kj", g, C)
        Hb = np.einsum("kij,ki,kil->kjl", C, hb, C) + model.constraint_curvature(xs, us, g)
        H += w[:, None, None] * _psd_part(Hb)

    grad[-1, :n] += P1 * dx[-1]
    H[-1, :n, :n] += np.diag(P1)
    return grad, H


def solve_lq(A: np.ndarray, B: np.ndarray, grad: np.ndarray, H: np.ndarray, reg: float = 0.0) -> SearchDirection:
    """Minimize sum_k grad_k . (z_k, v_k) + 1/2 (z_k, v_k)' H_k (z_k, v_k) s.t. z_{k+1} = A_k z_k + B_k v_k, z_0 = 0"""
    n_nodes = grad.shape[0]
    n, m = B.shape[1], B.shape[2]
    eye_x, eye_u = reg * np.eye(n), reg * np.eye(m)
    K = np.empty((n_nodes, m, n))
    kff = np.empty((n_nodes, m))
    P = np.zeros((n, n))
    p = np.zeros(n)
    for k in range(n_nodes - 1, -1, -1):
        Hk = H[k]
        Qxx = Hk[:n, :n] + eye_x
        Quu = Hk[n:, n:] + eye_u
        Qux = Hk[n:, :n]
        qx = grad[k, :n]
        qu = grad[k, n:]
        if k < n_nodes - 1:
            PA = P @ A[k]
            PB = P @ B[k]
            Qxx = Qxx + A[k].T @ PA
            Quu = Quu + B[k].T @ PB
            Qux = Qux + B[k].T @ PA
            qx = qx + A[k].T @ p
            qu = qu + B[k].T @ p
        factor = cho_factor(Quu)
        K[k] = -cho_solve(factor, Qux)
        kff[k] = -cho_solve(factor, qu)
        P = Qxx + Qux.T @ K[k]
        P = 0.5 * (P + P.T)
        p = qx + Qux.T @ kff[k]

    z = np.zeros((n_nodes, n))
    v = np.empty((n_nodes, m))
    for k in range(n_nodes):
        v[k] = K[k] @ z[k] + kff[k]
        if k + 1 < n_nodes:
            z[k + 1] = A[k] @ z[k] + B[k] @ v[k]
    slope = float(np.sum(grad[:, :n] * z) + np.sum(grad[:, n:] * v))
    return SearchDirection(z=z, v=v, slope=slope, regularization=reg)


def search_direction(model: DynamicsModel, traj: Trajectory, desired: Curve, weights: Weights,
                     mu: float = 0.0, delta: float = 0.05,
                     jacobians: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                     max_regularization: float = 1e6) -> SearchDirection:
    """Descent direction from the discrete LQ subproblem about traj, Levenberg-regularized when needed"""
    A, B = jacobians if jacobians is not None else model.step_jacobians(traj.states[:-1], traj.inputs[:-1], traj.h)
    grad, H = local_model(model, traj, desired, weights, mu, delta)
    reg = 0.0
    while True:
        try:
            direction = solve_lq(A, B, grad, H, reg * traj.h)
            if direction.slope <= 0.0:
                return direction
            logger.debug("LQ direction not descending (slope=%.3e), regularizing", direction.slope)
        except LinAlgError:
            logger.debug("LQ subproblem not positive definite at regularization %.1e", reg)
        reg = 1e-8 if reg == 0.0 else reg * 100.0
        if reg > max_regularization:
            raise SolverError("no descent direction found at maximal regularization")


def perturb(traj: Trajectory, direction: SearchDirection, step: float) -> Curve:
    return Curve(traj.t, traj.states + step * direction.z, traj.inputs + step * direction.v, ugv0=traj.ugv0)


def rendezvous_time(traj: Curve, t0: float, tol: float = RENDEZVOUS_TOL) -> Optional[float]:
    """Maneuver duration until -e_z first drops to tol, or None if the UAV never gets there"""
    after = (traj.t > t0) & (-traj.states[:, 2] <= tol)
    hits = np.flatnonzero(after)
    if hits.size == 0:
        return None
    return float(traj.t[hits[0]] - t0)


def _line_search(model, traj, direction, gains, desired, weights, mu, delta, cost, options):
    step = 1.0
    while step >= options.step_tol:
        try:
            candidate = project(model, perturb(traj, direction, step), gains, traj.states[0])
            new_cost = total_cost(model, candidate, desired, weights, mu, delta)
        except (DomainError, RangeError) as e:
            logger.debug("Line search step %.3g left the model domain: %s", step, e)
            new_cost = np.inf
            candidate = None
        if np.isfinite(new_cost) and new_cost <= cost + options.armijo * step * direction.slope:
            return candidate, new_cost, step
        logger.debug("Line search rejected step %.3g (cost %.6g vs %.6g)", step, new_cost, cost)
        step *= options.backtrack
    return None, cost, 0.0


def optimize(model: DynamicsModel, initial: Trajectory, desired: Curve, weights: Weights,
             options: Optional[SolverOptions] = None, strict: bool = False) -> Tuple[Trajectory, SolverReport]:
    """Barrier-continuation Newton descent from a feasible initial trajectory"""
    options = options or SolverOptions()
    reg = options.regularization()
    barrier = options.barrier if model.n_constraints else BarrierParams(stages=1)
    report = SolverReport()
    traj = initial
    hit_cap = False

    for index in range(barrier.stages):
        mu, delta = barrier.stage(index) if model.n_constraints else (0.0, barrier.delta)
        stage = StageRecord(index=index, mu=mu, delta=delta)
        report.stages.append(stage)
        cost = total_cost(model, traj, desired, weights, mu, delta)
        logger.info("Barrier stage %d: mu=%.3e delta=%.3e cost=%.6g", index, mu, delta, cost)

        for iteration in range(options.max_newton + 1):
            jac = model.step_jacobians(traj.states[:-1], traj.inputs[:-1], traj.h)
            direction = search_direction(model, traj, desired, weights, mu, delta, jac,
                                         options.max_regularization)
            stage.final_decrement = direction.decrement
            if -direction.slope <= options.grad_tol * (1.0 + abs(cost)):
                stage.status = "converged"
                break
            if iteration == options.max_newton:
                stage.status = "max_iterations"
                hit_cap = True
                break

            gains = lqr_gain(model, traj, reg, jac)
            candidate, new_cost, step = _line_search(model, traj, direction, gains, desired, weights,
                                                     mu, delta, cost, options)
            if candidate is None:
                stage.status = "stalled"
                logger.info("Stage %d: line search stalled at decrement %.3e", index, direction.decrement)
                break
            if new_cost > cost:
                raise SolverError(f"cost increased within barrier stage {index}: {cost:.12g} -> {new_cost:.12g}")

            traj, cost = candidate, new_cost
            terms = cost_terms(model, traj, desired, weights, mu, delta)
            stage.iterations.append(IterationRecord(iteration=iteration, cost=cost, barrier=terms["barrier"],
                                                    decrement=direction.decrement, step=step,
                                                    regularization=direction.regularization))
            logger.info("Stage %d iter %d: cost=%.6g decrement=%.3e step=%.3g",
                        index, iteration, cost, direction.decrement, step)
        stage.final_cost = cost

    report.final_cost = stage.final_cost
    report.max_defect = float(np.max(model.defect(traj))) if traj.n_nodes > 1 else 0.0
    infeasible = False
    if model.n_constraints:
        report.max_violation = float(np.max(model.constraints(traj.states, traj.inputs)))
        infeasible = report.max_violation > barrier.delta_final
    report.status = overall_status(report.stages, infeasible)

    if report.status == "converged":
        logger.info("SUCCESS: optimizer finished after %d iterations, cost=%.6g", report.iterations,
                    report.final_cost)
    elif report.status == "stalled":
        logger.warning("WARNING: line search stalled in stage(s) %s",
                       ", ".join(str(s.index) for s in report.stages if s.status == "stalled"))
    elif report.status == "max_iterations":
        logger.warning("WARNING: Newton iteration cap reached (%d per stage)", options.max_newton)
    if infeasible:
        logger.warning("WARNING: final trajectory violates a constraint by %.3e normalized units (allowed %.1e)",
                       report.max_violation, barrier.delta_final)
    if hit_cap and strict:
        raise MaxIterations("Newton iteration cap reached", trajectory=traj, report=report)
    return traj, report


def overall_status(stages: List[StageRecord], infeasible: bool = False) -> str:
    """Run status from its stages: stalled, then max_iterations, then infeasible, else converged"""
    for status in ("stalled", "max_iterations"):
        if any(stage.status == status for stage in stages):
            return status
    return "infeasible" if infeasible else "converged"


def solve(scenario: "Scenario", weights: Optional[Weights] = None, options: Optional[SolverOptions] = None,
          strict: bool = False) -> Tuple[Trajectory, SolverReport]:
    """Rendezvous trajectory for a scenario: desired curve, initial trajectory, then optimize"""
    spec = scenario.spec.validate(scenario.limits)
    weights = weights or scenario.weights
    options = options or scenario.options
    grid = horizon_grid(spec, scenario.step, scenario.params, scenario.limits)
    desired = desired_curve(spec, scenario.working_path, scenario.wind, scenario.params, scenario.limits,
                            grid=grid)
    initial = initial_trajectory(spec, scenario.working_path, scenario.wind, scenario.params, scenario.limits,
                                 uav_pose=scenario.uav_pose, grid=grid)
    model = CoupledModel(scenario.wind, scenario.working_path, scenario.params, scenario.limits)
    logger.info("Solving %s with k_aggr=%.2f over %d nodes", scenario.name, spec.k_aggr, grid.size)

    try:
        traj, report = optimize(model, initial, desired, weights, options, strict=strict)
    except MaxIterations as e:
        _finish_report(e.report, e.trajectory, scenario, spec)
        raise
    _finish_report(report, traj, scenario, spec)
    return traj, report


def _finish_report(report: SolverReport, traj: Trajectory, scenario: "Scenario", spec) -> None:
    report.rendezvous_time = rendezvous_time(traj, spec.t0)
    report.predicted_time = predicted_time(spec, scenario.params, scenario.limits)
    activity = constraint_report(traj, scenario.wind, scenario.working_path, scenario.params, scenario.limits)
    report.activity = activity.to_list()
