"""
Validate Worker - Internal only
Runs the model invariant suites and reports pass/fail per suite
"""
from typing import Any, Callable, Dict, List, Optional
import logging

import numpy as np

from rendezvous.constraints import barrier_cost, relaxed_barrier, relaxed_barrier_prime
from rendezvous.error_space import (CoupledInput, CoupledState, central_difference_jacobian, coupled_rhs,
                                    equivalence_check, error_to_inertial, inertial_to_error, integrate, linearize,
                                    time_grid)
from rendezvous.errors import RendezvousError
from rendezvous.models import UgvState, Wind, level_trim_for_ground_speed, trim_descent, trim_level, wind_triangle
from rendezvous.path import Path, Segment, straight_path
from rendezvous.scenarios import FIELD_WIND
from workers.base_worker import BaseWorker

logger = logging.getLogger(__name__)


def check_trim_fixed_point(rng, fd_tol) -> Dict[str, Any]:
    """Level trim in calm air and in wind holds every error state for 10 s"""
    worst = 0.0
    for wind, chi in ((Wind(), 0.0), (FIELD_WIND, np.pi / 4)):
        path = straight_path(1000.0, chi0=chi)
        u1, u3, _ = level_trim_for_ground_speed(18.0, chi, wind)
        x0 = CoupledState(0.0, 0.0, -50.0, 0.0, 0.0, 0.0, 0.0, 18.0, 0.0)
        t = time_grid(10.0, 0.05)
        traj = integrate(x0, CoupledInput(u1, 0.0, u3, 0.0), t, wind, path)
        drift = np.abs(traj.states[:, :8] - x0.to_array()[:8]).max()
        drift = max(drift, np.abs(traj.states[:, 8] - 18.0 * t).max())
        worst = max(worst, float(drift))
    return {"value": worst, "tolerance": 1e-6, "passed": worst < 1e-6}


def check_wind_triangle(rng, fd_tol) -> Dict[str, Any]:
    """Air velocity rebuilt from (v_a, gamma_a, psi) plus wind gives the ground velocity back"""
    v = rng.uniform(12.0, 20.0, 200)
    chi = rng.uniform(-np.pi, np.pi, 200)
    gamma = rng.uniform(-0.1, 0.1, 200)
    wind = Wind(-4.33, 2.5, 0.3)
    air = wind_triangle(v, chi, gamma, wind)
    ground = np.stack([v * np.cos(gamma) * np.cos(chi), v * np.cos(gamma) * np.sin(chi), -v * np.sin(gamma)])
    rebuilt = np.stack([air.v_a * np.cos(air.gamma_a) * np.cos(air.psi_A) + wind.w_x,
                        air.v_a * np.cos(air.gamma_a) * np.sin(air.psi_A) + wind.w_y,
                        -air.v_a * np.sin(air.gamma_a) + wind.w_z])
    err = float(np.abs(rebuilt - ground).max())
    return {"value": err, "tolerance": 1e-9, "passed": err < 1e-9}


def check_transform_roundtrip(rng, fd_tol) -> Dict[str, Any]:
    """error_to_inertial and inertial_to_error are exact inverses"""
    worst = 0.0
    for _ in range(1000):
        ugv = UgvState(*rng.uniform(-100.0, 100.0, 2), 15.0, rng.uniform(-np.pi, np.pi))
        p = rng.uniform(-100.0, 100.0, 3)
        worst = max(worst, float(np.abs(error_to_inertial(inertial_to_error(p, ugv), ugv) - p).max()))
    return {"value": worst, "tolerance": 1e-12, "passed": worst < 1e-12}


def _perturbed_state(rng) -> CoupledState:
    return CoupledState(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-60, -20), rng.uniform(-1, 1),
                        rng.uniform(-0.03, 0.03), rng.uniform(-0.1, 0.1), rng.uniform(-0.2, 0.2),
                        rng.uniform(15, 18), rng.uniform(0, 20))


def _trim_input(rng, v: float = 17.0) -> CoupledInput:
    u1, u3 = trim_level(v)
    return CoupledInput(u1 + rng.uniform(-0.1, 0.1), rng.uniform(-0.02, 0.02), u3 + rng.uniform(-0.02, 0.02),
                        rng.uniform(-0.3, 0.3))


def check_equivalence_straight(rng, fd_tol) -> Dict[str, Any]:
    """Coupled model against the transformed decoupled models, straight road, 10 s"""
    dev = equivalence_check(_perturbed_state(rng), _trim_input(rng), 10.0, FIELD_WIND,
                            straight_path(2000.0, chi0=np.pi / 4))
    return {"value": dev, "tolerance": 1e-6, "passed": dev < 1e-6}


def check_equivalence_turn(rng, fd_tol) -> Dict[str, Any]:
    """Same comparison on a constant-curvature road (radius 35 m), 5 s"""
    arc = Path((Segment(600.0, 1.0 / 35.0),), 0.0, 0.0, 0.0)
    dev = equivalence_check(_perturbed_state(rng), _trim_input(rng), 5.0, FIELD_WIND, arc)
    return {"value": dev, "tolerance": 1e-6, "passed": dev < 1e-6}


def check_linearization(rng, fd_tol) -> Dict[str, Any]:
    """Complex-step Jacobians against central finite differences"""
    path = Path((Segment(600.0, 1.0 / 35.0),), 0.0, 0.0, 0.0)
    worst = 0.0
    for _ in range(5):
        x, u = _perturbed_state(rng), _trim_input(rng)
        A, B = linearize(x, u, FIELD_WIND, path)
        A_fd, B_fd = central_difference_jacobian(
            lambda xx, uu: coupled_rhs(xx, uu, FIELD_WIND, path), x.to_array(), u.to_array())
        for exact, approx in ((A, A_fd), (B, B_fd)):
            # entries below the floor are compared absolutely
            scale = np.maximum(np.abs(exact), 1e-2)
            worst = max(worst, float(np.max(np.abs(exact - approx) / scale)))
    return {"value": worst, "tolerance": fd_tol, "passed": worst < fd_tol}


def check_barrier(rng, fd_tol) -> Dict[str, Any]:
    """Relaxed barrier glues C1 at delta and its derivatives match finite differences"""
    worst_glue = 0.0
    for delta in (0.5, 0.1, 0.05, 1e-3):
        below = np.nextafter(delta, 0.0)
        worst_glue = max(worst_glue,
                         abs(float(relaxed_barrier(below, delta) - relaxed_barrier(delta, delta))),
                         abs(float(relaxed_barrier_prime(below, delta) - relaxed_barrier_prime(delta, delta))))
    worst_fd = 0.0
    eps = 1e-6
    for c in rng.uniform(-2.0, 0.5, 50):
        _, g, hs = barrier_cost(np.array([c]), 0.7, 0.1)
        plus = barrier_cost(np.array([c + eps]), 0.7, 0.1)
        minus = barrier_cost(np.array([c - eps]), 0.7, 0.1)
        g_fd = (plus[0] - minus[0]) / (2 * eps)
        h_fd = (plus[1][0] - minus[1][0]) / (2 * eps)
        worst_fd = max(worst_fd, abs(g[0] - g_fd) / max(abs(g[0]), 1.0), abs(hs[0] - h_fd) / max(abs(hs[0]), 1.0))
    passed = worst_glue < 1e-12 and worst_fd < fd_tol
    return {"value": max(worst_glue, worst_fd), "tolerance": fd_tol, "passed": passed,
            "detail": f"gluing {worst_glue:.2e}, derivatives {worst_fd:.2e}"}


def check_rk4_order(rng, fd_tol) -> Dict[str, Any]:
    """Endpoint error ratio of a banked trim descent under step halving, roll rate held piecewise constant"""
    v_a, gamma = 20.0, -0.05
    u1, u3 = trim_descent(v_a, gamma)
    x0 = CoupledState(0.0, 0.0, -50.0, 0.0, gamma, 0.0, 0.3, 18.0, 0.0)
    path = straight_path(2000.0)

    def held(t):
        # switches every 0.8 s, on every grid below
        flip = int(np.floor(t / 0.8 + 1e-9)) % 2
        return np.array([u1, 0.02 if flip else -0.02, u3, 0.0])

    ends = {}
    for h in (0.4, 0.2, 0.05):
        traj = integrate(x0, held, time_grid(10.0, h), Wind(), path)
        ends[h] = traj.states[-1]
    e1 = np.abs(ends[0.4] - ends[0.05]).max()
    e2 = np.abs(ends[0.2] - ends[0.05]).max()
    order = float(np.log2(e1 / e2))
    return {"value": order, "tolerance": 3.7, "passed": order >= 3.7}


SUITES: Dict[str, Callable[[np.random.Generator, float], Dict[str, Any]]] = {
    "trim_fixed_point": check_trim_fixed_point,
    "wind_triangle": check_wind_triangle,
    "transform_roundtrip": check_transform_roundtrip,
    "equivalence_straight": check_equivalence_straight,
    "equivalence_turn": check_equivalence_turn,
    "linearization_fd": check_linearization,
    "barrier": check_barrier,
    "rk4_order": check_rk4_order,
}


class ValidateWorker(BaseWorker):
    """Worker that runs the invariant suites"""

    name = "validate"

    def process_request(self, request: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        fd_tol = float(request.get("fd_tol", 1e-5))
        seed = int(request.get("seed", 0))
        names: List[str] = request.get("suites") or list(SUITES)

        unknown = [name for name in names if name not in SUITES]
        if unknown:
            return self.failure(f"unknown suite(s): {', '.join(unknown)}")

        results = []
        for name in names:
            rng = np.random.default_rng(seed)
            try:
                outcome = SUITES[name](rng, fd_tol)
            except (RendezvousError, ValueError, ArithmeticError) as e:
                outcome = {"value": float("nan"), "tolerance": float("nan"), "passed": False,
                           "detail": f"{type(e).__name__}: {e}"}
            outcome = {"suite": name, **outcome, "value": float(outcome["value"]),
                       "tolerance": float(outcome["tolerance"]), "passed": bool(outcome["passed"])}
            results.append(outcome)
            logger.info("%s: %s (value %.3e)", "PASS" if outcome["passed"] else "FAIL", name, outcome["value"])

        failed = [r["suite"] for r in results if not r["passed"]]
        message = "all suites pass" if not failed else f"failing: {', '.join(failed)}"
        return {"success": not failed, "message": message, "suites": results, "error": ", ".join(failed)}
