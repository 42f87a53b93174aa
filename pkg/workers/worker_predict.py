"""
Predict Worker - Internal only
Closed-form guidance quantities per aggressiveness index, no solver involved
"""
from typing import Any, Dict, List, Optional
import logging

import numpy as np

from rendezvous.errors import RendezvousError
from rendezvous.guidance import descent_thrust, desired_profiles
from rendezvous.models import Limits, VehicleParams, effective_roll_limit, trim_envelope
from rendezvous.scenarios import Scenario
from workers.base_worker import BaseWorker

logger = logging.getLogger(__name__)

TABLE_HEADER = ("k", "gamma_d [deg]", "s_r [m]", "T_r_d [s]", "u1_descent [N]", "roll_max [deg]",
                "v_a_trim_min [m/s]")
TABLE_KEYS = ("k", "gamma_d_deg", "s_r", "T_r_d", "u1_descent", "roll_limit_deg", "v_a_trim_min")

# airspeed samples across [v_min, v_max] for the descent trim check
ENVELOPE_SAMPLES = 81


def slowest_trim_airspeed(gamma_d: float, params: VehicleParams, limits: Limits) -> Optional[float]:
    """Lowest sampled airspeed at which the desired descent trims with nonnegative thrust"""
    airspeeds = np.linspace(limits.v_min, limits.v_max, ENVELOPE_SAMPLES)
    feasible = trim_envelope(airspeeds, [gamma_d], params)["feasible"][:, 0]
    if not np.any(feasible):
        return None
    return float(airspeeds[np.argmax(feasible)])


class PredictWorker(BaseWorker):
    """Worker that tabulates desired descent angle, rendezvous space and time"""

    name = "predict"

    def process_request(self, request: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        scenario: Scenario = request["scenario"]
        k_values: List[float] = request.get("k_values") or [scenario.spec.k_aggr]
        rows = []
        try:
            for k in k_values:
                spec = scenario.with_k(k).spec.validate(scenario.limits)
                profiles = desired_profiles(spec, scenario.params, scenario.limits)
                rows.append({
                    "k": float(k),
                    "gamma_d_deg": float(np.rad2deg(profiles.gamma_d)),
                    "s_r": profiles.s_r,
                    "T_r_d": profiles.T_r_d,
                    "u1_descent": descent_thrust(spec, scenario.params, scenario.limits),
                    "roll_limit_deg": float(np.rad2deg(effective_roll_limit(profiles.gamma_d, scenario.limits))),
                    "v_a_trim_min": slowest_trim_airspeed(profiles.gamma_d, scenario.params, scenario.limits),
                })
        except RendezvousError as e:
            return self.failure(str(e), e)

        return {"success": True, "message": self.format_table(rows), "rows": rows}

    @staticmethod
    def format_table(rows: List[Dict[str, Any]]) -> str:
        lines = ["  ".join(f"{h:>18}" for h in TABLE_HEADER)]
        for row in rows:
            cells = ["-" if row[key] is None else f"{row[key]:.4f}" for key in TABLE_KEYS]
            lines.append("  ".join(f"{cell:>18}" for cell in cells))
        return "\n".join(lines)
