"""
Solve Worker - Internal only
Runs one rendezvous optimization and writes its artifacts
"""
from typing import Any, Dict, List, Optional
import logging

from rendezvous.errors import MaxIterations, RendezvousError
from rendezvous.error_space import plot_table, trajectory_table
from rendezvous.scenarios import Scenario
from rendezvous.trajopt import SolverReport, solve
from workers.base_worker import BaseWorker

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
PLOTS_FILE = "plots.csv"
REPORT_FILE = "report.json"
ACTIVITY_FILE = "activity.json"


def summarize(report: SolverReport) -> Dict[str, Any]:
    """Summary metrics recorded in the manifest and the sweep table"""
    return {
        "status": report.status,
        "rendezvous_time": report.rendezvous_time,
        "predicted_time": report.predicted_time,
        "final_cost": report.final_cost,
        "iterations": report.iterations,
        "max_defect": report.max_defect,
        "worst_residual": report.max_violation,
        "active_constraints": [entry["constraint"] for entry in report.activity],
    }


class SolveWorker(BaseWorker):
    """Worker that runs the optimizer for one scenario"""

    name = "solve"

    def process_request(self, request: Dict[str, Any], context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        Solve the scenario in request["scenario"] and store the artifacts under request["run_name"]
        """
        scenario: Scenario = request["scenario"]
        run_name = request.get("run_name") or self.store.run_name(scenario.name, scenario.spec.k_aggr)
        strict = request.get("strict", False)

        try:
            traj, report = solve(scenario, strict=strict)
        except MaxIterations as e:
            traj, report = e.trajectory, e.report
        except RendezvousError as e:
            return self.failure(f"solve failed for {scenario.name} at k_aggr={scenario.spec.k_aggr}", e,
                                k_aggr=scenario.spec.k_aggr)

        try:
            directory = self.store.run_dir(run_name)
            files = self._write_artifacts(directory, scenario, traj, report)
            summary = summarize(report)
            summary["seed"] = (context or {}).get("seed")
            self.store.write_manifest(directory, scenario.to_dict(), summary, files)
        except OSError as e:
            return self.failure("could not write run artifacts", e, k_aggr=scenario.spec.k_aggr)

        if report.rendezvous_time is None:
            message = "UAV did not reach the UGV within the horizon"
        else:
            message = (f"rendezvous after {report.rendezvous_time:.2f} s "
                       f"(predicted {report.predicted_time:.2f} s)")
        logger.info("SUCCESS: %s k_aggr=%.2f: %s", scenario.name, scenario.spec.k_aggr, message)
        return {
            "success": True,
            "status": report.status,
            "message": message,
            "k_aggr": scenario.spec.k_aggr,
            "run_dir": directory,
            "files": files,
            "summary": summary,
        }

    def _write_artifacts(self, directory: str, scenario: Scenario, traj, report: SolverReport) -> List[str]:
        path = scenario.working_path
        header, rows = trajectory_table(traj, scenario.wind, path, scenario.params)
        self.store.write_csv(directory, TRAJECTORY_FILE, header, rows)
        header, rows = plot_table(traj, scenario.wind, path, scenario.params)
        self.store.write_csv(directory, PLOTS_FILE, header, rows)
        self.store.write_json(directory, REPORT_FILE, report.to_dict())
        self.store.write_json(directory, ACTIVITY_FILE, report.activity)
        return [TRAJECTORY_FILE, PLOTS_FILE, REPORT_FILE, ACTIVITY_FILE]
