"""
Rendezvous Orchestrator with Front-Worker Architecture
Only the front ends (CLI, HTTP service) talk to users; workers return result dictionaries
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence
import logging

from artifact_store import ArtifactStore
from rendezvous import __version__
from rendezvous.scenarios import PRESETS, Scenario
from rendezvous.settings import get_settings
from workers.worker_predict import PredictWorker
from workers.worker_solve import SolveWorker
from workers.worker_validate import SUITES, ValidateWorker

logger = logging.getLogger(__name__)


def _solve_one(output_dir: str, scenario: Scenario, strict: bool, seed: Optional[int]) -> Dict[str, Any]:
    """One sweep entry; module level so it can run in a worker process"""
    worker = SolveWorker(ArtifactStore(output_dir))
    return worker.process_request({"scenario": scenario, "strict": strict}, context={"seed": seed})


class RendezvousOrchestrator:
    """
    Orchestrator over the internal workers
    - solve: one optimization with artifacts
    - predict: closed-form guidance table
    - validate: invariant suites
    """

    def __init__(self, store: ArtifactStore):
        self.store = store
        self.workers = {
            "solve": SolveWorker(store),
            "predict": PredictWorker(store),
            "validate": ValidateWorker(store),
        }
        logger.info("SUCCESS: Rendezvous Orchestrator initialized")

    def run_solve(self, scenario: Scenario, strict: bool = False, seed: Optional[int] = None,
                  run_name: Optional[str] = None) -> Dict[str, Any]:
        return self._dispatch("solve", {"scenario": scenario, "strict": strict, "run_name": run_name},
                              {"seed": seed})

    def run_predict(self, scenario: Scenario, k_values: Optional[Sequence[float]] = None) -> Dict[str, Any]:
        return self._dispatch("predict", {"scenario": scenario, "k_values": list(k_values or [])})

    def run_validate(self, fd_tol: float = 1e-5, seed: int = 0,
                     suites: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        return self._dispatch("validate", {"fd_tol": fd_tol, "seed": seed, "suites": list(suites or [])})

    def run_sweep(self, scenario: Scenario, k_values: Sequence[float], strict: bool = False,
                  seed: Optional[int] = None, max_workers: Optional[int] = None) -> Dict[str, Any]:
        """
        Independent solves for each k_aggr, written to distinct run directories,
        then sweep_summary.csv once every solve has finished
        """
        variants = [scenario.with_k(k) for k in k_values]
        max_workers = min(max_workers or get_settings().num_threads, len(variants)) or 1
        logger.info("Sweeping %s over k_aggr=%s with %d worker(s)", scenario.name,
                    ", ".join(f"{k:g}" for k in k_values), max_workers)

        if max_workers == 1:
            results = [_solve_one(self.store.output_dir, v, strict, seed) for v in variants]
        else:
            with ProcessPoolExecutor(max_workers=max_workers) as pool:
                futures = [pool.submit(_solve_one, self.store.output_dir, v, strict, seed) for v in variants]
                results = []
                for variant, future in zip(variants, futures):
                    try:
                        results.append(future.result())
                    except Exception as e:
                        logger.error("ERROR: sweep entry k_aggr=%.2f crashed: %s", variant.spec.k_aggr, e)
                        results.append({"success": False, "message": "worker process failed",
                                        "error": str(e), "k_aggr": variant.spec.k_aggr})

        rows = [self._summary_row(variant, result) for variant, result in zip(variants, results)]
        summary_path = self.store.write_sweep_summary(rows)
        failed = [row["k"] for row, result in zip(rows, results) if not self._converged(result)]
        message = (f"{len(rows)} solve(s) finished" if not failed
                   else f"{len(failed)} of {len(rows)} solve(s) failed or did not converge")
        return {"success": not failed, "message": message, "results": results, "rows": rows,
                "summary_file": summary_path, "failed": failed, "error": ""}

    @staticmethod
    def _converged(result: Dict[str, Any]) -> bool:
        return bool(result.get("success")) and result.get("status") == "converged"

    @staticmethod
    def _summary_row(variant: Scenario, result: Dict[str, Any]) -> Dict[str, Any]:
        summary = result.get("summary") or {}
        return {
            "k": variant.spec.k_aggr,
            "T_pred": summary.get("predicted_time"),
            "T_achieved": summary.get("rendezvous_time"),
            "iterations": summary.get("iterations"),
            "worst_residual": summary.get("worst_residual"),
        }

    def _dispatch(self, name: str, request: Dict[str, Any],
                  context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        try:
            return self.workers[name].process_request(request, context=context)
        except Exception as e:
            logger.exception("ERROR: %s worker crashed", name)
            return {"success": False, "message": f"internal error in {name}", "error": str(e)}

    def get_system_status(self) -> Dict[str, Any]:
        """Status of the workers and the artifact store"""
        return {
            "tool_version": __version__,
            "workers": {name: type(worker).__name__ for name, worker in self.workers.items()},
            "scenarios": list(PRESETS),
            "validation_suites": list(SUITES),
            "artifact_store": {"output_dir": self.store.output_dir, "runs": len(self.store.list_runs())},
            "num_threads": get_settings().num_threads,
        }
